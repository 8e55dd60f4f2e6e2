"""Space sizes, conditioning and build time of the sequence as the degree grows.

    python3 scripts/degree_sweep.py --shape l_prism --degrees 0..4
"""

import argparse
import time

import numpy as np

from ddr.cli import parse_degrees
from ddr.ddr2d import FaceSequence
from ddr.ddr3d import CellSequence
from ddr.geometry import load_cell
from ddr.shapes import SHAPES, shape_document
from ddr.verify import rank


def cond(G):
    ev = np.linalg.eigvalsh(G)
    return ev[-1] / ev[0]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--shape", choices=sorted(SHAPES), default="l_prism")
    ap.add_argument("--degrees", type=parse_degrees, default=parse_degrees("0..4"))
    args = ap.parse_args()

    T = load_cell(shape_document(args.shape))
    if T.dim == 2:
        print("k   |Xgrad|  |Xrot|  gap(full)  cond(grad)  cond(rot)  time (s)")
    else:
        print("k   |Xgrad|  |Xcurl|  |Xdiv|  cond(grad)  cond(curl)  cond(div)  time (s)")
    for k in args.degrees:
        t0 = time.perf_counter()
        if T.dim == 2:
            s = FaceSequence(T.faces[0], k)
            # dim Ker C - dim Im uG on the unprojected sequence
            defect = s.full_rot_layout.dim - rank(s.full_curl) - rank(s.full_uG)
            grams = (s.grad_gram, s.rot_gram)
            dt = time.perf_counter() - t0
            print(f"{k:<3} {s.n_grad:>7} {s.n_rot:>7} {defect:>10} "
                  + "  ".join(f"{cond(G):10.2e}" for G in grams) + f"  {dt:8.2f}")
        else:
            s = CellSequence(T, k)
            grams = (s.grad_gram, s.curl_gram, s.div_gram)
            dt = time.perf_counter() - t0
            print(f"{k:<3} {s.n_grad:>7} {s.n_curl:>8} {s.n_div:>7} "
                  + "  ".join(f"{cond(G):10.2e}" for G in grams) + f"  {dt:8.2f}")


if __name__ == "__main__":
    main()
