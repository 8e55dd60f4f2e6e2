"""Command-line front end.

    ddr check --shape tetra --degrees 0..3 --suite all
    ddr check --mesh cells.json --cell all --degrees 1 --format json --out report.json
    ddr dump --shape cube --degrees 1 --out matrices/
    ddr dof-tables --degrees 0..3

Exit status: 0 when every check passes, 1 when any check fails, 2 for usage
errors, missing files and malformed meshes.

Matrix files written by ``dump`` are plain text::

    # ddr-matrix 1
    # name uG
    # shape <rows> <cols>
    # rows <space> <block>:<width> ...
    # cols <space> <block>:<width> ...
    <row 0: cols values as %.17g separated by spaces>
    ...

Values use 17 significant digits, so reloading reproduces every float exactly.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import verify
from .geometry import GeometryError, load_cell, n_cells, read_mesh
from .shapes import SHAPES, shape_document

log = logging.getLogger("ddr")

ALL_SUITES = verify.SUITES


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    mesh: str | None = None
    shape: str | None = None
    cells: list[int] | None = None  # None means every cell of the mesh
    degrees: list[int] = field(default_factory=lambda: [0, 1, 2, 3])
    suites: tuple[str, ...] = ALL_SUITES
    tol: float = 1e-10
    rank_tol: float = 1e-10
    seed: int = 0
    jobs: int = 1
    out: str | None = None
    format: str = "markdown"
    dump: bool = False

    def __post_init__(self):
        if any(k < 0 for k in self.degrees):
            raise UsageError("degrees must be non-negative")
        if not self.tol > 0 or not self.rank_tol > 0:
            raise UsageError("tolerances must be positive")
        if (self.mesh is None) == (self.shape is None):
            raise UsageError("give exactly one of --mesh or --shape")

    def verify_config(self) -> verify.VerifyConfig:
        return verify.VerifyConfig(tol=self.tol, rank_tol=self.rank_tol, seed=self.seed)


# --- argument parsing ------------------------------------------------------------


def parse_degrees(text: str) -> list[int]:
    """``a..b`` (inclusive), ``a,b,c`` or a single integer."""
    try:
        if ".." in text:
            a, b = text.split("..")
            lo, hi = int(a), int(b)
            if hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad degree range {text!r}; use a..b, a,b,c or a single integer") from None


def parse_suites(values) -> tuple[str, ...]:
    names = [n for v in values for n in v.split(",") if n]
    out = []
    for n in names:
        if n == "all":
            out.extend(ALL_SUITES)
        elif n in ALL_SUITES:
            out.append(n)
        else:
            raise UsageError(f"unknown suite {n!r}; choose from {', '.join(ALL_SUITES + ('all',))}")
    return tuple(dict.fromkeys(out))


def _parse_cells(text: str | None):
    if text is None or text == "all":
        return None
    try:
        return [int(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad cell selector {text!r}") from None


def _add_common(p: argparse.ArgumentParser, degrees_default: str = "0..3"):
    src = p.add_mutually_exclusive_group()
    src.add_argument("--mesh", help="JSON mesh file")
    src.add_argument("--shape", choices=sorted(SHAPES), help="built-in test cell")
    p.add_argument("--cell", default="all", help="cell id(s) in the mesh, comma separated, or 'all'")
    p.add_argument("--degrees", type=parse_degrees, default=parse_degrees(degrees_default), help="a..b inclusive")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1, help="worker processes over (cell, degree) pairs")
    p.add_argument("--out", help="output file (check) or directory (dump); stdout when omitted")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ddr", description="Discrete de Rham sequences on polytopal cells")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="run verification suites")
    _add_common(p)
    p.add_argument("--suite", action="append", default=None,
                   help=f"one of {', '.join(ALL_SUITES)} or all (repeatable, comma separated)")
    p.add_argument("--tol", type=float, default=1e-10, help="relative tolerance for identities")
    p.add_argument("--rank-tol", type=float, default=1e-10, help="relative singular value cutoff")
    p.add_argument("--format", choices=("markdown", "json"), default="markdown")

    p = sub.add_parser("dump", help="write operator matrices with layout headers")
    _add_common(p, "1")
    p.add_argument("--rank-tol", type=float, default=1e-10)

    p = sub.add_parser("dof-tables", help="DOF counts per entity against the reference tables")
    p.add_argument("--shape", action="append", choices=sorted(verify.TABLE_SHAPES), default=None)
    p.add_argument("--degrees", type=parse_degrees, default=parse_degrees("0..3"))
    p.add_argument("--format", choices=("markdown", "json"), default="markdown")
    p.add_argument("--out")
    return parser


# --- loading -----------------------------------------------------------------------


def load_document(cfg: RunConfig) -> dict:
    if cfg.shape is not None:
        return shape_document(cfg.shape)
    path = Path(cfg.mesh)
    if not path.is_file():
        raise UsageError(f"mesh file not found: {path}")
    try:
        doc = read_mesh(path)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read mesh file {path}: {exc}") from None
    doc.setdefault("name", path.stem)
    return doc


def select_cells(doc: dict, cfg: RunConfig) -> list[int]:
    total = n_cells(doc)
    ids = list(range(total)) if cfg.cells is None else cfg.cells
    for i in ids:
        if not 0 <= i < total:
            raise UsageError(f"cell id {i} out of range (mesh has {total} cells)")
    for i in ids:
        try:
            load_cell(doc, i)
        except (GeometryError, KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"malformed mesh, cell {i}: {exc}") from None
    return ids


# --- check -------------------------------------------------------------------------


def _check_task(args):
    doc, cell_id, k, suites, vcfg, shape = args
    cell = load_cell(doc, cell_id)
    log.info("checking %s k=%d", cell.label, k)
    return verify.run_suites(cell, k, suites, vcfg, shape)


def _tasks(doc, ids, cfg: RunConfig, suites):
    vcfg = cfg.verify_config()
    return [(doc, i, k, suites, vcfg, cfg.shape) for i in ids for k in cfg.degrees]


def _map(fn, tasks, jobs: int):
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, tasks))
    return [fn(t) for t in tasks]


def cmd_check(cfg: RunConfig) -> int:
    doc = load_document(cfg)
    ids = select_cells(doc, cfg)
    results = verify.tolerance_sanity(cfg.verify_config())
    for part in _map(_check_task, _tasks(doc, ids, cfg, cfg.suites), cfg.jobs):
        results.extend(part)
    if cfg.format == "json":
        text = verify.to_json(results)
    else:
        text = verify.to_markdown(results)
        if "dof-tables" in cfg.suites:
            text += "\n" + _dof_markdown([verify.dof_table_for_cell(load_cell(doc, i), k, cfg.shape, cfg.rank_tol)
                                          for i in ids for k in cfg.degrees])
    _emit(text, cfg.out)
    n_fail = sum(not r.passed for r in results)
    print(f"{len(results) - n_fail}/{len(results)} checks passed", file=sys.stderr)
    return 0 if n_fail == 0 else 1


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


# --- dof tables ----------------------------------------------------------------------


def _dof_markdown(tables) -> str:
    lines = ["| shape | space | k | V | E | F | T | total |", "|---|---|---|---|---|---|---|---|"]
    for t in tables:
        lines.extend(t.markdown_rows())
    return "\n".join(lines) + "\n"


def cmd_dof_tables(shapes, degrees, fmt: str, out: str | None) -> int:
    tables, results = [], []
    for shape in shapes:
        cell = load_cell(shape_document(shape))
        for k in degrees:
            tables.append(verify.dof_table_for_cell(cell, k, shape))
            results += verify.run_dof_table(cell, k, shape)
    if fmt == "json":
        text = json.dumps([{"shape": t.shape, "k": t.k, "counts": t.counts, "entities": t.entities,
                            "reference": t.reference} for t in tables], indent=1)
    else:
        text = _dof_markdown(tables)
    _emit(text, out)
    n_fail = sum(not r.passed for r in results)
    for r in results:
        if not r.passed:
            print(f"mismatch {r.cell} k={r.k} {r.name}: expected {r.expected}, got {r.actual}", file=sys.stderr)
    return 0 if n_fail == 0 else 1


# --- matrix dump ----------------------------------------------------------------------


def _layout_header(layout) -> str:
    return layout.space + " " + " ".join(f"{b.name}:{b.size}" for b in layout.blocks)


def _poly_header(label: str, n: int) -> str:
    return f"{label} coeffs:{n}"


def write_matrix(path: Path, name: str, A: np.ndarray, rows: str, cols: str):
    A = np.atleast_2d(np.asarray(A, float))
    with open(path, "w") as fh:
        fh.write("# ddr-matrix 1\n")
        fh.write(f"# name {name}\n")
        fh.write(f"# shape {A.shape[0]} {A.shape[1]}\n")
        fh.write(f"# rows {rows}\n")
        fh.write(f"# cols {cols}\n")
        for row in A:
            fh.write(" ".join(f"{x:.17g}" for x in row) + "\n")


def _parse_layout(text: str):
    space, *blocks = text.split()
    return space, [(b.rsplit(":", 1)[0], int(b.rsplit(":", 1)[1])) for b in blocks]


def load_matrix(path) -> dict:
    """Reads a file written by ``write_matrix``; returns name, layouts and the array."""
    header, rows = {}, []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition(" ")
                header[key] = val
            elif line.strip():
                rows.append([float(x) for x in line.split()])
    nr, nc = (int(x) for x in header["shape"].split())
    A = np.array(rows, dtype=float).reshape(nr, nc)
    return {"name": header["name"], "rows": _parse_layout(header["rows"]),
            "cols": _parse_layout(header["cols"]), "matrix": A}


def operator_matrices(cell, k: int, rank_tol: float = 1e-10) -> list[tuple]:
    """(name, matrix, row header, column header) for every assembled operator."""
    from .polyspaces import dim_p

    if cell.dim == 2:
        from .ddr2d import FaceSequence

        s = FaceSequence(cell.faces[0], k, rank_tol=rank_tol)
        g, r = _layout_header(s.grad_layout), _layout_header(s.rot_layout)
        return [
            ("uG", s.uG, r, g),
            ("C", s.C, _poly_header(f"P{k}(F)", dim_p(k, 2)), r),
            ("full_gradient", s.full_gradient, _poly_header(f"P{k}(F)^2", 2 * dim_p(k, 2)), g),
            ("scalar_trace", s.scalar_trace, _poly_header(f"P{k + 1}(F)", dim_p(k + 1, 2)), g),
            ("tangential_trace", s.tangential_trace, _poly_header(f"P{k}(F)^2", 2 * dim_p(k, 2)), r),
            ("grad_gram", s.grad_gram, g, g),
            ("rot_gram", s.rot_gram, r, r),
        ]
    from .ddr3d import CellSequence

    s = CellSequence(cell, k, rank_tol=rank_tol)
    g, c, d = _layout_header(s.grad_layout), _layout_header(s.curl_layout), _layout_header(s.div_layout)
    pk3 = _poly_header(f"P{k}(T)^3", 3 * dim_p(k, 3))
    return [
        ("uG", s.uG, c, g),
        ("uC", s.uC, d, c),
        ("D", s.D, _poly_header(f"P{k}(T)", dim_p(k, 3)), d),
        ("full_gradient", s.full_gradient, pk3, g),
        ("full_curl", s.full_curl, pk3, c),
        ("P_grad", s.P_grad, _poly_header(f"P{k + 1}(T)", dim_p(k + 1, 3)), g),
        ("P_curl", s.P_curl, pk3, c),
        ("P_div", s.P_div, pk3, d),
        ("grad_gram", s.grad_gram, g, g),
        ("curl_gram", s.curl_gram, c, c),
        ("div_gram", s.div_gram, d, d),
    ]


def _dump_task(args):
    doc, cell_id, k, rank_tol, outdir = args
    cell = load_cell(doc, cell_id)
    written = []
    for name, A, rows, cols in operator_matrices(cell, k, rank_tol):
        path = Path(outdir) / f"{cell.label}_k{k}_{name}.txt"
        write_matrix(path, name, A, rows, cols)
        written.append(str(path))
    return written


def cmd_dump(cfg: RunConfig) -> int:
    doc = load_document(cfg)
    ids = select_cells(doc, cfg)
    outdir = Path(cfg.out or ".")
    outdir.mkdir(parents=True, exist_ok=True)
    tasks = [(doc, i, k, cfg.rank_tol, str(outdir)) for i in ids for k in cfg.degrees]
    files = [f for part in _map(_dump_task, tasks, cfg.jobs) for f in part]
    for f in sorted(files):
        print(f)
    return 0


# --- entry point -------------------------------------------------------------------------


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("DDR_LOG", "WARNING").upper(), format="%(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        if args.command == "dof-tables":
            shapes = args.shape or list(verify.TABLE_SHAPES)
            return cmd_dof_tables(shapes, args.degrees, args.format, args.out)
        cfg = RunConfig(
            mesh=args.mesh,
            shape=args.shape,
            cells=_parse_cells(args.cell),
            degrees=args.degrees,
            suites=parse_suites(args.suite or ["all"]) if args.command == "check" else (),
            tol=getattr(args, "tol", 1e-10),
            rank_tol=args.rank_tol,
            seed=args.seed,
            jobs=args.jobs,
            out=args.out,
            format=getattr(args, "format", "markdown"),
            dump=args.command == "dump",
        )
        if args.command == "check":
            return cmd_check(cfg)
        return cmd_dump(cfg)
    except (UsageError, argparse.ArgumentTypeError) as exc:
        print(f"ddr: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
