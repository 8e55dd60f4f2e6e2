"""Block layouts of discrete DOF vectors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Block:
    name: str  # e.g. "T:R", "F3:Rperp", "E5", "V2"
    entity: str  # "V", "E", "F" or "T"
    size: int


@dataclass(frozen=True)
class DofLayout:
    space: str
    blocks: tuple[Block, ...]

    @property
    def dim(self) -> int:
        return sum(b.size for b in self.blocks)

    @property
    def offsets(self) -> dict:
        out, o = {}, 0
        for b in self.blocks:
            out[b.name] = o
            o += b.size
        return out

    def slice(self, name: str) -> slice:
        o = self.offsets[name]
        return slice(o, o + self.block(name).size)

    def block(self, name: str) -> Block:
        for b in self.blocks:
            if b.name == name:
                return b
        raise KeyError(name)

    def indices(self, names) -> np.ndarray:
        return np.concatenate([np.arange(self.dim)[self.slice(n)] for n in names]) if names else np.zeros(0, int)

    def selector(self, names) -> np.ndarray:
        """Rows picking the listed blocks out of a full DOF vector."""
        idx = self.indices(names)
        S = np.zeros((len(idx), self.dim))
        S[np.arange(len(idx)), idx] = 1.0
        return S

    def split(self, vec: np.ndarray) -> dict:
        return {b.name: vec[self.slice(b.name)] for b in self.blocks}

    def entity_counts(self) -> dict:
        """DOFs attached to one entity of each class (max over entities) and the total."""
        per: dict = {}
        for b in self.blocks:
            key = (b.entity, b.name.split(":")[0])
            per[key] = per.get(key, 0) + b.size
        out = {}
        for (ent, _), n in per.items():
            out[ent] = max(out.get(ent, 0), n)
        out["total"] = self.dim
        return out

    def header(self) -> str:
        return ",".join(f"{b.name}:{b.size}" for b in self.blocks)


@dataclass(frozen=True)
class DofVector:
    layout: DofLayout
    values: np.ndarray

    def block(self, name: str) -> np.ndarray:
        return self.values[self.layout.slice(name)]
