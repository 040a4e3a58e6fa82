"""Finite probability spaces, partitions (finite sigma-fields) and random vectors."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .verdict import InputError

WEIGHT_TOL = 1e-12
MEASURABILITY_TOL = 1e-9


@dataclass(frozen=True)
class FiniteProbSpace:
    atoms: tuple
    weights: np.ndarray

    def __init__(self, weights: Sequence[float], atoms: Sequence | None = None):
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise InputError("weights: need a nonempty 1-d sequence")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise InputError("weights: must be finite and nonnegative")
        if abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise InputError(f"weights: sum to {w.sum()!r}, expected 1")
        labels = tuple(atoms) if atoms is not None else tuple(f"w{i + 1}" for i in range(w.size))
        if len(labels) != w.size:
            raise InputError("atoms: label count differs from weight count")
        if len(set(labels)) != len(labels):
            raise InputError("atoms: labels must be distinct")
        w.setflags(write=False)
        object.__setattr__(self, "atoms", labels)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, n: int, atoms: Sequence | None = None) -> "FiniteProbSpace":
        return cls(np.full(n, 1.0 / n), atoms)

    @property
    def size(self) -> int:
        return self.weights.size

    def __len__(self) -> int:
        return self.size

    def __eq__(self, other):
        if not isinstance(other, FiniteProbSpace):
            return NotImplemented
        return self.atoms == other.atoms and np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash((self.atoms, self.weights.tobytes()))

    def to_json(self) -> dict:
        return {"atoms": list(self.atoms), "weights": self.weights.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "FiniteProbSpace":
        if not isinstance(obj, dict) or "weights" not in obj:
            raise InputError("space: expected an object with a 'weights' field")
        return cls(obj["weights"], obj.get("atoms"))


@dataclass(frozen=True)
class Partition:
    """Blocks of atom indices (0-based); stands for the sigma-field they generate."""

    blocks: tuple

    def __init__(self, blocks: Iterable[Iterable[int]], n: int | None = None):
        bl = tuple(tuple(sorted(int(i) for i in b)) for b in blocks)
        if not bl:
            raise InputError("blocks: need at least one block")
        seen: set[int] = set()
        for b in bl:
            if not b:
                raise InputError("blocks: empty block")
            if seen.intersection(b):
                raise InputError(f"blocks: block {list(b)} overlaps another block")
            seen.update(b)
        size = n if n is not None else max(seen) + 1
        if seen != set(range(size)):
            raise InputError(f"blocks: union is not the atom index set 0..{size - 1}")
        object.__setattr__(self, "blocks", bl)

    @classmethod
    def trivial(cls, n: int) -> "Partition":
        return cls([range(n)], n)

    @classmethod
    def singletons(cls, n: int) -> "Partition":
        return cls([[i] for i in range(n)], n)

    @classmethod
    def from_sigma_field(cls, events: Iterable[Iterable[int]], n: int) -> "Partition":
        """Atoms of a finite sigma-field given as its list of events.

        The list must contain the full set and be closed under complement and
        union (the empty set may be omitted).
        """
        full = frozenset(range(n))
        evs = {frozenset(int(i) for i in e) for e in events}
        if any(not e <= full for e in evs):
            raise InputError("sigma-field: event mentions an unknown atom")
        evs.add(frozenset())
        if full not in evs:
            raise InputError("sigma-field: the full sample space is missing")
        for e in evs:
            if full - e not in evs:
                raise InputError(f"sigma-field: complement of {sorted(e)} is missing")
        for a, b in combinations(evs, 2):
            if a | b not in evs:
                raise InputError(f"sigma-field: union of {sorted(a)} and {sorted(b)} is missing")
        # atoms sharing the same membership pattern form a block
        signature: dict[tuple, list[int]] = {}
        ordered = sorted(evs, key=lambda e: (len(e), sorted(e)))
        for i in range(n):
            key = tuple(i in e for e in ordered)
            signature.setdefault(key, []).append(i)
        return cls(sorted(signature.values()), n)

    @property
    def size(self) -> int:
        return sum(len(b) for b in self.blocks)

    def __len__(self) -> int:
        return len(self.blocks)

    def block_of(self) -> np.ndarray:
        """Block index of each atom."""
        out = np.empty(self.size, dtype=int)
        for k, b in enumerate(self.blocks):
            out[list(b)] = k
        return out

    def is_coarser_than(self, other: "Partition") -> bool:
        """Every block of ``other`` lies inside a block of ``self``."""
        mine = self.block_of()
        return all(len({mine[i] for i in b}) == 1 for b in other.blocks)

    def expand(self, block_values: Sequence[float]) -> np.ndarray:
        """Block-constant vector from one value per block."""
        if len(block_values) != len(self.blocks):
            raise InputError("one value per block expected")
        return np.asarray(block_values, dtype=float)[self.block_of()]

    def to_json(self) -> dict:
        return {"blocks": [list(b) for b in self.blocks]}

    @classmethod
    def from_json(cls, obj: dict, n: int | None = None) -> "Partition":
        if isinstance(obj, dict) and "blocks" in obj:
            return cls(obj["blocks"], n)
        if isinstance(obj, dict) and "events" in obj:
            if n is None:
                raise InputError("sigma-field: the number of atoms is needed")
            return cls.from_sigma_field(obj["events"], n)
        raise InputError("partition: expected an object with 'blocks' or 'events'")


def as_rv(space: FiniteProbSpace, x) -> np.ndarray:
    """Validate a random variable (a real vector over the atoms)."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.size != space.size:
        raise InputError(f"random variable: expected {space.size} values, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise InputError("random variable: values must be finite")
    return v


def expectation(space: FiniteProbSpace, x) -> float:
    return float(space.weights @ as_rv(space, x))


def is_measurable(x, p: Partition, tol: float = MEASURABILITY_TOL) -> bool:
    """True when ``x`` is constant (up to ``tol``) on every block of ``p``."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.size != p.size:
        raise InputError(f"random variable: expected {p.size} values, got shape {v.shape}")
    return all(np.ptp(v[list(b)]) <= tol for b in p.blocks)


def conditional_distribution(space: FiniteProbSpace, p: Partition, block_index: int) -> FiniteProbSpace:
    """The space restricted to one block, renormalized."""
    if p.size != space.size:
        raise InputError("partition and space have different numbers of atoms")
    block = list(p.blocks[block_index])
    w = space.weights[block]
    total = w.sum()
    if total <= 0:
        raise InputError(f"block {block_index} has zero probability")
    w = w / total
    # absorb rounding so the weights sum to 1 within WEIGHT_TOL
    w[np.argmax(w)] += 1.0 - w.sum()
    return FiniteProbSpace(w, [space.atoms[i] for i in block])
