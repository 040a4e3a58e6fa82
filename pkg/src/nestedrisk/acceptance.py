"""Translation-invariant mappings on the ordered group Z^n and acceptance sets.

The group is ``Z^n`` with componentwise order. A subgroup is the set of
integer vectors constant on the blocks of a partition. A mapping is
``(T, F)``-translation invariant when ``m(t + f) = m(t) + f`` for every
``f`` in its output subgroup; its acceptance set is ``{t : m(t) <= 0}``.

For an increasing ``rho`` and a factor ``F`` with ``F(0) = 0``, the pair
``(A_rho, F)`` with ``A_rho(h, t) = rho(h + t)`` is usually time consistent
iff ``acc(F) + acc(rho | F-subgroup) = acc(rho)``, iff ``rho(F(t)) = rho(t)``
for all ``t``. Infinite sets are replaced by a finite window; the Minkowski
comparison only uses points whose canonical decomposition
``t = (t - F(t)) + F(t)`` stays inside it.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .consistency import AggregatorFactorPair
from .space import Partition
from .verdict import HypothesisViolation, InputError, Verdict

DEFAULT_CAP = 10**6
CAP_ENV = "NESTEDRISK_ENUM_CAP"


def enumeration_cap() -> int:
    raw = os.environ.get(CAP_ENV)
    if raw is None:
        return DEFAULT_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise InputError(f"{CAP_ENV} must be an integer, got {raw!r}")
    if cap < 1:
        raise InputError(f"{CAP_ENV} must be positive")
    return cap


@dataclass(frozen=True)
class LatticeWindow:
    """The box ``[lo, hi]`` in ``Z^dimension``."""

    dimension: int
    lo: tuple
    hi: tuple

    def __init__(self, dimension: int, lo, hi):
        lo_t = tuple(int(x) for x in np.broadcast_to(lo, dimension))
        hi_t = tuple(int(x) for x in np.broadcast_to(hi, dimension))
        if any(a > b for a, b in zip(lo_t, hi_t)):
            raise InputError("window: lo must not exceed hi")
        object.__setattr__(self, "dimension", int(dimension))
        object.__setattr__(self, "lo", lo_t)
        object.__setattr__(self, "hi", hi_t)
        cap = enumeration_cap()
        if self.size > cap:
            raise InputError(f"window: {self.size} points exceed the enumeration cap {cap}")

    @classmethod
    def parse(cls, text: str, dimension: int) -> "LatticeWindow":
        """``"-2..2"`` (same range per coordinate) or ``"-2..2,0..1,..."``."""
        parts = [p.strip() for p in text.split(",")]
        try:
            ranges = [tuple(int(x) for x in p.split("..")) for p in parts]
        except ValueError:
            raise InputError(f"window: cannot parse {text!r}; expected 'lo..hi'")
        if any(len(r) != 2 for r in ranges):
            raise InputError(f"window: cannot parse {text!r}; expected 'lo..hi'")
        if len(ranges) == 1:
            ranges = ranges * dimension
        if len(ranges) != dimension:
            raise InputError(f"window: {len(ranges)} ranges for dimension {dimension}")
        return cls(dimension, [r[0] for r in ranges], [r[1] for r in ranges])

    @property
    def shape(self) -> tuple:
        return tuple(b - a + 1 for a, b in zip(self.lo, self.hi))

    @property
    def size(self) -> int:
        return int(np.prod(self.shape, dtype=object))

    def points(self) -> np.ndarray:
        """All points, lexicographic order, shape ``(size, dimension)``."""
        axes = [np.arange(a, b + 1) for a, b in zip(self.lo, self.hi)]
        grid = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.reshape(-1) for g in grid], axis=1).astype(np.int64)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        return np.all((pts >= np.array(self.lo)) & (pts <= np.array(self.hi)), axis=1)

    def index(self, pts: np.ndarray) -> np.ndarray:
        """Lexicographic rank of in-window points (mixed radix)."""
        pts = np.atleast_2d(pts) - np.array(self.lo)
        idx = np.zeros(len(pts), dtype=np.int64)
        for k, s in enumerate(self.shape):
            idx = idx * s + pts[:, k]
        return idx


def block_constant_points(window: LatticeWindow, partition: Partition) -> np.ndarray:
    """Window points constant on each block, lexicographic order."""
    ranges = []
    for b in partition.blocks:
        lo = max(window.lo[i] for i in b)
        hi = min(window.hi[i] for i in b)
        ranges.append(range(lo, hi + 1))
    block_of = partition.block_of()
    pts = [np.array(vals)[block_of] for vals in itertools.product(*ranges)]
    if not pts:
        return np.zeros((0, window.dimension), dtype=np.int64)
    pts = np.array(pts, dtype=np.int64)
    return pts[np.argsort(window.index(pts), kind="stable")]


def _blockwise(reduce: Callable, partition: Partition) -> Callable:
    blocks = [list(b) for b in partition.blocks]

    def apply(t: np.ndarray) -> np.ndarray:
        out = np.empty_like(t)
        for b in blocks:
            out[:, b] = reduce(t[:, b], axis=1, keepdims=True)
        return out

    return apply


class GroupTIMapping:
    """A mapping ``Z^n -> Z^n`` whose outputs are ``partition``-block-constant.

    Builtins: ``conditional_max``, ``conditional_min``, ``global_max``,
    ``identity`` and ``conditional_sum`` (not translation invariant; kept as
    a negative example). Use :meth:`from_callable` or :meth:`from_table`
    for anything else.
    """

    BUILTINS = ("conditional_max", "conditional_min", "global_max", "identity", "conditional_sum")

    def __init__(self, kind: str, partition: Partition | None = None, n: int | None = None, fn: Callable | None = None):
        self.kind = kind
        if fn is not None:
            if partition is None:
                raise InputError("a custom mapping needs its output partition")
            self.partition = partition
            self._fn = fn
            return
        if kind not in self.BUILTINS:
            raise InputError(f"unknown mapping kind {kind!r}; expected one of {', '.join(self.BUILTINS)}")
        if kind == "global_max":
            if n is None and partition is None:
                raise InputError("global_max needs the dimension")
            n = n if n is not None else partition.size
            self.partition = Partition.trivial(n)
            self._fn = _blockwise(np.max, self.partition)
        elif kind == "identity":
            if n is None and partition is None:
                raise InputError("identity needs the dimension")
            n = n if n is not None else partition.size
            self.partition = Partition.singletons(n)
            self._fn = lambda t: t.copy()
        else:
            if partition is None:
                raise InputError(f"{kind} needs a partition")
            self.partition = partition
            reduce = {"conditional_max": np.max, "conditional_min": np.min, "conditional_sum": np.sum}[kind]
            self._fn = _blockwise(reduce, partition)

    @classmethod
    def from_callable(cls, fn: Callable, partition: Partition, name: str = "custom") -> "GroupTIMapping":
        """``fn`` maps one integer vector to one integer vector."""

        def apply(t):
            return np.array([np.asarray(fn(row), dtype=np.int64) for row in t], dtype=np.int64).reshape(t.shape)

        return cls(name, partition, fn=apply)

    @classmethod
    def from_table(cls, table: dict, partition: Partition, name: str = "table") -> "GroupTIMapping":
        tab = {tuple(int(x) for x in k): tuple(int(x) for x in v) for k, v in table.items()}

        def lookup(row):
            key = tuple(int(x) for x in row)
            if key not in tab:
                raise InputError(f"{name}: no table entry for {list(key)}")
            return tab[key]

        return cls.from_callable(lookup, partition, name)

    @property
    def dimension(self) -> int:
        return self.partition.size

    def apply(self, pts: np.ndarray) -> np.ndarray:
        """Evaluate on a batch of points, shape ``(N, n)``."""
        pts = np.atleast_2d(np.asarray(pts, dtype=np.int64))
        return np.asarray(self._fn(pts), dtype=np.int64)

    def __call__(self, t) -> np.ndarray:
        return self.apply(np.asarray(t, dtype=np.int64)[None, :])[0]

    def in_subgroup(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        return np.all([np.ptp(pts[:, list(b)], axis=1) == 0 for b in self.partition.blocks], axis=0)

    def __repr__(self):
        return f"GroupTIMapping({self.kind!r}, blocks={[list(b) for b in self.partition.blocks]})"


def unit_block_shifts(partition: Partition) -> list[np.ndarray]:
    """``+1`` and ``-1`` on each block, zero elsewhere."""
    out = []
    n = partition.size
    for b in partition.blocks:
        for sign in (1, -1):
            v = np.zeros(n, dtype=np.int64)
            v[list(b)] = sign
            out.append(v)
    return out


def check_group_translation_invariance(m: GroupTIMapping, window: LatticeWindow, shifts: Sequence | None = None) -> Verdict:
    """Exhaustive ``m(t + f) = m(t) + f`` over window points and shifts."""
    if window.dimension != m.dimension:
        raise InputError("window and mapping dimensions differ")
    shifts = unit_block_shifts(m.partition) if shifts is None else [np.asarray(f, dtype=np.int64) for f in shifts]
    for f in shifts:
        if f.shape != (m.dimension,) or not m.in_subgroup(f)[0]:
            raise InputError(f"shift {f.tolist()} is not in the declared subgroup of {m.kind}")
    pts = window.points()
    base = m.apply(pts)
    bad_block = np.flatnonzero(~m.in_subgroup(base))
    if bad_block.size:
        t = pts[bad_block[0]]
        return Verdict.fail(
            "group_translation_invariance",
            {"t": t, "m_t": base[bad_block[0]], "reason": "output not in the declared subgroup"},
        )
    first = None
    for si, f in enumerate(shifts):
        diff = m.apply(pts + f) - (base + f)
        bad = np.flatnonzero(np.any(diff != 0, axis=1))
        if bad.size and (first is None or bad[0] < first[0]):
            first = (bad[0], si)
    if first is None:
        return Verdict.ok("group_translation_invariance", points=len(pts), shifts=len(shifts))
    i, si = first
    t, f = pts[i], shifts[si]
    return Verdict.fail(
        "group_translation_invariance",
        {"t": t, "shift": f, "m_t_plus_shift": m(t + f), "m_t_plus_shift_expected": m(t) + f},
        discrepancy=float(np.max(np.abs(m(t + f) - m(t) - f))),
        points=len(pts),
        shifts=len(shifts),
    )


def acceptance_set(m: GroupTIMapping, window: LatticeWindow, subgroup: Partition | None = None) -> set:
    """Window points with ``m(t) <= 0``; with ``subgroup``, only block-constant ones."""
    pts = window.points() if subgroup is None else block_constant_points(window, subgroup)
    if len(pts) == 0:
        return set()
    keep = np.all(m.apply(pts) <= 0, axis=1)
    return {tuple(int(x) for x in p) for p in pts[keep]}


def check_increasing(m: GroupTIMapping, window: LatticeWindow):
    """First ``(t, t + e_k)`` inside the window with ``m(t) > m(t + e_k)``, else None.

    Unit steps suffice: any ``t <= t'`` in a box is joined by a monotone
    chain of unit steps that stays in the box.
    """
    pts = window.points()
    vals = m.apply(pts)
    first = None
    for k in range(window.dimension):
        e = np.zeros(window.dimension, dtype=np.int64)
        e[k] = 1
        nxt = pts + e
        inside = window.contains(nxt)
        src = np.flatnonzero(inside)
        bad = src[np.any(vals[src] > m.apply(nxt[src]), axis=1)]
        if bad.size and (first is None or bad[0] < first[0]):
            first = (bad[0], k)
    if first is None:
        return None
    i, k = first
    e = np.zeros(window.dimension, dtype=np.int64)
    e[k] = 1
    return pts[i], pts[i] + e


def _check_hypotheses(rho: GroupTIMapping, f: GroupTIMapping, window: LatticeWindow, heads: Partition | None):
    if rho.dimension != f.dimension or window.dimension != rho.dimension:
        raise InputError("rho, factor and window must share one dimension")
    if not rho.partition.is_coarser_than(f.partition):
        raise HypothesisViolation("subgroup chain: the rho-subgroup is not contained in the factor subgroup")
    if heads is not None and not heads.is_coarser_than(rho.partition):
        raise HypothesisViolation("subgroup chain: the head subgroup is not contained in the rho-subgroup")
    bad = check_increasing(rho, window)
    if bad is not None:
        raise HypothesisViolation(f"rho is not increasing: rho({bad[0].tolist()}) > rho({bad[1].tolist()})")
    zero = np.zeros(f.dimension, dtype=np.int64)
    if np.any(f(zero) != 0):
        raise HypothesisViolation(f"factor does not satisfy F(0) = 0: F(0) = {f(zero).tolist()}")
    for m, what in ((rho, "rho"), (f, "factor")):
        v = check_group_translation_invariance(m, window)
        if not v.passed:
            raise HypothesisViolation(f"{what} is not translation invariant on the window: {v.witness}")


def check_acceptance_identity(
    rho: GroupTIMapping, f: GroupTIMapping, window: LatticeWindow, heads: Partition | None = None
) -> Verdict:
    """Decide ``acc(F) + acc(rho | F-subgroup) = acc(rho)`` on a window, two ways.

    Route (a): ``rho(F(t)) <= rho(t)`` (inclusion of acc(rho) in the sum) and
    ``rho(F(t)) >= rho(t)`` (reverse inclusion) at every window point.
    Route (b): the Minkowski sum of the windowed acceptance sets compared
    with ``acc(rho)`` at guarded points, i.e. those with ``t - F(t)`` and
    ``F(t)`` in the window. At guarded points windowed membership in the sum
    equals membership in the infinite sum.
    """
    _check_hypotheses(rho, f, window, heads)
    pts = window.points()
    Ft = f.apply(pts)
    rho_t = rho.apply(pts)
    rho_Ft = rho.apply(Ft)

    # route (a)
    le = np.all(rho_Ft <= rho_t, axis=1)
    ge = np.all(rho_Ft >= rho_t, axis=1)
    viol_a = np.flatnonzero(~(le & ge))
    route_a = {
        "rho_F_le_rho": bool(le.all()),
        "rho_F_ge_rho": bool(ge.all()),
        "points": int(len(pts)),
    }

    # route (b)
    acc_F = pts[np.all(Ft <= 0, axis=1)]
    sub = block_constant_points(window, f.partition)
    acc_rho_F = sub[np.all(rho.apply(sub) <= 0, axis=1)] if len(sub) else sub
    in_sum = np.zeros(len(pts), dtype=bool)
    if len(acc_F) and len(acc_rho_F):
        sums = (acc_F[:, None, :] + acc_rho_F[None, :, :]).reshape(-1, window.dimension)
        sums = sums[window.contains(sums)]
        in_sum[window.index(sums)] = True
    in_acc_rho = np.all(rho_t <= 0, axis=1)
    guarded = window.contains(pts - Ft) & window.contains(Ft)
    mismatch = guarded & (in_sum != in_acc_rho)
    # first step of the proof: t in the sum <=> F(t) in acc(rho | F-subgroup)
    step1 = guarded & (in_sum != np.all(rho_Ft <= 0, axis=1))
    viol_b = np.flatnonzero(mismatch)
    route_b = {
        "guarded_points": int(guarded.sum()),
        "guarded_fraction": float(guarded.mean()),
        "acc_F_size": int(len(acc_F)),
        "acc_rho_restricted_size": int(len(acc_rho_F)),
        "acc_rho_size": int(in_acc_rho.sum()),
        "sum_in_window_size": int(in_sum.sum()),
        "acc_rho_not_in_sum": int((mismatch & in_acc_rho).sum()),
        "sum_not_in_acc_rho": int((mismatch & in_sum).sum()),
        "step1_violations": int(step1.sum()),
    }
    if viol_b.size:
        i = viol_b[0]
        route_b["witness"] = {
            "t": pts[i],
            "in_sum": bool(in_sum[i]),
            "in_acc_rho": bool(in_acc_rho[i]),
            "rho_t": rho_t[i],
            "rho_F_t": rho_Ft[i],
        }
    a_pass, b_pass = viol_a.size == 0, viol_b.size == 0
    details = {
        "route_a": "pass" if a_pass else "fail",
        "route_b": "pass" if b_pass else "fail",
        "routes_agree": a_pass == b_pass,
        "pointwise": route_a,
        "minkowski": route_b,
        "rho": rho.kind,
        "factor": f.kind,
        "window": {"lo": list(window.lo), "hi": list(window.hi)},
    }
    if a_pass and b_pass:
        return Verdict.ok("acceptance_identity", **details)
    if not a_pass:
        i = viol_a[0]
        t = pts[i]
        # translate as in the inclusion proofs to get a set-level witness
        shift = rho_Ft[i] if not ge[i] else rho_t[i]
        tt = t - shift
        details["translated_witness"] = _translated(rho, f, window, tt)
        witness = {
            "t": t,
            "rho_t": rho_t[i],
            "rho_F_t": rho_Ft[i],
            "F_t": Ft[i],
            "violates": "rho(F(t)) >= rho(t)" if not ge[i] else "rho(F(t)) <= rho(t)",
        }
        return Verdict.fail("acceptance_identity", witness, discrepancy=float(np.max(np.abs(rho_t[i] - rho_Ft[i]))), **details)
    return Verdict.fail("acceptance_identity", route_b["witness"], **details)


def _translated(rho: GroupTIMapping, f: GroupTIMapping, window: LatticeWindow, t: np.ndarray) -> dict:
    Ft = f(t)
    guarded = bool(window.contains(t)[0] and window.contains(t - Ft)[0] and window.contains(Ft)[0])
    in_sum = bool(np.all(rho(Ft) <= 0))  # by the first proof step
    in_acc = bool(np.all(rho(t) <= 0))
    return {"t": t, "guarded": guarded, "in_sum": in_sum, "in_acc_rho": in_acc, "mismatch": in_sum != in_acc}


def aggregator_from_rho(
    rho: GroupTIMapping,
    f: GroupTIMapping,
    window: LatticeWindow,
    heads: Partition | None = None,
    head_window: LatticeWindow | None = None,
) -> AggregatorFactorPair:
    """Tabulate ``A_rho(h, t) = rho(h + t)`` and ``F`` over the window.

    Heads are the block-constant points of ``heads`` (default: the rho
    subgroup) inside ``head_window`` (default: ``window``). Labels are the
    integer points themselves, so the order on H is the componentwise one.
    """
    heads = heads if heads is not None else rho.partition
    hw = head_window if head_window is not None else window
    hpts = block_constant_points(hw, heads)
    tpts = window.points()
    if len(hpts) * len(tpts) > enumeration_cap():
        raise InputError("aggregator table exceeds the enumeration cap")
    A = {}
    for h in hpts:
        vals = rho.apply(tpts + h)
        hk = tuple(int(x) for x in h)
        for t, v in zip(tpts, vals):
            A[(hk, tuple(int(x) for x in t))] = tuple(float(x) for x in v)
    Fv = f.apply(tpts)
    tails = [tuple(int(x) for x in t) for t in tpts]
    F = {t: tuple(float(x) for x in v) for t, v in zip(tails, Fv)}
    hk = [tuple(int(x) for x in h) for h in hpts]
    return AggregatorFactorPair.from_tables(
        hk, tails, A, F, {h: tuple(float(x) for x in h) for h in hk}, {t: t for t in tails}
    )
