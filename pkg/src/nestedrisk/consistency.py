"""Aggregator/factor pairs on finite sets and their time-consistency checks.

A pair is a table ``A(h, t)`` over heads x tails plus a table ``F(t)``.
The subaggregator groups tails by factor value::

    S(h, f) = {A(h, t) : F(t) = f}

Weak time consistency (F(t) = F(t') => A(h,t) = A(h,t')) holds exactly
when every cell of ``S`` is a singleton; the usual and strong variants
replace equality by orders. Every check below runs the defining
implication by enumeration *and* the subaggregator characterization, and
reports whether they agree.

Values may be numbers, real vectors or arbitrary hashable symbols. Numeric
values are compared in sup-norm up to ``tol``; symbols by ``==``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .verdict import InputError, Verdict

DEFAULT_TOL = 1e-9


# ---------------------------------------------------------------------------
# values


def normalize_value(v: Any) -> Any:
    """Numbers -> float, numeric sequences -> tuple of floats, else unchanged."""
    if isinstance(v, (bool, np.bool_)):
        return v
    if isinstance(v, (int, float, np.integer, np.floating)):
        f = float(v)
        if math.isnan(f):
            raise InputError("NaN value in table")
        return f
    if isinstance(v, str) and v.strip().lower() in ("+inf", "-inf", "inf"):
        return float(v.strip().lower().replace("+", ""))
    if isinstance(v, np.ndarray) or isinstance(v, (list, tuple)):
        arr = np.asarray(v)
        if arr.dtype.kind in "iuf" and arr.ndim == 1:
            if np.any(np.isnan(arr)):
                raise InputError("NaN value in table")
            return tuple(float(x) for x in arr)
        return tuple(normalize_value(x) for x in v)
    return v


def _is_numeric(v: Any) -> bool:
    if isinstance(v, float):
        return True
    return isinstance(v, tuple) and all(isinstance(x, float) for x in v)


def value_gap(a: Any, b: Any) -> float | None:
    """Sup-norm distance between numeric values, ``None`` for symbols."""
    if not (_is_numeric(a) and _is_numeric(b)):
        return None
    if isinstance(a, float) != isinstance(b, float):
        return None
    xa = (a,) if isinstance(a, float) else a
    xb = (b,) if isinstance(b, float) else b
    if len(xa) != len(xb):
        return None
    gap = 0.0
    for u, v in zip(xa, xb):
        d = 0.0 if u == v else abs(u - v)
        gap = max(gap, d)
    return gap


def values_equal(a: Any, b: Any, tol: float = DEFAULT_TOL) -> bool:
    if a == b:
        return True
    gap = value_gap(a, b)
    return gap is not None and gap <= tol


# ---------------------------------------------------------------------------
# orders


class Order:
    """A partial order given as a black-box ``leq(a, b)`` predicate."""

    name = "order"

    def __init__(self, leq: Callable[[Any, Any], bool] | None = None, name: str | None = None):
        self._leq = leq
        if name:
            self.name = name

    def __call__(self, a, b) -> bool:
        return bool(self._leq(a, b))

    def matrix(self, values: Sequence) -> np.ndarray:
        n = len(values)
        out = np.empty((n, n), dtype=bool)
        for i, a in enumerate(values):
            for j, b in enumerate(values):
                out[i, j] = self(a, b)
        return out

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


class Componentwise(Order):
    """``a <= b`` in every coordinate, up to ``tol``. Scalars are 1-vectors."""

    name = "componentwise"

    def __init__(self, tol: float = DEFAULT_TOL):
        super().__init__()
        self.tol = tol

    def __call__(self, a, b) -> bool:
        xa = np.atleast_1d(np.asarray(a, dtype=float))
        xb = np.atleast_1d(np.asarray(b, dtype=float))
        if xa.shape != xb.shape:
            raise InputError(f"componentwise order: shapes {xa.shape} and {xb.shape} differ")
        return bool(np.all((xa <= xb) | (xa - xb <= self.tol)))

    def matrix(self, values: Sequence) -> np.ndarray:
        try:
            arr = np.array([np.atleast_1d(np.asarray(v, dtype=float)) for v in values])
        except (TypeError, ValueError):
            raise InputError("componentwise order needs numeric values of one shape")
        if arr.ndim != 2:
            raise InputError("componentwise order needs numeric values of one shape")
        a, b = arr[:, None, :], arr[None, :, :]
        with np.errstate(invalid="ignore"):
            ok = (a <= b) | (a - b <= self.tol)
        return ok.all(axis=2)


class Equality(Order):
    """The discrete order: ``a <= b`` iff ``a == b`` (up to ``tol``)."""

    name = "equality"

    def __init__(self, tol: float = DEFAULT_TOL):
        super().__init__()
        self.tol = tol

    def __call__(self, a, b) -> bool:
        return values_equal(a, b, self.tol)


class Relation(Order):
    """An explicit finite order: the reflexive pairs are added automatically."""

    name = "relation"

    def __init__(self, pairs):
        super().__init__()
        self.pairs = {(normalize_value(a), normalize_value(b)) for a, b in pairs}

    def __call__(self, a, b) -> bool:
        return a == b or (a, b) in self.pairs


def make_order(spec, tol: float = DEFAULT_TOL) -> Order:
    """Build an order from a name, a relation dict, or a callable."""
    if isinstance(spec, Order):
        return spec
    if spec is None or spec == "componentwise" or spec == "natural":
        return Componentwise(tol)
    if spec == "equality":
        return Equality(tol)
    if isinstance(spec, dict) and "relation" in spec:
        return Relation(spec["relation"])
    if callable(spec):
        return Order(spec, getattr(spec, "__name__", "callable"))
    raise InputError(f"unknown order {spec!r}")


# ---------------------------------------------------------------------------
# pairs


@dataclass
class FiniteMapping:
    """A total table over a finite domain."""

    domain: tuple
    table: dict

    def __post_init__(self):
        missing = [d for d in self.domain if d not in self.table]
        if missing:
            raise InputError(f"table is not total: missing {missing[:3]}")

    def __call__(self, x):
        return self.table[x]

    def image(self) -> list:
        return [self.table[d] for d in self.domain]


@dataclass
class AggregatorFactorPair:
    """Tabulated aggregator ``A: H x T -> 𝔸`` and factor ``F: T -> 𝔽``.

    ``heads`` and ``tails`` are labels; ``head_points`` optionally maps a
    head label to the object the order on H compares (defaults to the label).
    """

    heads: tuple
    tails: tuple
    aggregator: FiniteMapping
    factor: FiniteMapping
    head_points: dict = field(default_factory=dict)
    tail_points: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(set(self.heads)) != len(self.heads) or len(set(self.tails)) != len(self.tails):
            raise InputError("heads and tails must be distinct labels")
        if not self.heads or not self.tails:
            raise InputError("heads and tails must be nonempty")

    @classmethod
    def from_tables(cls, heads, tails, aggregator: Mapping, factor: Mapping, head_points=None, tail_points=None):
        heads, tails = tuple(heads), tuple(tails)
        a = {(h, t): normalize_value(aggregator[(h, t)]) for h in heads for t in tails if (h, t) in aggregator}
        f = {t: normalize_value(factor[t]) for t in tails if t in factor}
        return cls(
            heads,
            tails,
            FiniteMapping(tuple((h, t) for h in heads for t in tails), a),
            FiniteMapping(tails, f),
            dict(head_points or {}),
            dict(tail_points or {}),
        )

    @classmethod
    def from_functions(cls, heads, tails, aggregator: Callable, factor: Callable):
        """Tabulate callables. ``heads``/``tails`` are sequences of points or
        dicts label -> point; callables receive points."""
        hp = dict(heads) if isinstance(heads, Mapping) else {_label(p): p for p in heads}
        tp = dict(tails) if isinstance(tails, Mapping) else {_label(p): p for p in tails}
        a = {(h, t): aggregator(hp[h], tp[t]) for h in hp for t in tp}
        f = {t: factor(tp[t]) for t in tp}
        return cls.from_tables(list(hp), list(tp), a, f, hp, tp)

    def A(self, h, t):
        return self.aggregator.table[(h, t)]

    def F(self, t):
        return self.factor.table[t]

    def head_point(self, h):
        return self.head_points.get(h, h)

    def reordered(self, heads=None, tails=None) -> "AggregatorFactorPair":
        heads = tuple(heads) if heads is not None else self.heads
        tails = tuple(tails) if tails is not None else self.tails
        return AggregatorFactorPair.from_tables(
            heads, tails, self.aggregator.table, self.factor.table, self.head_points, self.tail_points
        )


def _label(p):
    if isinstance(p, np.ndarray):
        return tuple(p.tolist())
    if isinstance(p, list):
        return tuple(p)
    return p


# ---------------------------------------------------------------------------
# subaggregator


def _numeric_matrix(values: Sequence) -> np.ndarray | None:
    """Values as a 2-d float array if they are all numbers / equal-length vectors."""
    if not values or not all(_is_numeric(v) for v in values):
        return None
    rows = [(v,) if isinstance(v, float) else v for v in values]
    if len({len(r) for r in rows}) != 1 or isinstance(values[0], float) != all(isinstance(v, float) for v in values):
        return None
    return np.array(rows, dtype=float)


def _cluster(values: Sequence, equal: Callable[[Any, Any], bool] | None = None, tol: float | None = None):
    """Greedy clustering, centers in first-seen order.

    ``equal=None`` means sup-norm distance ``<= tol``. Returns
    ``(centers, labels, warnings)``; a value whose distance to some center
    lies in ``(tol, 2 tol]`` is reported as ambiguous.
    """
    arr = _numeric_matrix(values) if equal is None else None
    if equal is None and arr is None:
        equal = lambda a, b: values_equal(a, b, tol or 0.0)
    centers: list = []
    labels: list[int] = []
    warnings: list[str] = []
    exact: dict = {}
    if arr is not None:
        cidx: list[int] = []
        for i, v in enumerate(values):
            key = _key(v)
            hit = exact.get(key)
            if cidx:
                C = arr[cidx]
                with np.errstate(invalid="ignore"):
                    d = np.where(C == arr[i], 0.0, np.abs(C - arr[i])).max(axis=1)
                if hit is None:
                    close = np.flatnonzero(d <= tol)
                    hit = int(close[0]) if close.size else None
                amb = np.flatnonzero((d > tol) & (d <= 2 * tol)) if tol else np.zeros(0, int)
                for k in amb[:1]:
                    warnings.append(f"value {v!r} lies within (tol, 2 tol] of center {centers[k]!r}")
            if hit is None:
                centers.append(v)
                cidx.append(i)
                hit = len(centers) - 1
            exact.setdefault(key, hit)
            labels.append(hit)
        return centers, labels, warnings
    for v in values:
        key = _key(v)
        hit = exact.get(key)
        if hit is None:
            for k, c in enumerate(centers):
                if equal(c, v):
                    hit = k
                    break
        if tol is not None:
            for c in centers:
                g = value_gap(c, v)
                if g is not None and tol < g <= 2 * tol:
                    warnings.append(f"value {v!r} lies within (tol, 2 tol] of center {c!r}")
        if hit is None:
            centers.append(v)
            hit = len(centers) - 1
        exact.setdefault(key, hit)
        labels.append(hit)
    return centers, labels, warnings


@dataclass
class Subaggregator:
    """Cells ``(h, k)`` for each head and factor-image cluster ``k``.

    ``image[k]`` is the representative factor value of cluster ``k``;
    ``cells[(h, k)]`` lists ``(value, tails)`` for each distinct aggregator
    value, with the tails that produce it.
    """

    heads: tuple
    image: list
    tail_cluster: dict
    cells: dict
    warnings: list = field(default_factory=list)
    tol: float = DEFAULT_TOL

    def values(self, h, k) -> list:
        return [v for v, _ in self.cells[(h, k)]]

    def is_mapping(self) -> bool:
        return all(len(c) == 1 for c in self.cells.values())

    def non_singleton_cells(self) -> list:
        return [key for key, c in self.cells.items() if len(c) > 1]

    def cluster_of(self, f) -> int | None:
        """Index of the cluster whose center equals ``f`` (up to tol)."""
        f = normalize_value(f)
        for k, c in enumerate(self.image):
            if values_equal(c, f, self.tol):
                return k
        return None

    def __call__(self, h, f) -> set:
        """The set ``S(h, f)``; empty if ``f`` is not in the factor image."""
        k = self.cluster_of(f)
        return set() if k is None else set(self.values(h, k))


def build_subaggregator(pair: AggregatorFactorPair, tol: float = DEFAULT_TOL, f_equal=None, a_equal=None) -> Subaggregator:
    """Group tails by factor value and collect the distinct aggregator values."""
    centers, labels, warnings = _cluster([pair.F(t) for t in pair.tails], f_equal, tol)
    tail_cluster = dict(zip(pair.tails, labels))
    members: dict[int, list] = {k: [] for k in range(len(centers))}
    for t in pair.tails:
        members[tail_cluster[t]].append(t)
    cells = {}
    for h in pair.heads:
        for k, ts in members.items():
            vals, vlab, _ = _cluster([pair.A(h, t) for t in ts], a_equal, None if a_equal else tol)
            cells[(h, k)] = [(v, [t for t, lab in zip(ts, vlab) if lab == i]) for i, v in enumerate(vals)]
    return Subaggregator(pair.heads, centers, tail_cluster, cells, warnings, tol)


# ---------------------------------------------------------------------------
# enumeration helpers


def _codes(values: list) -> tuple[np.ndarray, list]:
    """Integer code per value (exact dedup) and the list of distinct values."""
    index: dict = {}
    distinct: list = []
    out = np.empty(len(values), dtype=np.int64)
    for i, v in enumerate(values):
        key = _key(v)
        if key not in index:
            index[key] = len(distinct)
            distinct.append(v)
        out[i] = index[key]
    return out, distinct


def _key(v):
    try:
        hash(v)
        return (type(v).__name__, v)
    except TypeError:
        return ("repr", repr(v))


class _LazyRelation:
    """Memoized predicate over coded values, evaluated on demand in bulk."""

    def __init__(self, distinct: list, pred: Callable[[Any, Any], bool]):
        self.distinct = distinct
        self.pred = pred
        self.memo: dict[int, bool] = {}
        self.m = max(len(distinct), 1)

    def pairs(self, ci: np.ndarray, cj: np.ndarray) -> np.ndarray:
        codes = ci * self.m + cj
        uniq, inv = np.unique(codes, return_inverse=True)
        res = np.empty(len(uniq), dtype=bool)
        for n, c in enumerate(uniq.tolist()):
            r = self.memo.get(c)
            if r is None:
                r = bool(self.pred(self.distinct[c // self.m], self.distinct[c % self.m]))
                self.memo[c] = r
            res[n] = r
        return res[inv.reshape(-1)] if len(codes) else np.zeros(0, dtype=bool)


def _relation_matrix(values: list, pred) -> tuple[np.ndarray, np.ndarray, list]:
    """``M[i, j] = pred(values[i], values[j])`` computed on distinct values."""
    codes, distinct = _codes(values)
    if isinstance(pred, Order):
        small = pred.matrix(distinct)
    else:
        small = np.array([[bool(pred(a, b)) for b in distinct] for a in distinct], dtype=bool).reshape(
            len(distinct), len(distinct)
        )
    return small[np.ix_(codes, codes)], codes, distinct


def _check_partial_order(order: Order, values: list, what: str, tol: float):
    _, distinct = _codes(values)
    M = order.matrix(distinct)
    bad = [distinct[i] for i in range(len(distinct)) if not M[i, i]]
    if bad:
        raise InputError(f"order on {what} is not reflexive at {bad[0]!r}")
    both = M & M.T
    for i, j in zip(*np.nonzero(np.triu(both, 1))):
        if not values_equal(distinct[i], distinct[j], tol):
            raise InputError(
                f"order on {what} is not antisymmetric: {distinct[i]!r} and {distinct[j]!r}"
            )


def _num_gap(a, b) -> float:
    g = value_gap(a, b)
    return 0.0 if g is None else g


# ---------------------------------------------------------------------------
# weak time consistency


def _wtc_direct(pair: AggregatorFactorPair, tol: float):
    """First (h, t, t') in input order with F(t) = F(t') and A(h,t) != A(h,t')."""
    fvals = [pair.F(t) for t in pair.tails]
    eqF, _, _ = _relation_matrix(fvals, lambda a, b: values_equal(a, b, tol))
    I, J = np.nonzero(eqF)
    avals = [pair.A(h, t) for h in pair.heads for t in pair.tails]
    acodes, adistinct = _codes(avals)
    rel = _LazyRelation(adistinct, lambda a, b: values_equal(a, b, tol))
    nt = len(pair.tails)
    for hi, h in enumerate(pair.heads):
        row = acodes[hi * nt:(hi + 1) * nt]
        ok = rel.pairs(row[I], row[J])
        bad = np.flatnonzero(~ok)
        if bad.size:
            i, j = I[bad[0]], J[bad[0]]
            return h, pair.tails[i], pair.tails[j]
    return None


def check_wtc(pair: AggregatorFactorPair, tol: float = DEFAULT_TOL) -> Verdict:
    """Weak time consistency, by enumeration and by subaggregator singletons."""
    direct = _wtc_direct(pair, tol)
    sub = build_subaggregator(pair, tol)
    via_sub = sub.is_mapping()
    details = {
        "tol": tol,
        "route_enumeration": "fail" if direct else "pass",
        "route_subaggregator": "pass" if via_sub else "fail",
        "routes_agree": (direct is None) == via_sub,
        "image_size": len(sub.image),
        "warnings": sub.warnings,
    }
    if direct is None and via_sub:
        return Verdict.ok("wtc", **details)
    if direct is not None:
        h, t, t2 = direct
        k = sub.tail_cluster[t]
        details["cell"] = {"h": h, "f": sub.image[k], "values": sub.values(h, k)}
        return Verdict.fail(
            "wtc",
            {
                "h": h, "t": t, "t_prime": t2,
                "F_t": pair.F(t), "F_t_prime": pair.F(t2),
                "A_h_t": pair.A(h, t), "A_h_t_prime": pair.A(h, t2),
            },
            discrepancy=value_gap(pair.A(h, t), pair.A(h, t2)),
            **details,
        )
    # only the clustering route failed (tolerance chaining); report its cell
    h, k = sub.non_singleton_cells()[0]
    cell = sub.cells[(h, k)]
    t, t2 = cell[0][1][0], cell[1][1][0]
    return Verdict.fail(
        "wtc",
        {"h": h, "t": t, "t_prime": t2, "F_t": pair.F(t), "F_t_prime": pair.F(t2),
         "A_h_t": pair.A(h, t), "A_h_t_prime": pair.A(h, t2)},
        discrepancy=value_gap(pair.A(h, t), pair.A(h, t2)),
        **details,
    )


def replay_wtc_witness(pair: AggregatorFactorPair, witness: dict, tol: float = DEFAULT_TOL) -> bool:
    """True if the witness exhibits F(t) = F(t') with A(h,t) != A(h,t')."""
    h, t, t2 = witness["h"], witness["t"], witness["t_prime"]
    return values_equal(pair.F(t), pair.F(t2), tol) and not values_equal(pair.A(h, t), pair.A(h, t2), tol)


def verify_nested_formula(pair: AggregatorFactorPair, sub: Subaggregator) -> Verdict:
    """Check ``A(h, t) = S(h, F(t))`` everywhere, with ``S`` single-valued."""
    worst = 0.0
    first = None
    for h in pair.heads:
        for t in pair.tails:
            k = sub.tail_cluster[t]
            vals = sub.values(h, k)
            a = pair.A(h, t)
            gap = max(_num_gap(a, v) for v in vals)
            worst = max(worst, gap)
            if first is None and (len(vals) != 1 or not values_equal(a, vals[0], sub.tol)):
                first = (h, t, k)
    if first is None:
        return Verdict.ok("nested_formula", discrepancy=worst, cells=len(sub.cells))
    h, t, k = first
    return Verdict.fail(
        "nested_formula",
        {"h": h, "t": t, "f": sub.image[k], "cell_values": sub.values(h, k), "A_h_t": pair.A(h, t)},
        discrepancy=worst,
        cells=len(sub.cells),
    )


# ---------------------------------------------------------------------------
# usual and strong time consistency


def _equivalence(order: Order):
    """``a ~ b`` iff ``a <= b`` and ``b <= a``; None means tol-equality."""
    if isinstance(order, (Componentwise, Equality)):
        return None
    return lambda a, b: order(a, b) and order(b, a)


def _ordered_clusters(pair, order_F: Order, order_A: Order, tol):
    """Subaggregator whose equalities are the order equivalences."""
    return build_subaggregator(
        pair,
        tol,
        f_equal=_equivalence(order_F),
        a_equal=_equivalence(order_A),
    )


def _sub_increasing(sub: Subaggregator, heads, head_pairs, oF: Order, rel: "_LazyRelation", adistinct) -> bool:
    """``S(h, f) <= S(h', f')`` for every listed ``(h, h')`` and ``f <= f'``."""
    index = {_key(v): i for i, v in enumerate(adistinct)}
    K, K2 = np.nonzero(oF.matrix(sub.image))
    codes = {h: np.array([index[_key(sub.values(h, k)[0])] for k in range(len(sub.image))]) for h in heads}
    return all(rel.pairs(codes[h][K], codes[h2][K2]).all() for h, h2 in head_pairs)


def check_utc(pair: AggregatorFactorPair, order_on_A=None, order_on_F=None, tol: float = DEFAULT_TOL) -> Verdict:
    """Usual time consistency: F(t) <= F(t') => A(h,t) <= A(h,t')."""
    oA, oF = make_order(order_on_A, tol), make_order(order_on_F, tol)
    fvals = [pair.F(t) for t in pair.tails]
    avals = [pair.A(h, t) for h in pair.heads for t in pair.tails]
    _check_partial_order(oF, fvals, "factor values", tol)
    _check_partial_order(oA, avals, "aggregator values", tol)

    leqF, _, _ = _relation_matrix(fvals, oF)
    I, J = np.nonzero(leqF)
    acodes, adistinct = _codes(avals)
    rel = _LazyRelation(adistinct, oA)
    nt = len(pair.tails)
    direct = None
    for hi, h in enumerate(pair.heads):
        row = acodes[hi * nt:(hi + 1) * nt]
        bad = np.flatnonzero(~rel.pairs(row[I], row[J]))
        if bad.size:
            direct = (h, pair.tails[I[bad[0]]], pair.tails[J[bad[0]]])
            break

    # subaggregator route: single-valued and increasing in f
    sub = _ordered_clusters(pair, oF, oA, tol)
    mapping = sub.is_mapping()
    increasing = mapping and _sub_increasing(sub, pair.heads, [(h, h) for h in pair.heads], oF, rel, adistinct)
    via_sub = mapping and increasing
    details = {
        "tol": tol,
        "order_on_A": oA.name,
        "order_on_F": oF.name,
        "route_enumeration": "fail" if direct else "pass",
        "route_subaggregator": "pass" if via_sub else "fail",
        "subaggregator_is_mapping": mapping,
        "routes_agree": (direct is None) == via_sub,
    }
    if direct is None:
        return Verdict.ok("utc", **details)
    h, t, t2 = direct
    return Verdict.fail(
        "utc",
        {"h": h, "t": t, "t_prime": t2, "F_t": pair.F(t), "F_t_prime": pair.F(t2),
         "A_h_t": pair.A(h, t), "A_h_t_prime": pair.A(h, t2)},
        **details,
    )


def check_stc(
    pair: AggregatorFactorPair, order_on_H=None, order_on_A=None, order_on_F=None, tol: float = DEFAULT_TOL
) -> Verdict:
    """Strong time consistency: h <= h' and F(t) <= F(t') => A(h,t) <= A(h',t')."""
    oH, oA, oF = make_order(order_on_H, tol), make_order(order_on_A, tol), make_order(order_on_F, tol)
    hvals = [pair.head_point(h) for h in pair.heads]
    fvals = [pair.F(t) for t in pair.tails]
    avals = [pair.A(h, t) for h in pair.heads for t in pair.tails]
    _check_partial_order(oH, hvals, "heads", tol)
    _check_partial_order(oF, fvals, "factor values", tol)
    _check_partial_order(oA, avals, "aggregator values", tol)

    leqH, _, _ = _relation_matrix(hvals, oH)
    leqF, _, _ = _relation_matrix(fvals, oF)
    I, J = np.nonzero(leqF)
    acodes, adistinct = _codes(avals)
    rel = _LazyRelation(adistinct, oA)
    nt = len(pair.tails)
    direct = None
    for hi, hj in zip(*np.nonzero(leqH)):
        row_i = acodes[hi * nt:(hi + 1) * nt]
        row_j = acodes[hj * nt:(hj + 1) * nt]
        bad = np.flatnonzero(~rel.pairs(row_i[I], row_j[J]))
        if bad.size:
            direct = (pair.heads[hi], pair.heads[hj], pair.tails[I[bad[0]]], pair.tails[J[bad[0]]])
            break

    sub = _ordered_clusters(pair, oF, oA, tol)
    mapping = sub.is_mapping()
    head_pairs = [(pair.heads[i], pair.heads[j]) for i, j in zip(*np.nonzero(leqH))]
    increasing = mapping and _sub_increasing(sub, pair.heads, head_pairs, oF, rel, adistinct)
    via_sub = mapping and increasing
    details = {
        "tol": tol,
        "order_on_H": oH.name,
        "order_on_A": oA.name,
        "order_on_F": oF.name,
        "route_enumeration": "fail" if direct else "pass",
        "route_subaggregator": "pass" if via_sub else "fail",
        "subaggregator_is_mapping": mapping,
        "routes_agree": (direct is None) == via_sub,
    }
    if direct is None:
        return Verdict.ok("stc", **details)
    h, h2, t, t2 = direct
    return Verdict.fail(
        "stc",
        {"h": h, "h_prime": h2, "t": t, "t_prime": t2, "F_t": pair.F(t), "F_t_prime": pair.F(t2),
         "A_h_t": pair.A(h, t), "A_h_prime_t_prime": pair.A(h2, t2)},
        **details,
    )


# ---------------------------------------------------------------------------
# JSON


_KEY_RE = re.compile(r"^\s*\(\s*(.+?)\s*,\s*(.+?)\s*\)\s*$")


def _labels(obj):
    if isinstance(obj, dict):
        return [str(k) for k in obj], {str(k): normalize_value(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [str(k) for k in obj], {}
    raise InputError("heads/tails: expected a list of labels or an object label -> point")


def pair_from_json(obj: dict) -> AggregatorFactorPair:
    """Read ``{"heads", "tails", "aggregator", "factor"}``.

    ``aggregator`` keys are ``"(h,t)"`` strings (or a nested object
    ``{h: {t: value}}``); ``factor`` keys are tail labels. Values are
    numbers, ``"+inf"``/``"-inf"``, vectors, or symbols.
    """
    if not isinstance(obj, dict):
        raise InputError("pair: expected a JSON object")
    for fld in ("heads", "tails", "aggregator", "factor"):
        if fld not in obj:
            raise InputError(f"pair: missing field '{fld}'")
    heads, hp = _labels(obj["heads"])
    tails, tp = _labels(obj["tails"])
    agg_in = obj["aggregator"]
    if not isinstance(agg_in, dict):
        raise InputError("aggregator: expected an object")
    agg = {}
    for key, val in agg_in.items():
        if isinstance(val, dict):
            for t, v in val.items():
                agg[(str(key), str(t))] = v
            continue
        m = _KEY_RE.match(key)
        if not m:
            raise InputError(f"aggregator: key {key!r} is not of the form '(h,t)'")
        agg[(m.group(1), m.group(2))] = val
    missing = [(h, t) for h in heads for t in tails if (h, t) not in agg]
    if missing:
        raise InputError(f"aggregator: missing entry for {missing[0]}")
    fac = obj["factor"]
    if not isinstance(fac, dict):
        raise InputError("factor: expected an object")
    fac = {str(k): v for k, v in fac.items()}
    miss_f = [t for t in tails if t not in fac]
    if miss_f:
        raise InputError(f"factor: missing entry for tail {miss_f[0]!r}")
    return AggregatorFactorPair.from_tables(heads, tails, agg, fac, hp, tp)


def pair_to_json(pair: AggregatorFactorPair) -> dict:
    from .verdict import jsonable

    heads = {h: jsonable(pair.head_points[h]) for h in pair.heads} if pair.head_points else list(map(str, pair.heads))
    tails = {t: jsonable(pair.tail_points[t]) for t in pair.tails} if pair.tail_points else list(map(str, pair.tails))
    return {
        "heads": heads,
        "tails": tails,
        "aggregator": {f"({h},{t})": jsonable(pair.A(h, t)) for h in pair.heads for t in pair.tails},
        "factor": {str(t): jsonable(pair.F(t)) for t in pair.tails},
    }
