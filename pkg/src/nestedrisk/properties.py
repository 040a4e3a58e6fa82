"""Sampled checks of the analytic properties a subaggregator inherits.

Each checker draws points from the mapping's sampler with a seeded
generator and fails at the first sample, in stream order, that breaks the
inequality by more than ``tol``. A pass only says no violation was seen.
Continuity has no checker: no finite sample can certify it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .riskmeasures import avar
from .space import FiniteProbSpace
from .verdict import InconclusiveError, InputError, Verdict

DEFAULT_TOL = 1e-7


@dataclass
class CallableMapping:
    """A black-box map of one or more real-vector arguments.

    ``box`` holds one ``(lo, hi)`` per argument; the default sampler draws
    uniformly from it. A custom ``sampler(rng)`` must return a tuple of
    arrays, one per argument.
    """

    evaluator: Callable
    dims: tuple
    box: Sequence | None = None
    sampler: Callable | None = None
    lattice_closed: bool = True
    name: str = "mapping"
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        if self.sampler is None and self.box is None:
            raise InputError(f"{self.name}: give a box or a sampler")
        if self.box is not None and len(self.box) != len(self.dims):
            raise InputError(f"{self.name}: one (lo, hi) per argument expected")

    @property
    def arity(self) -> int:
        return len(self.dims)

    def sample(self, rng: np.random.Generator) -> tuple:
        if self.sampler is not None:
            return tuple(np.atleast_1d(np.asarray(a, dtype=float)) for a in self.sampler(rng))
        out = []
        for (lo, hi), d in zip(self.box, self.dims):
            out.append(rng.uniform(np.broadcast_to(lo, d), np.broadcast_to(hi, d)))
        return tuple(out)

    def __call__(self, *args) -> np.ndarray:
        return np.atleast_1d(np.asarray(self.evaluator(*args), dtype=float))


def _fail(check, witness, excess, samples_done, **details):
    return Verdict.fail(check, witness, discrepancy=float(excess), samples_tested=samples_done, **details)


def check_monotone_first_arg(m: CallableMapping, samples: int = 1000, seed: int = 0, tol: float = DEFAULT_TOL) -> Verdict:
    """``x <= x'`` componentwise => ``m(x, y) <= m(x', y)`` with ``y`` fixed.

    On a lattice-closed domain (a box) each draw gives the comparable pair
    ``(min(p, q), max(p, q))``; otherwise incomparable draws are skipped.
    """
    rng = np.random.default_rng(seed)
    tested = 0
    for _ in range(samples):
        p, q = m.sample(rng), m.sample(rng)
        rest = p[1:]
        if m.lattice_closed:
            lo, hi = np.minimum(p[0], q[0]), np.maximum(p[0], q[0])
        elif np.all(p[0] <= q[0]):
            lo, hi = p[0], q[0]
        elif np.all(q[0] <= p[0]):
            lo, hi = q[0], p[0]
        else:
            continue
        tested += 1
        a, b = m(lo, *rest), m(hi, *rest)
        excess = float(np.max(a - b))
        if excess > tol:
            return _fail(
                "monotone_first_arg",
                {"x": lo, "x_prime": hi, "rest": list(rest), "m_x": a, "m_x_prime": b},
                excess,
                tested,
                tol=tol,
                seed=seed,
            )
    if tested == 0:
        raise InconclusiveError("sampler produced no comparable pairs")
    return Verdict.ok("monotone_first_arg", samples_tested=tested, tol=tol, seed=seed)


def check_positive_homogeneity(
    a: CallableMapping,
    f: CallableMapping,
    s: CallableMapping,
    lambdas: Sequence[float] = (0.0, 0.5, 2.0),
    samples: int = 1000,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
) -> Verdict:
    """Joint positive homogeneity of ``s`` along the inheritance chain.

    For sampled ``(h, t)`` and each ``lam`` this checks, in order:
    ``f(lam t) = lam f(t)``, ``a(lam h, lam t) = lam a(h, t)``,
    ``s(h, f(t)) = a(h, t)`` and ``s(lam h, lam f(t)) = lam s(h, f(t))``.
    The failing step is named in the witness.
    """
    lams = [float(x) for x in lambdas]
    if any(x < 0 for x in lams):
        raise InputError("lambdas must be nonnegative")
    rng = np.random.default_rng(seed)
    for n in range(samples):
        h, t = a.sample(rng)[:2]
        ft = f(t)
        aht = a(h, t)
        sht = s(h, ft)
        steps_base = [("nested_formula", sht, aht)]
        for name, lhs, rhs in steps_base:
            excess = float(np.max(np.abs(lhs - rhs)))
            if excess > tol:
                return _fail("positive_homogeneity", {"step": name, "h": h, "t": t, "lhs": lhs, "rhs": rhs}, excess, n + 1, tol=tol)
        for lam in lams:
            steps = [
                ("factor_homogeneity", f(lam * t), lam * ft),
                ("aggregator_homogeneity", a(lam * h, lam * t), lam * aht),
                ("subaggregator_homogeneity", s(lam * h, lam * ft), lam * sht),
            ]
            for name, lhs, rhs in steps:
                excess = float(np.max(np.abs(lhs - rhs)))
                if excess > tol:
                    return _fail(
                        "positive_homogeneity",
                        {"step": name, "lambda": lam, "h": h, "t": t, "lhs": lhs, "rhs": rhs},
                        excess,
                        n + 1,
                        tol=tol,
                    )
    return Verdict.ok("positive_homogeneity", samples_tested=samples, lambdas=lams, tol=tol, seed=seed)


def _embed(i, dim: int) -> np.ndarray:
    v = np.atleast_1d(np.asarray(i, dtype=float))
    if v.size == 1 or (v.size != dim and np.all(v == v[0])):
        # constant vectors stand for their scalar in every space
        return np.full(dim, v[0])
    if v.size != dim:
        raise InputError(f"invariant of length {v.size} does not embed in dimension {dim}")
    return v


def check_translation_invariance(
    m: CallableMapping, invariants: Sequence, samples: int = 1000, seed: int = 0, tol: float = DEFAULT_TOL
) -> Verdict:
    """``m(x + i) = m(x) + i`` jointly in all arguments.

    A scalar invariant ``c`` stands for the constant vector ``c * 1`` in
    every space, and so does a constant vector; any other vector invariant
    must match each dimension.
    """
    if not len(invariants):
        raise InputError("no invariants given")
    rng = np.random.default_rng(seed)
    for n in range(samples):
        x = m.sample(rng)
        mx = m(*x)
        for i in invariants:
            shifted = [xk + _embed(i, xk.size) for xk in x]
            lhs = m(*shifted)
            rhs = mx + _embed(i, mx.size)
            excess = float(np.max(np.abs(lhs - rhs)))
            if excess > tol:
                return _fail(
                    "translation_invariance",
                    {"x": list(x), "i": i, "m_x_plus_i": lhs, "m_x_plus_i_expected": rhs},
                    excess,
                    n + 1,
                    tol=tol,
                    seed=seed,
                )
    return Verdict.ok("translation_invariance", samples_tested=samples, tol=tol, seed=seed)


def check_midpoint_convexity(
    m: CallableMapping, samples: int = 1000, seed: int = 0, tol: float = DEFAULT_TOL, assumption: str | None = None
) -> Verdict:
    """``m((p + q) / 2) <= (m(p) + m(q)) / 2`` on sampled pairs.

    ``assumption`` records what the caller asserts but cannot be sampled,
    e.g. that the factor is affine on a convex set covering its image.
    """
    rng = np.random.default_rng(seed)
    extra = {"assumption": assumption} if assumption else {}
    for n in range(samples):
        p, q = m.sample(rng), m.sample(rng)
        mid = [(u + v) / 2 for u, v in zip(p, q)]
        lhs = m(*mid)
        rhs = (m(*p) + m(*q)) / 2
        excess = float(np.max(lhs - rhs))
        if excess > tol:
            return _fail(
                "midpoint_convexity",
                {"p": list(p), "q": list(q), "m_mid": lhs, "chord_mid": rhs},
                excess,
                n + 1,
                tol=tol,
                seed=seed,
                **extra,
            )
    return Verdict.ok("midpoint_convexity", samples_tested=samples, tol=tol, seed=seed, **extra)


# ---------------------------------------------------------------------------
# named mappings for the command line


def _space(spec: dict, n: int) -> FiniteProbSpace:
    w = spec.get("weights")
    return FiniteProbSpace(w) if w is not None else FiniteProbSpace.uniform(n)


def builtin_mapping(spec: dict) -> CallableMapping:
    """Build a named mapping from a JSON-like description.

    Known names: ``avar`` (x -> AV@R(x)), ``avar_sum`` ((h, t) -> AV@R(h + t)),
    ``identity``, ``sum`` ((h, f) -> h + f), ``neg_first`` ((h, f) -> -h),
    ``square`` (x -> x**2), ``h_plus_log_f`` ((h, f) -> h + ln f),
    ``h_plus_t`` ((h, t) -> h + t) and ``exp`` (t -> exp t).
    """
    if not isinstance(spec, dict) or "name" not in spec:
        raise InputError("mapping: expected an object with a 'name' field")
    name = spec["name"]
    n = int(spec.get("dim", len(spec.get("weights", [])) or 1))
    box = spec.get("box")
    beta = float(spec.get("beta", 0.5))

    def mk(fn, dims, default_box):
        b = box if box is not None else default_box
        if len(b) != len(dims) or any(len(pair) != 2 for pair in b):
            raise InputError(f"{name}: box needs one [lo, hi] per argument")
        return CallableMapping(fn, dims, b, name=name)

    if name == "avar":
        sp = _space(spec, n)
        return mk(lambda x: avar(sp, beta, x), (sp.size,), [[-5, 5]])
    if name == "avar_sum":
        sp = _space(spec, n)
        return mk(lambda h, t: avar(sp, beta, h + t), (sp.size, sp.size), [[-5, 5], [-5, 5]])
    if name == "identity":
        return mk(lambda x: x, (n,), [[-5, 5]])
    if name == "sum":
        return mk(lambda h, f: h + f, (n, n), [[-5, 5], [-5, 5]])
    if name == "h_plus_t":
        return mk(lambda h, t: h + t, (1, 1), [[-1, 1], [-1, 1]])
    if name == "neg_first":
        return mk(lambda h, f: -h, (n, n), [[-5, 5], [-5, 5]])
    if name == "square":
        return mk(lambda x: x**2, (1,), [[-5, 5]])
    if name == "exp":
        return mk(np.exp, (1,), [[-1, 1]])
    if name == "h_plus_log_f":
        return mk(lambda h, f: h + np.log(f), (1, 1), [[-1, 1], [0.1, 10]])
    raise InputError(f"unknown mapping {name!r}")
