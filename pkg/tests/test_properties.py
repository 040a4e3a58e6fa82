import itertools

import numpy as np
import pytest

from nestedrisk.properties import (
    CallableMapping,
    builtin_mapping,
    check_midpoint_convexity,
    check_monotone_first_arg,
    check_positive_homogeneity,
    check_translation_invariance,
)
from nestedrisk.verdict import InconclusiveError, InputError


def test_avar_passes_translation_and_homogeneity():
    m = builtin_mapping({"name": "avar", "dim": 4, "beta": 0.5})
    assert check_translation_invariance(m, [1.0, -2.5], samples=300).passed
    ident = builtin_mapping({"name": "identity", "dim": 4})
    agg = builtin_mapping({"name": "avar_sum", "dim": 4})
    s = builtin_mapping({"name": "avar_sum", "dim": 4})
    assert check_positive_homogeneity(agg, ident, s, samples=300).passed


def test_avar_monotone_and_convex():
    m = builtin_mapping({"name": "avar", "dim": 3, "beta": 0.25})
    assert check_monotone_first_arg(m, samples=300).passed
    assert check_midpoint_convexity(m, samples=300).passed


def test_log_subaggregator_not_convex():
    v = check_midpoint_convexity(builtin_mapping({"name": "h_plus_log_f"}), samples=500, seed=0)
    assert not v.passed
    w = v.witness
    m = lambda h, f: h + np.log(f)  # noqa: E731
    p, q = w["p"], w["q"]
    mid = m((p[0] + q[0]) / 2, (p[1] + q[1]) / 2)
    assert mid > (m(*p) + m(*q)) / 2


def test_square_is_convex_but_not_monotone():
    sq = builtin_mapping({"name": "square"})
    assert check_midpoint_convexity(sq, samples=200).passed
    assert not check_monotone_first_arg(sq, samples=200).passed


def test_homogeneity_failure_names_step():
    agg = builtin_mapping({"name": "h_plus_t"})
    f = builtin_mapping({"name": "exp"})
    s = builtin_mapping({"name": "h_plus_t"})
    v = check_positive_homogeneity(agg, f, s, samples=50)
    assert not v.passed
    assert v.witness["step"] in ("nested_formula", "factor_homogeneity")


def test_translation_failure():
    v = check_translation_invariance(builtin_mapping({"name": "square"}), [1.0], samples=20)
    assert not v.passed


def test_neg_first_not_monotone():
    assert not check_monotone_first_arg(builtin_mapping({"name": "neg_first", "dim": 2}), samples=50).passed


def test_seed_determinism():
    m = builtin_mapping({"name": "h_plus_log_f"})
    a = check_midpoint_convexity(m, samples=500, seed=5)
    b = check_midpoint_convexity(m, samples=500, seed=5)
    assert a.to_dict() == b.to_dict()


def test_incomparable_sampler_is_inconclusive():
    draws = itertools.cycle([np.array([1.0, 0.0]), np.array([0.0, 1.0])])
    m = CallableMapping(lambda x: x, (2,), sampler=lambda rng: (next(draws),), lattice_closed=False)
    with pytest.raises(InconclusiveError):
        check_monotone_first_arg(m, samples=20)


def test_bad_specs():
    with pytest.raises(InputError):
        builtin_mapping({"name": "nope"})
    with pytest.raises(InputError):
        builtin_mapping({"dim": 2})
    with pytest.raises(InputError):
        check_positive_homogeneity(*(builtin_mapping({"name": "h_plus_t"}),) * 3, lambdas=[-1.0])
