import numpy as np
import pytest
from _oracles import pair_of, random_partial_order, random_tables, relation, stc_oracle, utc_oracle, wtc_oracle

from nestedrisk.consistency import (
    AggregatorFactorPair,
    Componentwise,
    build_subaggregator,
    check_stc,
    check_utc,
    check_wtc,
    pair_from_json,
    pair_to_json,
    replay_wtc_witness,
    verify_nested_formula,
)
from nestedrisk.verdict import InputError, Verdict


def tiny_pair():
    # F merges t0 and t1 but A separates them
    return pair_of(["h"], ["t0", "t1", "t2"], {("h", "t0"): 1, ("h", "t1"): 2, ("h", "t2"): 0}, {"t0": 5, "t1": 5, "t2": 3})


def test_wtc_fail_witness():
    v = check_wtc(tiny_pair())
    assert not v.passed
    assert (v.witness["t"], v.witness["t_prime"]) == ("t0", "t1")
    assert replay_wtc_witness(tiny_pair(), v.witness)
    assert v.details["routes_agree"]


def test_subaggregator_cell():
    sub = build_subaggregator(tiny_pair())
    assert sub("h", 5) == {1.0, 2.0}
    assert sub("h", 3) == {0.0}
    assert sub("h", 99) == set()
    assert not sub.is_mapping()


def test_injective_factor_is_consistent():
    A = {(h, t): hash((h, t)) % 17 for h in "ab" for t in "xyz"}
    pair = pair_of(list("ab"), list("xyz"), A, {"x": 0, "y": 1, "z": 2})
    assert check_wtc(pair).passed
    assert verify_nested_formula(pair, build_subaggregator(pair)).passed


def test_wtc_matches_oracle_and_nested_formula():
    rng = np.random.default_rng(7)
    seen = {True: 0, False: 0}
    for _ in range(400):
        heads, tails, A, F = random_tables(rng)
        pair = pair_of(heads, tails, A, F)
        v = check_wtc(pair)
        sub = build_subaggregator(pair)
        nested = verify_nested_formula(pair, sub)
        expected = wtc_oracle(heads, tails, A, F)
        assert v.passed == expected == sub.is_mapping() == nested.passed
        if not v.passed:
            assert replay_wtc_witness(pair, v.witness)
        seen[expected] += 1
    assert min(seen.values()) > 50


def test_utc_stc_match_oracles():
    rng = np.random.default_rng(11)
    for _ in range(300):
        heads, tails, A, F = random_tables(rng)
        pair = pair_of(heads, tails, A, F)
        pa, leqA = random_partial_order(rng, [float(a) for a in range(3)])
        pf, leqF = random_partial_order(rng, [float(f) for f in range(4)])
        ph, leqH = random_partial_order(rng, heads)
        Af = {k: float(v) for k, v in A.items()}
        Ff = {k: float(v) for k, v in F.items()}
        u = check_utc(pair, relation(pa), relation(pf))
        s = check_stc(pair, relation(ph), relation(pa), relation(pf))
        assert u.passed == utc_oracle(heads, tails, Af, Ff, leqA, leqF)
        assert s.passed == stc_oracle(heads, tails, Af, Ff, leqH, leqA, leqF)
        assert u.details["routes_agree"] and s.details["routes_agree"]


def test_numeric_orders_default_componentwise():
    heads = {"h0": [0.0], "h1": [1.0]}
    tails = {"a": [0.0], "b": [1.0]}
    pair = AggregatorFactorPair.from_functions(heads, tails, lambda h, t: h[0] + t[0], lambda t: t[0])
    assert check_utc(pair).passed
    assert check_stc(pair).passed
    flipped = AggregatorFactorPair.from_functions(heads, tails, lambda h, t: h[0] - t[0], lambda t: t[0])
    assert check_wtc(flipped).passed
    v = check_utc(flipped)
    assert not v.passed
    assert (v.witness["t"], v.witness["t_prime"]) == ("a", "b")


def test_vector_values_within_tolerance():
    pair = pair_of(["h"], ["a", "b"], {("h", "a"): (1.0, 2.0), ("h", "b"): (1.0 + 1e-12, 2.0)}, {"a": (0.0, 0.0), "b": (1e-12, 0.0)})
    assert check_wtc(pair).passed
    # at tol 0 the factor values split, so the pair is trivially consistent
    assert check_wtc(pair, tol=0.0).passed
    same_f = pair_of(["h"], ["a", "b"], {("h", "a"): 1.0, ("h", "b"): 1.0 + 1e-12}, {"a": 0.0, "b": 0.0})
    assert check_wtc(same_f).passed
    assert not check_wtc(same_f, tol=0.0).passed


def test_not_a_partial_order_rejected():
    pair = tiny_pair()
    cyclic = relation([(5.0, 3.0), (3.0, 5.0)])
    with pytest.raises(InputError):
        check_utc(pair, "componentwise", cyclic)


def test_verdict_does_not_depend_on_enumeration_order():
    rng = np.random.default_rng(3)
    for _ in range(100):
        heads, tails, A, F = random_tables(rng)
        pair = pair_of(heads, tails, A, F)
        shuffled = pair.reordered(heads=list(reversed(heads)), tails=list(rng.permutation(tails)))
        assert check_wtc(pair).passed == check_wtc(shuffled).passed
        assert check_utc(pair).passed == check_utc(shuffled).passed


def test_componentwise_order():
    o = Componentwise(1e-9)
    assert o((1.0, 2.0), (1.0, 3.0))
    assert not o((1.0, 4.0), (2.0, 3.0))


def test_json_roundtrip_and_verdict_roundtrip():
    pair = tiny_pair()
    again = pair_from_json(pair_to_json(pair))
    assert check_wtc(again).to_dict() == check_wtc(pair).to_dict()
    v = check_wtc(pair)
    assert Verdict.from_dict(v.to_dict()).to_dict() == v.to_dict()


@pytest.mark.parametrize(
    "obj",
    [
        {"heads": ["h"], "tails": ["t"], "aggregator": {}, "factor": {"t": 0}},
        {"heads": ["h"], "tails": ["t"], "aggregator": {"(h,t)": 0}, "factor": {}},
        {"heads": ["h"], "tails": ["t"], "aggregator": {"h|t": 0}, "factor": {"t": 0}},
        {"tails": ["t"], "aggregator": {}, "factor": {}},
    ],
)
def test_malformed_pairs(obj):
    with pytest.raises(InputError):
        pair_from_json(obj)
