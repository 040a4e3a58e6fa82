import math

import numpy as np
import pytest
from _oracles import conj, upper

from nestedrisk.conjugacy import (
    Coupling,
    DecomposableSystem,
    check_decomposable,
    check_nested_conjugate,
    fm_conjugate,
    function_from_json,
    random_decomposable_system,
    random_function,
    random_system,
    system_from_json,
    system_to_json,
)
from nestedrisk.extreal import INF, NEG_INF, PROBE_SET
from nestedrisk.verdict import InputError, PreconditionError


def oracle_sides(sys, g):
    """Both sides of the nested formula, evaluated with plain floats."""
    phi = lambda p, y: float(sys.phi[(p, y)])  # noqa: E731
    gf = {y: float(g[y]) for y in sys.Y}
    G = {(y, z): upper(gf[y], phi(sys.theta_z[z], y)) for y in sys.Y for z in sys.Z}
    lhs = conj(G, list(G), sys.X, lambda yz, x: phi(sys.theta_xz[(x, yz[1])], yz[0]))
    g_phi = conj(gf, sys.Y, sys.Yp, lambda y, p: phi(p, y))
    return lhs, {x: g_phi[sys.theta_x[x]] for x in sys.X}


def test_conjugate_small_example():
    # c(y, s) = y * s on {-1, 0, 1}
    pts = [-1, 0, 1]
    c = Coupling(pts, pts, {(y, s): y * s for y in pts for s in pts})
    f = {-1: INF, 0: 0, 1: 2}
    assert fm_conjugate(f, c) == {-1: 0, 0: 0, 1: 0}


def test_conjugate_of_empty_domain_is_minus_infinity():
    c = Coupling([], ["s"], {})
    assert fm_conjugate({}, c) == {"s": -math.inf}


def test_conjugate_of_plus_infinity_is_minus_infinity():
    pts = [0, 1]
    c = Coupling(pts, pts, {(a, b): a + b for a in pts for b in pts})
    assert all(v == -math.inf for v in fm_conjugate({0: INF, 1: INF}, c).values())


def test_conjugate_antitone():
    rng = np.random.default_rng(0)
    pts = list(range(4))
    c = Coupling(pts, pts, {(a, b): PROBE_SET[int(rng.integers(5))] for a in pts for b in pts})
    for _ in range(200):
        f = random_function(rng, pts)
        g = {k: max(v, random_function(rng, [k])[k]) for k, v in f.items()}  # g >= f
        cf, cg = fm_conjugate(f, c), fm_conjugate(g, c)
        assert all(cg[s] <= cf[s] for s in pts)


def test_random_decomposable_systems_against_oracle():
    rng = np.random.default_rng(42)
    for _ in range(100):
        sys = random_decomposable_system(rng, max_size=5)
        assert check_decomposable(sys).passed
        g = random_function(rng, sys.Y)
        v = check_nested_conjugate(sys, g)
        lhs, rhs = oracle_sides(sys, g)
        assert v.passed
        assert lhs == rhs
        assert v.details["chain_holds"]


def test_generator_stays_in_probe_set():
    rng = np.random.default_rng(5)
    for _ in range(50):
        sys = random_decomposable_system(rng)
        assert set(sys.phi.values()) <= set(PROBE_SET)


def test_non_decomposable_needs_exploratory_flag():
    sys = DecomposableSystem(
        ["x"], ["y"], ["z"], ["a", "b"],
        {("x", "z"): "a"}, {"x": "b"}, {"z": "a"},
        {("a", "y"): 0, ("b", "y"): 1},
    )
    assert not check_decomposable(sys).passed
    with pytest.raises(PreconditionError):
        check_nested_conjugate(sys, {"y": 0})
    v = check_nested_conjugate(sys, {"y": 0}, exploratory=True)
    assert not v.passed
    lhs, rhs = oracle_sides(sys, v.witness["g"])
    assert lhs[v.witness["x"]] != rhs[v.witness["x"]]


def test_exploratory_detects_random_non_decomposable():
    rng = np.random.default_rng(9)
    found = total = 0
    while total < 100:
        sys = random_system(rng, max_size=6, min_size=3)
        if check_decomposable(sys).passed:
            continue
        total += 1
        v = check_nested_conjugate(sys, random_function(rng, sys.Y), exploratory=True)
        found += not v.passed
    assert found >= 95


def test_missing_g_entry():
    rng = np.random.default_rng(1)
    sys = random_decomposable_system(rng, min_size=2)
    with pytest.raises(InputError):
        check_nested_conjugate(sys, {})


def test_json_roundtrip():
    rng = np.random.default_rng(2)
    sys = random_decomposable_system(rng, max_size=4)
    again = system_from_json(system_to_json(sys))
    assert again.phi == sys.phi and again.theta_x == sys.theta_x
    assert function_from_json({"y0": "-inf", "y1": 1}) == {"y0": NEG_INF, "y1": 1}
    with pytest.raises(InputError):
        system_from_json({"X": []})
