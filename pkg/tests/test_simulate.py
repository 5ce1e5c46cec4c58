import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graphdamp import Prehistory, SimulationDiverged, apply_ell, simulate, solve_bvp, verify_damping
from graphdamp.mesh import BrokenLinear
from graphdamp.simulate import step_weights

from conftest import SUITE, interval, load, star
from test_delay import random_function


def constant_control(mesh, values):
    return BrokenLinear({j: np.full(mesh.N[j], v) for j, v in values.items()},
                        {j: np.full(mesh.N[j], v) for j, v in values.items()})


def test_constant_state_propagates():
    sys, mesh = star(refine=2)
    y = simulate(sys, mesh, constant_control(mesh, {1: 0.0, 2: 0.0, 3: 0.0}))
    assert y.max_abs() == 1.0 and min(v.min() for v in y.edges.values()) == 1.0


def test_exponential_decay():
    sys, mesh = interval(refine=8, b=1.0)
    y = simulate(sys, mesh, constant_control(mesh, {1: 0.0}))
    assert abs(y.edges[1][8] - math.exp(-1.0)) <= 1e-12
    assert np.allclose(y.edges[1], np.exp(-mesh.nodes(1)), rtol=0, atol=1e-12)


def test_star_hand_control():
    sys, mesh = star(refine=4)
    u = constant_control(mesh, {1: -0.25, 2: -0.125, 3: -0.125})
    for j in (2, 3):
        u.left[j][8:] = 0.0
        u.right[j][8:] = 0.0
    y = simulate(sys, mesh, u)
    t = mesh.nodes(1)
    assert np.allclose(y.edges[1], 1 - t / 4, atol=1e-15)
    for j in (2, 3):
        assert np.allclose(y.edges[j], np.maximum(0.25 - t / 8, 0.0), atol=1e-15)
    damping = verify_damping(y, mesh)
    assert damping == {2: 0.0, 3: 0.0}


def test_verify_damping_constant():
    sys, mesh = star(refine=2)
    y = mesh.zeros() + mesh.zeros()
    for v in y.edges.values():
        v[:] = 1.0
    assert verify_damping(y, mesh) == {2: 1.0, 3: 1.0}


def test_divergence_detected():
    sys, mesh = interval(refine=1)
    u = constant_control(mesh, {1: np.inf})
    with pytest.raises(SimulationDiverged):
        simulate(sys, mesh, u)


@pytest.mark.parametrize("z", [0.0, 1e-14, 1e-9, -1e-9, 1e-4, 0.3, -0.49, 0.51, 2.0, -3.0])
def test_step_weights_against_quadrature(z):
    with mpmath.workdps(40):
        e1 = float(mpmath.quad(lambda r: mpmath.exp(-z * r), [0, 1]))
        e2 = float(mpmath.quad(lambda r: r * mpmath.exp(-z * r), [0, 1]))
    decay, wl, wr = step_weights(z)
    assert decay == math.exp(-z)
    assert wl == pytest.approx(e2, rel=1e-14)
    assert wr == pytest.approx(e1 - e2, rel=1e-13)


def test_small_b_matches_trapezoid():
    # the b -> 0 limit must agree with the b = 0 formula to rounding
    sys0, mesh = interval(refine=4, b=0.0, c=0.3, phi=Prehistory.polynomial(1, 0.5))
    sys1, _ = interval(refine=4, b=1e-13, c=0.3, phi=Prehistory.polynomial(1, 0.5))
    u = constant_control(mesh, {1: 0.2})
    y0, y1 = simulate(sys0, mesh, u), simulate(sys1, mesh, u)
    assert np.allclose(y0.edges[1], y1.edges[1], rtol=0, atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(SUITE), st.integers(0, 2**31))
def test_round_trip(name, seed):
    sys, mesh = load(name).build(2)
    y = random_function(mesh, np.random.default_rng(seed))
    replay = simulate(sys, mesh, apply_ell(sys, mesh, y), prehistory=y.prehistory)
    assert max(np.max(np.abs(replay.edges[j] - y.edges[j])) for j in mesh.tree.edges) <= 1e-10


def test_causality():
    sys, mesh = load("branching_mixed").build(2)
    u = solve_bvp(sys, mesh).u
    base = simulate(sys, mesh, u)
    j, p = 6, 3
    u.left[j][p] += 1.0
    u.right[j][p] += 1.0
    bumped = simulate(sys, mesh, u)
    for e in mesh.tree.path_to_root(j)[1:]:
        assert np.array_equal(bumped.edges[e], base.edges[e])
    assert np.array_equal(bumped.edges[j][:p + 1], base.edges[j][:p + 1])
    assert not np.array_equal(bumped.edges[j][p + 1:], base.edges[j][p + 1:])
    # sibling subtrees are untouched as well
    assert np.array_equal(bumped.edges[2], base.edges[2])
