import numpy as np
import pytest

from lamx.bound import BoundSpec, b_pop, b_pop_detail, limit_maps, minimax_bound
from lamx.errors import AssumptionError, InputError
from lamx.gmap import coord_map, linear_map, max_map, parse_gmap
from lamx.kink import KinkMap
from lamx.loss import Loss

SQ = Loss.power(2.0)
ID = KinkMap.make_identity()


def test_limit_maps_of_max():
    names = sorted(str(m) for m in limit_maps(max_map(2)))
    assert names == ["x1", "x2"]
    three = {str(m) for m in limit_maps(max_map(3))}
    assert {"x1", "x2", "x3", "max(x1, x2)", "max(x1, x3)", "max(x2, x3)"} <= three


def test_affine_bound_matches_closed_form():
    s = np.array([0.3, 0.7])
    sig = np.array([[2.0, 0.5], [0.5, 4.0]])
    spec = BoundSpec(linear_map(s), ID, (0.0, 0.0), sig, SQ, mc_size=40_000, c_grid=81)
    res = minimax_bound(spec)
    exact = float(s @ sig @ s)
    assert abs(res.value - exact) <= 3 * res.se + 1e-3
    assert abs(res.c_star) <= 2 * spec.M1 / (spec.c_grid - 1) + 0.05


def test_example6_scales_with_variance():
    sig = 2.5 * np.eye(2)
    spec = BoundSpec(max_map(2), ID, (0.0, 0.0), sig, SQ, mc_size=40_000, c_grid=81)
    res = minimax_bound(spec)
    assert res.value == pytest.approx(2.5, abs=0.1)
    assert abs(res.c_star) <= 0.2


def test_separated_max_is_a_coordinate():
    # beta0 separated: the derivative is the top coordinate, so B(c) = Sigma_22 + c^2
    spec = BoundSpec(max_map(2), ID, (0.0, 1.0), np.diag([1.0, 3.0]), SQ, mc_size=40_000)
    det = b_pop_detail(0.5, 1.0, spec)
    assert abs(det.value - 3.25) <= 3 * det.se + 1e-3


def test_zero_slope_is_degenerate():
    spec = BoundSpec(coord_map(1, 1), KinkMap.relu(), (-1.0,), [[1.0]], SQ, mc_size=100)
    res = minimax_bound(spec)
    assert res.degenerate and res.value == 0.0 and res.c_star == 0.0


def test_kink_scale_enters_as_a():
    spec = BoundSpec(coord_map(1, 1), KinkMap(2.0, 0.5, 0.0, 0.0), (0.3,), [[1.0]], SQ,
                     mc_size=20_000)
    res = minimax_bound(spec)
    assert res.s == 2.0
    assert res.value == pytest.approx(4.0, rel=0.05)


def test_envelope_dominates_grid_and_deterministic():
    g = parse_gmap("max(min(x1, x2), x3)")
    spec = BoundSpec(g, ID, (0.0, 0.0, 0.0), np.eye(3), SQ, mc_size=5000, seed=4)
    assert b_pop(0.2, 1.0, spec) == b_pop(0.2, 1.0, spec)
    with pytest.raises(InputError):
        b_pop(0.0, -1.0, spec)


def test_spec_validation():
    with pytest.raises(InputError):
        BoundSpec(max_map(2), ID, (0.0,), np.eye(2), SQ)
    with pytest.raises(InputError):
        BoundSpec(max_map(2), ID, (0.0, 0.0), np.eye(2), SQ, mc_size=1)
    with pytest.raises(AssumptionError):
        BoundSpec(max_map(2), ID, (0.0, 0.0), np.ones((2, 2)), SQ)
    assert BoundSpec(max_map(2), ID, (0, 0), np.diag([1.0, 4.0]), SQ).radius == 16.0
