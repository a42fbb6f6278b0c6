import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import erf, owens_t

from gmink.errors import InputError
from gmink.gauss_core import ball_density, big_phi, inv_big_phi
from gmink.geometry import (Ball, HalfSpace, HBody, SymBox, circle_directions, half_circle_directions,
                            regular_polygon, wulff_shape, wulff_shape_2d)
from gmink.measure import (DEFAULT_QUAD, TIGHT_QUAD, MeasureVector, QuadratureConfig, cone_kernel,
                           facet_measures, fan_kernel, gaussian_volume, hbody_measure,
                           monte_carlo_volume, surface_area_diagnostic, total_gaussian_surface_area,
                           variational_check)

# mpmath references (30 digits): Cartesian integrals, independent of the angular kernels
HEXAGON_15_VOLUME = 0.70909504433947553293
HEXAGON_15_ATOM = 0.079462123474385352676
OCTAHEDRON_15_VOLUME = 0.6122077924680536
OCTAHEDRON_15_ATOM = 0.07445928900926946
SQUARE_1_VOLUME = 0.46606494267439227
CUBE_1_TOTAL = 0.67664443111137425
BOX_11_ATOM = 0.16519087103401669


def rectangle_mu1_closed_form(a1, a2):
    # (1/pi) exp(-a1^2/2) int_0^{a2} exp(-t^2/2) dt, with the integral via erf
    return math.exp(-0.5 * a1 * a1) / math.pi * math.sqrt(math.pi / 2) * erf(a2 / math.sqrt(2))


def owen_polygon_volume(P):
    # each edge fan contributes T(h, s_b/h) - T(h, s_a/h) to the complement mass
    sa, sb = P.edge_coordinates()
    h = P.support
    return 1.0 - float(np.sum(owens_t(h, sb / h) - owens_t(h, sa / h)))


def random_polygon(rng, m):
    th = np.sort(rng.uniform(0, math.pi, m))
    return wulff_shape_2d(HBody(np.column_stack([np.cos(th), np.sin(th)]), rng.uniform(0.4, 2.5, m)))


def test_box_atoms_and_volume():
    mv = facet_measures(SymBox([1.0, 1.0]))
    assert mv.weights == pytest.approx([BOX_11_ATOM] * 2, rel=1e-14)
    assert mv.total == pytest.approx(4 * BOX_11_ATOM, rel=1e-14)
    assert gaussian_volume(SymBox([1.0, 1.0])) == pytest.approx(SQUARE_1_VOLUME, rel=1e-14)
    assert total_gaussian_surface_area(SymBox([1.0] * 3)) == pytest.approx(CUBE_1_TOTAL, rel=1e-14)


@pytest.mark.parametrize("a1,a2", [(0.2, 3.0), (1.0, 1.0), (2.5, 0.4)])
def test_box_atom_matches_rectangle_closed_form(a1, a2):
    assert facet_measures(SymBox([a1, a2])).weights[0] == pytest.approx(rectangle_mu1_closed_form(a1, a2), rel=1e-13)


def test_polygon_paths_agree_with_box():
    for a in ([1.0, 1.0], [0.3, 2.2], [2.9, 0.7]):
        P = wulff_shape(SymBox(a).to_hbody())
        assert gaussian_volume(P) == pytest.approx(gaussian_volume(SymBox(a)), rel=1e-12)
        assert facet_measures(P).weights == pytest.approx(facet_measures(SymBox(a)).weights, rel=1e-12)


def test_3d_paths_agree_with_box():
    a = [0.7, 1.3, 2.1]
    P = wulff_shape(SymBox(a).to_hbody())
    assert gaussian_volume(P) == pytest.approx(gaussian_volume(SymBox(a)), rel=1e-10)
    assert facet_measures(P).weights == pytest.approx(facet_measures(SymBox(a)).weights, rel=1e-10)


def test_hexagon_and_octahedron_references():
    P = regular_polygon(3, 1.5)
    assert gaussian_volume(P) == pytest.approx(HEXAGON_15_VOLUME, rel=1e-13)
    assert facet_measures(P).weights == pytest.approx([HEXAGON_15_ATOM] * 3, rel=1e-13)
    d = np.array([[1, 1, 1], [1, -1, 1], [1, 1, -1], [-1, 1, 1]]) / math.sqrt(3)
    O = wulff_shape(HBody(d, [1.5] * 4))
    assert gaussian_volume(O) == pytest.approx(OCTAHEDRON_15_VOLUME, rel=1e-12)
    assert facet_measures(O).weights == pytest.approx([OCTAHEDRON_15_ATOM] * 4, rel=1e-12)


@given(st.integers(0, 100_000), st.integers(2, 7))
def test_polygon_volume_matches_owens_t(seed, m):
    P = random_polygon(np.random.default_rng(seed), m)
    assert gaussian_volume(P) == pytest.approx(owen_polygon_volume(P), abs=1e-12)


def test_disk_and_ball_closed_forms():
    r = math.sqrt(2 * math.log(2))
    assert gaussian_volume(Ball(r, 2)) == pytest.approx(0.5, rel=1e-14)
    assert gaussian_volume(Ball(1.3, 2)) == pytest.approx(1 - math.exp(-0.5 * 1.3 ** 2), rel=1e-14)
    assert total_gaussian_surface_area(Ball(1.3, 2)) == pytest.approx(2 * math.pi * ball_density(1.3, 2))
    assert gaussian_volume(SymBox([40.0, 40.0])) == 1.0


def test_regular_polygon_equal_weights():
    mv = facet_measures(regular_polygon(6, 1.4))
    assert np.ptp(mv.weights) < 1e-10


def test_disk_approximation_converges():
    r = 1.2
    exact = 2 * math.pi * ball_density(r, 2)
    errs = []
    for m in (16, 32, 64, 128):
        P = wulff_shape_2d(HBody(half_circle_directions(m), np.full(m, r)))
        errs.append(abs(facet_measures(P).total - exact))
    # circumscribed polygons: the error falls at least at first order in the mesh width
    for e0, e1 in zip(errs, errs[1:]):
        assert e1 < 0.6 * e0
    assert errs[-1] < 1e-3


def test_weak_convergence_under_perturbation():
    base = HBody(half_circle_directions(4), [1.0, 1.2, 0.9, 1.1])
    ref = facet_measures(wulff_shape(base)).weights
    diffs = []
    for eps in (1e-2, 1e-3, 1e-4):
        pert = base.with_support(base.support * (1 + eps * np.array([1, -1, 0.5, 0.3])))
        diffs.append(np.max(np.abs(facet_measures(wulff_shape(pert)).weights - ref)))
    assert diffs[0] > diffs[1] > diffs[2] and diffs[2] < 1e-4


def test_isoperimetric_at_half_volume():
    rhs = 1 / math.sqrt(2 * math.pi)
    r = math.sqrt(2 * math.log(2))
    assert total_gaussian_surface_area(Ball(r, 2)) >= rhs - 1e-9
    for n in (2, 3, 5):
        a = float(inv_big_phi(0.5 ** (1 / n) / 2 + 0.5))
        box = SymBox([a] * n)
        assert gaussian_volume(box) == pytest.approx(0.5, rel=1e-12)
        assert total_gaussian_surface_area(box) >= rhs - 1e-9


def test_tiny_and_huge_bodies_vanishing_measure():
    assert total_gaussian_surface_area(SymBox([1e-6, 1e-6])) < 1e-5
    assert total_gaussian_surface_area(SymBox([12.0, 12.0])) < 1e-20


def test_surface_diagnostic_bounded():
    ratios = [surface_area_diagnostic(SymBox([a] * 3))["ratio"] for a in (0.5, 1, 2, 4, 8)]
    assert max(ratios) < 1.0


def test_monte_carlo():
    p, se = monte_carlo_volume(HalfSpace((1.0, 0.0)), 100_000, seed=1)
    assert abs(p - 0.5) < 3 * se
    a, b = monte_carlo_volume(SymBox([1.0, 1.0]), 200_000, seed=7)
    assert abs(a - SQUARE_1_VOLUME) < 4 * b
    assert monte_carlo_volume(SymBox([1.0, 1.0]), 5000, seed=3) == monte_carlo_volume(SymBox([1.0, 1.0]), 5000, seed=3)
    with pytest.raises(InputError):
        monte_carlo_volume(SymBox([1.0, 1.0]), 10)


def test_variational_scaling_direction():
    K = SymBox([1.0, 1.0]).to_hbody()
    rep = variational_check(K, K.support, t_values=(1e-4,))
    w, _ = hbody_measure(K, TIGHT_QUAD)
    assert rep.measure_integral == pytest.approx(2 * float(K.support @ w))
    assert rep.rel_mismatch < 1e-4
    zero = variational_check(K, np.zeros(2))
    assert zero.measure_integral == 0 and abs(zero.extrapolated_slope) < 1e-12


@given(st.integers(0, 100_000))
def test_variational_random_hexagon(seed):
    rng = np.random.default_rng(seed)
    K = HBody(half_circle_directions(3, rng.uniform(0, 1)), rng.uniform(1.0, 2.0, 3))
    rep = variational_check(K, rng.uniform(-1, 1, 3))
    assert abs(rep.extrapolated_slope - rep.measure_integral) <= 1e-3 * max(abs(rep.measure_integral), 1e-12) + 1e-12


def test_kernels_limits():
    assert float(fan_kernel(np.array([0.0]), np.array([0.0]), np.array([1.0]))[0]) == 0.0
    big = float(fan_kernel(np.array([50.0]), np.array([-0.5]), np.array([0.5]))[0])
    assert big == pytest.approx(1.0, rel=1e-14)


def test_measure_vector_validation():
    with pytest.raises(InputError):
        MeasureVector(np.eye(2), [1.0])
    with pytest.raises(InputError):
        MeasureVector(np.eye(2), [1.0, -1.0])
    assert MeasureVector(np.eye(2), [0.1, 0.2]).total == pytest.approx(0.6)
    with pytest.raises(InputError):
        QuadratureConfig(target_rel_tol=0.0)
