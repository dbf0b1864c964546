import math

import numpy as np
import pytest
from hamsim.chebyshev_evolution import (
    SpectralWindow,
    chebyshev_coefficients,
    chebyshev_matrices,
    clenshaw_apply,
    evolve_chebyshev,
    one_shot_bound,
    one_shot_order,
    plan_chebyshev,
    rescale,
    spectral_bounds,
)
from hamsim.hamiltonian_models import laplacian_dense, laplacian_parts
from hamsim.linalg_core import PrecisionBudgetError, exact_evolve, state_distance
from hamsim.projector_series import reflection_coefficients
from hamsim.seeding import SeededGenerator, random_hermitian, random_unit_vector


def _random_problem(dim, seed):
    gen = SeededGenerator(seed)
    return random_hermitian(dim, gen), random_unit_vector(dim, gen)


def test_gershgorin_window_encloses_spectrum():
    h, _ = _random_problem(20, 1)
    window = spectral_bounds(h)
    assert window.contains(np.linalg.eigvalsh(h))
    lattice = spectral_bounds(list(laplacian_parts(16)))
    assert (lattice.lambda_min, lattice.lambda_max) == (0.0, 2.0)


def test_window_validation():
    with pytest.raises(ValueError):
        SpectralWindow(1.0, 0.0)
    assert SpectralWindow(2.0, 2.0).degenerate


def test_rescale_maps_window_to_unit_interval():
    window = SpectralWindow(-3.0, 5.0)
    scaling = rescale(window, 2.0)
    assert scaling.t_tilde == 8.0
    h_tilde = scaling.dense(np.diag([-3.0, 1.0, 5.0]))
    assert np.allclose(np.diag(h_tilde), [-1.0, 0.0, 1.0])
    assert abs(scaling.global_phase - np.exp(-2j)) < 1e-15


def test_coefficients_relate_to_reflection_series():
    t_tilde, order = 3.7, 25
    c = chebyshev_coefficients(t_tilde, order)
    r = reflection_coefficients(-t_tilde, order)
    forward = reflection_coefficients(t_tilde, order)
    assert abs(c[0] - r[0]) < 1e-13
    for k in range(1, order + 1):
        assert abs(c[k] / 2 - r[k]) < 1e-13
        assert abs(abs(c[k]) / 2 - abs(forward[k])) < 1e-13


def test_clenshaw_matches_dense_sum():
    for seed, dim in ((2, 8), (3, 16)):
        h, x = _random_problem(dim, seed)
        window = spectral_bounds(h)
        h_tilde = rescale(window, 1.0).dense(h)
        coeffs = chebyshev_coefficients(4.0, 20)
        mats = chebyshev_matrices(h_tilde, 20)
        expected = sum(coeffs[k] * (mats[k] @ x) for k in range(21))
        got = clenshaw_apply(lambda v: h_tilde @ v, coeffs, x)
        assert state_distance(got, expected) < 1e-11


def test_clenshaw_uses_one_application_per_order():
    calls = []
    h_tilde = np.diag([0.5, -0.25, 0.0])

    def counted(v):
        calls.append(1)
        return h_tilde @ v

    clenshaw_apply(counted, chebyshev_coefficients(2.0, 9), np.ones(3))
    assert len(calls) == 9
    assert np.allclose(
        clenshaw_apply(counted, [0.5], np.ones(3)), 0.5 * np.ones(3)
    )


@pytest.mark.parametrize("eps", [1e-6, 1e-10])
def test_stepped_evolution_meets_requested_accuracy(eps):
    h, x = _random_problem(32, 4)
    for t in (0.5, 3.0):
        result = evolve_chebyshev(h, t, x, eps=eps)
        assert state_distance(result, exact_evolve(h, t, x)) < eps


def test_lattice_parts_evolution():
    parts = list(laplacian_parts(32))
    x = random_unit_vector(32, SeededGenerator(5))
    result = evolve_chebyshev(parts, 50.0, x, eps=1e-9)
    assert state_distance(result, exact_evolve(laplacian_dense(32), 50.0, x)) < 1e-9


def test_degenerate_window_is_a_phase():
    x = random_unit_vector(4, SeededGenerator(6))
    result = evolve_chebyshev(2.0 * np.eye(4), 1.5, x)
    assert state_distance(result, np.exp(-3j) * x) < 1e-15


def test_plan_counts():
    window = SpectralWindow(0.0, 2.0)
    plan = plan_chebyshev(window, 100.0, 1e-5)
    assert plan.steps == 32
    assert plan.order == 12
    assert plan.part_applications == 32 * 12
    zero = plan_chebyshev(window, 0.0, 1e-5)
    assert (zero.steps, zero.order) == (0, 0)
    with pytest.raises(ValueError):
        plan_chebyshev(window, 1.0, 1e-5, mode="fast")


def test_one_shot_orders():
    assert one_shot_order(10.0, 1e-8) == 25
    assert one_shot_order(30.0, 1e-8) == 55
    for t_tilde in (10.0, 30.0):
        order = one_shot_order(t_tilde, 1e-8)
        assert order > math.e * t_tilde / 2
        assert one_shot_bound(t_tilde, order) < 1e-8
        assert one_shot_bound(t_tilde, order - 1) >= 1e-8
    with pytest.raises(PrecisionBudgetError):
        one_shot_order(400.0, 1e-12)


def test_one_shot_evolution_within_bound():
    h, x = _random_problem(16, 7)
    window = spectral_bounds(h)
    t = 10.0 / window.half_width
    result = evolve_chebyshev(h, t, x, eps=1e-8, mode="one_shot", window=window)
    assert state_distance(result, exact_evolve(h, t, x)) < 1e-8


def _quadrature_coefficients(t, order, nodes=4096):
    # (2/pi) int_0^pi e^{-it cos(theta)} cos(k theta) dtheta, trapezoidal rule
    theta = np.linspace(0.0, math.pi, nodes)
    weights = np.full(nodes, theta[1] - theta[0])
    weights[[0, -1]] /= 2.0
    phase = np.exp(-1j * t * np.cos(theta))
    coeffs = np.array(
        [np.sum(weights * phase * np.cos(k * theta)) for k in range(order + 1)]
    )
    coeffs *= 2.0 / math.pi
    coeffs[0] /= 2.0
    return coeffs


@pytest.mark.parametrize("t", [0.5, 3.0, 10.0])
def test_coefficients_match_quadrature(t):
    got = chebyshev_coefficients(t, 20)
    assert np.max(np.abs(got - _quadrature_coefficients(t, 20))) < 1e-10


def test_chebyshev_matrices_match_spectral_definition():
    h, _ = _random_problem(8, 8)
    h_tilde = rescale(spectral_bounds(h), 1.0).dense(h)
    eigvals, eigvecs = np.linalg.eigh(h_tilde)
    assert np.all(np.abs(eigvals) <= 1.0)
    angles = np.arccos(eigvals)
    for k, matrix in enumerate(chebyshev_matrices(h_tilde, 20)):
        expected = (eigvecs * np.cos(k * angles)) @ eigvecs.conj().T
        assert np.max(np.abs(matrix - expected)) < 1e-12


def test_one_shot_measured_order_not_above_bound_order():
    h, x = _random_problem(16, 9)
    window = spectral_bounds(h)
    t = 10.0 / window.half_width
    eps = 1e-8
    reference = exact_evolve(h, t, x)
    predicted = one_shot_order(rescale(window, t).t_tilde, eps)
    measured = next(
        p
        for p in range(predicted + 1)
        if state_distance(
            evolve_chebyshev(h, t, x, mode="one_shot", window=window, order=p),
            reference,
        )
        < eps
    )
    assert measured <= predicted
