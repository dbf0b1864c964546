import math

import numpy as np
import pytest
from hamsim.grover_search import (
    TwoStateFrame,
    bloch_map,
    continuous_evolution,
    decomposition_params,
    equivalence_check_fractional,
    equivalence_check_integral,
    equivalence_check_unequal,
    frame_hamiltonians,
    generator_axis,
    grover_emulate_continuous,
    grover_operator,
    grover_power,
    grover_step_count,
    grover_step_time,
    max_success_probability,
    phase_rotation,
    phase_rotation_as_oracle,
    rotation_axis,
    search_run,
    search_time,
)
from hamsim.hamiltonian_models import start_state_frame
from hamsim.linalg_core import exact_propagator, is_unitary, operator_distance

ITEMS = (2, 4, 16, 64, 256)
WEIGHTS = (-1.0, -0.5, 0.3, 1.0)


def test_four_items_found_with_certainty():
    steps, probability = search_run(4)
    assert steps == 1
    assert abs(probability - 1.0) < 1e-12


@pytest.mark.parametrize("n_items", [2, 3, 5, 16, 100, 1024, 2**16])
def test_success_probability_at_least_one_minus_one_over_n(n_items):
    _, probability = search_run(n_items)
    assert probability >= 1.0 - 1.0 / n_items - 1e-12


@pytest.mark.parametrize("n_items", ITEMS)
def test_whole_run_matches_grover_power(n_items):
    assert equivalence_check_integral(n_items) < 1e-10


@pytest.mark.parametrize("n_items", ITEMS)
def test_fractional_decomposition_over_time_grid(n_items):
    for t in np.linspace(0.0, 2.0 * search_time(n_items), 20):
        assert equivalence_check_fractional(n_items, t) < 1e-10


@pytest.mark.parametrize("n_items", ITEMS)
@pytest.mark.parametrize("a1", WEIGHTS)
def test_unequal_decomposition_over_time_grid(n_items, a1):
    for t in np.linspace(0.0, 2.0 * search_time(n_items), 20):
        assert equivalence_check_unequal(n_items, a1, t) < 1e-10


def test_decomposition_params_at_zero_time():
    params = decomposition_params(16, 0.3, 0.0)
    assert params.q == 0.0
    assert math.isclose(params.tau, grover_step_time(16))


def test_grover_power_matches_matrix_power():
    u = grover_operator(16)
    for q in (-3, -1, 0, 1, 2, 5):
        expected = np.linalg.matrix_power(u, q)
        assert operator_distance(grover_power(16, q), expected) < 1e-12


def test_half_power_squares_to_one_step():
    half = grover_power(64, 0.5)
    assert operator_distance(half @ half, grover_operator(64)) < 1e-12


def test_grover_operator_is_evolution_under_commutator():
    for n_items in ITEMS:
        _, h_g = frame_hamiltonians(n_items)
        expected = exact_propagator(h_g, grover_step_time(n_items))
        assert operator_distance(grover_operator(n_items), expected) < 1e-12


def test_phase_rotation_is_a_fractional_oracle_query():
    for beta in (-1.3, 0.0, 0.4, math.pi / 2):
        oracle = phase_rotation_as_oracle(beta)
        residual = operator_distance(phase_rotation(beta), oracle)
        assert residual < 1e-13


def test_continuous_search_reaches_target():
    for n_items in (4, 16, 256):
        probability = max_success_probability(n_items, 1.0, [search_time(n_items)])
        assert abs(probability - 1.0) < 1e-12


def test_continuous_evolution_is_unitary():
    for a1 in WEIGHTS:
        assert is_unitary(continuous_evolution(64, a1, 7.5))


@pytest.mark.parametrize("t", [0.0, 1.7, 12.0, 40.0])
def test_emulation_matches_continuous_evolution(t):
    emulation = grover_emulate_continuous(16, t)
    residual = operator_distance(
        continuous_evolution(16, 1.0, t), emulation.operator(), mod_phase=True
    )
    assert residual < 1e-10


def test_emulation_counts_whole_runs():
    period = search_time(16)
    emulation = grover_emulate_continuous(16, 3.5 * period)
    assert emulation.whole_runs == 3
    assert math.isclose(emulation.remainder, 0.5 * period)
    assert grover_step_count(16, 3.5 * period) >= 3 * emulation.unit_steps
    assert grover_step_count(16, 0.0) == 0.0


def test_emulation_rejects_negative_time():
    with pytest.raises(ValueError):
        grover_emulate_continuous(16, -1.0)


def test_bloch_vector_of_start_state():
    n_items = 16
    vector = bloch_map(start_state_frame(n_items))
    assert math.isclose(vector.x, 2.0 * math.sqrt(n_items - 1) / n_items)
    assert abs(vector.y) < 1e-15
    assert math.isclose(vector.z, (2.0 - n_items) / n_items)
    assert math.isclose(vector.norm, 1.0)


def test_bloch_map_of_projector_matches_state():
    s = start_state_frame(4)
    from_state = bloch_map(s)
    from_projector = bloch_map(np.outer(s, s.conj()))
    assert from_state.angle_to(from_projector) < 1e-7


def test_generator_and_grover_axes_lie_along_y():
    assert math.isclose(abs(generator_axis().y), 1.0)
    axis = rotation_axis(grover_operator(64))
    assert math.isclose(abs(axis.y), 1.0)
    assert abs(axis.x) < 1e-12 and abs(axis.z) < 1e-12


def test_frame_embeds_into_full_space():
    frame = TwoStateFrame(8)
    full = frame.embed(frame.start)
    assert np.allclose(full, np.full(8, 1.0 / math.sqrt(8)))
    embedded = frame.embed_operator(grover_operator(8))
    assert is_unitary(embedded)


@pytest.mark.parametrize("n_items", [0, 1])
def test_fewer_than_two_items_raise(n_items):
    with pytest.raises(ValueError):
        search_run(n_items)
    with pytest.raises(ValueError):
        TwoStateFrame(n_items)


@pytest.mark.parametrize("a1", [-0.5, 0.3])
def test_unequal_weights_never_reach_target(a1):
    times = np.linspace(0.0, 4.0 * search_time(16), 400)
    assert max_success_probability(16, a1, times) < 1.0 - 1e-3
