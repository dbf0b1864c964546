"""
Database search as Hamiltonian evolution, worked in the two-dimensional
frame {|t>, |t_perp>} spanned by the start state |s> and the target |t>.

Covers the Grover operator U_G and its (fractional) powers, the search
endpoint, the continuous evolution under a1|s><s| + |t><t|, and the
relations expressing one as the other:

    U_C(T) = i (1 - 2|t><t|) U_G^{Q_T}                          (whole run)
    U(t)   = e^{i beta s3} U_G^{Q} e^{i (pi/2 + beta) s3}     (any t, any a1)

Fractional powers go through the rotation generator of U_G, which is
exp(i alpha sigma_y) with alpha = 2 asin(1/sqrt(N)).

Dependencies:
    - numpy
    - hamiltonian_models (frame vectors, H_C and H_G), linalg_core
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from .hamiltonian_models import (
    PAULIS,
    SIGMA_Y,
    SIGMA_Z,
    SearchModel,
    search_hamiltonians,
    start_state_frame,
)
from .linalg_core import as_operator, as_state, exact_propagator, operator_distance

logger = logging.getLogger(__name__)

# i sigma_y, the generator direction of U_G
ROTATION = np.array([[0.0, 1.0], [-1.0, 0.0]], dtype=np.complex128)
ASIN_TOL = 1e-12


def grover_angle(n_items):
    """alpha = 2 asin(1/sqrt(N)), the rotation angle of one Grover step."""
    if n_items < 2:
        raise ValueError(f"search needs at least 2 items, got {n_items}")
    return 2.0 * math.asin(1.0 / math.sqrt(n_items))


def grover_step_time(n_items):
    """tau with U_G = exp(-i H_G tau)."""
    return 2.0 * n_items / math.sqrt(n_items - 1) * math.asin(1.0 / math.sqrt(n_items))


@dataclass(frozen=True)
class TwoStateFrame:
    """Basis |t> = e_0 and |t_perp> of the N-dimensional search space."""

    n_items: int

    def __post_init__(self):
        if self.n_items < 2:
            raise ValueError(f"search needs at least 2 items, got {self.n_items}")

    @property
    def start(self):
        return start_state_frame(self.n_items)

    @property
    def target(self):
        return np.array([1.0, 0.0], dtype=np.complex128)

    def basis(self):
        """N x 2 isometry whose columns are |t> and |t_perp>."""
        n = self.n_items
        iso = np.zeros((n, 2), dtype=np.complex128)
        iso[0, 0] = 1.0
        iso[1:, 1] = 1.0 / math.sqrt(n - 1)
        return iso

    def embed(self, vector):
        return self.basis() @ as_state(vector)

    def embed_operator(self, matrix):
        """Acts as `matrix` on the frame and as the identity elsewhere."""
        iso = self.basis()
        inside = iso @ as_operator(matrix) @ iso.conj().T
        return inside + np.eye(self.n_items) - iso @ iso.conj().T


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    def as_array(self):
        return np.array([self.x, self.y, self.z])

    @property
    def norm(self):
        return float(np.linalg.norm(self.as_array()))

    def angle_to(self, other):
        cosine = np.dot(self.as_array(), other.as_array()) / (self.norm * other.norm)
        return float(np.arccos(np.clip(cosine, -1.0, 1.0)))


@dataclass(frozen=True)
class GroverParams:
    """Parameters of U(t) = e^{i beta s3} U_G^Q e^{i (pi/2 + beta) s3}."""

    n_items: int
    q: float
    beta: float
    tau: float


def grover_operator(n_items):
    """U_G = -(1 - 2|s><s|)(1 - 2|t><t|) in the frame."""
    s = start_state_frame(n_items)
    eye = np.eye(2, dtype=np.complex128)
    reflect_start = eye - 2.0 * np.outer(s, s.conj())
    reflect_target = np.diag([-1.0, 1.0]).astype(np.complex128)
    return -reflect_start @ reflect_target


def grover_power(n_items, q):
    """U_G^Q = cos(Q alpha) I + sin(Q alpha) i sigma_y for any real Q."""
    angle = q * grover_angle(n_items)
    return math.cos(angle) * np.eye(2, dtype=np.complex128) + math.sin(angle) * ROTATION


def search_steps(n_items):
    """Q = floor(pi / (2 alpha))."""
    return math.floor(math.pi / (2.0 * grover_angle(n_items)))


def search_run(n_items):
    """
    Applies U_G Q times to |s>.
    output: (int:Q, float:success probability |<t|psi>|^2)
    """
    steps = search_steps(n_items)
    state = np.linalg.matrix_power(grover_operator(n_items), steps) @ start_state_frame(
        n_items
    )
    probability = float(abs(state[0]) ** 2)
    logger.debug("search N=%d: Q=%d, success %.15f", n_items, steps, probability)
    return steps, probability


def _traceless_field(n_items, a1):
    model = SearchModel(n_items=n_items, a1=a1)
    h_x = model.a1 * math.sqrt(n_items - 1) / n_items
    h_z = (1.0 - model.a1) / 2.0 + model.a1 / n_items
    return h_x, h_z, math.hypot(h_x, h_z)


def continuous_evolution(n_items, a1, t):
    """
    exp(-i H t) for H = a1|s><s| + |t><t| with its trace part removed:
    cos(At) I - i sin(At) (h_x sigma_x + h_z sigma_z) / A.
    """
    h_x, h_z, amplitude = _traceless_field(n_items, a1)
    if amplitude == 0:
        return np.eye(2, dtype=np.complex128)
    field = (h_x * PAULIS[0] + h_z * SIGMA_Z) / amplitude
    return (
        math.cos(amplitude * t) * np.eye(2, dtype=np.complex128)
        - 1j * math.sin(amplitude * t) * field
    )


def search_time(n_items):
    """T = (pi/2) sqrt(N)."""
    return 0.5 * math.pi * math.sqrt(n_items)


def whole_run_steps(n_items):
    """Q_T = acos(1/sqrt(N)) / (2 asin(1/sqrt(N)))."""
    return math.acos(1.0 / math.sqrt(n_items)) / grover_angle(n_items)


def equivalence_check_integral(n_items):
    """Residual of U_C(T) against i(1 - 2|t><t|) U_G^{Q_T}, modulo phase."""
    lhs = continuous_evolution(n_items, 1.0, search_time(n_items))
    reflect_target = np.diag([-1.0, 1.0]).astype(np.complex128)
    rhs = 1j * reflect_target @ grover_power(n_items, whole_run_steps(n_items))
    return operator_distance(lhs, rhs, mod_phase=True)


def decomposition_params(n_items, a1, t):
    """
    Q and beta of the Euler-type decomposition of U(t).

    Q alpha = asin(h_x sin(At) / A), and beta = -pi/4 - atan2(h_z sin(At), A
    cos(At)) / 2, which matches the diagonal of U(t) for every t.
    """
    h_x, h_z, amplitude = _traceless_field(n_items, a1)
    if amplitude == 0:
        return GroverParams(n_items, 0.0, -math.pi / 4.0, grover_step_time(n_items))
    sine = math.sin(amplitude * t)
    argument = h_x / amplitude * sine
    if abs(argument) > 1.0 + ASIN_TOL:
        raise ValueError(
            f"asin argument {argument} outside [-1, 1] for N={n_items}, a1={a1}, t={t}"
        )
    q = math.asin(max(-1.0, min(1.0, argument))) / grover_angle(n_items)
    beta = -math.pi / 4.0 - 0.5 * math.atan2(
        h_z / amplitude * sine, math.cos(amplitude * t)
    )
    return GroverParams(n_items=n_items, q=q, beta=beta, tau=grover_step_time(n_items))


def phase_rotation(beta):
    """e^{i beta sigma_z}."""
    return np.diag([np.exp(1j * beta), np.exp(-1j * beta)])


def phase_rotation_as_oracle(beta):
    """
    e^{i beta sigma_z} written as the fractional oracle query
    e^{-i beta} exp(2 i beta |t><t|).
    """
    query = exact_propagator(np.diag([1.0, 0.0]), -2.0 * beta)
    return np.exp(-1j * beta) * query


def decomposed_operator(params):
    """e^{i beta s3} U_G^Q e^{i (pi/2 + beta) s3}."""
    return (
        phase_rotation(params.beta)
        @ grover_power(params.n_items, params.q)
        @ phase_rotation(math.pi / 2.0 + params.beta)
    )


def equivalence_check_unequal(n_items, a1, t):
    """Residual of U(t) against its Euler-type decomposition, modulo phase."""
    params = decomposition_params(n_items, a1, t)
    return operator_distance(
        continuous_evolution(n_items, a1, t),
        decomposed_operator(params),
        mod_phase=True,
    )


def equivalence_check_fractional(n_items, t):
    """Equal-magnitude case (a1 = 1) of the decomposition check."""
    return equivalence_check_unequal(n_items, 1.0, t)


# Bloch sphere -------------------------------------------------------------------


def bloch_map(value):
    """Bloch vector of a frame state (length 2) or a 2x2 density/projector."""
    array = np.asarray(value, dtype=np.complex128)
    if array.ndim == 1:
        state = as_state(array)
        rho = np.outer(state, state.conj()) / np.vdot(state, state).real
    else:
        rho = as_operator(array)
        rho = rho / np.trace(rho).real
    x, y, z = (float(np.trace(rho @ pauli).real) for pauli in PAULIS)
    return BlochVector(x, y, z)


def rotation_axis(unitary):
    """Unit axis n of a 2x2 unitary written as e^{i phi}(cos th - i sin th n.s)."""
    u = as_operator(unitary)
    special = u / np.sqrt(np.linalg.det(u))
    components = np.array(
        [np.real(0.5j * np.trace(special @ pauli)) for pauli in PAULIS]
    )
    size = np.linalg.norm(components)
    if size == 0:
        return BlochVector(0.0, 0.0, 0.0)
    components /= size
    return BlochVector(*(float(c) for c in components))


def generator_axis():
    """Bloch axis of H_G, proportional to sigma_y."""
    return rotation_axis(exact_propagator(-SIGMA_Y, 1.0))


def max_success_probability(n_items, a1, times):
    """Largest |<t|U(t)|s>|^2 over a grid of times."""
    start = start_state_frame(n_items)
    return max(
        float(abs((continuous_evolution(n_items, a1, t) @ start)[0]) ** 2)
        for t in times
    )


# Emulating continuous evolution with Grover steps -------------------------------


def nearest_integer_steps(q):
    return math.floor(q + 0.5)


@dataclass(frozen=True)
class GroverEmulation:
    """U_C(t) = U_C(T)^k U_C(r), each factor rewritten with Grover steps."""

    n_items: int
    whole_runs: int
    remainder: float
    unit_steps: float
    tail: GroverParams

    @property
    def total_steps(self):
        return self.whole_runs * self.unit_steps + abs(self.tail.q)

    def operator(self):
        reflect_target = np.diag([-1.0, 1.0]).astype(np.complex128)
        unit = 1j * reflect_target @ grover_power(self.n_items, self.unit_steps)
        return np.linalg.matrix_power(unit, self.whole_runs) @ decomposed_operator(
            self.tail
        )


def grover_emulate_continuous(n_items, t):
    """Splits t >= 0 into whole search runs plus one fractional remainder."""
    if t < 0:
        raise ValueError(f"evolution time must be non-negative, got {t}")
    period = search_time(n_items)
    whole = math.floor(t / period)
    remainder = t - whole * period
    return GroverEmulation(
        n_items=n_items,
        whole_runs=whole,
        remainder=remainder,
        unit_steps=whole_run_steps(n_items),
        tail=decomposition_params(n_items, 1.0, remainder),
    )


def grover_step_count(n_items, t):
    """Total (fractional) number of U_G iterations that emulate U_C(t)."""
    return grover_emulate_continuous(n_items, t).total_steps


def frame_hamiltonians(n_items, a1=1.0):
    """H_C and H_G in the frame (see hamiltonian_models.search_hamiltonians)."""
    h_c, h_g, _ = search_hamiltonians(SearchModel(n_items=n_items, a1=a1))
    return h_c, h_g
