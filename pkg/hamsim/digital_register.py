"""
Fixed-point emulation of digitally encoded state vectors.

Every real component is a b-bit signed integer; one power-of-two exponent
is shared by the whole state (value = int * 2^(exponent - b), |int| < 2^b).
Each arithmetic operation is carried out exactly on Python integers and
rounded once back to b bits, either towards zero ("truncate") or to the
nearest integer ("nearest"). The exponent follows the largest component, so
a carry out of the top bit bumps it instead of wrapping.

On top of the register arithmetic this module provides the fragment
y = (rI + R)x, the Clenshaw recursion in fixed point, round-off scans over
the register width and the lift of an observable to register space.

Dependencies:
    - numpy
    - chebyshev_evolution (plans), hamiltonian_models (parts)
"""

import logging
import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .chebyshev_evolution import plan_chebyshev, spectral_bounds
from .hamiltonian_models import SIGMA_X, BlockDiagonalPart, NotReflectionError
from .linalg_core import as_operator, as_state, check_dims, operator_norm

logger = logging.getLogger(__name__)

ROUNDING_MODES = ("truncate", "nearest")
MIN_BITS = 4
MAX_BITS = 52
MAX_LIFT_DIM = 8
MAX_LIFT_BITS = 6
LIFT_ACCEPTANCE = 4.0


@dataclass(frozen=True)
class FixedPointConfig:
    bits: int
    rounding: str = "truncate"

    def __post_init__(self):
        if not MIN_BITS <= self.bits <= MAX_BITS:
            raise ValueError(
                f"register width must lie in [{MIN_BITS}, {MAX_BITS}], got {self.bits}"
            )
        if self.rounding not in ROUNDING_MODES:
            raise ValueError(
                f"unknown rounding {self.rounding!r}, expected {ROUNDING_MODES}"
            )

    @property
    def quantum(self):
        """Spacing of representable values for exponent 0."""
        return 2.0 ** (-self.bits)


@dataclass(frozen=True)
class DigitalState:
    """Registers (int_re, int_im) per index sharing one exponent."""

    config: FixedPointConfig
    exponent: int
    re: np.ndarray
    im: np.ndarray

    @property
    def dim(self):
        return self.re.size

    def decode(self):
        shift = self.exponent - self.config.bits
        return np.array(
            [
                complex(math.ldexp(int(a), shift), math.ldexp(int(b), shift))
                for a, b in zip(self.re, self.im)
            ],
            dtype=np.complex128,
        )

    def zeros_like(self):
        return DigitalState(
            config=self.config,
            exponent=self.exponent,
            re=_int_array([0] * self.dim),
            im=_int_array([0] * self.dim),
        )


def _int_array(values):
    array = np.empty(len(values), dtype=object)
    array[:] = [int(v) for v in values]
    return array


def _round_shift(value, shift, rounding):
    """value / 2^shift rounded to an integer, for shift > 0."""
    magnitude = abs(value)
    if rounding == "nearest":
        magnitude += 1 << (shift - 1)
    magnitude >>= shift
    return -magnitude if value < 0 else magnitude


def _from_raw(raw_re, raw_im, scale, config):
    """
    Normalises exact integers (value = raw * 2^scale) into b-bit registers
    with the tightest shared exponent.
    """
    bits = config.bits
    top = max(
        (abs(int(v)).bit_length() for v in list(raw_re) + list(raw_im)), default=0
    )
    if top == 0:
        zeros = _int_array([0] * len(raw_re))
        return DigitalState(config, 0, zeros, zeros.copy())
    shift = top - bits
    exponent = scale + top
    if shift > 0:
        re = [_round_shift(int(v), shift, config.rounding) for v in raw_re]
        im = [_round_shift(int(v), shift, config.rounding) for v in raw_im]
        # rounding up may reach 2^b
        if any(abs(v) >> bits for v in re + im):
            re = [_round_shift(v, 1, config.rounding) for v in re]
            im = [_round_shift(v, 1, config.rounding) for v in im]
            exponent += 1
    else:
        re = [int(v) << -shift for v in raw_re]
        im = [int(v) << -shift for v in raw_im]
    return DigitalState(config, exponent, _int_array(re), _int_array(im))


def _float_to_raw(value, bits, exponent, rounding):
    scaled = math.ldexp(abs(value), bits - exponent)
    if rounding == "nearest":
        scaled += 0.5
    magnitude = math.floor(scaled)
    return -magnitude if value < 0 else magnitude


def encode(x, config):
    """
    Quantises amplitudes into b-bit registers.
    input: state, FixedPointConfig
    output: DigitalState
    """
    state = as_state(x)
    if not np.all(np.isfinite(state)):
        raise ValueError("cannot encode non-finite amplitudes")
    largest = float(np.max(np.abs(np.concatenate([state.real, state.imag]))))
    if largest == 0:
        return _from_raw([0] * state.size, [0] * state.size, 0, config)
    exponent = math.frexp(largest)[1]
    raw_re = [
        _float_to_raw(v, config.bits, exponent, config.rounding) for v in state.real
    ]
    raw_im = [
        _float_to_raw(v, config.bits, exponent, config.rounding) for v in state.imag
    ]
    return _from_raw(raw_re, raw_im, exponent - config.bits, config)


def decode(state):
    return state.decode()


def _encode_scalar(value, config):
    single = encode(np.array([value]), config)
    return int(single.re[0]), int(single.im[0]), single.exponent


def _aligned(a, b):
    check_dims(a.dim, b.dim)
    low = min(a.exponent, b.exponent)
    left = 1 << (a.exponent - low)
    right = 1 << (b.exponent - low)
    return a.re * left, a.im * left, b.re * right, b.im * right, low - a.config.bits


def _combine(a, b, sign):
    a_re, a_im, b_re, b_im, scale = _aligned(a, b)
    result = _from_raw(a_re + sign * b_re, a_im + sign * b_im, scale, a.config)
    if result.exponent > max(a.exponent, b.exponent):
        logger.info("register overflow: exponent bumped to %d", result.exponent)
    return result


def add(a, b):
    return _combine(a, b, 1)


def subtract(a, b):
    return _combine(a, b, -1)


def scale(state, factor):
    """Multiplies every register by a complex scalar held in b bits."""
    f_re, f_im, f_exp = _encode_scalar(factor, state.config)
    raw_re = state.re * f_re - state.im * f_im
    raw_im = state.re * f_im + state.im * f_re
    bits = state.config.bits
    return _from_raw(raw_re, raw_im, state.exponent + f_exp - 2 * bits, state.config)


def multiply(a, b):
    """Componentwise complex product of two register vectors."""
    check_dims(a.dim, b.dim)
    raw_re = a.re * b.re - a.im * b.im
    raw_im = a.re * b.im + a.im * b.re
    bits = a.config.bits
    return _from_raw(raw_re, raw_im, a.exponent + b.exponent - 2 * bits, a.config)


def swap_registers(state, pairs):
    """Exchanges register values j <-> l for every index pair; exact."""
    order = np.arange(state.dim)
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    order[pairs[:, 0]] = pairs[:, 1]
    order[pairs[:, 1]] = pairs[:, 0]
    return DigitalState(state.config, state.exponent, state.re[order], state.im[order])


def _part_vectors(part):
    """Diagonal and off-diagonal entries of a part, indexed by row."""
    diagonal = np.zeros(part.dim, dtype=np.complex128)
    offdiag = np.zeros(part.dim, dtype=np.complex128)
    diagonal[part.single_index] = part.single_value
    if part.pair_index.size:
        j, l = part.pair_index[:, 0], part.pair_index[:, 1]
        diagonal[j] = part.pair_block[:, 0, 0]
        diagonal[l] = part.pair_block[:, 1, 1]
        offdiag[j] = part.pair_block[:, 0, 1]
        offdiag[l] = part.pair_block[:, 1, 0]
    return diagonal, offdiag


def apply_part_fixed_point(part, state):
    """H_i x as d * x + o * swap(x), every product rounded to b bits."""
    if not isinstance(part, BlockDiagonalPart):
        raise ValueError("fixed-point application needs a BlockDiagonalPart")
    check_dims(part.dim, state.dim)
    diagonal, offdiag = _part_vectors(part)
    result = multiply(encode(diagonal, state.config), state)
    if part.pair_index.size:
        swapped = swap_registers(state, part.pair_index)
        result = add(result, multiply(encode(offdiag, state.config), swapped))
    return result


def fragment_apply(r, reflection, state):
    """y = (rI + R) x on registers, R a reflection part."""
    if not reflection.is_reflection():
        raise NotReflectionError("fragment needs a reflection part")
    if not isinstance(state, DigitalState):
        raise ValueError("fragment_apply works on a DigitalState")
    return add(scale(state, r), apply_part_fixed_point(reflection, state))


# Clenshaw in fixed point ------------------------------------------------------


def _as_parts(operator):
    parts = list(operator) if isinstance(operator, (list, tuple)) else [operator]
    for part in parts:
        if not isinstance(part, BlockDiagonalPart):
            raise ValueError("fixed-point evolution needs BlockDiagonalPart parts")
    return parts


def _h_tilde_fixed(parts, window, state):
    if window.degenerate:
        return state.zeros_like()
    acc = apply_part_fixed_point(parts[0], state)
    for part in parts[1:]:
        acc = add(acc, apply_part_fixed_point(part, state))
    if window.center != 0:
        acc = subtract(acc, scale(state, window.center))
    if window.half_width != 1:
        acc = scale(acc, 1.0 / window.half_width)
    return acc


def _clenshaw_step(parts, window, coeffs, x):
    order = len(coeffs) - 1
    if order == 0:
        return scale(x, coeffs[0])

    def twice_h(y):
        return scale(_h_tilde_fixed(parts, window, y), 2.0)

    y_1 = scale(x, coeffs[order])
    y_2 = x.zeros_like()
    for k in range(order - 1, 0, -1):
        y_1, y_2 = subtract(add(scale(x, coeffs[k]), twice_h(y_1)), y_2), y_1
    first = scale(x, coeffs[0])
    y_0 = subtract(add(first, twice_h(y_1)), y_2)
    return scale(subtract(add(first, y_0), y_2), 0.5)


def clenshaw_fixed_point(plan, operator, config, x):
    """
    Runs a ChebyshevPlan with every vector operation in b-bit registers.
    input: ChebyshevPlan, parts, FixedPointConfig, state or DigitalState
    output: DigitalState
    """
    parts = _as_parts(operator)
    state = x if isinstance(x, DigitalState) else encode(x, config)
    check_dims(parts[0].dim, state.dim)
    for _ in range(plan.steps):
        state = _clenshaw_step(parts, plan.window, plan.coeffs, state)
    return scale(state, plan.global_phase)


def fixed_point_chebyshev(operator, t, eps, x, mode="stepped", order=None):
    """
    Returns (plan, run) where run(config) decodes the fixed-point result,
    so one plan can be replayed across register widths.
    """
    plan = plan_chebyshev(spectral_bounds(operator), t, eps, mode=mode, order=order)

    def run(config):
        return clenshaw_fixed_point(plan, operator, config, x).decode()

    return plan, run


def register_bits(steps, order, eps, margin=6):
    """b = ceil(log2(m p / eps)) + margin."""
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    work = max(1, steps * order)
    return math.ceil(math.log2(work / eps)) + margin


# Round-off scans ------------------------------------------------------------------


@dataclass(frozen=True)
class RoundoffRow:
    bits: int
    rounding: str
    error: float


def roundoff_scan(evolver, bits_grid, reference, rounding="truncate"):
    """Distance between evolver(config) and the floating reference per width."""
    reference = as_state(reference)
    rows = []
    for bits in bits_grid:
        config = FixedPointConfig(bits=bits, rounding=rounding)
        error = float(np.linalg.norm(as_state(evolver(config)) - reference))
        logger.debug("round-off at b=%d: %.3e", bits, error)
        rows.append(RoundoffRow(bits=bits, rounding=rounding, error=error))
    return rows


def roundoff_slope(rows):
    """Least-squares slope of log2(error) against b."""
    bits = np.array([row.bits for row in rows], dtype=float)
    errors = np.array([row.error for row in rows])
    if np.any(errors <= 0):
        raise ValueError("slope needs strictly positive errors")
    return float(np.polyfit(bits, np.log2(errors), 1)[0])


# Observable lift --------------------------------------------------------------------


def place_value(bits):
    """Diagonal V with V|n> = x(n)|n>, bit weights 2^0 .. 2^(1-b)."""
    return np.diag(np.arange(2**bits) * 2.0 ** (1 - bits)).astype(np.complex128)


def all_ones(bits):
    """(1 + sigma_x)^{(x) b}: every matrix element equals 1."""
    factor = np.eye(2, dtype=np.complex128) + SIGMA_X
    return reduce(np.kron, [factor] * bits)


@dataclass(frozen=True)
class ObservableLift:
    """O_b = N V (1 + sigma_x)^{(x) b} V on the 2^b-dimensional register."""

    observable: np.ndarray
    bits: int

    def __post_init__(self):
        op = as_operator(self.observable)
        if op.shape[0] > MAX_LIFT_DIM:
            raise ValueError(f"observable lift is dense; N must be <= {MAX_LIFT_DIM}")
        if not 1 <= self.bits <= MAX_LIFT_BITS:
            raise ValueError(f"observable lift needs 1 <= b <= {MAX_LIFT_BITS}")
        object.__setattr__(self, "observable", op)

    @property
    def dim(self):
        return self.observable.shape[0]

    @property
    def lifted(self):
        v = place_value(self.bits)
        return self.dim * v @ all_ones(self.bits) @ v

    def register_index(self, amplitudes):
        """Nearest register basis state for each real amplitude in [0, 2)."""
        values = np.asarray(amplitudes)
        if np.iscomplexobj(values):
            if np.max(np.abs(values.imag)) > 0:
                raise ValueError("observable lift takes real amplitudes")
            values = values.real
        if np.any(values < 0) or np.any(values >= 2):
            raise ValueError("observable lift takes amplitudes in [0, 2)")
        index = np.floor(values * 2.0 ** (self.bits - 1) + 0.5).astype(np.int64)
        return np.minimum(index, 2**self.bits - 1)

    def lifted_expectation(self, amplitudes):
        """(1/N) sum_jl <x_j|<j| O_a (x) O_b |l>|x_l>, built densely."""
        index = self.register_index(amplitudes)
        size = 2**self.bits
        joint = np.zeros(self.dim * size, dtype=np.complex128)
        joint[np.arange(self.dim) * size + index] = 1.0 / np.sqrt(self.dim)
        full = np.kron(self.observable, self.lifted)
        return float(np.real(np.vdot(joint, full @ joint)))


def lift_error_bound(observable, bits, dim):
    """
    ||O|| (2 sqrt(N) 2^-b + N 2^-2b) for a normalised state.

    Every amplitude is off by at most 2^-b after rounding, so the error
    vector can reach sqrt(N) 2^-b in norm; this is the worst case over all
    states. lift_acceptance_bound is the fixed tolerance used for N <= 8.
    """
    quantum = 2.0 ** (-bits)
    return operator_norm(observable) * (
        2.0 * math.sqrt(dim) * quantum + dim * quantum**2
    )


def lift_acceptance_bound(observable, bits):
    """4 ||O|| 2^-b, the tolerance accepted for N <= 8."""
    return LIFT_ACCEPTANCE * operator_norm(observable) * 2.0 ** (-bits)


def observable_lift_check(observable, bits, x):
    """
    output: (direct <x|O|x>, lifted expectation over the encoded registers)
    """
    lift = ObservableLift(observable=observable, bits=bits)
    state = as_state(x)
    check_dims(lift.dim, state.shape[0])
    direct = float(np.real(np.vdot(state, lift.observable @ state)))
    lifted = lift.lifted_expectation(state)
    tolerance = lift_acceptance_bound(lift.observable, bits)
    if abs(direct - lifted) > tolerance:
        logger.warning(
            "lifted expectation off by %.3e > %.3e at b=%d",
            abs(direct - lifted),
            tolerance,
            bits,
        )
    return direct, lifted
