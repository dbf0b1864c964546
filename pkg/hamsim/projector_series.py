"""
Propagation by truncated series in two projectors or two reflections.

For H = P1 + P2 with P1, P2 projectors, every power of H is a combination of
alternating words (P1 P2 P1 ...)_k and (P2 P1 P2 ...)_k, so

    exp(-iHt) = I + sum_k c_k(t) [(P1 P2 ...)_k + (P2 P1 ...)_k].

With reflections R_i = I - 2P_i the same holds for exp(i(R1 + R2)t/2) with
coefficients r_k(t) = i^k J_k(t). Words are summed in nested (Horner) form,
so truncating at order p costs p part applications per word sweep.

Also here: truncation-order selection from the factorial tail bounds,
coefficients for unequal weights a1 P1 + a2 P2 (a1 R1 + a2 R2) built as
truncated power series in t, and the BCH-like product form.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial

from .bessel import bessel_table
from .hamiltonian_models import NotProjectorError, NotReflectionError
from .linalg_core import PrecisionBudgetError, as_state

logger = logging.getLogger(__name__)

SCHEMES = (
    "projection",
    "reflection",
    "projection-unequal",
    "reflection-unequal",
    "bch-form",
)
MAX_COEFF_TIME = 64.0
MAX_TRUNCATION_ORDER = 200
MAX_UNEQUAL_ORDER = 40
GUARD_DEGREE = 30
TAIL_TOL = 1e-13
# relative size below which the tail sum of c_k stops
TAIL_STOP = 1e-20


@dataclass(frozen=True)
class AlternatingWord:
    """(A B A ...)_k with A the part named by `start`."""

    start: int
    length: int

    def __post_init__(self):
        if self.start not in (1, 2):
            raise ValueError(f"word must start with part 1 or 2, got {self.start}")
        if self.length < 1:
            raise ValueError(f"word length must be positive, got {self.length}")

    def factors(self):
        other = 3 - self.start
        return [self.start if k % 2 == 0 else other for k in range(self.length)]

    def apply(self, first, second, x):
        """Applies the word to x; the rightmost factor acts first."""
        parts = {1: first, 2: second}
        state = as_state(x)
        for index in reversed(self.factors()):
            state = parts[index].apply(state)
        return state

    def to_dense(self, first, second):
        parts = {1: first.to_dense(), 2: second.to_dense()}
        product = np.eye(parts[1].shape[0], dtype=np.complex128)
        for index in self.factors():
            product = product @ parts[index]
        return product


@dataclass
class TruncatedPowerSeries:
    """sum_n a_n t^n up to a fixed degree."""

    coefficients: np.ndarray

    @property
    def degree(self):
        return self.coefficients.size - 1

    def __call__(self, t):
        return complex(polynomial.polyval(t, self.coefficients))

    def derivative(self):
        return TruncatedPowerSeries(polynomial.polyder(self.coefficients))

    def tail_estimate(self, t, terms=3):
        """Largest |a_n t^n| among the top `terms` degrees."""
        top = np.arange(self.degree - terms + 1, self.degree + 1)
        top = top[top >= 0]
        return float(np.max(np.abs(self.coefficients[top]) * abs(t) ** top))


@dataclass
class SeriesCoefficients:
    scheme: str
    t: float
    order: int
    tables: dict
    series: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown series scheme {self.scheme!r}")


# Equal-weight coefficients ---------------------------------------------------


def _check_time(t):
    if abs(t) > MAX_COEFF_TIME:
        raise PrecisionBudgetError(
            f"|t| = {abs(t)} exceeds the coefficient cap {MAX_COEFF_TIME}"
        )


def coeff_projection(k, t):
    """
    c_k(t) = (-1)^k e^{-it} sum_{j>=k} (it)^j / j!.

    For k > |t| the tail terms decrease and are summed directly; otherwise the
    tail is e^{it} minus the (growing) partial sum, which is then the
    dominant quantity and loses no precision.
    """
    if k < 0:
        raise ValueError(f"coefficient index must be non-negative, got {k}")
    _check_time(t)
    if k == 0:
        return 1.0 + 0.0j
    it = 1j * t
    if k <= abs(t):
        partial = 0.0j
        term = 1.0 + 0.0j
        for j in range(k):
            partial += term
            term *= it / (j + 1)
        tail = np.exp(it) - partial
    else:
        term = 1.0 + 0.0j
        for j in range(k):
            term *= it / (j + 1)
        tail = 0.0j
        j = k
        while True:
            tail += term
            j += 1
            term *= it / j
            if abs(term) <= TAIL_STOP * abs(tail):
                break
    return complex((-1) ** k * np.exp(-it) * tail)


def projection_coefficients(t, order):
    return np.array([coeff_projection(k, t) for k in range(order + 1)])


def reflection_coefficients(t, order):
    """r_0..r_order with r_k = i^k J_k(t)."""
    _check_time(t)
    values = bessel_table(t, order).values
    return (1j) ** np.arange(order + 1) * values


def coeff_reflection(k, t):
    if k < 0:
        raise ValueError(f"coefficient index must be non-negative, got {k}")
    return complex(reflection_coefficients(t, k)[k])


# Propagators -------------------------------------------------------------------


def nested_word_sum(first, second, coeffs, x):
    """
    sum_{k>=1} coeffs[k] (first second first ...)_k x evaluated as
    first(c_1 x + second(c_2 x + first(c_3 x + ...))).
    """
    state = as_state(x)
    acc = np.zeros_like(state)
    for k in range(len(coeffs) - 1, 0, -1):
        part = first if k % 2 else second
        acc = part.apply(coeffs[k] * state + acc)
    return acc


def series_steps(t, dt):
    """Number of steps m = ceil(t/dt) and the actual step t/m."""
    if dt < 0:
        raise ValueError(f"step must be non-negative, got {dt}")
    if t == 0 or dt == 0:
        return 0, 0.0
    steps = max(1, math.ceil(abs(t) / dt * (1.0 - 1e-12)))
    return steps, t / steps


def series_part_applications(steps, order):
    return 2 * steps * order


def evolve_projection_series(p1, p2, t, dt, order, x):
    """
    Evolves x under H = P1 + P2 with per-step series truncated at `order`.
    input: projector parts p1, p2; float:t, float:dt, int:order; state x
    output: state
    """
    if not (p1.is_projector() and p2.is_projector()):
        raise NotProjectorError("projection series needs two projector parts")
    state = as_state(x)
    steps, step = series_steps(t, dt)
    if not steps:
        return state.copy()
    coeffs = projection_coefficients(step, order)
    for _ in range(steps):
        state = (
            state
            + nested_word_sum(p1, p2, coeffs, state)
            + nested_word_sum(p2, p1, coeffs, state)
        )
    return state


def evolve_reflection_series(r1, r2, t, dt, order, x):
    """
    Evolves x under H = I - (R1 + R2)/2 via
    exp(-iHt) = e^{-it} [r_0 I + sum_k r_k ((R1 R2 ...)_k + (R2 R1 ...)_k)].
    """
    if not (r1.is_reflection() and r2.is_reflection()):
        raise NotReflectionError("reflection series needs two reflection parts")
    state = as_state(x)
    steps, step = series_steps(t, dt)
    if not steps:
        return state.copy()
    coeffs = reflection_coefficients(step, order)
    phase = np.exp(-1j * step)
    for _ in range(steps):
        state = phase * (
            coeffs[0] * state
            + nested_word_sum(r1, r2, coeffs, state)
            + nested_word_sum(r2, r1, coeffs, state)
        )
    return state


# Truncation order ---------------------------------------------------------------


def truncation_bound(scheme, steps, dt, order):
    """Accumulated truncation error bound over `steps` steps of size dt."""
    if scheme == "projection":
        if dt >= order + 2:
            return math.inf
        log_term = (order + 1) * math.log(dt) - math.lgamma(order + 2)
        return 2 * steps * math.exp(log_term) * (1 - dt / (order + 2)) ** -2
    if scheme == "reflection":
        if dt >= 2 * (order + 2):
            return math.inf
        log_term = (order + 1) * math.log(dt / 2) - math.lgamma(order + 2)
        return 2 * steps * math.exp(log_term) / (1 - dt / (2 * (order + 2)))
    raise ValueError(f"no truncation bound for scheme {scheme!r}")


def truncation_order(scheme, t, dt, eps, max_order=MAX_TRUNCATION_ORDER):
    """Smallest p whose bound, with m = ceil(t/dt), is below eps."""
    if dt <= 0 or eps <= 0:
        raise ValueError(f"dt and eps must be positive, got dt={dt}, eps={eps}")
    steps = max(1, math.ceil(abs(t) / dt * (1.0 - 1e-12)))
    for order in range(max_order + 1):
        if truncation_bound(scheme, steps, dt, order) < eps:
            logger.debug(
                "%s series: p=%d for t=%g, dt=%g, eps=%g", scheme, order, t, dt, eps
            )
            return order
    raise PrecisionBudgetError(
        f"no {scheme} truncation order <= {max_order} reaches eps={eps}"
    )


def heuristic_order(t, eps):
    """Practical order 2 ln(t/eps) / ln ln(t/eps), valid for a step of pi."""
    ratio = t / eps
    if ratio <= math.e:
        return 1
    return max(1, math.ceil(2 * math.log(ratio) / math.log(math.log(ratio))))


# Unequal weights -----------------------------------------------------------------


def _projection_unequal_series(a1, a2, order, degree):
    # dc_k/dt = -i a1 (c_k + d_{k-1}), dd_k/dt = -i a2 (c_{k-1} + d_k)
    c = np.zeros((order + 1, degree + 1), dtype=np.complex128)
    d = np.zeros_like(c)
    c[0, 0] = d[0, 0] = 1.0
    for n in range(degree):
        c[1:, n + 1] = -1j * a1 * (c[1:, n] + d[:-1, n]) / (n + 1)
        d[1:, n + 1] = -1j * a2 * (c[:-1, n] + d[1:, n]) / (n + 1)
    return c, d


def _reflection_unequal_series(a1, a2, degree):
    # dp_0/dt = (i/2)(a1 p_1 + a2 q_1)
    # dp_k/dt = (i/2)(a1 q_{k-1} + a2 q_{k+1}), dq_k/dt = (i/2)(a2 p_{k-1} + a1 p_{k+1})
    # with q_0 = p_0; words longer than the degree vanish to that degree
    rows = degree + 2
    p = np.zeros((rows, degree + 1), dtype=np.complex128)
    q = np.zeros_like(p)
    p[0, 0] = q[0, 0] = 1.0
    for n in range(degree):
        pn, qn = p[:, n], q[:, n]
        scale = 0.5j / (n + 1)
        p[0, n + 1] = scale * (a1 * pn[1] + a2 * qn[1])
        p[1:-1, n + 1] = scale * (a1 * qn[:-2] + a2 * qn[2:])
        q[1:-1, n + 1] = scale * (a2 * pn[:-2] + a1 * pn[2:])
        q[0, n + 1] = p[0, n + 1]
    return p, q


def reflection_initial_series(a1, a2, degree):
    """
    Closed-form power series of p_0, p_1 and q_1:
      p_0 = sum_j (it/2)^{2j}/(2j)! sum_l C(j,l)^2 a1^{2(j-l)} a2^{2l}
      p_1 = sum_j (it/2)^{2j+1}/(2j+1)! sum_l C(j,l) C(j+1,l) a1^{2(j-l)+1} a2^{2l}
    and q_1 is p_1 with a1 and a2 exchanged.
    """

    def odd_sum(u, v, j):
        return sum(
            math.comb(j, l)
            * math.comb(j + 1, l)
            * u ** (2 * (j - l) + 1)
            * v ** (2 * l)
            for l in range(j + 1)
        )

    p0 = np.zeros(degree + 1, dtype=np.complex128)
    p1 = np.zeros_like(p0)
    q1 = np.zeros_like(p0)
    for n in range(degree + 1):
        j = n // 2
        weight = (0.5j) ** n / math.factorial(n)
        if n % 2 == 0:
            p0[n] = weight * sum(
                math.comb(j, l) ** 2 * a1 ** (2 * (j - l)) * a2 ** (2 * l)
                for l in range(j + 1)
            )
        else:
            p1[n] = weight * odd_sum(a1, a2, j)
            q1[n] = weight * odd_sum(a2, a1, j)
    return (
        TruncatedPowerSeries(p0),
        TruncatedPowerSeries(p1),
        TruncatedPowerSeries(q1),
    )


def _evaluate(series_list, t):
    values = []
    for series in series_list:
        value = series(t)
        if series.tail_estimate(t) > TAIL_TOL * max(1.0, abs(value)):
            raise PrecisionBudgetError(
                f"t={t} is outside the accuracy radius of a degree-"
                f"{series.degree} coefficient series"
            )
        values.append(value)
    return np.array(values)


def coeffs_unequal(scheme, a1, a2, t, order):
    """
    Coefficient tables for a1 P1 + a2 P2 ("projection") or a1 R1 + a2 R2
    ("reflection"). Projection: exp(-iHt) = I + sum c_k (P1 P2 ...)_k +
    d_k (P2 P1 ...)_k. Reflection: exp(i(a1 R1 + a2 R2)t/2) = p_0 I +
    sum p_k (R1 R2 ...)_k + q_k (R2 R1 ...)_k.
    """
    if not -1.0 <= a1 <= 1.0:
        raise ValueError(f"a1 must lie in [-1, 1], got {a1}")
    if a2 != 1.0:
        raise ValueError("a2 is fixed to 1 by convention")
    if order > MAX_UNEQUAL_ORDER:
        raise PrecisionBudgetError(f"order {order} exceeds {MAX_UNEQUAL_ORDER}")
    degree = order + GUARD_DEGREE
    if scheme in ("projection", "projection-unequal"):
        c, d = _projection_unequal_series(a1, a2, order, degree)
        names = ("c", "d")
        raw = (c, d)
        scheme = "projection-unequal"
    elif scheme in ("reflection", "reflection-unequal"):
        p, q = _reflection_unequal_series(a1, a2, degree)
        names = ("p", "q")
        raw = (p[: order + 1], q[: order + 1])
        scheme = "reflection-unequal"
    else:
        raise ValueError(f"no unequal-weight coefficients for scheme {scheme!r}")
    series = {
        name: [TruncatedPowerSeries(row) for row in table]
        for name, table in zip(names, raw)
    }
    tables = {name: _evaluate(rows, t) for name, rows in series.items()}
    return SeriesCoefficients(
        scheme=scheme, t=t, order=order, tables=tables, series=series
    )


def evolve_unequal_series(p1, p2, a1, t, dt, order, x):
    """Evolves x under a1 P1 + P2 with the unequal-weight projection series."""
    if not (p1.is_projector() and p2.is_projector()):
        raise NotProjectorError("projection series needs two projector parts")
    state = as_state(x)
    steps, step = series_steps(t, dt)
    if not steps:
        return state.copy()
    tables = coeffs_unequal("projection", a1, 1.0, step, order).tables
    for _ in range(steps):
        state = (
            state
            + nested_word_sum(p1, p2, tables["c"], state)
            + nested_word_sum(p2, p1, tables["d"], state)
        )
    return state


# BCH-like product form -----------------------------------------------------------


def bch_form_coeffs(t, order):
    """
    Coefficients of exp(-iHt) = e^{-iH1 t} e^{-iH2 t} [I + sum_{k>=2}
    c1_k (H1 H2 ...)_k + c2_k (H2 H1 ...)_k]:
      c1_k = e^{it}(c_{k-1} + c_k) - c_{k-1}
      c2_k = e^{it} c_k + (e^{it} - 1) c1_{k-1},   c1_0 = 1
    Index 0 of both tables is zero (the identity is explicit); index 1 vanishes.
    """
    if order > MAX_UNEQUAL_ORDER:
        raise PrecisionBudgetError(f"order {order} exceeds {MAX_UNEQUAL_ORDER}")
    c = projection_coefficients(t, order)
    phase = np.exp(1j * t)
    first = np.zeros(order + 1, dtype=np.complex128)
    second = np.zeros_like(first)
    previous_first = 1.0 + 0.0j
    for k in range(1, order + 1):
        first[k] = phase * (c[k - 1] + c[k]) - c[k - 1]
        second[k] = phase * c[k] + (phase - 1.0) * previous_first
        previous_first = first[k]
    return SeriesCoefficients(
        scheme="bch-form", t=t, order=order, tables={"c1": first, "c2": second}
    )


def evolve_bch_form(p1, p2, t, order, x):
    """One step of the product form: the word sums, then e^{-iH2 t}, then e^{-iH1 t}."""
    tables = bch_form_coeffs(t, order).tables
    state = as_state(x)
    inner = (
        state
        + nested_word_sum(p1, p2, tables["c1"], state)
        + nested_word_sum(p2, p1, tables["c2"], state)
    )
    return p1.exp_apply(p2.exp_apply(inner, t), t)
