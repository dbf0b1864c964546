"""
Chebyshev propagation of a general Hermitian Hamiltonian.

The spectrum of H is enclosed in a window [lambda_min, lambda_max] and
mapped onto [-1, 1]:

    H~ = (2H - (lambda_max + lambda_min)) / (lambda_max - lambda_min)
    exp(-iHt) = e^{-i(lambda_max + lambda_min)t/2} exp(-iH~ t~),
    t~ = t (lambda_max - lambda_min) / 2.

exp(-iH~ t~) = sum_k C_k T_k(H~) with C_0 = J_0(t~), C_k = 2(-i)^k J_k(t~),
evaluated by Clenshaw's backward recursion with one application of H~ per
order. Two strategies are offered: "stepped" (t~ split into steps of about
pi each, order from the reflection-series bound) and "one_shot" (a single
expansion over the whole interval).

Dependencies:
    - numpy
    - bessel (Miller recursion), projector_series (truncation bounds)
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from .bessel import BesselTable, bessel_table, miller_start
from .hamiltonian_models import BlockDiagonalPart, DensePart, operator_apply
from .linalg_core import PrecisionBudgetError, as_operator, as_state, check_dims
from .projector_series import truncation_bound, truncation_order

__all__ = [
    "BesselTable",
    "ChebyshevPlan",
    "Rescaling",
    "SpectralWindow",
    "bessel_table",
    "chebyshev_coefficients",
    "chebyshev_matrices",
    "clenshaw_apply",
    "evolve_chebyshev",
    "miller_start",
    "one_shot_bound",
    "one_shot_order",
    "plan_chebyshev",
    "rescale",
    "spectral_bounds",
]

logger = logging.getLogger(__name__)

MODES = ("stepped", "one_shot")
MAX_ONE_SHOT_ORDER = 512
STEP_TILDE = math.pi


@dataclass(frozen=True)
class SpectralWindow:
    lambda_min: float
    lambda_max: float

    def __post_init__(self):
        if not self.lambda_max >= self.lambda_min:
            raise ValueError(
                f"empty spectral window [{self.lambda_min}, {self.lambda_max}]"
            )

    @property
    def center(self):
        return 0.5 * (self.lambda_max + self.lambda_min)

    @property
    def half_width(self):
        return 0.5 * (self.lambda_max - self.lambda_min)

    @property
    def degenerate(self):
        return self.lambda_max == self.lambda_min

    def contains(self, eigvals, tol=1e-12):
        eigvals = np.asarray(eigvals)
        return bool(
            np.all(eigvals >= self.lambda_min - tol)
            and np.all(eigvals <= self.lambda_max + tol)
        )


# Gershgorin ------------------------------------------------------------------


def _part_rows(part):
    """(diagonal, off-diagonal absolute row sum) of one part."""
    center = np.zeros(part.dim)
    radius = np.zeros(part.dim)
    if isinstance(part, BlockDiagonalPart):
        center[part.single_index] += part.single_value
        if part.pair_index.size:
            j, l = part.pair_index[:, 0], part.pair_index[:, 1]
            blocks = part.pair_block
            np.add.at(center, j, blocks[:, 0, 0].real)
            np.add.at(center, l, blocks[:, 1, 1].real)
            np.add.at(radius, j, np.abs(blocks[:, 0, 1]))
            np.add.at(radius, l, np.abs(blocks[:, 1, 0]))
        return center, radius
    dense = part.matrix if isinstance(part, DensePart) else as_operator(part)
    diag = dense.diagonal().real
    return diag, np.sum(np.abs(dense), axis=1) - np.abs(diag)


def spectral_bounds(operator):
    """
    Gershgorin enclosure of the spectrum of a dense Hermitian matrix, a part
    or a list of parts (rows of the sum).
    """
    if isinstance(operator, (list, tuple)):
        parts = list(operator)
    else:
        parts = [operator]
    center, radius = _part_rows(parts[0])
    for part in parts[1:]:
        more_center, more_radius = _part_rows(part)
        check_dims(center.size, more_center.size)
        center = center + more_center
        radius = radius + more_radius
    window = SpectralWindow(
        float(np.min(center - radius)), float(np.max(center + radius))
    )
    logger.debug(
        "Gershgorin window [%g, %g]", window.lambda_min, window.lambda_max
    )
    return window


# Rescaling --------------------------------------------------------------------


@dataclass(frozen=True)
class Rescaling:
    """H~ = (H - center) / half_width together with t~ and the global phase."""

    window: SpectralWindow
    t: float
    t_tilde: float
    global_phase: complex

    def apply(self, h_apply):
        """Wraps an application of H into an application of H~."""
        center = self.window.center
        half = self.window.half_width
        if self.window.degenerate:
            return lambda x: np.zeros_like(as_state(x))
        return lambda x: (h_apply(x) - center * as_state(x)) / half

    def dense(self, matrix):
        op = as_operator(matrix)
        if self.window.degenerate:
            return np.zeros_like(op)
        eye = np.eye(op.shape[0])
        return (op - self.window.center * eye) / self.window.half_width


def rescale(window, t):
    """
    Maps exp(-iHt) to global_phase * exp(-iH~ t~). A degenerate window gives
    t~ = 0, so the evolution is the pure phase e^{-ict}.
    """
    return Rescaling(
        window=window,
        t=t,
        t_tilde=t * window.half_width,
        global_phase=complex(np.exp(-1j * window.center * t)),
    )


# Coefficients and recursion ----------------------------------------------------


def chebyshev_coefficients(t_tilde, order):
    """C_0 = J_0(t~), C_k = 2 (-i)^k J_k(t~)."""
    values = bessel_table(t_tilde, order).values
    coeffs = 2.0 * (-1j) ** np.arange(order + 1) * values
    coeffs[0] = values[0]
    return coeffs


def clenshaw_apply(h_apply, coeffs, x):
    """
    sum_k C_k T_k(H~) x with exactly p applications of H~:
      y_k = C_k x + 2 H~ y_{k+1} - y_{k+2}  (downwards from y_p = C_p x)
      result = (C_0 x + y_0 - y_2) / 2
    """
    coeffs = np.asarray(coeffs)
    order = coeffs.size - 1
    if order < 0:
        raise ValueError("Clenshaw recursion needs at least C_0")
    state = as_state(x)
    if order == 0:
        return coeffs[0] * state
    y_1 = coeffs[order] * state
    y_2 = np.zeros_like(state)
    for k in range(order - 1, 0, -1):
        y_1, y_2 = coeffs[k] * state + 2.0 * h_apply(y_1) - y_2, y_1
    y_0 = coeffs[0] * state + 2.0 * h_apply(y_1) - y_2
    return 0.5 * (coeffs[0] * state + y_0 - y_2)


def chebyshev_matrices(h_tilde, order):
    """Dense T_0(H~)..T_order(H~) from the three-term recurrence."""
    h_tilde = as_operator(h_tilde)
    eye = np.eye(h_tilde.shape[0], dtype=np.complex128)
    mats = [eye, h_tilde.copy()]
    for _ in range(1, order):
        mats.append(2.0 * h_tilde @ mats[-1] - mats[-2])
    return mats[: order + 1]


# Truncation ---------------------------------------------------------------------


def one_shot_bound(t_tilde, order):
    """t^{p+1} / (2^p (p+1)!) * (1 - t/(2(p+2)))^{-1}; inf outside its range."""
    if t_tilde == 0:
        return 0.0
    return truncation_bound("reflection", 1, abs(t_tilde), order)


def one_shot_order(t_tilde, eps, max_order=MAX_ONE_SHOT_ORDER):
    """
    Smallest p > e t~/2 whose one-step bound is below eps. The bound is only
    guaranteed once p > t~^2/8; a smaller p is reported with a warning.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    magnitude = abs(t_tilde)
    floor = math.floor(math.e * magnitude / 2.0) + 1
    for order in range(floor, max_order + 1):
        if one_shot_bound(magnitude, order) < eps:
            if order <= magnitude**2 / 8.0:
                logger.warning(
                    "one-shot order p=%d <= t~^2/8 = %g: bound is advisory",
                    order,
                    magnitude**2 / 8.0,
                )
            return order
    raise PrecisionBudgetError(
        f"one-shot expansion at t~={magnitude} needs p > {max_order} for eps={eps}"
    )


@dataclass(frozen=True)
class ChebyshevPlan:
    """Everything needed to run a Chebyshev propagation of fixed length."""

    mode: str
    window: SpectralWindow
    t: float
    t_tilde: float
    global_phase: complex
    dt: float
    steps: int
    order: int
    coeffs: np.ndarray

    @property
    def step_tilde(self):
        return self.t_tilde / self.steps if self.steps else 0.0

    @property
    def part_applications(self):
        """H~ applications; multiply by the number of parts for part counts."""
        return self.steps * self.order


def plan_chebyshev(window, t, eps, mode="stepped", order=None, dt=None):
    """
    input: SpectralWindow, float:t, float:eps, str:mode, optional int:order
           and float:dt overrides
    output: ChebyshevPlan
    """
    if mode not in MODES:
        raise ValueError(f"unknown Chebyshev mode {mode!r}, expected {MODES}")
    scaling = rescale(window, t)
    t_tilde = scaling.t_tilde
    if t_tilde == 0:
        steps, step_tilde, p = 0, 0.0, 0
    elif mode == "one_shot":
        steps, step_tilde = 1, t_tilde
        p = order if order is not None else one_shot_order(t_tilde, eps)
    else:
        if dt is not None:
            if dt <= 0:
                raise ValueError(f"step must be positive, got {dt}")
            target = dt * window.half_width
        else:
            target = STEP_TILDE
        steps = max(1, math.ceil(abs(t_tilde) / target * (1.0 - 1e-12)))
        step_tilde = t_tilde / steps
        p = (
            order
            if order is not None
            else truncation_order("reflection", abs(t_tilde), abs(step_tilde), eps)
        )
    if p < 0:
        raise ValueError(f"expansion order must be non-negative, got {p}")
    logger.debug(
        "Chebyshev %s plan: t~=%g, m=%d, p=%d", mode, t_tilde, steps, p
    )
    return ChebyshevPlan(
        mode=mode,
        window=window,
        t=t,
        t_tilde=t_tilde,
        global_phase=scaling.global_phase,
        dt=t / steps if steps else 0.0,
        steps=steps,
        order=p,
        coeffs=chebyshev_coefficients(step_tilde, p),
    )


def evolve_chebyshev(
    operator, t, x, eps=1e-8, mode="stepped", window=None, order=None, dt=None
):
    """
    exp(-iHt) x for H given as a dense matrix, a part or a list of parts.
    The window defaults to the Gershgorin enclosure.
    """
    dim, h_apply = operator_apply(operator)
    state = as_state(x)
    check_dims(dim, state.shape[0])
    if window is None:
        window = spectral_bounds(operator)
    plan = plan_chebyshev(window, t, eps, mode=mode, order=order, dt=dt)
    if plan.steps == 0:
        return plan.global_phase * state
    h_tilde = rescale(window, t).apply(h_apply)
    for _ in range(plan.steps):
        state = clenshaw_apply(h_tilde, plan.coeffs, state)
    return plan.global_phase * state
