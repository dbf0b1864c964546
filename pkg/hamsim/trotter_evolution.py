"""
Lie-Trotter product-formula propagators over coloured parts.

Order k = 2 is the first-order product (error term E2, per-step defect
O(dt^2)); order k = 3 is the symmetric palindromic product (error term E3).
The module also estimates the leading commutator error terms and picks step
counts from them, and estimates the repetition count needed when outcomes
are boosted by majority vote.
"""

import logging
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .linalg_core import (
    as_operator,
    as_state,
    check_dims,
    commutator,
    operator_norm,
)

logger = logging.getLogger(__name__)

TROTTER_ORDERS = (2, 3)
MAX_DENSE_DIM = 256


def _sorted_parts(parts):
    parts = sorted(parts, key=lambda part: part.color)
    if not parts:
        raise ValueError("at least one part is required")
    return parts


@dataclass(frozen=True)
class TrotterPlan:
    order: int
    dt: float
    steps: int
    parts: tuple

    def __post_init__(self):
        if self.order not in TROTTER_ORDERS:
            raise ValueError(f"Trotter order must be 2 or 3, got {self.order}")
        if self.steps < 1:
            raise ValueError(f"step count must be positive, got {self.steps}")

    @classmethod
    def from_time(cls, parts, t, steps, order=2):
        """dt = t / steps, so steps * dt reproduces t."""
        dt = t / steps if steps else 0.0
        return cls(order=order, dt=dt, steps=steps, parts=tuple(parts))

    @property
    def time(self):
        return self.steps * self.dt

    @property
    def part_applications(self):
        return trotter_part_applications(self.steps, len(self.parts), self.order)


def trotter_part_applications(steps, n_parts, order):
    """m*l for the first-order product, m*(2l - 1) for the symmetric one."""
    if order == 2:
        return steps * n_parts
    return steps * (2 * n_parts - 1)


def trotter_step_first(parts, dt, x):
    """Applies exp(-i H_l dt) ... exp(-i H_1 dt) to x (H_1 acts first)."""
    state = as_state(x)
    for part in _sorted_parts(parts):
        state = part.exp_apply(state, dt)
    return state


def symmetric_sequence(parts, dt):
    """
    Factors of the palindromic step in application order:
    half steps H_l..H_2, a merged full step of H_1, half steps H_2..H_l.
    """
    ordered = _sorted_parts(parts)
    if len(ordered) == 1:
        return [(ordered[0], dt)]
    descending = [(part, dt / 2.0) for part in reversed(ordered[1:])]
    return descending + [(ordered[0], dt)] + descending[::-1]


def trotter_step_symmetric(parts, dt, x):
    """Applies the palindromic half-step product to x."""
    state = as_state(x)
    for part, step in symmetric_sequence(parts, dt):
        state = part.exp_apply(state, step)
    return state


def step_operator(parts, dt, order=2):
    """Dense single-step operator, built by stepping the identity's columns."""
    parts = _sorted_parts(parts)
    dim = parts[0].dim
    stepper = trotter_step_first if order == 2 else trotter_step_symmetric
    eye = np.eye(dim, dtype=np.complex128)
    columns = [stepper(parts, dt, eye[:, j]) for j in range(dim)]
    return np.stack(columns, axis=1)


def evolve_trotter(parts, t, steps, x, order=2, fast_forward=False):
    """
    Evolves x over time t with `steps` Trotter steps.

    With fast_forward the identical steps are applied as the dense step
    operator raised to the power `steps` by binary powering; the result is the
    same product, evaluated in O(log m) matrix products.
    """
    plan = TrotterPlan.from_time(parts, t, steps, order)
    state = as_state(x)
    check_dims(plan.parts[0].dim, state.shape[0])
    if fast_forward:
        if plan.parts[0].dim > MAX_DENSE_DIM:
            raise ValueError(
                f"fast forward materialises the step operator; dim > {MAX_DENSE_DIM}"
            )
        single = step_operator(plan.parts, plan.dt, order)
        power = np.linalg.matrix_power(single, steps)
        return power @ state
    stepper = trotter_step_first if order == 2 else trotter_step_symmetric
    for _ in range(plan.steps):
        state = stepper(plan.parts, plan.dt, state)
    return state


# Error estimates --------------------------------------------------------------


@dataclass(frozen=True)
class TrotterErrorEstimate:
    """Norms of the leading error terms E2 and E3."""

    e2_norm: float
    e3_norm: float
    norm: str = "spectral"

    def term(self, order):
        return self.e2_norm if order == 2 else self.e3_norm

    def predicted_error(self, t, steps, order=2):
        """Leading-order error m^(1-k) t^k ||E^(k)||."""
        return steps ** (1 - order) * t**order * self.term(order)


def _dense_parts(parts):
    dense = []
    for part in parts:
        if hasattr(part, "to_dense"):
            part = part.to_dense()
        dense.append(as_operator(part))
    for matrix in dense[1:]:
        check_dims(dense[0].shape[0], matrix.shape[0])
    if dense and dense[0].shape[0] > MAX_DENSE_DIM:
        raise ValueError(
            f"commutator estimates are dense; dimension {dense[0].shape[0]} "
            f"exceeds {MAX_DENSE_DIM}"
        )
    return dense


def commutator_error_norms(parts, norm="spectral"):
    """
    Norms of the dt-independent leading terms
      E2 = (i/2) sum_{i<j} [H_i, H_j]
      E3 = (1/24) sum_{i<j} (2[H_i,[H_i,H_j]] + [H_j,[H_i,H_j]])
         + (1/12) sum_{i<j<k} (2[H_i,[H_j,H_k]] + [H_j,[H_i,H_k]])
    """
    dense = _dense_parts(parts)
    dim = dense[0].shape[0]
    e2 = np.zeros((dim, dim), dtype=np.complex128)
    e3 = np.zeros((dim, dim), dtype=np.complex128)
    for i, j in combinations(range(len(dense)), 2):
        inner = commutator(dense[i], dense[j])
        e2 += 0.5j * inner
        e3 += (
            2.0 * commutator(dense[i], inner) + commutator(dense[j], inner)
        ) / 24.0
    for i, j, k in combinations(range(len(dense)), 3):
        e3 += (
            2.0 * commutator(dense[i], commutator(dense[j], dense[k]))
            + commutator(dense[j], commutator(dense[i], dense[k]))
        ) / 12.0
    return TrotterErrorEstimate(
        e2_norm=operator_norm(e2, norm), e3_norm=operator_norm(e3, norm), norm=norm
    )


def choose_steps(t, eps1, order, e_norm):
    """Smallest m with m^(1-k) t^k ||E|| <= eps1."""
    if eps1 <= 0 or t <= 0:
        raise ValueError(f"t and eps1 must be positive, got t={t}, eps1={eps1}")
    if order not in TROTTER_ORDERS:
        raise ValueError(f"Trotter order must be 2 or 3, got {order}")
    if e_norm == 0:
        return 1
    needed = (t**order * e_norm / eps1) ** (1.0 / (order - 1))
    # guards against ceil landing one above an exact integer after rounding
    steps = max(1, math.ceil(needed * (1.0 - 1e-12)))
    logger.debug("Trotter order %d needs m=%d for eps1=%g", order, steps, eps1)
    return steps


def repetition_bound(eps1, reps):
    return 2 ** (reps - 1) * eps1 ** math.ceil(reps / 2)


def repetition_cost(eps1, eps, max_reps=999):
    """
    Smallest odd R with 2^(R-1) eps1^ceil(R/2) < eps; the cost grows by R.
    No repetition is needed when eps >= eps1.
    """
    if not 0 < eps1 < 0.5:
        raise ValueError(f"majority voting needs 0 < eps1 < 1/2, got {eps1}")
    if eps <= 0:
        raise ValueError(f"target error must be positive, got {eps}")
    if eps >= eps1:
        return 1, 1.0
    for reps in range(1, max_reps + 1, 2):
        if repetition_bound(eps1, reps) < eps:
            return reps, float(reps)
    raise ValueError(f"no odd R <= {max_reps} reaches eps={eps}")
