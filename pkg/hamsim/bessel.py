"""
Bessel functions of the first kind J_0..J_p by Miller's downward recursion.

J_{k-1}(t) = (2k/t) J_k(t) - J_{k+1}(t) is stable when run downwards from an
index well above both p and t; the unnormalised sequence is then fixed by
J_0 + 2 sum_{k>=1} J_{2k} = 1.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)

MILLER_SEED = 1e-30
RESCALE_LIMIT = 1e200
# below this |t| the leading power-series terms are exact to double precision
SMALL_ARGUMENT = 1e-6


@dataclass(frozen=True)
class BesselTable:
    t: float
    values: np.ndarray

    @property
    def order(self):
        return self.values.size - 1

    def even_sum(self):
        """J_0 + 2 sum J_{2k} over the tabulated orders."""
        return float(self.values[0] + 2.0 * np.sum(self.values[2::2]))


def miller_start(order, t):
    """Start index of the downward recursion for orders up to `order` at t."""
    base = max(order, math.ceil(abs(t)))
    return base + math.ceil(15 + 2 * math.sqrt(base * max(1.0, math.log(base + 2))))


def _small_argument_series(t, order):
    values = np.zeros(order + 1)
    half = t / 2.0
    for k in range(order + 1):
        total = 0.0
        for s in range(4):
            log_mag = (k + 2 * s) * math.log(abs(half)) - math.lgamma(s + 1)
            log_mag -= math.lgamma(k + s + 1)
            total += (-1) ** s * math.exp(log_mag)
        values[k] = total
    return values


def bessel_table(t, order):
    """
    J_0(t)..J_order(t).
    input: float:t, int:order (>= 0)
    output: BesselTable
    """
    if order < 0:
        raise ValueError(f"Bessel order must be non-negative, got {order}")
    t = float(t)
    if t == 0.0:
        values = np.zeros(order + 1)
        values[0] = 1.0
        return BesselTable(t=t, values=values)
    magnitude = abs(t)
    if magnitude < SMALL_ARGUMENT:
        values = _small_argument_series(magnitude, order)
    else:
        start = miller_start(order, magnitude)
        logger.debug("Miller recursion from index %d for t=%g", start, magnitude)
        seq = np.zeros(start + 2)
        seq[start] = MILLER_SEED
        for k in range(start, 0, -1):
            seq[k - 1] = (2.0 * k / magnitude) * seq[k] - seq[k + 1]
            if abs(seq[k - 1]) > RESCALE_LIMIT:
                seq[k - 1 :] /= RESCALE_LIMIT
        norm = seq[0] + 2.0 * np.sum(seq[2:start + 1:2])
        values = seq[: order + 1] / norm
    if t < 0:
        # J_k(-t) = (-1)^k J_k(t)
        values = values * (-1.0) ** np.arange(order + 1)
    return BesselTable(t=t, values=values)
