"""
Identity checks for rank-one projectors P = |e><e| with non-orthogonal e.

Each check builds both sides of an algebraic identity numerically and
returns a CheckResult holding the residual, the tolerance it is judged
against and the seed that reproduces the instance. Identities that only
hold on span{e_i, e_j} are compared after restricting both sides to an
orthonormal basis of that span.

Usage:
    results = run_identity_suite(instances=100, seed=1, dim=8)
    raise_on_breach(results)

Dependencies:
    - numpy
    - linalg_core (exact evolution, norms), seeding (random vectors)
"""

import logging
import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .linalg_core import (
    as_state,
    commutator,
    exact_evolve,
    exact_propagator,
    frobenius_norm,
    state_distance,
)
from .seeding import SeededGenerator, random_hermitian, random_unit_vector

logger = logging.getLogger(__name__)

ALGEBRA_TOL = 1e-11
FINITE_DIFF_TOL = 1e-7
FINITE_DIFF_STEP = 1e-5
DEGENERATE_TOL = 1e-12
PHASE_GRID = (0.0, math.pi / 7.0, -math.pi / 7.0, math.pi / 2.0, math.pi)


class ResidualBreachError(Exception):
    """Raised when an identity residual exceeds its tolerance."""

    def __init__(self, check, residual, tolerance, seed=None):
        self.check = check
        self.residual = residual
        self.tolerance = tolerance
        self.seed = seed

    def __str__(self):
        return (
            f"{self.check} (seed {self.seed}): residual {self.residual:.3e} "
            f"exceeds {self.tolerance:.1e}"
        )


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    tolerance: float
    seed: int | None = None
    status: str = ""

    def __post_init__(self):
        if not self.status:
            status = "pass" if self.residual <= self.tolerance else "fail"
            object.__setattr__(self, "status", status)

    @property
    def passed(self):
        return self.status != "fail"


def projector(vector):
    e = as_state(vector)
    return np.outer(e, e.conj())


@dataclass(frozen=True)
class ProjectorPair:
    """P_i = |e_i><e_i| and P_j = |e_j><e_j| with lambda = <e_i|e_j>."""

    e_i: np.ndarray
    e_j: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        for name in ("e_i", "e_j"):
            vec = as_state(getattr(self, name))
            object.__setattr__(self, name, vec / np.linalg.norm(vec))

    @classmethod
    def random(cls, dim, seed):
        gen = SeededGenerator(seed)
        return cls(random_unit_vector(dim, gen), random_unit_vector(dim, gen), seed)

    @classmethod
    def with_overlap(cls, dim, overlap):
        """e_i = |0>, e_j = overlap |0> + sqrt(1 - overlap^2) |1>."""
        if not 0.0 <= overlap <= 1.0:
            raise ValueError(f"overlap must lie in [0, 1], got {overlap}")
        e_i = np.zeros(dim, dtype=np.complex128)
        e_j = np.zeros(dim, dtype=np.complex128)
        e_i[0] = 1.0
        e_j[0] = overlap
        e_j[1] = math.sqrt(1.0 - overlap**2)
        return cls(e_i, e_j)

    @property
    def dim(self):
        return self.e_i.size

    @property
    def p_i(self):
        return projector(self.e_i)

    @property
    def p_j(self):
        return projector(self.e_j)

    @property
    def overlap(self):
        return complex(np.vdot(self.e_i, self.e_j))

    def with_real_overlap(self):
        """Rephases e_j by conj(lambda)/|lambda| so that lambda > 0."""
        lam = self.overlap
        if abs(lam) == 0:
            return self
        return ProjectorPair(self.e_i, self.e_j * np.conj(lam) / abs(lam), self.seed)

    def span_basis(self):
        """Orthonormal columns spanning {e_i, e_j} (one column if parallel)."""
        rest = self.e_j - self.overlap * self.e_i
        size = np.linalg.norm(rest)
        if size <= DEGENERATE_TOL:
            return self.e_i[:, None]
        return np.stack([self.e_i, rest / size], axis=1)

    def restrict(self, matrix):
        basis = self.span_basis()
        return basis.conj().T @ matrix @ basis


@dataclass(frozen=True)
class ParametrizedProjector:
    """P(x) = |e(x)><e(x)| with e(x) = normalize(v0 + x v1)."""

    v0: np.ndarray
    v1: np.ndarray
    step: float = FINITE_DIFF_STEP

    def vector(self, x):
        raw = as_state(self.v0) + x * as_state(self.v1)
        size = np.linalg.norm(raw)
        if size == 0:
            raise ValueError(f"family vanishes at x={x}")
        return raw / size

    def at(self, x):
        return projector(self.vector(x))

    def derivative(self, x):
        """Central difference (P(x+h) - P(x-h)) / 2h."""
        h = self.step
        return (self.at(x + h) - self.at(x - h)) / (2.0 * h)


def _result(name, residual, tolerance, seed=None, status=""):
    result = CheckResult(name, float(residual), tolerance, seed, status)
    if not result.passed:
        logger.warning("%s breached: %.3e > %.1e", name, residual, tolerance)
    return result


# Span identities -------------------------------------------------------------


def check_reflection_product(pair):
    """
    In span{e_i, e_j}:
      (1 - 2P_i)(1 - 2P_j) = -1 + 2|lambda|^2 + 2[P_i, P_j]
                           = -exp(-2 asin|lambda| [P_i, P_j] / sqrt(|l|^2 - |l|^4))
    plus (P_i - P_j)^2 = (1 - |lambda|^2) and [P_i, P_j]^2 = |l|^4 - |l|^2.
    """
    p_i, p_j = pair.p_i, pair.p_j
    eye = np.eye(pair.dim)
    lam2 = abs(pair.overlap) ** 2
    comm = commutator(p_i, p_j)
    product = pair.restrict((eye - 2.0 * p_i) @ (eye - 2.0 * p_j))
    small_eye = np.eye(product.shape[0])
    residuals = [
        frobenius_norm(product - pair.restrict((2.0 * lam2 - 1.0) * eye + 2.0 * comm)),
        frobenius_norm(
            pair.restrict((p_i - p_j) @ (p_i - p_j)) - (1 - lam2) * small_eye
        ),
        frobenius_norm(pair.restrict(comm @ comm) - (lam2**2 - lam2) * small_eye),
    ]
    if lam2 <= DEGENERATE_TOL or lam2 >= 1.0 - DEGENERATE_TOL:
        return _result(
            "reflection_product",
            max(residuals),
            ALGEBRA_TOL,
            pair.seed,
            status="degenerate" if max(residuals) <= ALGEBRA_TOL else "fail",
        )
    generator = -2.0 * math.asin(math.sqrt(lam2)) * comm / math.sqrt(lam2 - lam2**2)
    # exp(G) for anti-Hermitian G is the propagator of iG at unit time
    exponential = -exact_propagator(1j * generator, 1.0)
    residuals.append(frobenius_norm(product - pair.restrict(exponential)))
    return _result("reflection_product", max(residuals), ALGEBRA_TOL, pair.seed)


def check_double_commutator(pair):
    """[P_i, [P_i, P_j]] = P_i + P_j - 1 + |lambda|^2 (1 - 2P_i) in the span."""
    p_i, p_j = pair.p_i, pair.p_j
    eye = np.eye(pair.dim)
    lam2 = abs(pair.overlap) ** 2
    lhs = commutator(p_i, commutator(p_i, p_j))
    rhs = p_i + p_j - eye + lam2 * (eye - 2.0 * p_i)
    residual = frobenius_norm(pair.restrict(lhs - rhs))
    return _result("double_commutator", residual, ALGEBRA_TOL, pair.seed)


def check_farhi_gutmann(pair):
    """exp(-i(P_i + P_j)T) e_i = -i e^{-iT} e_j for T = pi / (2 lambda)."""
    pair = pair.with_real_overlap()
    lam = pair.overlap.real
    if lam <= DEGENERATE_TOL:
        raise ValueError("orthogonal projectors: the transfer time is undefined")
    t = math.pi / (2.0 * lam)
    lhs = exact_evolve(pair.p_i + pair.p_j, t, pair.e_i)
    rhs = -1j * np.exp(-1j * t) * pair.e_j
    return _result("farhi_gutmann", state_distance(lhs, rhs), ALGEBRA_TOL, pair.seed)


# Adjoint action ----------------------------------------------------------------


def _conjugation_series(p, x, phi):
    ad = commutator(p, x)
    return x + 1j * math.sin(phi) * ad + (math.cos(phi) - 1.0) * commutator(p, ad)


def check_conjugation(pair, x, phis=PHASE_GRID):
    """
    e^{i phi P} X e^{-i phi P} = X + i sin(phi) [P, X] + (cos(phi) - 1) [P, [P, X]]
    over a phase grid, and [P, [P, [P, X]]] = [P, X].
    """
    p = pair.p_i
    residuals = []
    for phi in phis:
        u = exact_propagator(p, phi)
        lhs = u.conj().T @ x @ u
        residuals.append(frobenius_norm(lhs - _conjugation_series(p, x, phi)))
    ad = commutator(p, x)
    cube = commutator(p, commutator(p, ad))
    residuals.append(frobenius_norm(cube - ad))
    return _result("conjugation", max(residuals), ALGEBRA_TOL, pair.seed)


def check_adjoint_polynomials(pair, x, phi=math.pi / 3.0):
    """(ad P)^3 = ad P, (ad R)^3 = 4 ad R for R = 1 - 2P, and the quadratic form
    of exp(i phi ad P)."""
    p = pair.p_i
    r = np.eye(pair.dim) - 2.0 * p

    def ad_power(op, n):
        return reduce(lambda acc, _: commutator(op, acc), range(n), x)

    residuals = [
        frobenius_norm(ad_power(p, 3) - ad_power(p, 1)),
        frobenius_norm(ad_power(r, 3) - 4.0 * ad_power(r, 1)),
    ]
    u = exact_propagator(p, phi)
    residuals.append(
        frobenius_norm(u.conj().T @ x @ u - _conjugation_series(p, x, phi))
    )
    return _result("adjoint_polynomials", max(residuals), ALGEBRA_TOL, pair.seed)


# Derivatives --------------------------------------------------------------------


def check_derivative_identities(family, x0):
    """P dP + dP P = dP and [P, [P, dP]] = dP at x0 (central differences)."""
    p = family.at(x0)
    d_p = family.derivative(x0)
    residual = max(
        frobenius_norm(p @ d_p + d_p @ p - d_p),
        frobenius_norm(commutator(p, commutator(p, d_p)) - d_p),
    )
    return _result("derivative_identities", residual, FINITE_DIFF_TOL)


def check_phase_derivative(family, x0, phi=math.pi / 5.0):
    """
    For constant phi: e^{i phi P} d(e^{-i phi P})/dx
    = -i sin(phi) dP + (1 - cos(phi)) [P, dP].
    """
    h = family.step
    u_minus = exact_propagator(family.at(x0 - h), phi)
    u_plus = exact_propagator(family.at(x0 + h), phi)
    p = family.at(x0)
    d_p = family.derivative(x0)
    lhs = exact_propagator(p, phi).conj().T @ ((u_plus - u_minus) / (2.0 * h))
    rhs = -1j * math.sin(phi) * d_p + (1.0 - math.cos(phi)) * commutator(p, d_p)
    return _result("phase_derivative", frobenius_norm(lhs - rhs), FINITE_DIFF_TOL)


# Words -----------------------------------------------------------------------------


def check_projector_word_reduction(vectors, word, seed=None):
    """
    P_{w0} P_{w1} ... P_{w0} = prod_k <e_{wk}|e_{wk+1}> P_{w0} for a word that
    returns to its first index.
    """
    word = list(word)
    if len(word) < 2 or word[0] != word[-1]:
        raise ValueError(f"word must start and end on the same index, got {word}")
    vecs = [as_state(v) / np.linalg.norm(v) for v in vectors]
    lhs = reduce(np.matmul, [projector(vecs[k]) for k in word])
    coefficient = np.prod(
        [np.vdot(vecs[a], vecs[b]) for a, b in zip(word[:-1], word[1:])]
    )
    residual = frobenius_norm(lhs - coefficient * projector(vecs[word[0]]))
    return _result("word_reduction", residual, ALGEBRA_TOL, seed)


# Suite -------------------------------------------------------------------------------


def _random_word(gen, letters, length):
    start = int(gen.next_u64() % letters)
    middle = [int(gen.next_u64() % letters) for _ in range(length - 2)]
    return [start] + middle + [start]


def run_identity_suite(instances=100, seed=1, dim=8):
    """
    Runs every identity over `instances` seeded random instances; instance k
    uses seed + k.
    """
    results = []
    for k in range(instances):
        instance_seed = seed + k
        pair = ProjectorPair.random(dim, instance_seed)
        gen = SeededGenerator(instance_seed ^ 0xA5A5)
        x = random_hermitian(dim, gen)
        family = ParametrizedProjector(
            random_unit_vector(dim, gen), random_unit_vector(dim, gen)
        )
        x0 = gen.uniform_symmetric()
        vectors = [random_unit_vector(dim, gen) for _ in range(3)]
        word = _random_word(gen, 3, 2 + k % 5)
        results.extend(
            [
                check_reflection_product(pair),
                check_double_commutator(pair),
                check_farhi_gutmann(pair),
                check_conjugation(pair, x),
                check_adjoint_polynomials(pair, x),
                check_derivative_identities(family, x0),
                check_phase_derivative(family, x0),
                check_projector_word_reduction(vectors, word, instance_seed),
            ]
        )
    logger.debug("identity suite: %d checks over %d instances", len(results), instances)
    return results


def raise_on_breach(results):
    """Raises ResidualBreachError for the worst failing check, if any."""
    failed = [r for r in results if not r.passed]
    if failed:
        worst = max(failed, key=lambda r: r.residual / r.tolerance)
        raise ResidualBreachError(
            worst.name, worst.residual, worst.tolerance, worst.seed
        )
