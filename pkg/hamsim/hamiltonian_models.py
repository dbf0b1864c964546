"""
Model Hamiltonians and their block-diagonal decompositions.

A BlockDiagonalPart is one coloured part H_i of a sparse Hamiltonian: a set
of disjoint 1x1 and 2x2 Hermitian blocks. Parts apply to a state in O(N),
exponentiate block by block in closed form, and carry projector/reflection
flags for the series propagators.

Provided models:
- the periodic 1-D lattice Laplacian split into odd and even bond parts,
- arbitrary sparse Hermitian matrices split by greedy edge colouring,
- the two-state database-search Hamiltonians H_C and H_G.

Dependencies:
    - numpy, networkx
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property

import networkx as nx
import numpy as np

from .linalg_core import (
    HERMITIAN_TOL,
    as_operator,
    as_state,
    check_dims,
    exact_evolve,
)

logger = logging.getLogger(__name__)

PROJECTOR_TOL = 1e-12

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


class NotProjectorError(ValueError):
    """Raised when a part is required to satisfy P^2 = P but does not."""


class NotReflectionError(ValueError):
    """Raised when a part is required to satisfy R^2 = I but does not."""


def _empty_index():
    return np.zeros(0, dtype=np.int64)


@dataclass(frozen=True)
class BlockDiagonalPart:
    """One coloured part: disjoint 1x1 and 2x2 Hermitian blocks."""

    dim: int
    color: int = 0
    single_index: np.ndarray = field(default_factory=_empty_index)
    single_value: np.ndarray = field(default_factory=lambda: np.zeros(0))
    pair_index: np.ndarray = field(
        default_factory=lambda: np.zeros((0, 2), dtype=np.int64)
    )
    pair_block: np.ndarray = field(
        default_factory=lambda: np.zeros((0, 2, 2), dtype=np.complex128)
    )
    projector: bool = False
    reflection: bool = False

    def __post_init__(self):
        object.__setattr__(
            self, "single_index", np.asarray(self.single_index, dtype=np.int64)
        )
        object.__setattr__(
            self, "single_value", np.asarray(self.single_value, dtype=np.float64)
        )
        object.__setattr__(
            self,
            "pair_index",
            np.asarray(self.pair_index, dtype=np.int64).reshape(-1, 2),
        )
        object.__setattr__(
            self,
            "pair_block",
            np.asarray(self.pair_block, dtype=np.complex128).reshape(-1, 2, 2),
        )
        used = np.concatenate([self.single_index, self.pair_index.ravel()])
        if used.size != np.unique(used).size:
            raise ValueError(f"part {self.color}: an index appears in two blocks")
        if used.size and (used.min() < 0 or used.max() >= self.dim):
            raise ValueError(f"part {self.color}: block index outside [0, {self.dim})")
        blocks = self.pair_block
        if blocks.size and np.max(
            np.abs(blocks - np.conj(np.swapaxes(blocks, 1, 2)))
        ) > HERMITIAN_TOL:
            raise ValueError(f"part {self.color}: 2x2 block is not Hermitian")
        if self.projector and not self.is_projector():
            raise NotProjectorError(f"part {self.color} is flagged but P^2 != P")
        if self.reflection and not self.is_reflection():
            raise NotReflectionError(f"part {self.color} is flagged but R^2 != I")

    @property
    def covered(self):
        """Boolean mask of indices that belong to some block."""
        mask = np.zeros(self.dim, dtype=bool)
        mask[self.single_index] = True
        mask[self.pair_index.ravel()] = True
        return mask

    def is_projector(self, tol=PROJECTOR_TOL):
        vals = self.single_value
        if np.any(np.minimum(np.abs(vals), np.abs(vals - 1.0)) > tol):
            return False
        blocks = self.pair_block
        return bool(
            not blocks.size or np.max(np.abs(blocks @ blocks - blocks)) <= tol
        )

    def is_reflection(self, tol=PROJECTOR_TOL):
        # uncovered indices act as zero, which is not an involution
        if not np.all(self.covered):
            return False
        if np.any(np.abs(np.abs(self.single_value) - 1.0) > tol):
            return False
        blocks = self.pair_block
        return bool(
            not blocks.size or np.max(np.abs(blocks @ blocks - np.eye(2))) <= tol
        )

    def apply(self, x):
        """Returns H_i x."""
        x = as_state(x)
        check_dims(self.dim, x.shape[0])
        out = np.zeros_like(x)
        out[self.single_index] = self.single_value * x[self.single_index]
        if self.pair_index.size:
            out[self.pair_index] = np.einsum(
                "nij,nj->ni", self.pair_block, x[self.pair_index]
            )
        return out

    def exp_blocks(self, dt):
        """Closed-form exp(-i B dt) for every 2x2 block and 1x1 entry."""
        blocks = self.pair_block
        center = (blocks[:, 0, 0] + blocks[:, 1, 1]).real / 2.0
        traceless = blocks - center[:, None, None] * np.eye(2)
        radius = np.sqrt(
            ((blocks[:, 0, 0] - blocks[:, 1, 1]).real / 2.0) ** 2
            + np.abs(blocks[:, 0, 1]) ** 2
        )
        theta = radius * dt
        # sin(theta)/radius * dt, finite at radius = 0
        sinc = dt * np.sinc(theta / np.pi)
        unitary = (
            np.cos(theta)[:, None, None] * np.eye(2)
            - 1j * sinc[:, None, None] * traceless
        )
        unitary *= np.exp(-1j * center * dt)[:, None, None]
        phases = np.exp(-1j * self.single_value * dt)
        return phases, unitary

    def exp_apply(self, x, dt):
        """Returns exp(-i H_i dt) x; uncovered indices are left unchanged."""
        x = as_state(x)
        check_dims(self.dim, x.shape[0])
        phases, unitary = self.exp_blocks(dt)
        out = x.copy()
        out[self.single_index] = phases * x[self.single_index]
        if self.pair_index.size:
            out[self.pair_index] = np.einsum("nij,nj->ni", unitary, x[self.pair_index])
        return out

    def to_dense(self):
        dense = np.zeros((self.dim, self.dim), dtype=np.complex128)
        dense[self.single_index, self.single_index] = self.single_value
        for (j, l), block in zip(self.pair_index, self.pair_block):
            dense[np.ix_([j, l], [j, l])] = block
        return dense

    def as_reflection(self):
        """R = I - 2P; indices outside every block map to +1."""
        if not self.is_projector():
            raise NotProjectorError(f"part {self.color}: reflection needs P^2 = P")
        uncovered = np.flatnonzero(~self.covered)
        return BlockDiagonalPart(
            dim=self.dim,
            color=self.color,
            single_index=np.concatenate([self.single_index, uncovered]),
            single_value=np.concatenate(
                [1.0 - 2.0 * self.single_value, np.ones(uncovered.size)]
            ),
            pair_index=self.pair_index,
            pair_block=np.eye(2) - 2.0 * self.pair_block,
            reflection=True,
        )

    def scaled(self, factor):
        return BlockDiagonalPart(
            dim=self.dim,
            color=self.color,
            single_index=self.single_index,
            single_value=factor * self.single_value,
            pair_index=self.pair_index,
            pair_block=factor * self.pair_block,
        )


@dataclass(frozen=True)
class DensePart:
    """A Hermitian part held as a dense matrix (used for random projector tests)."""

    matrix: np.ndarray
    color: int = 0

    def __post_init__(self):
        dense = as_operator(self.matrix)
        if np.max(np.abs(dense - dense.conj().T), initial=0.0) > HERMITIAN_TOL:
            raise ValueError(f"part {self.color}: dense part is not Hermitian")
        object.__setattr__(self, "matrix", dense)

    @property
    def dim(self):
        return self.matrix.shape[0]

    def apply(self, x):
        x = as_state(x)
        check_dims(self.dim, x.shape[0])
        return self.matrix @ x

    def exp_apply(self, x, dt):
        return exact_evolve(self.matrix, dt, x)

    def to_dense(self):
        return self.matrix.copy()

    def is_projector(self, tol=PROJECTOR_TOL):
        return bool(np.max(np.abs(self.matrix @ self.matrix - self.matrix)) <= tol)

    def is_reflection(self, tol=PROJECTOR_TOL):
        eye = np.eye(self.dim)
        return bool(np.max(np.abs(self.matrix @ self.matrix - eye)) <= tol)

    def as_reflection(self):
        if not self.is_projector():
            raise NotProjectorError(f"part {self.color}: reflection needs P^2 = P")
        return DensePart(np.eye(self.dim) - 2.0 * self.matrix, color=self.color)


def dense_from_parts(parts):
    """Sum of the parts as a dense matrix."""
    parts = list(parts)
    if not parts:
        raise ValueError("at least one part is required")
    total = np.zeros((parts[0].dim, parts[0].dim), dtype=np.complex128)
    for part in parts:
        check_dims(parts[0].dim, part.dim)
        total += part.to_dense()
    return total


def operator_apply(operator):
    """
    Returns (dim, apply) for a dense matrix, a single part or a list of parts.
    """
    if isinstance(operator, (BlockDiagonalPart, DensePart)):
        return operator.dim, operator.apply
    if isinstance(operator, (list, tuple)):
        parts = list(operator)

        def apply_parts(x):
            out = parts[0].apply(x)
            for part in parts[1:]:
                out += part.apply(x)
            return out

        return parts[0].dim, apply_parts
    dense = as_operator(operator)
    return dense.shape[0], lambda x: dense @ as_state(x)


# Laplacian -------------------------------------------------------------------


def laplacian_parts(length, scale=0.5):
    """
    Odd-bond and even-bond parts of the periodic lattice Laplacian.
    input: int:length (even, >= 4), float:scale
    output: (H_o, H_e), each a BlockDiagonalPart
    """
    if length < 4 or length % 2:
        raise ValueError(f"lattice length must be even and at least 4, got {length}")
    block = scale * np.array([[1.0, -1.0], [-1.0, 1.0]])
    sites = np.arange(0, length, 2)
    odd_pairs = np.stack([sites, sites + 1], axis=1)
    even_pairs = np.stack([sites + 1, (sites + 2) % length], axis=1)
    projector = bool(np.isclose(scale, 0.5))
    blocks = np.repeat(block[None, :, :], sites.size, axis=0)
    h_odd = BlockDiagonalPart(
        dim=length,
        color=0,
        pair_index=odd_pairs,
        pair_block=blocks,
        projector=projector,
    )
    h_even = BlockDiagonalPart(
        dim=length,
        color=1,
        pair_index=even_pairs,
        pair_block=blocks,
        projector=projector,
    )
    return h_odd, h_even


def laplacian_dense(length, scale=0.5):
    """Periodic Laplacian (diagonal 2, neighbours -1) times scale."""
    dense = 2.0 * np.eye(length)
    idx = np.arange(length)
    dense[idx, (idx + 1) % length] -= 1.0
    dense[(idx + 1) % length, idx] -= 1.0
    return scale * dense.astype(np.complex128)


# Sparse graphs and edge colouring -------------------------------------------


@dataclass
class SparseHamiltonianGraph:
    """Hermitian sparse matrix stored once per edge (j < l) plus its diagonal."""

    dim: int
    edges: list
    diagonal: np.ndarray

    def __post_init__(self):
        self.diagonal = np.asarray(self.diagonal, dtype=np.float64)
        if self.diagonal.shape != (self.dim,):
            raise ValueError(f"diagonal must have {self.dim} entries")
        seen = set()
        for j, l, _ in self.edges:
            if not 0 <= j < l < self.dim:
                raise ValueError(f"edge ({j}, {l}) needs 0 <= j < l < {self.dim}")
            if (j, l) in seen:
                raise ValueError(f"edge ({j}, {l}) listed twice")
            seen.add((j, l))

    @cached_property
    def graph(self):
        """networkx view of the edges, built once per instance."""
        graph = nx.Graph()
        graph.add_nodes_from(range(self.dim))
        graph.add_edges_from((j, l, {"value": h}) for j, l, h in self.edges)
        return graph

    @property
    def max_degree(self):
        degrees = [deg for _, deg in self.graph.degree()]
        return max(degrees, default=0)

    @classmethod
    def from_dense(cls, matrix, tol=0.0):
        dense = as_operator(matrix)
        if np.max(np.abs(dense - dense.conj().T), initial=0.0) > HERMITIAN_TOL:
            raise ValueError("sparse graph input must be Hermitian")
        dim = dense.shape[0]
        rows, cols = np.nonzero(np.abs(np.triu(dense, k=1)) > tol)
        edges = [(int(j), int(l), complex(dense[j, l])) for j, l in zip(rows, cols)]
        return cls(dim=dim, edges=edges, diagonal=dense.diagonal().real.copy())

    @classmethod
    def from_edge_lines(cls, text, dim=None):
        """
        Parses `j l re im` edge lines and `diag j v` lines. Blank lines and
        lines starting with # are ignored.
        """
        edges = []
        diag = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split()
            try:
                if fields[0] == "diag" and len(fields) == 3:
                    diag[int(fields[1])] = float(fields[2])
                elif len(fields) == 4:
                    j, l = int(fields[0]), int(fields[1])
                    value = complex(float(fields[2]), float(fields[3]))
                    if j > l:
                        j, l, value = l, j, value.conjugate()
                    edges.append((j, l, value))
                else:
                    raise ValueError("wrong field count")
            except ValueError as err:
                raise ValueError(f"graph line {lineno}: cannot parse {raw!r}") from err
        indices = [max(j, l) for j, l, _ in edges] + list(diag)
        size = dim if dim is not None else (max(indices, default=-1) + 1)
        diagonal = np.zeros(size)
        for j, v in diag.items():
            diagonal[j] = v
        return cls(dim=size, edges=edges, diagonal=diagonal)

    def to_dense(self):
        dense = np.diag(self.diagonal).astype(np.complex128)
        for j, l, h in self.edges:
            dense[j, l] = h
            dense[l, j] = np.conj(h)
        return dense


def edge_coloring(graph):
    """
    Greedy first-available edge colouring, edges taken in stored order.

    Returns one BlockDiagonalPart per colour (vertex-disjoint 2x2 blocks with
    zero diagonal) followed by a 1x1 part carrying the diagonal, if any.
    At most 2d - 1 colours are used for maximum degree d.
    """
    used_at = {v: set() for v in range(graph.dim)}
    color_edges = {}
    for j, l, h in graph.edges:
        busy = used_at[j] | used_at[l]
        color = next(c for c in range(len(busy) + 1) if c not in busy)
        used_at[j].add(color)
        used_at[l].add(color)
        color_edges.setdefault(color, []).append((j, l, h))

    parts = []
    for color in sorted(color_edges):
        members = color_edges[color]
        blocks = np.zeros((len(members), 2, 2), dtype=np.complex128)
        for n, (_, _, h) in enumerate(members):
            blocks[n, 0, 1] = h
            blocks[n, 1, 0] = np.conj(h)
        parts.append(
            BlockDiagonalPart(
                dim=graph.dim,
                color=color,
                pair_index=[(j, l) for j, l, _ in members],
                pair_block=blocks,
            )
        )
    nonzero = np.flatnonzero(graph.diagonal)
    if nonzero.size:
        parts.append(
            BlockDiagonalPart(
                dim=graph.dim,
                color=len(color_edges),
                single_index=nonzero,
                single_value=graph.diagonal[nonzero],
            )
        )
    logger.debug(
        "edge colouring: %d colours for max degree %d",
        len(color_edges),
        graph.max_degree,
    )
    return parts


def color_count(parts):
    """Number of edge colours, not counting the diagonal part."""
    return sum(1 for part in parts if part.pair_index.size)


# Database search ---------------------------------------------------------------


@dataclass(frozen=True)
class SearchModel:
    """H = a1 |s><s| + a2 |t><t| over N items; the target is index 0."""

    n_items: int
    a1: float = 1.0
    a2: float = 1.0

    def __post_init__(self):
        if self.n_items < 2:
            raise ValueError(f"search needs at least 2 items, got {self.n_items}")
        if not -1.0 <= self.a1 <= 1.0:
            raise ValueError(f"a1 must lie in [-1, 1], got {self.a1}")
        if self.a2 != 1.0:
            raise ValueError("a2 is fixed to 1 by convention")


def start_state_frame(n_items):
    """|s> in the {|t>, |t_perp>} frame."""
    return np.array(
        [1.0 / np.sqrt(n_items), np.sqrt((n_items - 1) / n_items)],
        dtype=np.complex128,
    )


def search_projectors(n_items):
    """N-dimensional P_s (uniform superposition) and P_t (index 0)."""
    start = np.full(n_items, 1.0 / np.sqrt(n_items), dtype=np.complex128)
    p_start = np.outer(start, start.conj())
    p_target = np.zeros((n_items, n_items), dtype=np.complex128)
    p_target[0, 0] = 1.0
    return p_start, p_target


def search_hamiltonians(model):
    """
    H_C and H_G in the {|t>, |t_perp>} frame, plus H_C embedded in N dims.
    """
    n = model.n_items
    s = start_state_frame(n)
    p_start = np.outer(s, s.conj())
    p_target = np.diag([1.0, 0.0]).astype(np.complex128)
    h_c = model.a1 * p_start + model.a2 * p_target
    # H_G = i [P_t, P_s] = -(sqrt(N-1)/N) sigma_y
    h_g = 1j * (p_target @ p_start - p_start @ p_target)
    full_start, full_target = search_projectors(n)
    embedded = model.a1 * full_start + model.a2 * full_target
    return h_c, h_g, embedded
