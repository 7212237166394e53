"""Dimension bookkeeping on the unit cube.

Polynomial-space dimensions, the ``m^d`` subcube decomposition with its
affine maps, and unisolvent node sets for total-degree interpolation.
All objects here are immutable after construction and safe to share
across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "RCOND_MIN",
    "UnisolvenceError",
    "poly_dim",
    "total_degree_exponents",
    "monomial_matrix",
    "NodeSet",
    "regular_nodes",
    "shifted_nodes",
    "SubcubeIndex",
    "subcube_indices",
    "subcube_map",
    "subcube_unmap",
    "subcube_volume",
]

# Node sets whose interpolation matrix has a reciprocal condition estimate
# below this are rejected at construction time.
RCOND_MIN = 1e-10


class UnisolvenceError(ValueError):
    """Node set cannot support unique total-degree interpolation."""

    def __init__(self, message: str, rcond: float):
        super().__init__(message)
        self.rcond = rcond


def _check_sd(s: int, d: int) -> None:
    if not (isinstance(s, (int, np.integer)) and isinstance(d, (int, np.integer))):
        raise TypeError(f"s and d must be integers, got {s!r} and {d!r}")
    if s < 1 or d < 1:
        raise ValueError(f"need s >= 1 and d >= 1, got s={s}, d={d}")


def poly_dim(s: int, d: int) -> int:
    """Dimension of the space of d-variate polynomials of total degree < s.

    Equals ``C(s+d-1, d)``.  Computed in exact integer arithmetic, so the
    result is never silently wrapped.
    """
    _check_sd(s, d)
    return math.comb(s + d - 1, d)


def _compositions(total: int, parts: int):
    """All nonnegative integer tuples of length `parts` summing to `total`,
    in descending lexicographic order."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total, -1, -1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


@lru_cache(maxsize=None)
def _exponent_array(s: int, d: int) -> np.ndarray:
    rows = [alpha for deg in range(s) for alpha in _compositions(deg, d)]
    arr = np.array(rows, dtype=np.int64).reshape(len(rows), d)
    arr.flags.writeable = False
    return arr


def total_degree_exponents(s: int, d: int) -> np.ndarray:
    """Multi-indices alpha with ``|alpha|_1 <= s-1`` as an (n0, d) array.

    Rows are ordered by total degree, descending-lexicographically within
    each degree, so the constant term comes first.  This ordering is the
    layout contract for every coefficient vector in the package.  The
    returned array is read-only and shared between callers.
    """
    _check_sd(s, d)
    return _exponent_array(s, d)


def monomial_matrix(points: np.ndarray, exponents: np.ndarray) -> np.ndarray:
    """Collocation matrix ``A[i, j] = points[i] ** exponents[j]`` (monomials).

    `points` has shape (n, d) and `exponents` shape (n0, d); the result is
    (n, n0).
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != exponents.shape[1]:
        raise ValueError(
            f"points must have shape (n, {exponents.shape[1]}), got {points.shape}"
        )
    return np.prod(points[:, None, :] ** exponents[None, :, :], axis=-1)


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class NodeSet:
    """Unisolvent interpolation nodes for polynomials of total degree < s.

    `points` has shape (n0, d) with ``n0 = poly_dim(s, d)`` and all
    coordinates in [0, 1].  `shift` records the random offset that produced
    the set, if any.  Construction verifies that the monomial collocation
    matrix is invertible; its reciprocal condition estimate must exceed
    ``RCOND_MIN``, otherwise an :class:`UnisolvenceError` is raised rather
    than letting downstream solves produce garbage.
    """

    points: np.ndarray
    s: int
    d: int
    shift: np.ndarray | None = None

    def __post_init__(self):
        _check_sd(self.s, self.d)
        pts = np.asarray(self.points, dtype=float)
        n0 = poly_dim(self.s, self.d)
        if pts.shape != (n0, self.d):
            raise ValueError(f"expected points of shape ({n0}, {self.d}), got {pts.shape}")
        if pts.min() < 0.0 or pts.max() > 1.0:
            raise ValueError("interpolation nodes must lie inside the unit cube")
        object.__setattr__(self, "points", _readonly(pts))
        if self.shift is not None:
            shift = np.asarray(self.shift, dtype=float)
            if shift.shape != (self.d,):
                raise ValueError(f"shift must have shape ({self.d},), got {shift.shape}")
            object.__setattr__(self, "shift", _readonly(shift))
        matrix = monomial_matrix(self.points, total_degree_exponents(self.s, self.d))
        cond = np.linalg.cond(matrix)
        rcond = 1.0 / cond if np.isfinite(cond) and cond > 0 else 0.0
        if rcond < RCOND_MIN:
            raise UnisolvenceError(
                f"node set is not unisolvent for degree < {self.s}: "
                f"reciprocal condition estimate {rcond:.3e} < {RCOND_MIN:.0e}",
                rcond=rcond,
            )
        object.__setattr__(self, "interpolation_matrix", _readonly(matrix))
        object.__setattr__(self, "rcond", float(rcond))

    def __len__(self) -> int:
        return self.points.shape[0]


def regular_nodes(s: int, d: int) -> NodeSet:
    """The principal simplex lattice ``{alpha/(s-1) : |alpha|_1 <= s-1}``.

    A classical unisolvent set for interpolation by polynomials of total
    degree < s.  For s = 1 the single node is placed at the cube center.
    """
    _check_sd(s, d)
    if s == 1:
        points = np.full((1, d), 0.5)
    else:
        points = total_degree_exponents(s, d).astype(float) / (s - 1)
    return NodeSet(points=points, s=s, d=d)


def shifted_nodes(base: NodeSet, shift: np.ndarray) -> NodeSet:
    """Replace each base node x_j by ``(x_j + shift) / 2``.

    The result stays inside the unit cube for any shift in [0, 1]^d, and
    unisolvence is preserved because the map is an invertible affine
    contraction of an already unisolvent set.
    """
    if base.shift is not None:
        raise ValueError("base node set is already shifted")
    shift = np.asarray(shift, dtype=float)
    if shift.shape != (base.d,):
        raise ValueError(f"shift must have shape ({base.d},), got {shift.shape}")
    if shift.min() < 0.0 or shift.max() > 1.0:
        raise ValueError("shift must lie inside the unit cube")
    return NodeSet(points=(base.points + shift) / 2.0, s=base.s, d=base.d, shift=shift)


@dataclass(frozen=True)
class SubcubeIndex:
    """Index of one cell of the uniform m-fold split of the unit cube.

    The cell is ``prod_j [i_j/m, (i_j+1)/m]``; its chart is the affine map
    x -> (x + i)/m from [0,1]^d onto the cell.
    """

    index: tuple[int, ...]
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"need m >= 1, got m={self.m}")
        idx = tuple(int(i) for i in self.index)
        if len(idx) < 1:
            raise ValueError("index must have at least one axis")
        if any(i < 0 or i >= self.m for i in idx):
            raise ValueError(f"index {idx} out of range for m={self.m}")
        object.__setattr__(self, "index", idx)

    @property
    def d(self) -> int:
        return len(self.index)


@lru_cache(maxsize=32)
def _index_array(m: int, d: int) -> np.ndarray:
    grids = np.meshgrid(*([np.arange(m)] * d), indexing="ij")
    arr = np.stack(grids, axis=-1).reshape(-1, d).astype(np.int64)
    arr.flags.writeable = False
    return arr


def subcube_indices(m: int, d: int) -> np.ndarray:
    """All m^d subcube indices as an (m^d, d) array in lexicographic order.

    The lexicographic order fixes the traversal (and hence the floating
    summation order) used by every estimator.  Read-only, shared array.
    """
    if m < 1 or d < 1:
        raise ValueError(f"need m >= 1 and d >= 1, got m={m}, d={d}")
    return _index_array(m, d)


def subcube_volume(m: int, d: int) -> float:
    """Volume of a single cell, ``m**-d``."""
    if m < 1 or d < 1:
        raise ValueError(f"need m >= 1 and d >= 1, got m={m}, d={d}")
    return 1.0 / m**d


def subcube_map(idx: SubcubeIndex, x: np.ndarray) -> np.ndarray:
    """Map a point of [0,1]^d onto the subcube: ``(x + i)/m`` componentwise."""
    x = np.asarray(x, dtype=float)
    if x.shape != (idx.d,):
        raise ValueError(f"expected a point of shape ({idx.d},), got {x.shape}")
    if x.min() < 0.0 or x.max() > 1.0:
        raise ValueError("point must lie inside the unit cube")
    return (x + np.asarray(idx.index, dtype=float)) / idx.m


def subcube_unmap(idx: SubcubeIndex, y: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Inverse chart: local coordinates ``y*m - i`` of a point in the subcube.

    `tol` absorbs roundoff from the forward map; points further outside the
    cell raise.  Round-trips with :func:`subcube_map` to within a few ulp.
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (idx.d,):
        raise ValueError(f"expected a point of shape ({idx.d},), got {y.shape}")
    local = y * idx.m - np.asarray(idx.index, dtype=float)
    if local.min() < -tol * idx.m or local.max() > 1.0 + tol * idx.m:
        raise ValueError(f"point {y} lies outside subcube {idx.index} of the m={idx.m} grid")
    return np.clip(local, 0.0, 1.0)
