"""Subspace arithmetic and matrix relations restricted to a subspace.

A :class:`Subspace` is an orthonormal-column basis; the restricted
relations ``eq``/``geq``/``gt`` compare two matrices only through their
action on the subspace, returning a witness vector on failure.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .config import DEFAULT_TOL, ToleranceConfig
from .errors import InvalidInput
from .numerics import as_matrix, nullspace_basis, range_basis

__all__ = ["Subspace", "ComparisonResult", "compare_on", "intersect", "image",
           "projector_of"]


@dataclass(frozen=True)
class Subspace:
    """Subspace of R^n given by an orthonormal basis matrix (n x dim)."""

    basis: np.ndarray

    def __post_init__(self):
        b = as_matrix(self.basis, name="basis")
        if b.shape[1] > b.shape[0]:
            raise InvalidInput(f"basis has more columns than rows: {b.shape}")
        gram_defect = np.linalg.norm(b.T @ b - np.eye(b.shape[1]))
        if gram_defect > 1e-10 * max(1, b.shape[1]):
            raise InvalidInput(f"basis columns not orthonormal (defect {gram_defect:.2e})")
        object.__setattr__(self, "basis", b)

    @property
    def ambient(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def from_span(cls, m, tol: ToleranceConfig = DEFAULT_TOL):
        """Subspace spanned by the columns of ``m`` (orthonormalized)."""
        m = as_matrix(m, name="span")
        return cls(range_basis(m, tol))

    @classmethod
    def full(cls, n: int):
        return cls(np.eye(n))

    @classmethod
    def zero(cls, n: int):
        return cls(np.zeros((n, 0)))

    def contains(self, x, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
        x = np.asarray(x, dtype=float).reshape(-1)
        resid = x - self.basis @ (self.basis.T @ x)
        return np.linalg.norm(resid) <= max(tol.atol, tol.rtol * (1 + np.linalg.norm(x)))

    def angles_to(self, other: "Subspace") -> np.ndarray:
        """Principal angles to another subspace of the same ambient space."""
        if other.ambient != self.ambient:
            raise InvalidInput("ambient dimensions differ")
        if self.dim == 0 or other.dim == 0:
            return np.zeros(0)
        return sla.subspace_angles(self.basis, other.basis)

    def is_same(self, other: "Subspace", angle_tol: float = 1e-7) -> bool:
        if self.dim != other.dim:
            return False
        if self.dim == 0:
            return True
        return float(np.max(self.angles_to(other))) <= angle_tol


@dataclass(frozen=True)
class ComparisonResult:
    """Outcome of a restricted matrix comparison.

    ``defect`` is the amount by which the relation fails (0 when it holds
    with slack); ``witness`` is an ambient-space vector violating the
    relation when ``holds`` is False.
    """

    holds: bool
    mode: str
    defect: float
    witness: np.ndarray | None = None

    def __bool__(self):
        return self.holds


def _check_symmetric(m, name, tol):
    defect = np.linalg.norm(m - m.T)
    if defect > max(tol.atol, tol.rtol * (1 + np.linalg.norm(m))):
        raise InvalidInput(f"{name} must be symmetric for ordered comparisons "
                           f"(defect {defect:.2e})")


def compare_on(m, n, sub: Subspace, mode: str, tol: ToleranceConfig = DEFAULT_TOL):
    """Compare two matrices restricted to a subspace.

    Parameters
    ----------
    m, n : array_like
        Square matrices acting on the ambient space.  For ``geq``/``gt``
        both must be symmetric.
    sub : Subspace
        Where the comparison takes place.
    mode : {"eq", "geq", "gt"}
        ``eq``  : m x = n x for all x in the subspace.
        ``geq`` : x^T m x >= x^T n x on the subspace (up to -atol).
        ``gt``  : strict, with margin ``atol * (1 + |m| + |n|)``.

    Returns
    -------
    ComparisonResult
    """
    m = as_matrix(m, name="m", square=True)
    n = as_matrix(n, name="n", square=True)
    if m.shape != n.shape or m.shape[0] != sub.ambient:
        raise InvalidInput("matrix/subspace dimensions are inconsistent")
    b = sub.basis
    scale = 1.0 + np.linalg.norm(m) + np.linalg.norm(n)
    if mode == "eq":
        if sub.dim == 0:
            return ComparisonResult(True, mode, 0.0)
        diff = (m - n) @ b
        defect = float(np.linalg.norm(diff, 2))
        thr = max(tol.atol, tol.rtol * scale)
        if defect <= thr:
            return ComparisonResult(True, mode, defect)
        _, _, vh = np.linalg.svd(diff)
        return ComparisonResult(False, mode, defect, witness=b @ vh[0])
    if mode not in ("geq", "gt"):
        raise InvalidInput(f"unknown comparison mode {mode!r}")
    _check_symmetric(m, "m", tol)
    _check_symmetric(n, "n", tol)
    if sub.dim == 0:
        return ComparisonResult(True, mode, 0.0)
    restricted = b.T @ (m - n) @ b
    restricted = 0.5 * (restricted + restricted.T)
    eigvals, eigvecs = np.linalg.eigh(restricted)
    lam_min = float(eigvals[0])
    floor = -tol.atol if mode == "geq" else tol.atol * scale
    if lam_min >= floor:
        return ComparisonResult(True, mode, max(0.0, floor - lam_min))
    return ComparisonResult(False, mode, floor - lam_min, witness=b @ eigvecs[:, 0])


def intersect(l1: Subspace, l2: Subspace, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
    """Intersection of two subspaces via stacked complement projectors."""
    if l1.ambient != l2.ambient:
        raise InvalidInput("ambient dimensions differ")
    n = l1.ambient
    p1 = np.eye(n) - l1.basis @ l1.basis.T
    p2 = np.eye(n) - l2.basis @ l2.basis.T
    return Subspace(nullspace_basis(np.vstack([p1, p2]), tol))


def image(m, sub: Subspace, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
    """Image of a subspace under a linear map."""
    m = as_matrix(m, name="m")
    if m.shape[1] != sub.ambient:
        raise InvalidInput("matrix columns must match the ambient dimension")
    if sub.dim == 0:
        return Subspace.zero(m.shape[0])
    return Subspace(range_basis(m @ sub.basis, tol))


def projector_of(sub: Subspace) -> np.ndarray:
    """Orthogonal projector onto the subspace."""
    return sub.basis @ sub.basis.T
