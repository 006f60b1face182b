"""Dense rank-revealing linear algebra shared by every other module.

All rank and kernel decisions go through :func:`numeric_rank` /
:func:`nullspace_basis` so that one :class:`~pencilph.config.ToleranceConfig`
controls every threshold in the package.  Decompositions (SVD, real Schur)
are delegated to LAPACK via scipy; the Lyapunov/Sylvester back-substitution
runs on the package's own kernel (compiled or pure Python, selected at
import in :mod:`pencilph._kernels`).
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from ._kernels import solve_sylvester_quasi_triangular
from .config import DEFAULT_TOL, ToleranceConfig
from .errors import InvalidInput

__all__ = [
    "RealSchurResult",
    "numeric_rank",
    "nullspace_basis",
    "range_basis",
    "pseudo_inverse",
    "ordered_real_schur",
    "solve_lyapunov_equation",
    "solve_sylvester_schur",
    "quasi_triangular_eigenvalues",
    "as_matrix",
]

_REGIONS = ("open-left", "closed-left", "open-right", "imaginary-axis")


def as_matrix(m, name="matrix", square=False, allow_complex=False):
    """Validate and convert input to a 2-D float (or complex) ndarray."""
    arr = np.atleast_2d(np.asarray(m))
    if arr.ndim != 2:
        raise InvalidInput(f"{name} must be 2-D, got shape {arr.shape}")
    if np.iscomplexobj(arr):
        if not allow_complex:
            raise InvalidInput(f"{name} must be real")
        arr = arr.astype(complex)
    else:
        arr = arr.astype(float)
    if not np.all(np.isfinite(arr)):
        raise InvalidInput(f"{name} contains non-finite entries")
    if square and arr.shape[0] != arr.shape[1]:
        raise InvalidInput(f"{name} must be square, got shape {arr.shape}")
    return arr


def numeric_rank(m, tol: ToleranceConfig = DEFAULT_TOL):
    """Number of singular values exceeding ``max(atol, rtol * sigma_max)``.

    Parameters
    ----------
    m : array_like
        Real or complex matrix with finite entries.
    tol : ToleranceConfig
        Thresholds for the rank decision.

    Returns
    -------
    int
    """
    arr = as_matrix(m, allow_complex=True)
    if arr.size == 0:
        return 0
    sv = np.linalg.svd(arr, compute_uv=False)
    return int(np.sum(sv > tol.svd_threshold(sv[0])))


def nullspace_basis(m, tol: ToleranceConfig = DEFAULT_TOL, floor: float = 0.0):
    """Orthonormal basis of ker(m) as columns of a (cols x d) matrix.

    ``d = cols(m) - numeric_rank(m, tol)``; the basis satisfies
    ``m @ basis ~ 0`` and ``basis.T @ basis = I``.  ``floor`` raises the
    scale reference of the threshold; deflation algorithms use it so a
    sub-block of rounding junk cannot redefine "numerically nonzero".
    """
    arr = as_matrix(m, allow_complex=True)
    ncols = arr.shape[1]
    if arr.size == 0:
        return np.eye(ncols)[:, :ncols] if ncols else np.zeros((0, 0))
    _, sv, vh = np.linalg.svd(arr)
    rank = int(np.sum(sv > tol.svd_threshold(max(sv[0], floor)))) if sv.size else 0
    return vh[rank:].conj().T


def range_basis(m, tol: ToleranceConfig = DEFAULT_TOL, floor: float = 0.0):
    """Orthonormal basis of the column space of ``m`` (``floor`` as above)."""
    arr = as_matrix(m, allow_complex=True)
    if arr.size == 0:
        return np.zeros((arr.shape[0], 0))
    u, sv, _ = np.linalg.svd(arr)
    rank = int(np.sum(sv > tol.svd_threshold(max(sv[0], floor)))) if sv.size else 0
    return u[:, :rank]


def pseudo_inverse(m, tol: ToleranceConfig = DEFAULT_TOL):
    """Moore-Penrose pseudo-inverse via SVD with the configured threshold."""
    arr = as_matrix(m, allow_complex=True)
    if arr.size == 0:
        return arr.T.copy()
    u, sv, vh = np.linalg.svd(arr, full_matrices=False)
    thr = tol.svd_threshold(sv[0]) if sv.size else 0.0
    inv = np.where(sv > thr, 1.0 / np.where(sv > thr, sv, 1.0), 0.0)
    return (vh.conj().T * inv) @ u.conj().T


def quasi_triangular_eigenvalues(t):
    """Eigenvalues of a real Schur factor in diagonal-block order."""
    n = t.shape[0]
    eigs = []
    i = 0
    while i < n:
        if i + 1 < n and t[i + 1, i] != 0.0:
            a, b = t[i, i], t[i, i + 1]
            c, d = t[i + 1, i], t[i + 1, i + 1]
            tr = a + d
            disc = (a - d) ** 2 + 4.0 * b * c
            if disc < 0.0:
                re = tr / 2.0
                im = np.sqrt(-disc) / 2.0
                eigs.extend([complex(re, im), complex(re, -im)])
            else:
                root = np.sqrt(disc) / 2.0
                eigs.extend([complex(tr / 2.0 + root), complex(tr / 2.0 - root)])
            i += 2
        else:
            eigs.append(complex(t[i, i]))
            i += 1
    return eigs


@dataclass(frozen=True)
class RealSchurResult:
    """Ordered real Schur decomposition ``m = q @ t @ q.T``.

    ``t`` is quasi-upper-triangular with 1x1/2x2 diagonal blocks, ``q`` is
    orthogonal, and the first ``leading`` eigenvalues (diagonal order) lie in
    the requested spectral region.
    """

    q: np.ndarray
    t: np.ndarray
    eigenvalues: list = field(default_factory=list)
    leading: int = 0


def region_predicate(region, tol: ToleranceConfig = DEFAULT_TOL):
    """Membership test Re/Im -> bool for a spectral region.

    Axis membership uses the decision band ``|Re| <= atol``; "open" regions
    exclude the band, "closed-left" includes it.
    """
    atol = tol.atol
    if region == "open-left":
        return lambda re, im: re < -atol
    if region == "closed-left":
        return lambda re, im: re <= atol
    if region == "open-right":
        return lambda re, im: re > atol
    if region == "imaginary-axis":
        return lambda re, im: abs(re) <= atol
    raise InvalidInput(f"unknown region {region!r}, expected one of {_REGIONS}")


def ordered_real_schur(m, region, tol: ToleranceConfig = DEFAULT_TOL):
    """Real Schur form with the eigenvalues of ``region`` leading.

    Parameters
    ----------
    m : array_like
        Square real matrix.
    region : str
        One of ``open-left``, ``closed-left``, ``open-right``,
        ``imaginary-axis``.
    tol : ToleranceConfig
        Supplies the axis decision band ``|Re| <= atol``.

    Returns
    -------
    RealSchurResult
    """
    arr = as_matrix(m, name="m", square=True)
    n = arr.shape[0]
    if n == 0:
        return RealSchurResult(np.zeros((0, 0)), np.zeros((0, 0)), [], 0)
    pred = region_predicate(region, tol)
    t, q, sdim = sla.schur(arr, output="real", sort=pred)
    return RealSchurResult(q, t, quasi_triangular_eigenvalues(t), int(sdim))


def solve_lyapunov_equation(a, c):
    """Solve ``a.T @ x + x @ a = -c`` for symmetric ``x``.

    Requires ``sigma(a)`` and ``sigma(-a.T)`` disjoint; a collision surfaces
    as :class:`~pencilph.errors.SpectrumClash` from the near-singular block
    system.  The solve reduces ``a`` to real Schur form and runs the 1x1/2x2
    block back-substitution kernel.
    """
    a = as_matrix(a, name="a", square=True)
    c = as_matrix(c, name="c", square=True)
    if a.shape != c.shape:
        raise InvalidInput(f"shape mismatch: a {a.shape} vs c {c.shape}")
    sym_defect = np.linalg.norm(c - c.T)
    if sym_defect > 1e-8 * (1.0 + np.linalg.norm(c)):
        raise InvalidInput("c must be symmetric")
    n = a.shape[0]
    if n == 0:
        return np.zeros((0, 0))
    t, u = sla.schur(a, output="real")
    ctil = u.T @ c @ u
    y = solve_sylvester_quasi_triangular(t, t, -ctil, transa=True, transb=False, sign=1)
    x = u @ y @ u.T
    return 0.5 * (x + x.T)


def solve_sylvester_schur(a, b, c):
    """Solve ``a @ x - x @ b = c`` via real Schur reduction of both sides."""
    a = as_matrix(a, name="a", square=True)
    b = as_matrix(b, name="b", square=True)
    c = as_matrix(c, name="c")
    if c.shape != (a.shape[0], b.shape[0]):
        raise InvalidInput(
            f"c must be {(a.shape[0], b.shape[0])}, got {c.shape}"
        )
    if a.shape[0] == 0 or b.shape[0] == 0:
        return np.zeros(c.shape)
    ta, ua = sla.schur(a, output="real")
    tb, ub = sla.schur(b, output="real")
    rhs = ua.T @ c @ ub
    y = solve_sylvester_quasi_triangular(ta, tb, rhs, transa=False, transb=False, sign=-1)
    return ua @ y @ ub.T
