"""Stability verdicts and restricted Lyapunov certificates for pencils.

``check_stability`` classifies a pencil through its spectrum (eigenvalues in
the closed left half-plane, imaginary-axis ones semi-simple).
``solve_lyapunov_inequality`` constructs the matching certificate: a
symmetric X, positive definite on the image of the system space under E and
mapping that image onto itself, whose restricted bilinear form
A^T X E + E^T X A is negative semidefinite on the system space (negative
definite in the strict variant).

The construction reduces the pencil to the flow matrix H of the dynamics on
the system space, splits H into its strictly stable and imaginary-axis
parts by an ordered Schur form plus one Sylvester decoupling, solves a
Lyapunov equation for the stable part, and uses the exact algebraic
solution on the semi-simple imaginary part.
"""

from dataclasses import dataclass

import numpy as np

from ._kernels import solve_sylvester_quasi_triangular
from .config import DEFAULT_TOL, ToleranceConfig
from .errors import (IllConditionedError, ImagJordanBlock, NotStable,
                     SpectrumClash)
from .numerics import (nullspace_basis, ordered_real_schur, range_basis,
                       solve_lyapunov_equation)
from .pencil import MatrixPencil, QuasiKroneckerForm, SpectralPoint, \
    _cluster_eigenvalues, quasi_kronecker
from .numerics import numeric_rank
from .subspace import Subspace, image

__all__ = [
    "StabilityVerdict",
    "LyapunovCertificate",
    "check_stability",
    "solve_lyapunov_inequality",
]


@dataclass(frozen=True)
class StabilityVerdict:
    """Classification of a pencil with its spectral evidence."""

    classification: str  # 'asymptotically_stable' | 'stable' | 'unstable' | 'singular'
    spectrum_report: tuple
    reason: str

    @property
    def is_stable(self) -> bool:
        return self.classification in ("stable", "asymptotically_stable")


@dataclass(frozen=True)
class LyapunovCertificate:
    """Certificate data for the restricted Lyapunov inequality.

    ``residual_lyap`` is the largest eigenvalue of the restricted form
    (non-positive up to tolerance; below a negative margin when strict),
    ``pd_margin`` the smallest eigenvalue of X restricted to the image of
    the system space under E, and ``invariance_defect`` the principal-angle
    defect of X mapping that image onto itself.
    """

    x: np.ndarray
    system_space: Subspace
    residual_lyap: float
    pd_margin: float
    invariance_defect: float
    strict: bool = False


def _spectrum_from_qkf(p: MatrixPencil, qkf: QuasiKroneckerForm, tol: ToleranceConfig):
    if qkf.n0 == 0:
        return ()
    eigs = [complex(ev) for ev in np.linalg.eigvals(qkf.a0)]
    points = []
    for rep, count in _cluster_eigenvalues(eigs, tol):
        if abs(rep.imag) <= tol.atol * (1.0 + abs(rep)):
            rep = complex(rep.real, 0.0)
        geo = p.n - numeric_rank(rep * p.e.astype(complex) - p.a, tol)
        points.append(SpectralPoint(rep, count, geo, geo == count))
    points.sort(key=lambda sp: (sp.eigenvalue.real, sp.eigenvalue.imag))
    return tuple(points)


def _classify(points, regular, tol: ToleranceConfig):
    if not regular:
        return "singular", "the pencil is singular (det(sE - A) vanishes identically)"
    atol = tol.atol
    right = [sp for sp in points if sp.eigenvalue.real > atol]
    if right:
        ev = right[-1].eigenvalue
        return "unstable", f"eigenvalue {ev:.6g} lies in the open right half-plane"
    axis = [sp for sp in points if abs(sp.eigenvalue.real) <= atol]
    defective = [sp for sp in axis if not sp.semi_simple]
    if defective:
        ev = defective[0].eigenvalue
        return "unstable", (
            f"imaginary-axis eigenvalue {ev:.6g} is not semi-simple "
            f"(algebraic {defective[0].algebraic} > geometric {defective[0].geometric})"
        )
    if axis:
        return "stable", (
            "spectrum lies in the closed left half-plane and every "
            "imaginary-axis eigenvalue is semi-simple"
        )
    return "asymptotically_stable", "all eigenvalues have real part below -atol"


def check_stability(p: MatrixPencil, tol: ToleranceConfig = DEFAULT_TOL) -> StabilityVerdict:
    """Classify a pencil as asymptotically stable, stable, unstable or singular."""
    qkf = quasi_kronecker(p, tol)
    points = _spectrum_from_qkf(p, qkf, tol) if qkf.regular else ()
    classification, reason = _classify(points, qkf.regular, tol)
    return StabilityVerdict(classification, points, reason)


# ---------------------------------------------------------------------------
# certificate construction
# ---------------------------------------------------------------------------

def _skew_diagonalize(a_im, tol: ToleranceConfig):
    """Real similarity a_im = v c v^{-1} with c skew (semi-simple axis part)."""
    k = a_im.shape[0]
    if k == 0:
        return np.eye(0), np.zeros((0, 0))
    evals, evecs = np.linalg.eig(a_im)
    band = tol.atol * (1.0 + np.abs(evals))
    cols = []
    omegas = []
    for idx in range(k):
        if evals[idx].imag > band[idx]:
            vec = evecs[:, idx]
            cols.append(vec.real)
            cols.append(vec.imag)
            omegas.append(evals[idx].imag)
    n_zero = k - 2 * len(omegas)
    if n_zero > 0:
        kernel = nullspace_basis(a_im, tol)
        if kernel.shape[1] != n_zero:
            raise ImagJordanBlock(
                "imaginary-axis eigenvalue cluster at 0 is not semi-simple "
                f"(kernel dimension {kernel.shape[1]}, expected {n_zero})"
            )
        cols.extend(kernel.T)
    v = np.column_stack(cols)
    c = np.zeros((k, k))
    for i, omega in enumerate(omegas):
        c[2 * i, 2 * i + 1] = omega
        c[2 * i + 1, 2 * i] = -omega
    sv = np.linalg.svd(v, compute_uv=False)
    if sv[-1] <= tol.svd_threshold(sv[0]):
        raise ImagJordanBlock("imaginary-axis eigenvectors do not span; "
                              "an axis eigenvalue is not semi-simple")
    resid = np.linalg.norm(a_im @ v - v @ c)
    scale = (1.0 + np.linalg.norm(a_im)) * sv[0] / sv[-1]
    if resid > 1e-7 * scale:
        raise IllConditionedError(
            f"imaginary-part block diagonalization residual {resid:.2e}"
        )
    return v, c


def psd_lyapunov_solution(h, tol: ToleranceConfig = DEFAULT_TOL, strict=False):
    """Positive definite M with h^T M + M h <= 0 (< 0 when strict).

    Requires the spectrum of ``h`` in the closed left half-plane with
    semi-simple imaginary-axis eigenvalues; the axis part must be absent
    when ``strict``.  Used by the pencil-level certificate constructions.
    """
    n = h.shape[0]
    if n == 0:
        return np.eye(0)
    schur = ordered_real_schur(h, "open-left", tol)
    n_minus = schur.leading
    for ev in schur.eigenvalues[n_minus:]:
        if ev.real > tol.atol:
            raise NotStable(f"eigenvalue {ev:.6g} lies in the open right half-plane")
    if strict and n_minus < n:
        raise NotStable("strict certificate requires the spectrum in the open "
                        "left half-plane")
    t11 = schur.t[:n_minus, :n_minus]
    t12 = schur.t[:n_minus, n_minus:]
    t22 = schur.t[n_minus:, n_minus:]
    if n_minus and n_minus < n:
        try:
            z = solve_sylvester_quasi_triangular(t11, t22, -t12,
                                                 transa=False, transb=False, sign=-1)
        except SpectrumClash as exc:
            raise IllConditionedError(
                f"stable/imaginary decoupling is ill-conditioned: {exc}"
            ) from exc
    else:
        z = np.zeros((n_minus, n - n_minus))
    x_minus = solve_lyapunov_equation(t11, np.eye(n_minus)) if n_minus else np.eye(0)
    v_im, _ = _skew_diagonalize(t22, tol)
    v_im_inv = np.linalg.inv(v_im) if v_im.size else v_im
    x_im = v_im_inv.T @ v_im_inv
    m_tilde = np.zeros((n, n))
    m_tilde[:n_minus, :n_minus] = x_minus
    m_tilde[n_minus:, n_minus:] = x_im
    w_inv = np.block([[np.eye(n_minus), -z],
                      [np.zeros((n - n_minus, n_minus)), np.eye(n - n_minus)]]) @ schur.q.T
    m = w_inv.T @ m_tilde @ w_inv
    return 0.5 * (m + m.T)


def restricted_spaces(p: MatrixPencil, qkf: QuasiKroneckerForm, tol: ToleranceConfig):
    """Orthonormal bases (Z, V) of the system space and its image under E,
    plus the flow matrix H = (V^T A Z)(V^T E Z)^{-1} of the reduced dynamics.
    """
    n0 = qkf.n0
    z = range_basis(qkf.t[:, :n0], tol) if n0 else np.zeros((p.n, 0))
    if n0 == 0:
        return z, np.zeros((p.n, 0)), np.eye(0), np.eye(0)
    v = range_basis(p.e @ z, tol)
    if v.shape[1] != n0:
        raise IllConditionedError(
            "E does not map the system space injectively; the pencil is not regular"
        )
    f = v.T @ (p.e @ z)
    g = v.T @ (p.a @ z)
    h = np.linalg.solve(f.T, g.T).T  # g @ inv(f)
    return z, v, h, f


def solve_lyapunov_inequality(p: MatrixPencil, strict: bool = False,
                              tol: ToleranceConfig = DEFAULT_TOL) -> LyapunovCertificate:
    """Certificate X for the Lyapunov inequality restricted to the system space.

    Requires ``check_stability(p)`` stable (asymptotically stable when
    ``strict``); raises :class:`NotStable` otherwise.  The returned X is
    symmetric, vanishes on the orthogonal complement of E applied to the
    system space, is positive definite on that image, and maps it onto
    itself.
    """
    qkf = quasi_kronecker(p, tol)
    points = _spectrum_from_qkf(p, qkf, tol) if qkf.regular else ()
    classification, reason = _classify(points, qkf.regular, tol)
    if classification in ("singular", "unstable"):
        raise NotStable(f"cannot certify an unstable pencil: {reason}")
    if strict and classification != "asymptotically_stable":
        raise NotStable("strict certificate requires asymptotic stability: " + reason)
    z, v, h, f = restricted_spaces(p, qkf, tol)
    n0 = h.shape[0]
    sub = Subspace(z)
    if n0 == 0:
        return LyapunovCertificate(np.zeros((p.n, p.n)), sub, 0.0, np.inf, 0.0, strict)
    m = psd_lyapunov_solution(h, tol, strict=strict)
    x = v @ m @ v.T
    x = 0.5 * (x + x.T)
    form = z.T @ (p.a.T @ x @ p.e + p.e.T @ x @ p.a) @ z
    form = 0.5 * (form + form.T)
    residual_lyap = float(np.linalg.eigvalsh(form)[-1])
    pd_margin = float(np.linalg.eigvalsh(m)[0])
    e_image = Subspace(v)
    mapped = image(x, e_image, tol)
    if mapped.dim != e_image.dim:
        invariance_defect = 1.0
    else:
        angles = mapped.angles_to(e_image)
        invariance_defect = float(np.max(np.sin(angles))) if angles.size else 0.0
    cert_tol = 1e-7 * (1.0 + np.linalg.norm(p.a) * np.linalg.norm(x) * np.linalg.norm(p.e))
    if residual_lyap > cert_tol or pd_margin <= 0 or invariance_defect > 1e-7:
        raise IllConditionedError(
            f"certificate verification failed (residual {residual_lyap:.2e}, "
            f"pd margin {pd_margin:.2e}, invariance defect {invariance_defect:.2e})"
        )
    return LyapunovCertificate(x, sub, residual_lyap, pd_margin, invariance_defect, strict)
