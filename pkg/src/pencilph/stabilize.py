"""Behavioral stabilizability, Bernoulli solves and port-Hamiltonian recasting.

A descriptor system d/dt(E x) = A x + B u with regular pencil and
semi-simple imaginary-axis eigenvalues splits into an anti-stable part
(A1, B1), a stable part A2 and a nilpotent part (``refined_decomposition``).
Behavioral stabilizability reduces to controllability of (A1, B1); the
stabilizing feedback comes from the positive definite solution of the
algebraic Bernoulli equation A1^T P1 + P1 A1 = P1 B1 B1^T P1.  The pair of
certificates (X1, X2) assembled from P1 and a Lyapunov solution for A2
turns the system into port-Hamiltonian form with Q = (X2 - X1) E and output
y = B^T Q x + u.

Systems with a prescribed output y = C x + D u can be made
port-Hamiltonian whenever a Kalman-Yakubovich-Popov-type linear matrix
inequality has an invertible solution; only the constructed-output route
above is implemented here.
"""

from dataclasses import dataclass, field

import numpy as np

from ._kernels import solve_sylvester_quasi_triangular
from .config import DEFAULT_TOL, ToleranceConfig
from .errors import (CertificateMismatch, IllConditionedError, ImagJordanBlock,
                     InvalidInput, NotControllable, SingularPencil, SpectrumClash)
from .numerics import (as_matrix, numeric_rank, ordered_real_schur, range_basis,
                       solve_lyapunov_equation)
from .pencil import DescriptorSystem, MatrixPencil, quasi_kronecker
from .stability import _spectrum_from_qkf, psd_lyapunov_solution
from .dh import restricted_inverse, _split_skew_sym
from .subspace import Subspace, compare_on, image

__all__ = [
    "RefinedDecomposition",
    "PhDescriptor",
    "StabilizationCertificate",
    "refined_decomposition",
    "is_behaviorally_stabilizable",
    "solve_bernoulli",
    "build_certificates",
    "recast_ph",
    "zero_output_interconnection",
]


@dataclass(frozen=True)
class RefinedDecomposition:
    """Refined block split S (sE - A) T = blkdiag(sI - a1, sI - a2, sN - I).

    ``a1`` carries the spectrum in the open right half-plane, ``a2`` the
    stable remainder; ``b1``/``b2``/``b_alpha`` are the matching row blocks
    of S B.
    """

    s: np.ndarray
    t: np.ndarray
    n1: int
    n2: int
    a1: np.ndarray
    a2: np.ndarray
    alpha: tuple
    b1: np.ndarray
    b2: np.ndarray
    b_alpha: np.ndarray
    residual: float


@dataclass(frozen=True)
class PhDescriptor:
    """Port-Hamiltonian descriptor data for
    d/dt(E x) = (J - R) Q x + (B - P) u,  y = (B + P)^T Q x + (S - N) u."""

    e: np.ndarray
    j: np.ndarray
    r: np.ndarray
    q: np.ndarray
    b: np.ndarray
    p: np.ndarray
    s_ff: np.ndarray
    n_ff: np.ndarray
    system_space: Subspace
    residuals: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.e.shape[0]

    @property
    def k(self) -> int:
        return self.b.shape[1]


@dataclass(frozen=True)
class StabilizationCertificate:
    """Certificate pair (X1, X2) with the stabilizing feedback gain.

    X1 solves the restricted Bernoulli identity, X2 the restricted Lyapunov
    inequality; ``k_gain`` realizes u = -B1^T P1 x1 in original coordinates.
    """

    x1: np.ndarray
    x2: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    k_gain: np.ndarray
    system_space: Subspace
    residuals: dict = field(default_factory=dict)


def refined_decomposition(d: DescriptorSystem,
                          tol: ToleranceConfig = DEFAULT_TOL) -> RefinedDecomposition:
    """Split the pencil into anti-stable, stable and nilpotent parts.

    Requires a regular pencil with semi-simple imaginary-axis eigenvalues;
    raises :class:`SingularPencil` or :class:`ImagJordanBlock` otherwise.
    """
    qkf = quasi_kronecker(d.pencil, tol)
    if not qkf.regular:
        raise SingularPencil("refined decomposition requires a regular pencil")
    points = _spectrum_from_qkf(d.pencil, qkf, tol)
    for sp in points:
        if abs(sp.eigenvalue.real) <= tol.atol and not sp.semi_simple:
            raise ImagJordanBlock(
                f"imaginary-axis eigenvalue {sp.eigenvalue:.6g} is not semi-simple"
            )
    n0 = qkf.n0
    schur = ordered_real_schur(qkf.a0, "open-right", tol)
    n1 = schur.leading
    n2 = n0 - n1
    t11 = schur.t[:n1, :n1]
    t12 = schur.t[:n1, n1:]
    t22 = schur.t[n1:, n1:]
    if n1 and n2:
        try:
            z = solve_sylvester_quasi_triangular(t11, t22, -t12,
                                                 transa=False, transb=False, sign=-1)
        except SpectrumClash as exc:
            raise IllConditionedError(
                f"anti-stable/stable decoupling is ill-conditioned: {exc}") from exc
    else:
        z = np.zeros((n1, n2))
    w = schur.q @ np.block([[np.eye(n1), z],
                            [np.zeros((n2, n1)), np.eye(n2)]])
    w_inv = np.block([[np.eye(n1), -z],
                      [np.zeros((n2, n1)), np.eye(n2)]]) @ schur.q.T
    n = d.n
    nalpha = n - n0
    s_ref = qkf.s.copy()
    t_ref = qkf.t.copy()
    s_ref[:n0, :] = w_inv @ s_ref[:n0, :]
    t_ref[:, :n0] = t_ref[:, :n0] @ w
    a1 = t11
    a2 = w_inv[n1:, :n0] @ qkf.a0 @ w[:n0, n1:] if n2 else np.eye(0)
    if n2:
        a2 = (w_inv @ qkf.a0 @ w)[n1:, n1:]
    btil = s_ref @ d.b
    b1, b2, b_alpha = btil[:n1], btil[n1:n0], btil[n0:]
    e_blocks = np.zeros((n, n))
    e_blocks[:n0, :n0] = np.eye(n0)
    a_blocks = np.zeros((n, n))
    a_blocks[:n1, :n1] = a1
    a_blocks[n1:n0, n1:n0] = a2
    a_blocks[n0:, n0:] = np.eye(nalpha)
    pos = n0
    for sz in qkf.alpha:
        e_blocks[pos:pos + sz, pos:pos + sz] = np.eye(sz, sz, 1)
        pos += sz
    residual = float(np.linalg.norm(s_ref @ d.e @ t_ref - e_blocks)
                     + np.linalg.norm(s_ref @ d.a @ t_ref - a_blocks))
    return RefinedDecomposition(s_ref, t_ref, n1, n2, a1, a2, qkf.alpha,
                                b1, b2, b_alpha, residual)


def is_behaviorally_stabilizable(d: DescriptorSystem,
                                 tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """Controllability of the anti-stable part (eigenvalue-wise rank test)."""
    ref = refined_decomposition(d, tol)
    if ref.n1 == 0:
        return True
    eigs = np.linalg.eigvals(ref.a1)
    eye1 = np.eye(ref.n1, dtype=complex)
    for lam in eigs:
        pencil_block = np.hstack([lam * eye1 - ref.a1, ref.b1.astype(complex)])
        if numeric_rank(pencil_block, tol) < ref.n1:
            return False
    return True


def solve_bernoulli(a1, b1, tol: ToleranceConfig = DEFAULT_TOL):
    """Positive definite P1 with a1^T P1 + P1 a1 = P1 b1 b1^T P1.

    Solved through the inverse: a1 Y + Y a1^T = b1 b1^T has a unique
    solution which is positive definite exactly when (a1, b1) is
    controllable; then P1 = Y^{-1}.  Requires the spectrum of ``a1`` in the
    open right half-plane.
    """
    a1 = as_matrix(a1, name="a1", square=True)
    b1 = np.asarray(b1, dtype=float)
    if b1.ndim == 1:
        b1 = b1[:, None]
    b1 = as_matrix(b1, name="b1")
    n1 = a1.shape[0]
    if b1.shape[0] != n1:
        raise InvalidInput(f"b1 must have {n1} rows, got {b1.shape}")
    if n1 == 0:
        return np.eye(0)
    eigs = np.linalg.eigvals(a1)
    if np.any(eigs.real <= tol.atol):
        raise InvalidInput(
            "Bernoulli solve requires the spectrum in the open right half-plane; "
            f"got eigenvalues {np.sort_complex(eigs)}"
        )
    y = solve_lyapunov_equation(a1.T, -b1 @ b1.T)
    y = 0.5 * (y + y.T)
    eigs_y = np.linalg.eigvalsh(y)
    if eigs_y[0] <= tol.svd_threshold(max(eigs_y[-1], 0.0)):
        raise NotControllable(
            "the Gramian-type solution is numerically singular; the anti-stable "
            f"pair is not controllable (smallest eigenvalue {eigs_y[0]:.3e})"
        )
    p1 = np.linalg.inv(y)
    p1 = 0.5 * (p1 + p1.T)
    residual = np.linalg.norm(a1.T @ p1 + p1 @ a1 - p1 @ b1 @ b1.T @ p1)
    scale = 1.0 + np.linalg.norm(p1) ** 2 * np.linalg.norm(b1) ** 2 \
        + np.linalg.norm(a1) * np.linalg.norm(p1)
    if residual > 1e-8 * scale:
        raise IllConditionedError(f"Bernoulli residual {residual:.3e} exceeds tolerance")
    closed = np.linalg.eigvals(a1 - b1 @ b1.T @ p1)
    if np.any(closed.real >= 0):
        raise IllConditionedError(
            f"closed loop not stable (max Re {closed.real.max():.3e}); Bernoulli "
            "solution unreliable"
        )
    return p1


def build_certificates(d: DescriptorSystem,
                       tol: ToleranceConfig = DEFAULT_TOL) -> StabilizationCertificate:
    """Certificates X1 (Bernoulli) and X2 (Lyapunov) with the feedback gain.

    X1 and X2 are assembled blockwise in refined coordinates and pulled
    back; the restricted identities and definiteness margins are verified
    on the system space and recorded in ``residuals``.
    """
    ref = refined_decomposition(d, tol)
    p1 = solve_bernoulli(ref.a1, ref.b1, tol) if ref.n1 else np.eye(0)
    m2 = psd_lyapunov_solution(ref.a2, tol) if ref.n2 else np.eye(0)
    p2 = np.linalg.inv(m2) if ref.n2 else np.eye(0)
    n = d.n
    n0 = ref.n1 + ref.n2
    x1_ref = np.zeros((n, n))
    x1_ref[:ref.n1, :ref.n1] = p1
    x2_ref = np.zeros((n, n))
    x2_ref[ref.n1:n0, ref.n1:n0] = m2
    x1 = ref.s.T @ x1_ref @ ref.s
    x2 = ref.s.T @ x2_ref @ ref.s
    x1 = 0.5 * (x1 + x1.T)
    x2 = 0.5 * (x2 + x2.T)
    k_ref = np.zeros((d.k, n))
    if ref.n1:
        k_ref[:, :ref.n1] = -ref.b1.T @ p1
    k_gain = k_ref @ np.linalg.inv(ref.t)
    z = range_basis(ref.t[:, :n0], tol) if n0 else np.zeros((n, 0))
    sub = Subspace(z)
    e, a, b = d.e, d.a, d.b
    if n0:
        v = range_basis(e @ z, tol)
        gab1 = z.T @ (a.T @ x1 @ e + e.T @ x1 @ a - e.T @ x1 @ b @ b.T @ x1 @ e) @ z
        gab2 = z.T @ (a.T @ x2 @ e + e.T @ x2 @ a) @ z
        gab2 = 0.5 * (gab2 + gab2.T)
        scale1 = 1.0 + (np.linalg.norm(a) * np.linalg.norm(x1) * np.linalg.norm(e)
                        + (np.linalg.norm(e) * np.linalg.norm(x1) * np.linalg.norm(b)) ** 2)
        gab1_residual = float(np.linalg.norm(gab1)) / scale1
        gab2_max_eig = float(np.linalg.eigvalsh(gab2)[-1])
        x1_restricted = np.linalg.eigvalsh(v.T @ x1 @ v)
        x2_restricted = np.linalg.eigvalsh(v.T @ x2 @ v)
        sum_restricted = np.linalg.eigvalsh(v.T @ (x1 + x2) @ v)
        e_image = Subspace(v)
        map_defects = []
        for sign in (+1.0, -1.0):
            mapped = image(x2 + sign * x1, e_image, tol)
            if mapped.dim != e_image.dim:
                map_defects.append(1.0)
            else:
                ang = mapped.angles_to(e_image)
                map_defects.append(float(np.max(np.sin(ang))) if ang.size else 0.0)
        residuals = {
            "gab1_residual": gab1_residual,
            "gab2_max_eig": gab2_max_eig,
            "x1_min_on_image": float(x1_restricted[0]),
            "x2_min_on_image": float(x2_restricted[0]),
            "sum_pd_margin": float(sum_restricted[0]),
            "map_defect_plus": map_defects[0],
            "map_defect_minus": map_defects[1],
            "refined_residual": ref.residual,
        }
        if gab1_residual > 1e-7 or gab2_max_eig > 1e-9 * (1 + abs(gab2_max_eig)):
            raise CertificateMismatch(
                f"certificate identities failed: {residuals}")
        if sum_restricted[0] <= 0:
            raise CertificateMismatch(
                f"X1 + X2 not positive definite on the image space: {residuals}")
    else:
        residuals = {"gab1_residual": 0.0, "gab2_max_eig": 0.0,
                     "x1_min_on_image": 0.0, "x2_min_on_image": 0.0,
                     "sum_pd_margin": np.inf, "map_defect_plus": 0.0,
                     "map_defect_minus": 0.0, "refined_residual": ref.residual}
    return StabilizationCertificate(x1, x2, p1, p2, k_gain, sub, residuals)


def recast_ph(d: DescriptorSystem, cert: StabilizationCertificate,
              tol: ToleranceConfig = DEFAULT_TOL) -> PhDescriptor:
    """Port-Hamiltonian form with Q = (X2 - X1) E and output y = B^T Q x + u.

    The feedthrough is fixed to the identity (symmetric part) so the block
    conditions reduce to skewness of [[J, B], [-B^T, 0]] and positive
    semidefiniteness of [[R, 0], [0, I]] on the relevant product space; the
    checks run restricted and raise :class:`CertificateMismatch` on failure.
    """
    e, a, b = d.e, d.a, d.b
    n, k = d.n, d.k
    q = (cert.x2 - cert.x1) @ e
    sub = cert.system_space
    if sub.ambient != n:
        raise InvalidInput("certificate does not match the system dimensions")
    if sub.dim:
        q_image = Subspace(range_basis(q @ sub.basis, tol))
        if q_image.dim != sub.dim:
            raise CertificateMismatch(
                "Q does not map the system space bijectively; certificate invalid")
        q_inv = restricted_inverse(q, sub, q_image, tol)
        j, r = _split_skew_sym(a @ q_inv)
    else:
        j = np.zeros((n, n))
        r = np.zeros((n, n))
    p = np.zeros((n, k))
    s_ff = np.eye(k)
    n_ff = np.zeros((k, k))
    e_image = Subspace(range_basis(e @ sub.basis, tol)) if sub.dim else Subspace.zero(n)
    prod_basis = np.zeros((n + k, e_image.dim + k))
    prod_basis[:n, :e_image.dim] = e_image.basis
    prod_basis[n:, e_image.dim:] = np.eye(k)
    prod = Subspace(prod_basis)
    blk_j = np.block([[j, b], [-b.T, n_ff]])
    blk_r = np.block([[r, p], [p.T, s_ff]])
    checks = {
        "skew": compare_on(blk_j, -blk_j.T, prod, "eq", tol),
        "blk_psd": compare_on(blk_r, np.zeros((n + k, n + k)), prod, "geq", tol),
        "qte_sym": compare_on(e.T @ q, q.T @ e, sub, "eq", tol),
        "match": compare_on(a, (j - r) @ q, sub, "eq", tol),
    }
    failed = [name for name, res in checks.items() if not res]
    if failed:
        raise CertificateMismatch(
            "port-Hamiltonian relations failed: "
            + ", ".join(f"{nm} (defect {checks[nm].defect:.2e})" for nm in failed))
    residuals = {f"{nm}_defect": res.defect for nm, res in checks.items()}
    residuals.update(cert.residuals)
    return PhDescriptor(e, j, r, q, b, p, s_ff, n_ff, sub, residuals)


def zero_output_interconnection(ph: PhDescriptor, d: DescriptorSystem) -> MatrixPencil:
    """Pencil [E, A - B B^T Q] obtained by imposing y = 0 (u = -B^T Q x).

    Substituting the forced input into the port-Hamiltonian dynamics
    reproduces exactly this closed matrix on the system space; no stability
    claim is attached (the anti-stable part changes sign).
    """
    if ph.e.shape != d.e.shape or ph.b.shape != d.b.shape:
        raise InvalidInput("port-Hamiltonian data does not match the system")
    a_closed = d.a - d.b @ (d.b.T @ ph.q)
    return MatrixPencil(d.e, a_closed)
