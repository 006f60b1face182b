"""Dissipative-Hamiltonian recasting and validity/stability checks.

A pencil d/dt(E x) = A x that is stable can be rewritten as
d/dt(E x) = (J - R) Q x with J skew, R positive semidefinite and Q^T E
symmetric positive (semi)definite.  ``recast_dh`` produces the factors on
the system space (where all solutions live); ``recast_dh_index1`` produces
globally valid factors for index <= 1 pencils.  ``validate_dh`` and
``dh_stability_check`` go the other way: given candidate factors they
report validity and what can be concluded about stability.

Pencils that are stable backwards in time (i.e. [-E, A] is stable) admit
the analogous rewriting with Q^T E merely symmetric instead of positive
semidefinite; that variant is out of scope here.
"""

from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOL, ToleranceConfig
from .errors import (IllConditionedError, IndexTooHigh, InvalidInput, NotStable)
from .numerics import as_matrix, nullspace_basis, numeric_rank, range_basis
from .pencil import MatrixPencil, quasi_kronecker
from .stability import (check_stability, psd_lyapunov_solution,
                        solve_lyapunov_inequality)
from .subspace import Subspace, compare_on, image, intersect

__all__ = [
    "DhFactorization",
    "DhValidationReport",
    "DhStabilityReport",
    "recast_dh",
    "recast_dh_index1",
    "validate_dh",
    "dh_stability_check",
    "restricted_inverse",
]


@dataclass(frozen=True)
class DhFactorization:
    """Factors (J, R, Q) with their defect norms.

    ``mode`` is ``on_subspace`` when the defining relations hold restricted
    to the system space, ``global_index1`` when they hold on the whole
    space (possible for stable pencils of index at most one).
    """

    j: np.ndarray
    r: np.ndarray
    q: np.ndarray
    system_space: Subspace
    mode: str
    residuals: dict = field(default_factory=dict)


@dataclass(frozen=True)
class DhValidationReport:
    """Defect norms of the dissipative-Hamiltonian structure conditions."""

    j_skew_defect: float
    r_sym_defect: float
    r_psd_defect: float
    qte_sym_defect: float
    qte_psd_defect: float
    kernel_condition_holds: bool
    kernel_condition_defect: float
    valid: bool


@dataclass(frozen=True)
class DhStabilityReport:
    """Stability conclusions drawn from the factors alone.

    ``stable`` is ``yes``/``no`` when the applied criterion is two-sided
    (invertible Q), otherwise ``not_guaranteed`` directs the caller to the
    spectral test on s E - (J - R) Q.
    """

    regular: bool
    stable: str  # 'yes' | 'no' | 'not_guaranteed'
    via_clause: str
    kernel_condition_holds: bool
    q_invertible: bool


def restricted_inverse(q, domain: Subspace, codomain: Subspace,
                       tol: ToleranceConfig = DEFAULT_TOL):
    """Inverse of q as a bijection from ``domain`` onto ``codomain``.

    Returns an n x n matrix that maps codomain back to domain and kills the
    orthogonal complement of the codomain; on the domain it is a one-sided
    inverse of ``q``.  This is the pseudo-inverse adapted to the pair of
    subspaces: it agrees with the Moore-Penrose inverse whenever the domain
    is the row space of ``q``.
    """
    if domain.dim != codomain.dim:
        raise InvalidInput("domain and codomain dimensions differ")
    if domain.dim == 0:
        return np.zeros((q.shape[1], q.shape[0]))
    core = codomain.basis.T @ q @ domain.basis
    sv = np.linalg.svd(core, compute_uv=False)
    if sv[-1] <= tol.svd_threshold(sv[0]):
        raise IllConditionedError(
            "matrix does not map the domain bijectively onto the codomain"
        )
    return domain.basis @ np.linalg.solve(core, codomain.basis.T)


def _split_skew_sym(m):
    j = 0.5 * (m - m.T)
    r = -0.5 * (m + m.T)
    return j, r


def recast_dh(p: MatrixPencil, tol: ToleranceConfig = DEFAULT_TOL) -> DhFactorization:
    """Rewrite a stable pencil as d/dt(Ex) = (J - R) Q x on the system space.

    Q = X E with X the Lyapunov certificate; J and R are the skew and
    negated-symmetric parts of A Q^- where Q^- inverts Q between the system
    space and its image under E.  The four structure relations are verified
    restricted to those spaces and their defects stored in ``residuals``.
    """
    cert = solve_lyapunov_inequality(p, strict=False, tol=tol)
    x = cert.x
    q = x @ p.e
    sub = cert.system_space
    n = p.n
    if sub.dim == 0:
        zero = np.zeros((n, n))
        return DhFactorization(zero, zero, zero, sub, "on_subspace",
                               {"match_defect": 0.0, "skew_defect": 0.0,
                                "r_psd_defect": 0.0, "qte_pd_margin": np.inf})
    e_image = Subspace(range_basis(p.e @ sub.basis, tol))
    q_inv = restricted_inverse(q, sub, e_image, tol)
    j, r = _split_skew_sym(p.a @ q_inv)
    checks = {
        "skew": compare_on(j, -j.T, e_image, "eq", tol),
        "r_psd": compare_on(r, np.zeros((n, n)), e_image, "geq", tol),
        "match": compare_on(p.a, (j - r) @ q, sub, "eq", tol),
        "qte_pd": compare_on(q.T @ p.e, np.zeros((n, n)), sub, "gt", tol),
    }
    failed = [name for name, res in checks.items() if not res]
    if failed:
        raise IllConditionedError(
            "recast relations failed beyond tolerance: "
            + ", ".join(f"{name} (defect {checks[name].defect:.2e})" for name in failed)
        )
    qte = sub.basis.T @ (q.T @ p.e) @ sub.basis
    residuals = {
        "skew_defect": checks["skew"].defect,
        "r_psd_defect": checks["r_psd"].defect,
        "match_defect": checks["match"].defect,
        "qte_pd_margin": float(np.linalg.eigvalsh(0.5 * (qte + qte.T))[0]),
        "lyap_residual": cert.residual_lyap,
    }
    return DhFactorization(j, r, q, sub, "on_subspace", residuals)


def recast_dh_index1(p: MatrixPencil, tol: ToleranceConfig = DEFAULT_TOL) -> DhFactorization:
    """Globally valid factors for a stable pencil of index at most one.

    Works in decomposed coordinates where E = blkdiag(I, 0) and
    A = blkdiag(a0, I): there Qhat = blkdiag(M, -I) with M a positive
    definite Lyapunov solution for a0, and J, R split A Qhat^{-1}.  Mapping
    back keeps J skew, R and Q^T E positive semidefinite globally and
    A = (J - R) Q up to the decomposition residual.
    """
    verdict = check_stability(p, tol)
    if not verdict.is_stable:
        raise NotStable(f"dissipative-Hamiltonian recasting requires stability: "
                        f"{verdict.reason}")
    qkf = quasi_kronecker(p, tol)
    if qkf.index > 1:
        raise IndexTooHigh(
            f"global recasting requires index <= 1, got index {qkf.index}: the "
            "extended Q would lose positive semidefiniteness of Q^T E"
        )
    n0 = qkf.n0
    n = p.n
    m0 = psd_lyapunov_solution(qkf.a0, tol)
    qhat = np.zeros((n, n))
    qhat[:n0, :n0] = m0
    qhat[n0:, n0:] = -np.eye(n - n0)
    a_kf = np.zeros((n, n))
    a_kf[:n0, :n0] = qkf.a0
    a_kf[n0:, n0:] = np.eye(n - n0)
    j_kf, r_kf = _split_skew_sym(a_kf @ np.linalg.inv(qhat))
    s_inv = np.linalg.inv(qkf.s)
    t_inv = np.linalg.inv(qkf.t)
    j = s_inv @ j_kf @ s_inv.T
    r = s_inv @ r_kf @ s_inv.T
    q = qkf.s.T @ qhat @ t_inv
    j = 0.5 * (j - j.T)
    r = 0.5 * (r + r.T)
    qte = q.T @ p.e
    scale_a = np.linalg.norm(p.a)
    residuals = {
        "skew_defect": float(np.linalg.norm(j + j.T)),
        "r_psd_defect": float(max(0.0, -np.linalg.eigvalsh(r)[0])),
        "qte_sym_defect": float(np.linalg.norm(qte - qte.T)),
        "qte_psd_defect": float(max(0.0, -np.linalg.eigvalsh(0.5 * (qte + qte.T))[0])),
        "match_defect": float(np.linalg.norm(p.a - (j - r) @ q) / (scale_a or 1.0)),
    }
    worst = max(residuals.values())
    if worst > 1e-8 * (1.0 + scale_a + np.linalg.norm(q)) * qkf.cond_s * qkf.cond_t:
        raise IllConditionedError(
            f"global recast defects exceed tolerance: {residuals}"
        )
    sub = Subspace(range_basis(qkf.t[:, :n0], tol)) if n0 else Subspace.zero(n)
    return DhFactorization(j, r, q, sub, "global_index1", residuals)


def validate_dh(e, j, r, q, tol: ToleranceConfig = DEFAULT_TOL) -> DhValidationReport:
    """Defect report for candidate dissipative-Hamiltonian factors."""
    e = as_matrix(e, name="e", square=True)
    n = e.shape[0]
    j = as_matrix(j, name="j", square=True)
    r = as_matrix(r, name="r", square=True)
    q = as_matrix(q, name="q", square=True)
    if not (e.shape == j.shape == r.shape == q.shape):
        raise InvalidInput("E, J, R, Q must share one square shape")
    j_skew = float(np.linalg.norm(j + j.T))
    r_sym = float(np.linalg.norm(r - r.T))
    r_eigs = np.linalg.eigvalsh(0.5 * (r + r.T)) if n else np.zeros(0)
    r_psd = float(max(0.0, -r_eigs[0])) if n else 0.0
    qte = q.T @ e
    qte_sym = float(np.linalg.norm(qte - qte.T))
    qte_eigs = np.linalg.eigvalsh(0.5 * (qte + qte.T)) if n else np.zeros(0)
    qte_psd = float(max(0.0, -qte_eigs[0])) if n else 0.0
    ker_q = nullspace_basis(q, tol)
    kernel_defect = float(np.linalg.norm(e @ ker_q, 2)) if ker_q.shape[1] else 0.0
    kernel_holds = bool(kernel_defect
                        <= max(tol.atol, tol.rtol * (1.0 + np.linalg.norm(e))))
    scale = 1.0 + float(np.linalg.norm(j) + np.linalg.norm(r)
                        + np.linalg.norm(q) + np.linalg.norm(e))
    thr = max(tol.atol, tol.rtol * scale)
    valid = bool(j_skew <= thr and r_sym <= thr and r_psd <= thr
                 and qte_sym <= thr and qte_psd <= thr)
    return DhValidationReport(j_skew, r_sym, r_psd, qte_sym, qte_psd,
                              kernel_holds, kernel_defect, valid)


def dh_stability_check(e, j, r, q, tol: ToleranceConfig = DEFAULT_TOL) -> DhStabilityReport:
    """Regularity and stability conclusions from the factors alone.

    Regularity is decided by the kernel intersection of E, Q^T J Q and
    Q^T R Q.  With invertible Q the two-sided criterion
    ker J .. ker R .. Q ker E = {0} settles stability either way; otherwise
    the kernel condition ker Q inside ker E gives a one-sided ``yes`` and
    everything else stays ``not_guaranteed`` (spectral test applies).
    """
    report = validate_dh(e, j, r, q, tol)
    if not report.valid:
        raise InvalidInput(
            "factors fail the dissipative-Hamiltonian structure conditions; "
            f"defects: {report}"
        )
    e = as_matrix(e, square=True)
    j = as_matrix(j, square=True)
    r = as_matrix(r, square=True)
    q = as_matrix(q, square=True)
    n = e.shape[0]
    stacked = np.vstack([e, q.T @ j @ q, q.T @ r @ q])
    regular = nullspace_basis(stacked, tol).shape[1] == 0
    q_invertible = numeric_rank(q, tol) == n
    if not regular:
        return DhStabilityReport(False, "no",
                                 "singular pencils are unstable (unbounded free "
                                 "solutions exist)",
                                 report.kernel_condition_holds, q_invertible)
    if q_invertible:
        ker_j = Subspace(nullspace_basis(j, tol))
        ker_r = Subspace(nullspace_basis(r, tol))
        q_ker_e = image(q, Subspace(nullspace_basis(e, tol)), tol)
        triple = intersect(intersect(ker_j, ker_r, tol), q_ker_e, tol)
        if triple.dim == 0:
            return DhStabilityReport(True, "yes",
                                     "invertible Q and trivial intersection of "
                                     "ker J, ker R and Q ker E",
                                     report.kernel_condition_holds, True)
        return DhStabilityReport(True, "no",
                                 "invertible Q with a nontrivial intersection of "
                                 "ker J, ker R and Q ker E",
                                 report.kernel_condition_holds, True)
    if report.kernel_condition_holds:
        return DhStabilityReport(True, "yes",
                                 "regular with ker Q contained in ker E",
                                 True, False)
    return DhStabilityReport(True, "not_guaranteed",
                             "kernel condition fails; run the spectral test on "
                             "s E - (J - R) Q",
                             False, False)
