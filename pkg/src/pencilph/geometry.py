"""Composition of dissipative and Lagrangian subspaces into pencils.

A pencil can be specified implicitly by two n-dimensional subspaces of
R^n x R^n: a Lagrangian one (range of [L1; L2] with L1^T L2 symmetric)
pairing states with efforts, and a dissipative one (range of [D1; D2] with
D2^T D1 + D1^T D2 negative semidefinite) pairing efforts with state
derivatives.  ``compose_dl`` eliminates the effort and returns the pencil;
``geometric_stability_check`` evaluates regularity (two-sided) and a
sufficient stability condition directly on the subspace data.
``from_dh`` and ``embed_ph`` produce the structures for
dissipative-Hamiltonian pencils and port-Hamiltonian descriptor systems.
"""

from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOL, ToleranceConfig
from .errors import (CompositionDefect, DegenerateLagrangian, IllConditionedError,
                     InvalidInput, NotDissipative, NotNonnegative)
from .numerics import as_matrix, nullspace_basis, numeric_rank, range_basis
from .pencil import MatrixPencil
from .dh import validate_dh
from .subspace import Subspace, image, intersect

__all__ = [
    "LagrangianStructure",
    "DissipativeStructure",
    "StructureReport",
    "GeometricStabilityReport",
    "lagrangian_structure",
    "dissipative_structure",
    "validate_structures",
    "normalize_structures",
    "compose_dl",
    "geometric_stability_check",
    "from_dh",
    "embed_ph",
]


@dataclass(frozen=True)
class LagrangianStructure:
    """Range representation [l1; l2] of an n-dimensional Lagrangian subspace."""

    l1: np.ndarray
    l2: np.ndarray
    normalized: bool = False
    nonnegative: bool = False

    @property
    def n(self) -> int:
        return self.l1.shape[0]

    def subspace(self, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
        return Subspace(range_basis(np.vstack([self.l1, self.l2]), tol))


@dataclass(frozen=True)
class DissipativeStructure:
    """Range representation [d1; d2] of an n-dimensional dissipative subspace."""

    d1: np.ndarray
    d2: np.ndarray
    normalized: bool = False

    @property
    def n(self) -> int:
        return self.d1.shape[0]

    def subspace(self, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
        return Subspace(range_basis(np.vstack([self.d1, self.d2]), tol))


@dataclass(frozen=True)
class StructureReport:
    """Defect norms for candidate Lagrangian/dissipative pairs."""

    lagrangian_sym_defect: float
    lagrangian_dim: int
    lagrangian_ok: bool
    nonnegative: bool
    nonnegative_defect: float
    dissipative_defect: float
    dissipative_dim: int
    dissipative_ok: bool
    dirac: bool


@dataclass(frozen=True)
class GeometricStabilityReport:
    """Regularity (two-sided) and sufficient-stability conclusions."""

    regular: bool
    stable: str  # 'yes' | 'inconclusive'
    conditions: dict = field(default_factory=dict)


def _sym_defect(m):
    return float(np.linalg.norm(m - m.T))


def _psd_defect(m):
    sym = 0.5 * (m + m.T)
    if sym.shape[0] == 0:
        return 0.0
    return float(max(0.0, -np.linalg.eigvalsh(sym)[0]))


def _nsd_defect(m):
    sym = 0.5 * (m + m.T)
    if sym.shape[0] == 0:
        return 0.0
    return float(max(0.0, np.linalg.eigvalsh(sym)[-1]))


def lagrangian_structure(l1, l2, tol: ToleranceConfig = DEFAULT_TOL) -> LagrangianStructure:
    """Validated Lagrangian structure; raises on dimension or symmetry defect."""
    l1 = as_matrix(l1, name="l1", square=True)
    l2 = as_matrix(l2, name="l2", square=True)
    if l1.shape != l2.shape:
        raise InvalidInput("l1 and l2 must share shape")
    n = l1.shape[0]
    scale = 1.0 + np.linalg.norm(l1) * np.linalg.norm(l2)
    sym = _sym_defect(l1.T @ l2)
    if sym > max(tol.atol, tol.rtol * scale):
        raise InvalidInput(f"l1^T l2 is not symmetric (defect {sym:.2e})")
    if numeric_rank(np.vstack([l1, l2]), tol) != n:
        raise DegenerateLagrangian(
            f"range representation has dimension below {n}")
    nn_defect = _psd_defect(l1.T @ l2)
    nonneg = nn_defect <= max(tol.atol, tol.rtol * scale)
    sym_l2 = _sym_defect(l2) <= max(tol.atol, tol.rtol * (1 + np.linalg.norm(l2)))
    l1_psd = _sym_defect(l1) <= max(tol.atol, tol.rtol * (1 + np.linalg.norm(l1))) \
        and _psd_defect(l1) <= max(tol.atol, tol.rtol * (1 + np.linalg.norm(l1)))
    return LagrangianStructure(l1, l2, normalized=sym_l2 and (l1_psd or not nonneg),
                               nonnegative=nonneg)


def dissipative_structure(d1, d2, tol: ToleranceConfig = DEFAULT_TOL) -> DissipativeStructure:
    """Validated dissipative structure; raises on dimension or sign defect."""
    d1 = as_matrix(d1, name="d1", square=True)
    d2 = as_matrix(d2, name="d2", square=True)
    if d1.shape != d2.shape:
        raise InvalidInput("d1 and d2 must share shape")
    n = d1.shape[0]
    scale = 1.0 + np.linalg.norm(d1) * np.linalg.norm(d2)
    defect = _nsd_defect(d2.T @ d1 + d1.T @ d2)
    if defect > max(tol.atol, tol.rtol * scale):
        raise NotDissipative(
            f"d2^T d1 + d1^T d2 is not negative semidefinite (defect {defect:.2e})")
    if numeric_rank(np.vstack([d1, d2]), tol) != n:
        raise InvalidInput(f"range representation has dimension below {n}")
    normalized = _nsd_defect(d2 + d2.T) <= max(tol.atol, tol.rtol * (1 + np.linalg.norm(d2)))
    return DissipativeStructure(d1, d2, normalized=normalized)


def validate_structures(l_pair, d_pair, tol: ToleranceConfig = DEFAULT_TOL) -> StructureReport:
    """Defect report for candidate pairs (no exception on failure)."""
    l1 = as_matrix(l_pair[0], name="l1", square=True)
    l2 = as_matrix(l_pair[1], name="l2", square=True)
    d1 = as_matrix(d_pair[0], name="d1", square=True)
    d2 = as_matrix(d_pair[1], name="d2", square=True)
    n = l1.shape[0]
    l_scale = 1.0 + np.linalg.norm(l1) * np.linalg.norm(l2)
    d_scale = 1.0 + np.linalg.norm(d1) * np.linalg.norm(d2)
    l_sym = _sym_defect(l1.T @ l2)
    l_dim = numeric_rank(np.vstack([l1, l2]), tol)
    nn_defect = _psd_defect(l1.T @ l2)
    d_sum = d2.T @ d1 + d1.T @ d2
    d_defect = _nsd_defect(d_sum)
    d_dim = numeric_rank(np.vstack([d1, d2]), tol)
    dirac = float(np.linalg.norm(d_sum)) <= max(tol.atol, tol.rtol * d_scale)
    return StructureReport(
        lagrangian_sym_defect=l_sym,
        lagrangian_dim=int(l_dim),
        lagrangian_ok=(l_sym <= max(tol.atol, tol.rtol * l_scale) and l_dim == n),
        nonnegative=(nn_defect <= max(tol.atol, tol.rtol * l_scale)),
        nonnegative_defect=nn_defect,
        dissipative_defect=d_defect,
        dissipative_dim=int(d_dim),
        dissipative_ok=(d_defect <= max(tol.atol, tol.rtol * d_scale) and d_dim == n),
        dirac=dirac,
    )


def normalize_structures(lag: LagrangianStructure, dis: DissipativeStructure,
                         tol: ToleranceConfig = DEFAULT_TOL):
    """Right-multiply both representations so the normal forms hold.

    Dissipative side: with G = (d1 - d2)^{-1} (always invertible for a
    maximally dissipative structure) the new pair satisfies
    d1 - d2 = I, hence d2 + d2^T <= -2 d2^T d2 <= 0.

    Lagrangian side: with G = (mu*l1 + l2)^{-1} (invertible for all but at
    most n values of mu; mu = 1 always works in the nonnegative case) the
    isotropy identity forces both new factors symmetric, and for mu = 1 on
    a nonnegative structure additionally 0 <= l1 <= I.  The represented
    subspaces never change.
    """
    d1, d2 = dis.d1, dis.d2
    gd = d1 - d2
    sv = np.linalg.svd(gd, compute_uv=False)
    if sv.size and sv[-1] <= tol.svd_threshold(sv[0]):
        raise IllConditionedError("d1 - d2 is numerically singular; the structure "
                                  "is not maximally dissipative")
    gd_inv = np.linalg.inv(gd)
    new_d = dissipative_structure(d1 @ gd_inv, d2 @ gd_inv, tol)

    l1, l2 = lag.l1, lag.l2
    best = None
    for mu in (1.0, -1.0, 0.0, 2.0, -2.0, 0.5, -0.5, 3.0, -3.0,
               0.7853981633974483, -1.4142135623730951):
        cand = mu * l1 + l2
        sv = np.linalg.svd(cand, compute_uv=False)
        if sv.size == 0 or sv[-1] > tol.svd_threshold(sv[0]):
            quality = sv[-1] / sv[0] if sv.size else 1.0
            if best is None or quality > best[0]:
                best = (quality, mu, cand)
            if quality > 1e-4 or (mu == 1.0 and lag.nonnegative and quality > 1e-8):
                break
    if best is None:
        raise IllConditionedError("no shift made mu*l1 + l2 invertible; cannot "
                                  "normalize the Lagrangian representation")
    _, mu, cand = best
    gl_inv = np.linalg.inv(cand)
    new_l1 = l1 @ gl_inv
    new_l2 = l2 @ gl_inv
    # isotropy makes both factors symmetric in these coordinates; clean the
    # floating-point skew part before revalidating
    new_l1 = 0.5 * (new_l1 + new_l1.T)
    new_l2 = np.eye(lag.n) - mu * new_l1
    new_l = lagrangian_structure(new_l1, new_l2, tol)
    return new_l, new_d


def compose_dl(dis: DissipativeStructure, lag: LagrangianStructure,
               tol: ToleranceConfig = DEFAULT_TOL) -> MatrixPencil:
    """Pencil s*E - A with [E; A] spanning the composition of the structures.

    The effort variable is eliminated through the kernel of [l2, -d1]; the
    composition must have dimension n to define a square pencil, otherwise
    :class:`CompositionDefect` reports the actual dimension.
    """
    if lag.n != dis.n:
        raise InvalidInput("structures live in different dimensions")
    n = lag.n
    coupling = np.hstack([lag.l2, -dis.d1])
    null = nullspace_basis(coupling, tol)
    nu = null[:n, :]
    nv = null[n:, :]
    stacked = np.vstack([lag.l1 @ nu, dis.d2 @ nv])
    dim = numeric_rank(stacked, tol)
    if dim != n:
        raise CompositionDefect(
            f"composition has dimension {dim}, expected {n}; no square pencil")
    basis = range_basis(stacked, tol)
    return MatrixPencil(basis[:n, :], basis[n:, :])


def geometric_stability_check(dis: DissipativeStructure, lag: LagrangianStructure,
                              tol: ToleranceConfig = DEFAULT_TOL) -> GeometricStabilityReport:
    """Regularity (two-sided) and sufficient stability from the subspace data.

    Requires a nonnegative Lagrangian structure; both representations are
    normalized first when needed.  ``stable='yes'`` is only claimed through
    the sufficient condition l1(ker l2) = 0; otherwise the spectral test on
    the composed pencil decides.
    """
    if not lag.nonnegative:
        raise NotNonnegative("stability analysis requires l1^T l2 >= 0")
    if not (lag.normalized and dis.normalized):
        lag, dis = normalize_structures(lag, dis, tol)
    l1, l2 = lag.l1, lag.l2
    d1, d2 = dis.d1, dis.d2
    chi = intersect(Subspace.from_span(d1, tol), Subspace.from_span(l2, tol), tol)
    xb = chi.basis
    if chi.dim:
        stacked = np.vstack([xb.T @ l1 @ xb, xb.T @ d2 @ xb])
        cond_restricted = nullspace_basis(stacked, tol).shape[1] == 0
    else:
        cond_restricted = True
    ker_d1 = Subspace(nullspace_basis(d1, tol))
    ker_l2 = Subspace(nullspace_basis(l2, tol))
    d2_ker = image(d2, ker_d1, tol)
    l1_ker = image(l1, ker_l2, tol)
    cond_images = intersect(d2_ker, l1_ker, tol).dim == 0
    regular = cond_restricted and cond_images
    cond_sufficient = l1_ker.dim == 0
    conditions = {
        "restricted_kernels_trivial": cond_restricted,
        "kernel_images_disjoint": cond_images,
        "l1_kernel_image_trivial": cond_sufficient,
        "intersection_dim": chi.dim,
    }
    stable = "yes" if (regular and cond_sufficient) else "inconclusive"
    return GeometricStabilityReport(regular, stable, conditions)


def from_dh(e, j, r, q, tol: ToleranceConfig = DEFAULT_TOL):
    """Structures (graph of J - R, range of [E; Q]) for a dH pencil.

    Requires valid factors and trivial intersection of ker E and ker Q so
    the Lagrangian candidate has full dimension.
    """
    report = validate_dh(e, j, r, q, tol)
    if not report.valid:
        raise InvalidInput(f"factors fail the structure conditions: {report}")
    e = as_matrix(e, square=True)
    j = as_matrix(j, square=True)
    r = as_matrix(r, square=True)
    q = as_matrix(q, square=True)
    n = e.shape[0]
    if numeric_rank(np.vstack([e, q]), tol) != n:
        raise DegenerateLagrangian(
            "ker E and ker Q intersect; the state-effort subspace degenerates")
    dis = dissipative_structure(np.eye(n), j - r, tol)
    lag = lagrangian_structure(e, q, tol)
    return dis, lag


def embed_ph(ph, tol: ToleranceConfig = DEFAULT_TOL):
    """Structures over R^(n+k) embedding a port-Hamiltonian descriptor system.

    The dissipative side is the graph of
    M = [[J - R, B - P], [-(B + P)^T, -(S - N)]]; the sign of the lower row
    makes M + M^T = -2 [[R, P], [P^T, S]] an identity, so dissipativity is
    exactly the block condition of the port-Hamiltonian structure.
    """
    n, k = ph.n, ph.k
    if numeric_rank(np.vstack([ph.e, ph.q]), tol) != n:
        raise InvalidInput(
            "s E - Q must be regular (equivalently ker E and ker Q intersect "
            "trivially) for the embedded subspace to be Lagrangian")
    l1 = np.zeros((n + k, n + k))
    l1[:n, :n] = ph.e
    l1[n:, n:] = np.eye(k)
    l2 = np.zeros((n + k, n + k))
    l2[:n, :n] = ph.q
    l2[n:, n:] = np.eye(k)
    m = np.block([[ph.j - ph.r, ph.b - ph.p],
                  [-(ph.b + ph.p).T, -(ph.s_ff - ph.n_ff)]])
    block = np.block([[ph.r, ph.p], [ph.p.T, ph.s_ff]])
    identity_defect = np.linalg.norm(m + m.T + 2.0 * block)
    if identity_defect > 1e-10 * (1.0 + np.linalg.norm(block)):
        raise InvalidInput(
            f"feedthrough blocks are inconsistent (defect {identity_defect:.2e})")
    if _nsd_defect(m + m.T) > max(tol.atol, tol.rtol * (1.0 + np.linalg.norm(m))):
        raise NotDissipative(
            "the dissipation block [[R, P], [P^T, S]] is not positive "
            "semidefinite; the graph of the port map is not dissipative")
    dis = dissipative_structure(np.eye(n + k), m, tol)
    lag = lagrangian_structure(l1, l2, tol)
    return dis, lag
