"""Matrix pencils, the quasi-Kronecker decomposition and derived queries.

``quasi_kronecker`` reduces a square pencil s*E - A to block-diagonal form
with four kinds of blocks: one finite block s*I - a0, nilpotent blocks
s*N - I (sizes ``alpha``), column-singular blocks of size
(beta_i - 1) x beta_i, and their transposed row-singular partners
(``gamma``).  The reduction runs in five phases:

1. a rank-revealing staircase with a spectral shift that deflates the
   column-singular structure to the upper left (orthogonal transforms),
2. the mirrored staircase deflating the row-singular structure to the
   lower right,
3. a nested-subspace split of the remaining regular block into its finite
   part (s*I - a0) and nilpotent-at-infinity part (s*N - I),
4. elimination of the block couplings by coupled Sylvester solves,
5. canonicalization of each diagonal block (Jordan chains for the
   nilpotent part, an equivalence solve onto the singular templates).

The returned transforms are products of orthogonal factors and small
solves; their condition numbers and the reconstruction residual are
reported on the result.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOL, ToleranceConfig
from .errors import IllConditionedError, IllConditionedWarning, InvalidInput, SingularPencil
from .numerics import as_matrix, numeric_rank, nullspace_basis, range_basis
from .subspace import Subspace

__all__ = [
    "MatrixPencil",
    "DescriptorSystem",
    "QuasiKroneckerForm",
    "BlockEntry",
    "SpectralPoint",
    "quasi_kronecker",
    "is_regular",
    "spectrum",
    "index_of",
    "system_space",
    "canonical_blocks",
]


@dataclass(frozen=True)
class MatrixPencil:
    """Square pencil s*E - A."""

    e: np.ndarray
    a: np.ndarray

    def __post_init__(self):
        e = as_matrix(self.e, name="e", square=True)
        a = as_matrix(self.a, name="a", square=True)
        if e.shape != a.shape:
            raise InvalidInput(f"E and A must share shape, got {e.shape} vs {a.shape}")
        object.__setattr__(self, "e", e)
        object.__setattr__(self, "a", a)

    @property
    def n(self) -> int:
        return self.e.shape[0]


@dataclass(frozen=True)
class DescriptorSystem:
    """Controlled pencil d/dt(E x) = A x + B u with input matrix B (n x k)."""

    e: np.ndarray
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        pencil = MatrixPencil(self.e, self.a)
        b = np.asarray(self.b, dtype=float)
        if b.ndim == 1:
            b = b[:, None]
        b = as_matrix(b, name="b")
        if b.shape[0] != pencil.n:
            raise InvalidInput(f"B must have {pencil.n} rows, got shape {b.shape}")
        if b.shape[1] < 1:
            raise InvalidInput("B must have at least one column")
        object.__setattr__(self, "e", pencil.e)
        object.__setattr__(self, "a", pencil.a)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return self.e.shape[0]

    @property
    def k(self) -> int:
        return self.b.shape[1]

    @property
    def pencil(self) -> MatrixPencil:
        return MatrixPencil(self.e, self.a)


@dataclass(frozen=True)
class BlockEntry:
    """One diagonal block of the decomposed pencil, in final coordinates.

    Zero-size singular blocks (a lone zero column or zero row) are kept so
    the layout always accounts for every row and column.
    """

    kind: str  # 'finite' | 'nilpotent' | 'singular_col' | 'singular_row'
    rows: tuple
    cols: tuple
    size: int


@dataclass(frozen=True)
class QuasiKroneckerForm:
    """Decomposition data: S (s E - A) T is the canonical block diagonal."""

    s: np.ndarray
    t: np.ndarray
    n0: int
    a0: np.ndarray
    alpha: tuple
    beta: tuple
    gamma: tuple
    block_layout: tuple
    cond_s: float
    cond_t: float
    residual: float
    warnings: tuple = field(default_factory=tuple)

    @property
    def regular(self) -> bool:
        return not self.beta and not self.gamma

    @property
    def index(self) -> int:
        return max(self.alpha, default=0)


@dataclass(frozen=True)
class SpectralPoint:
    """Finite eigenvalue with multiplicities; semi-simple when they agree."""

    eigenvalue: complex
    algebraic: int
    geometric: int
    semi_simple: bool


# ---------------------------------------------------------------------------
# phase 1/2: singular staircases
# ---------------------------------------------------------------------------

def _split_kernel(mat, tol, floor=0.0):
    """(kernel basis, complement basis, shaky flag) from one SVD.

    ``floor`` anchors the rank threshold to the scale of the matrix the
    staircase started from: a deflated sub-block consisting of rounding
    junk must not redefine "numerically nonzero" downward.
    """
    m, n = mat.shape
    if n == 0:
        return np.zeros((0, 0)), np.zeros((0, 0)), False
    if m == 0:
        return np.eye(n), np.zeros((n, 0)), False
    _, sv, vh = np.linalg.svd(mat)
    thr = tol.svd_threshold(max(sv[0], floor)) if sv.size else 0.0
    rank = int(np.sum(sv > thr))
    shaky = bool(0 < rank < sv.size and sv[rank] > 0 and sv[rank - 1] / sv[rank] < 10.0)
    return vh[rank:].T, vh[:rank].T, shaky


def _column_staircase(e, a, tau, tol):
    """Deflate the column-singular structure of s*e - a to the upper left.

    Uses kernels of ``a - tau*e``; a shift that hits an eigenvalue makes the
    step counts inconsistent (detected, returns None).  On success returns
    ``(u, v, nsteps, rsteps, shaky)`` with ``u.T (s e - a) v`` block upper
    triangular and the staircase in rows ``[:sum(rsteps)]``, columns
    ``[:sum(nsteps)]``.
    """
    m, n = e.shape
    u = np.eye(m)
    v = np.eye(n)
    ec = e.copy()
    ac = a.copy()
    # anchor all rank thresholds to the scale of the full input matrices
    shifted_anchor = float(np.linalg.norm(a - tau * e, 2)) if e.size else 0.0
    e_anchor = float(np.linalg.norm(e, 2)) if e.size else 0.0
    ro = co = 0
    nsteps, rsteps = [], []
    shaky = False
    while True:
        eact = ec[ro:, co:]
        aact = ac[ro:, co:]
        if eact.shape[1] == 0:
            break
        ker, comp, sh1 = _split_kernel(aact - tau * eact, tol, floor=shifted_anchor)
        nk = ker.shape[1]
        if nk == 0:
            break
        vstep = np.hstack([ker, comp])
        ec[:, co:] = ec[:, co:] @ vstep
        ac[:, co:] = ac[:, co:] @ vstep
        v[:, co:] = v[:, co:] @ vstep
        e1 = ec[ro:, co:co + nk]
        if e1.shape[0]:
            uu, sv, _ = np.linalg.svd(e1)
            thr = tol.svd_threshold(max(sv[0], e_anchor)) if sv.size else 0.0
            r = int(np.sum(sv > thr))
            sh2 = bool(0 < r < sv.size and sv[r] > 0 and sv[r - 1] / sv[r] < 10.0)
            ec[ro:, :] = uu.T @ ec[ro:, :]
            ac[ro:, :] = uu.T @ ac[ro:, :]
            u[:, ro:] = u[:, ro:] @ uu
        else:
            r, sh2 = 0, False
        shaky = shaky or sh1 or sh2
        nsteps.append(nk)
        rsteps.append(r)
        ro += r
        co += nk
    # a clean deflation strips column-singular layers only: r_j == n_{j+1}
    for j in range(len(nsteps)):
        nxt = nsteps[j + 1] if j + 1 < len(nsteps) else 0
        if rsteps[j] != nxt:
            return None
    return u, v, nsteps, rsteps, shaky


def _sizes_from_steps(nsteps, rsteps):
    """Column-singular block sizes revealed by the staircase step counts."""
    out = []
    for j, (nj, rj) in enumerate(zip(nsteps, rsteps), start=1):
        out.extend([j] * (nj - rj))
    return tuple(sorted(out, reverse=True))


def _shift_candidates(e, a):
    # irrational-ish leading values dodge the integer eigenvalues common in
    # assembled test pencils; plain shifts remain as fallbacks
    ratio = (1.0 + float(np.linalg.norm(a))) / (1.0 + float(np.linalg.norm(e)))
    base = [0.7853981633974483, -1.4142135623730951, 2.23606797749979,
            -0.5772156649015329, 3.141592653589793, -2.718281828459045,
            0.30102999566398120, 5.5, -7.3, 0.0, 1.0, -1.0, 2.0, -2.0]
    return [c * ratio for c in base]


def _staircase_sweep(e, a, tol, skip=0):
    """First consistent staircase readout, skipping ``skip`` earlier ones.

    A shift close to an eigenvalue can occasionally produce a consistent but
    wrong readout; the caller retries with increasing ``skip`` when the
    downstream reconstruction fails.
    """
    seen = 0
    for tau in _shift_candidates(e, a):
        result = _column_staircase(e, a, tau, tol)
        if result is not None:
            if seen == skip:
                return result
            seen += 1
    raise IllConditionedError(
        "singular staircase step counts inconsistent for every remaining shift"
    )


# ---------------------------------------------------------------------------
# phase 3: finite/infinite split of the regular part
# ---------------------------------------------------------------------------

def _wong_split(e, a, tol):
    """Split a regular pencil into finite and nilpotent-at-infinity parts.

    Iterates the nested subspaces V_{i+1} = A^{-1}(E V_i) (preimage) and
    W_{i+1} = E^{-1}(A W_i); for a regular pencil their limits are
    complementary and ``inv([E V, A W]) (sE - A) [V, W]`` equals
    blkdiag(s I - a0, s nil - I).
    """
    n = e.shape[0]
    if n == 0:
        z = np.zeros((0, 0))
        return z, z, z, z
    # rank thresholds anchored to the block norms: an image like E @ V that
    # is structurally zero must not be mistaken for a genuine direction
    e_scale = float(np.linalg.norm(e, 2))
    a_scale = float(np.linalg.norm(a, 2))
    ident = np.eye(n)
    vbas = ident
    while True:
        rng = range_basis(e @ vbas, tol, floor=e_scale)
        vnew = nullspace_basis(a - rng @ (rng.T @ a), tol, floor=a_scale)
        if vnew.shape[1] == vbas.shape[1]:
            vbas = vnew
            break
        vbas = vnew
    wbas = np.zeros((n, 0))
    while True:
        if wbas.shape[1]:
            rng = range_basis(a @ wbas, tol, floor=a_scale)
            wnew = nullspace_basis(e - rng @ (rng.T @ e), tol, floor=e_scale)
        else:
            wnew = nullspace_basis(e, tol, floor=e_scale)
        if wnew.shape[1] == wbas.shape[1]:
            wbas = wnew
            break
        wbas = wnew
    n0 = vbas.shape[1]
    if n0 + wbas.shape[1] != n:
        raise SingularPencil(
            f"deflating subspaces not complementary ({n0} + {wbas.shape[1]} != {n}); "
            "the regular part is numerically singular"
        )
    if n0 == n:
        vbas = ident  # exact coordinates in the purely finite case
    left = np.hstack([e @ vbas, a @ wbas])
    sv = np.linalg.svd(left, compute_uv=False) if n else np.zeros(0)
    if sv.size and sv[-1] <= tol.svd_threshold(sv[0]):
        raise SingularPencil("left deflating basis is numerically singular")
    smid = np.linalg.inv(left)
    tmid = np.hstack([vbas, wbas])
    a0 = (smid @ (a @ vbas))[:n0, :]
    nil = (smid @ (e @ wbas))[n0:, :]
    return smid, tmid, a0, nil


def _nilpotent_jordan(nil, tol):
    """Similarity onto canonical upper-shift blocks: returns (t, sizes desc)."""
    k = nil.shape[0]
    if k == 0:
        return np.eye(0), ()
    nil_scale = max(float(np.linalg.norm(nil, 2)), 1e-300)
    kers = [np.zeros((k, 0))]
    power = np.eye(k)
    j = 1
    while kers[-1].shape[1] < k:
        power = power @ nil
        # a structurally vanished power carries junk of size eps * |nil|^j;
        # anchor the kernel threshold at that scale
        kerj = nullspace_basis(power, tol, floor=nil_scale ** j)
        if kerj.shape[1] <= kers[-1].shape[1]:
            raise IllConditionedError(
                "kernel chain of the nilpotent part stalled; rank decisions "
                "are inconsistent with nilpotency"
            )
        kers.append(kerj)
        j += 1
    dims = [kk.shape[1] for kk in kers]
    depth = len(dims) - 1
    chains = []  # chain[0] is the top vector; downward images get appended
    for j in range(depth, 0, -1):
        carried = []
        for chain in chains:
            nxt = nil @ chain[-1]
            chain.append(nxt)
            carried.append(nxt)
        need = dims[j] - dims[j - 1] - len(carried)
        if need < 0:
            raise IllConditionedError("inconsistent nilpotent staircase counts")
        if need > 0:
            blockers = [kers[j - 1]] + [c[:, None] for c in carried]
            base = np.hstack(blockers)
            if base.shape[1]:
                qb = range_basis(base, tol)
                cand = kers[j] - qb @ (qb.T @ kers[j])
            else:
                cand = kers[j]
            fresh = range_basis(cand, tol)
            if fresh.shape[1] < need:
                raise IllConditionedError("could not complete the Jordan chain basis")
            for idx in range(need):
                chains.append([fresh[:, idx]])
    order = sorted(range(len(chains)), key=lambda i: (-len(chains[i]), i))
    cols = []
    sizes = []
    for i in order:
        chain = chains[i]
        sizes.append(len(chain))
        cols.extend(reversed(chain))
    tmat = np.column_stack(cols)
    sv = np.linalg.svd(tmat, compute_uv=False)
    if sv[-1] <= tol.svd_threshold(sv[0]):
        raise IllConditionedError("Jordan chain basis is numerically singular")
    return tmat, tuple(sizes)


# ---------------------------------------------------------------------------
# phase 4/5: decoupling and canonicalization
# ---------------------------------------------------------------------------

def _canonical_singular(sizes, transposed):
    """Stacked canonical singular blocks; ``sizes`` are the block parameters."""
    if not sizes:
        return np.zeros((0, 0)), np.zeros((0, 0))
    if transposed:
        rows, cols = sum(sizes), sum(sizes) - len(sizes)
    else:
        rows, cols = sum(sizes) - len(sizes), sum(sizes)
    e = np.zeros((rows, cols))
    a = np.zeros((rows, cols))
    r = c = 0
    for b in sizes:
        if transposed:
            e[r:r + b, c:c + b - 1] = np.eye(b, b - 1)
            a[r:r + b, c:c + b - 1] = np.eye(b, b - 1, -1)
            r += b
            c += b - 1
        else:
            e[r:r + b - 1, c:c + b] = np.eye(b - 1, b)
            a[r:r + b - 1, c:c + b] = np.eye(b - 1, b, 1)
            r += b - 1
            c += b
    return e, a


def _equivalence_onto(e_src, a_src, e_dst, a_dst, tol):
    """Invertible (g, t) with g^{-1}(s e_src - a_src) t = s e_dst - a_dst.

    The pairs are equivalent by construction, so the linear space
    {(t, g) : e_src t = g e_dst, a_src t = g a_dst} contains invertible
    elements; a seeded random combination finds one.
    """
    m, n = e_src.shape
    if m == 0 and n == 0:
        return np.eye(0), np.eye(0)
    rows = []
    eye_n = np.eye(n)
    eye_m = np.eye(m)
    for src, dst in ((e_src, e_dst), (a_src, a_dst)):
        rows.append(np.hstack([np.kron(eye_n, src), -np.kron(dst.T, eye_m)]))
    null = nullspace_basis(np.vstack(rows), tol)
    if null.shape[1] == 0:
        raise IllConditionedError("no equivalence onto the canonical singular form")
    rng = np.random.default_rng(1729)
    best = (-1.0, None, None)
    for _ in range(50):
        z = null @ rng.standard_normal(null.shape[1])
        tmat = z[:n * n].reshape((n, n), order="F")
        gmat = z[n * n:].reshape((m, m), order="F")
        quality = 1.0
        for f in (tmat, gmat):
            if f.size:
                sv = np.linalg.svd(f, compute_uv=False)
                quality = min(quality, sv[-1] / sv[0] if sv[0] > 0 else 0.0)
        if quality > best[0]:
            best = (quality, tmat, gmat)
        if quality > 1e-3:
            break
    quality, tmat, gmat = best
    if quality <= 1e-8:
        raise IllConditionedError(
            f"equivalence factors numerically singular (quality {quality:.2e})"
        )
    return gmat, tmat


def _coupled_sylvester(e1, a1, e2, a2, ec, ac, tol):
    """Solve e1 X + Y e2 = -ec, a1 X + Y a2 = -ac (least squares, verified)."""
    m1, n1 = e1.shape
    m2, n2 = e2.shape
    if m1 == 0 or n2 == 0 or (n1 == 0 and m2 == 0):
        return np.zeros((n1, n2)), np.zeros((m1, m2))
    top = np.hstack([np.kron(np.eye(n2), e1), np.kron(e2.T, np.eye(m1))])
    bot = np.hstack([np.kron(np.eye(n2), a1), np.kron(a2.T, np.eye(m1))])
    lhs = np.vstack([top, bot])
    rhs = -np.concatenate([ec.reshape(-1, order="F"), ac.reshape(-1, order="F")])
    sol, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
    resid = np.linalg.norm(lhs @ sol - rhs)
    scale = 1.0 + np.linalg.norm(rhs) + np.linalg.norm(sol) * (
        np.linalg.norm(e1) + np.linalg.norm(e2) + np.linalg.norm(a1) + np.linalg.norm(a2))
    if resid > 1e-7 * scale:
        raise IllConditionedError(
            f"block decoupling failed (coupled Sylvester residual {resid:.2e})"
        )
    x = sol[:n1 * n2].reshape((n1, n2), order="F")
    y = sol[n1 * n2:].reshape((m1, m2), order="F")
    return x, y


def _stein_decouple(a0, nil, e12, a12):
    """Fast finite/nilpotent decoupling.

    With unit E on the finite block and unit A on the nilpotent block the
    coupled equations reduce to Y - a0 Y nil = a0 e12 - a12 (terminating
    Neumann series since nil is nilpotent) and X = -e12 - Y nil.
    """
    rhs = a0 @ e12 - a12
    y = rhs.copy()
    term = rhs
    for _ in range(nil.shape[0]):
        term = a0 @ term @ nil
        if not np.any(np.abs(term) > 0):
            break
        y = y + term
    x = -e12 - y @ nil
    return x, y


def canonical_blocks(n0, a0, alpha, beta, gamma):
    """Canonical block-diagonal (E, A) for the given structure data."""
    n_rows = n0 + sum(alpha) + (sum(beta) - len(beta)) + sum(gamma)
    n_cols = n0 + sum(alpha) + sum(beta) + (sum(gamma) - len(gamma))
    e = np.zeros((n_rows, n_cols))
    a = np.zeros((n_rows, n_cols))
    r = c = 0
    e[r:n0, c:n0] = np.eye(n0)
    a[r:n0, c:n0] = a0
    r = c = n0
    for sz in alpha:
        e[r:r + sz, c:c + sz] = np.eye(sz, sz, 1)
        a[r:r + sz, c:c + sz] = np.eye(sz)
        r += sz
        c += sz
    eb, ab = _canonical_singular(beta, transposed=False)
    e[r:r + eb.shape[0], c:c + eb.shape[1]] = eb
    a[r:r + eb.shape[0], c:c + eb.shape[1]] = ab
    r += eb.shape[0]
    c += eb.shape[1]
    eg, ag = _canonical_singular(gamma, transposed=True)
    e[r:r + eg.shape[0], c:c + eg.shape[1]] = eg
    a[r:r + eg.shape[0], c:c + eg.shape[1]] = ag
    return e, a


def _build_layout(n0, alpha, beta, gamma):
    layout = []
    r = c = 0
    if n0:
        layout.append(BlockEntry("finite", (0, n0), (0, n0), n0))
    r = c = n0
    for sz in alpha:
        layout.append(BlockEntry("nilpotent", (r, r + sz), (c, c + sz), sz))
        r += sz
        c += sz
    for sz in beta:
        layout.append(BlockEntry("singular_col", (r, r + sz - 1), (c, c + sz), sz))
        r += sz - 1
        c += sz
    for sz in gamma:
        layout.append(BlockEntry("singular_row", (r, r + sz), (c, c + sz - 1), sz))
        r += sz
        c += sz - 1
    return tuple(layout)


def quasi_kronecker(p: MatrixPencil, tol: ToleranceConfig = DEFAULT_TOL) -> QuasiKroneckerForm:
    """Block-diagonal quasi-Kronecker decomposition of a square pencil.

    Raises :class:`IllConditionedError` when rank decisions cannot be made
    consistently; borderline rank gaps are reported through the result's
    ``warnings`` tuple and an :class:`IllConditionedWarning`.
    """
    # The reconstruction residual at the end is a sound certificate, so a
    # staircase readout corrupted by a near-eigenvalue shift is always
    # caught; retry with later consistent readouts before giving up.
    last_error = None
    for skip1, skip2 in ((0, 0), (0, 1), (1, 0), (1, 1), (0, 2), (2, 0), (2, 2)):
        try:
            return _qkf_attempt(p, tol, skip1, skip2)
        except (IllConditionedError, SingularPencil) as exc:
            last_error = exc
    raise IllConditionedError(
        f"quasi-Kronecker reduction failed for every shift combination: {last_error}"
    )


def _qkf_attempt(p: MatrixPencil, tol: ToleranceConfig, skip1: int, skip2: int) -> QuasiKroneckerForm:
    e, a = p.e, p.a
    n = p.n
    notes = []
    if n == 0:
        eye0 = np.eye(0)
        return QuasiKroneckerForm(eye0, eye0, 0, eye0, (), (), (), (), 1.0, 1.0, 0.0)

    ec = e.copy()
    ac = a.copy()
    s_acc = np.eye(n)
    t_acc = np.eye(n)

    # phase 1: column-singular staircase
    u1, v1, nsteps, rsteps, shaky1 = _staircase_sweep(ec, ac, tol, skip1)
    if shaky1:
        notes.append("staircase rank decision within factor 10 of the threshold")
    beta = _sizes_from_steps(nsteps, rsteps)
    rb, cb = sum(rsteps), sum(nsteps)
    ec = u1.T @ ec @ v1
    ac = u1.T @ ac @ v1
    s_acc = u1.T @ s_acc
    t_acc = t_acc @ v1
    ec[rb:, :cb] = 0.0
    ac[rb:, :cb] = 0.0

    # phase 2: row-singular staircase, mirrored through transposition and
    # index reversal so the deflated part lands at the lower right
    mrest, nrest = n - rb, n - cb
    u2, v2, nsteps2, rsteps2, shaky2 = _staircase_sweep(
        ec[rb:, cb:].T, ac[rb:, cb:].T, tol, skip2)
    if shaky2:
        notes.append("mirrored staircase rank decision within factor 10 of the threshold")
    gamma = _sizes_from_steps(nsteps2, rsteps2)
    grows, gcols = sum(nsteps2), sum(rsteps2)  # rows/cols of the original block
    # the transposed staircase deflates to its upper left; transposing back
    # puts the row-singular part top-left with a lower coupling, so a block
    # swap (middle first) restores the upper-triangular layout
    perm_rows = list(range(grows, mrest)) + list(range(grows))
    perm_cols = list(range(gcols, nrest)) + list(range(gcols))
    row_tf = v2[:, perm_rows]
    col_tf = u2[:, perm_cols]
    ec[rb:, :] = row_tf.T @ ec[rb:, :]
    ac[rb:, :] = row_tf.T @ ac[rb:, :]
    s_acc[rb:, :] = row_tf.T @ s_acc[rb:, :]
    ec[:, cb:] = ec[:, cb:] @ col_tf
    ac[:, cb:] = ac[:, cb:] @ col_tf
    t_acc[:, cb:] = t_acc[:, cb:] @ col_tf
    mid_r1 = n - grows
    mid_c1 = n - gcols
    ec[mid_r1:, :mid_c1] = 0.0
    ac[mid_r1:, :mid_c1] = 0.0
    if len(beta) != len(gamma) or (mid_r1 - rb) != (mid_c1 - cb):
        raise IllConditionedError(
            "inconsistent singular structure: the remaining block is not square"
        )

    # phase 3: finite/infinite split of the regular middle block
    smid, tmid, a0, nil = _wong_split(ec[rb:mid_r1, cb:mid_c1],
                                      ac[rb:mid_r1, cb:mid_c1], tol)
    n0 = a0.shape[0]
    nalpha = nil.shape[0]
    ec[rb:mid_r1, :] = smid @ ec[rb:mid_r1, :]
    ac[rb:mid_r1, :] = smid @ ac[rb:mid_r1, :]
    s_acc[rb:mid_r1, :] = smid @ s_acc[rb:mid_r1, :]
    ec[:, cb:mid_c1] = ec[:, cb:mid_c1] @ tmid
    ac[:, cb:mid_c1] = ac[:, cb:mid_c1] @ tmid
    t_acc[:, cb:mid_c1] = t_acc[:, cb:mid_c1] @ tmid
    # structural zeros inside the middle block
    ec[rb:rb + n0, cb:cb + n0] = np.eye(n0)
    ec[rb:rb + n0, cb + n0:mid_c1] = 0.0
    ec[rb + n0:mid_r1, cb:cb + n0] = 0.0
    ec[rb + n0:mid_r1, cb + n0:mid_c1] = nil
    ac[rb:rb + n0, cb:cb + n0] = a0
    ac[rb:rb + n0, cb + n0:mid_c1] = 0.0
    ac[rb + n0:mid_r1, cb:cb + n0] = 0.0
    ac[rb + n0:mid_r1, cb + n0:mid_c1] = np.eye(nalpha)

    # block index ranges: order [singular_col, finite, infinite, singular_row]
    row_rng = [(0, rb), (rb, rb + n0), (rb + n0, mid_r1), (mid_r1, n)]
    col_rng = [(0, cb), (cb, cb + n0), (cb + n0, mid_c1), (mid_c1, n)]

    # phase 4: decouple the upper block triangle, innermost pairs first
    for i in (2, 1, 0):
        for j in range(i + 1, 4):
            ri0, ri1 = row_rng[i]
            rj0, rj1 = row_rng[j]
            ci0, ci1 = col_rng[i]
            cj0, cj1 = col_rng[j]
            if ri1 == ri0 and ci1 == ci0:
                continue
            if rj1 == rj0 and cj1 == cj0:
                continue
            ecpl = ec[ri0:ri1, cj0:cj1]
            acpl = ac[ri0:ri1, cj0:cj1]
            if i == 1 and j == 2:
                x, y = _stein_decouple(a0, nil, ecpl, acpl)
            else:
                x, y = _coupled_sylvester(
                    ec[ri0:ri1, ci0:ci1], ac[ri0:ri1, ci0:ci1],
                    ec[rj0:rj1, cj0:cj1], ac[rj0:rj1, cj0:cj1],
                    ecpl, acpl, tol)
            ec[ri0:ri1, :] += y @ ec[rj0:rj1, :]
            ac[ri0:ri1, :] += y @ ac[rj0:rj1, :]
            s_acc[ri0:ri1, :] += y @ s_acc[rj0:rj1, :]
            ec[:, cj0:cj1] += ec[:, ci0:ci1] @ x
            ac[:, cj0:cj1] += ac[:, ci0:ci1] @ x
            t_acc[:, cj0:cj1] += t_acc[:, ci0:ci1] @ x
            ec[ri0:ri1, cj0:cj1] = 0.0
            ac[ri0:ri1, cj0:cj1] = 0.0

    # phase 5: canonicalize the diagonal blocks
    tnil, alpha = _nilpotent_jordan(nil, tol)
    tnil_inv = np.linalg.inv(tnil)
    r0, r1 = row_rng[2]
    c0, c1 = col_rng[2]
    ec[r0:r1, :] = tnil_inv @ ec[r0:r1, :]
    ac[r0:r1, :] = tnil_inv @ ac[r0:r1, :]
    s_acc[r0:r1, :] = tnil_inv @ s_acc[r0:r1, :]
    ec[:, c0:c1] = ec[:, c0:c1] @ tnil
    ac[:, c0:c1] = ac[:, c0:c1] @ tnil
    t_acc[:, c0:c1] = t_acc[:, c0:c1] @ tnil

    for block, sizes, transposed in ((0, beta, False), (3, gamma, True)):
        r0, r1 = row_rng[block]
        c0, c1 = col_rng[block]
        if r1 == r0 and c1 == c0:
            continue
        e_dst, a_dst = _canonical_singular(sizes, transposed)
        g, tpart = _equivalence_onto(ec[r0:r1, c0:c1], ac[r0:r1, c0:c1],
                                     e_dst, a_dst, tol)
        ginv = np.linalg.inv(g) if g.size else g
        ec[r0:r1, :] = ginv @ ec[r0:r1, :]
        ac[r0:r1, :] = ginv @ ac[r0:r1, :]
        s_acc[r0:r1, :] = ginv @ s_acc[r0:r1, :]
        ec[:, c0:c1] = ec[:, c0:c1] @ tpart
        ac[:, c0:c1] = ac[:, c0:c1] @ tpart
        t_acc[:, c0:c1] = t_acc[:, c0:c1] @ tpart

    # final permutation to [finite, nilpotent, singular_col, singular_row]
    row_perm = (list(range(*row_rng[1])) + list(range(*row_rng[2]))
                + list(range(*row_rng[0])) + list(range(*row_rng[3])))
    col_perm = (list(range(*col_rng[1])) + list(range(*col_rng[2]))
                + list(range(*col_rng[0])) + list(range(*col_rng[3])))
    s_acc = s_acc[row_perm, :]
    t_acc = t_acc[:, col_perm]

    e_can, a_can = canonical_blocks(n0, a0, alpha, beta, gamma)
    residual = float(np.linalg.norm(s_acc @ e @ t_acc - e_can)
                     + np.linalg.norm(s_acc @ a @ t_acc - a_can))
    sv_s = np.linalg.svd(s_acc, compute_uv=False)
    sv_t = np.linalg.svd(t_acc, compute_uv=False)
    cond_s = float(sv_s[0] / sv_s[-1]) if sv_s.size else 1.0
    cond_t = float(sv_t[0] / sv_t[-1]) if sv_t.size else 1.0
    bound = 1e-7 * (np.linalg.norm(e) + np.linalg.norm(a) + 1.0) * cond_s * cond_t
    if residual > bound:
        raise IllConditionedError(
            f"decomposition residual {residual:.3e} exceeds the certified bound {bound:.3e}"
        )
    if notes:
        warnings.warn("; ".join(notes), IllConditionedWarning, stacklevel=2)
    return QuasiKroneckerForm(
        s=s_acc, t=t_acc, n0=n0, a0=a0, alpha=alpha, beta=beta, gamma=gamma,
        block_layout=_build_layout(n0, alpha, beta, gamma),
        cond_s=cond_s, cond_t=cond_t, residual=residual, warnings=tuple(notes))


# ---------------------------------------------------------------------------
# derived queries
# ---------------------------------------------------------------------------

def _rank_sampling_regular(e, a, tol):
    """Cheap cross-check: full rank of s_i E - A at n + 1 sample points."""
    n = e.shape[0]
    if n == 0:
        return True
    ratio = (1.0 + np.linalg.norm(a)) / (1.0 + np.linalg.norm(e))
    offsets = 0.318309886 + 0.77 * np.arange(n + 1)
    signs = np.where(np.arange(n + 1) % 2, -1.0, 1.0)
    for s_i in ratio * offsets * signs:
        if numeric_rank(s_i * e - a, tol) == n:
            return True
    return False


def is_regular(p: MatrixPencil, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """True when det(sE - A) is not the zero polynomial.

    Decided from the quasi-Kronecker structure (regular iff no singular
    blocks) and cross-checked by rank sampling at n + 1 points; on
    disagreement the structural verdict wins and a warning is emitted.
    """
    qkf = quasi_kronecker(p, tol)
    structural = qkf.regular
    sampled = _rank_sampling_regular(p.e, p.a, tol)
    if structural != sampled:
        warnings.warn(
            f"regularity cross-check disagrees (structure: {structural}, "
            f"sampling: {sampled}); keeping the structural verdict",
            IllConditionedWarning, stacklevel=2)
    return structural


def index_of(p: MatrixPencil, tol: ToleranceConfig = DEFAULT_TOL) -> int:
    """Largest nilpotent block size; 0 when the pencil has none."""
    return quasi_kronecker(p, tol).index


def _cluster_eigenvalues(eigs, tol):
    """Greedy clustering with radius 10*atol*(1+|lambda|)."""
    order = sorted(range(len(eigs)), key=lambda i: (eigs[i].real, eigs[i].imag))
    clusters = []
    for idx in order:
        ev = eigs[idx]
        placed = False
        for cl in clusters:
            rep = cl["sum"] / cl["count"]
            if abs(ev - rep) <= 10.0 * tol.atol * (1.0 + abs(rep)):
                cl["sum"] += ev
                cl["count"] += 1
                placed = True
                break
        if not placed:
            clusters.append({"sum": ev, "count": 1})
    return [(cl["sum"] / cl["count"], cl["count"]) for cl in clusters]


def spectrum(p: MatrixPencil, tol: ToleranceConfig = DEFAULT_TOL):
    """Finite eigenvalues with algebraic/geometric multiplicities.

    Raises :class:`SingularPencil` for singular pencils.  Geometric
    multiplicity is the kernel dimension of lambda*E - A at the clustered
    eigenvalue; an eigenvalue is semi-simple when it matches the cluster
    size.
    """
    qkf = quasi_kronecker(p, tol)
    if not qkf.regular:
        raise SingularPencil("spectrum is defined for regular pencils only")
    if qkf.n0 == 0:
        return []
    eigs = [complex(ev) for ev in np.linalg.eigvals(qkf.a0)]
    points = []
    for rep, count in _cluster_eigenvalues(eigs, tol):
        if abs(rep.imag) <= tol.atol * (1.0 + abs(rep)):
            rep = complex(rep.real, 0.0)
        geo = p.n - numeric_rank(rep * p.e.astype(complex) - p.a, tol)
        points.append(SpectralPoint(rep, count, geo, geo == count))
    points.sort(key=lambda sp: (sp.eigenvalue.real, sp.eigenvalue.imag))
    return points


def system_space(p: MatrixPencil, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
    """Subspace of admissible initial states.

    Image under T of the coordinates belonging to the finite block and the
    column-singular blocks of the decomposition.
    """
    qkf = quasi_kronecker(p, tol)
    cols = list(range(qkf.n0))
    start_beta = qkf.n0 + sum(qkf.alpha)
    cols.extend(range(start_beta, start_beta + sum(qkf.beta)))
    if not cols:
        return Subspace.zero(p.n)
    return Subspace(range_basis(qkf.t[:, cols], tol))
