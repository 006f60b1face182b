"""Labeled random instance builders shared by the property tests.

Every builder assembles canonical blocks with a known structure label and
disguises them with random transforms, so each test can compare the
package's answer against construction-time truth.
"""

import numpy as np

from pencilph.pencil import DescriptorSystem, MatrixPencil, canonical_blocks


def rand_orth(n, rng):
    if n == 0:
        return np.eye(0)
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def rand_conditioned(n, rng, cond=30.0):
    if n == 0:
        return np.eye(0)
    if n == 1:
        return np.array([[rng.uniform(0.5, 2.0)]])
    d = np.logspace(0.0, np.log10(cond), n)
    return rand_orth(n, rng) @ np.diag(d) @ rand_orth(n, rng)


def real_block_from_eigs(real_eigs, complex_pairs, jordan_axis=0, rng=None):
    """Block-diagonal real matrix with the given spectrum.

    ``real_eigs`` become 1x1 blocks, each (re, im) pair a 2x2 rotation
    block, and ``jordan_axis`` appends one non-semi-simple 2x2 zero block.
    """
    blocks = [np.array([[lam]]) for lam in real_eigs]
    blocks += [np.array([[re, im], [-im, re]]) for re, im in complex_pairs]
    blocks += [np.array([[0.0, 1.0], [0.0, 0.0]])] * jordan_axis
    if not blocks:
        return np.eye(0)
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n))
    pos = 0
    for b in blocks:
        w = b.shape[0]
        out[pos:pos + w, pos:pos + w] = b
        pos += w
    return out


def sample_a0(rng, n0, label):
    """Finite-part matrix with a labeled spectral class.

    Labels: ``asymptotic`` (all Re < -0.1), ``stable`` (adds semi-simple
    axis pairs/zeros), ``unstable_right`` (one Re > 0.1),
    ``unstable_jordan`` (non-semi-simple axis block), ``antistable``
    (all Re > 0.1).
    """
    if n0 == 0:
        return np.eye(0)
    if label == "unstable_jordan" and n0 < 2:
        label = "unstable_right"
    stable_real = lambda k: (-rng.uniform(0.1, 2.0, k)).tolist()
    if label == "asymptotic":
        reals = stable_real(n0 % 2)
        pairs = [(-rng.uniform(0.1, 2.0), rng.uniform(0.3, 2.0))
                 for _ in range(n0 // 2)]
        core = real_block_from_eigs(reals, pairs)
    elif label == "stable":
        n_axis_pairs = min(1, n0 // 2)
        n_zero = 1 if (n0 - 2 * n_axis_pairs) >= 1 else 0
        rest = n0 - 2 * n_axis_pairs - n_zero
        reals = [0.0] * n_zero + stable_real(rest % 2)
        pairs = [(0.0, rng.uniform(0.3, 2.0))] * n_axis_pairs \
            + [(-rng.uniform(0.1, 2.0), rng.uniform(0.3, 2.0))
               for _ in range(rest // 2)]
        core = real_block_from_eigs(reals, pairs)
    elif label == "unstable_right":
        reals = [rng.uniform(0.1, 2.0)] + stable_real((n0 - 1) % 2)
        pairs = [(-rng.uniform(0.1, 2.0), rng.uniform(0.3, 2.0))
                 for _ in range((n0 - 1) // 2)]
        core = real_block_from_eigs(reals, pairs)
    elif label == "unstable_jordan":
        rest = n0 - 2
        reals = stable_real(rest % 2)
        pairs = [(-rng.uniform(0.1, 2.0), rng.uniform(0.3, 2.0))
                 for _ in range(rest // 2)]
        core = real_block_from_eigs(reals, pairs, jordan_axis=1)
    elif label == "antistable":
        reals = rng.uniform(0.1, 2.0, n0 % 2).tolist()
        pairs = [(rng.uniform(0.1, 2.0), rng.uniform(0.3, 2.0))
                 for _ in range(n0 // 2)]
        core = real_block_from_eigs(reals, pairs)
    else:
        raise ValueError(f"unknown label {label!r}")
    w = rand_conditioned(n0, rng, cond=10.0)
    return w @ core @ np.linalg.inv(w)


def assemble_pencil(rng, n0, label, alpha=(), beta=(), gamma=(),
                    transform="conditioned", cond=30.0):
    """Pencil with known structure, disguised by an equivalence transform."""
    a0 = sample_a0(rng, n0, label)
    e_c, a_c = canonical_blocks(n0, a0, alpha, beta, gamma)
    n = e_c.shape[0]
    assert e_c.shape == (n, n), "recipe must produce a square pencil"
    if transform == "orthogonal":
        s = rand_orth(n, rng)
        t = rand_orth(n, rng)
    elif transform == "conditioned":
        s = rand_conditioned(n, rng, cond)
        t = rand_conditioned(n, rng, cond)
    elif transform == "none":
        s = np.eye(n)
        t = np.eye(n)
    else:
        raise ValueError(transform)
    return MatrixPencil(s @ e_c @ t, s @ a_c @ t)


def stability_corpus(rng, count, n_max=8, transform="conditioned"):
    """Labeled pencils: yields (pencil, expected_classification)."""
    out = []
    labels = ["asymptotic", "stable", "unstable_right", "unstable_jordan"]
    expected = {"asymptotic": "asymptotically_stable", "stable": "stable",
                "unstable_right": "unstable", "unstable_jordan": "unstable"}
    for i in range(count):
        label = labels[i % len(labels)]
        n0 = int(rng.integers(2 if label in ("unstable_jordan",) else 1, 5))
        n_alpha = int(rng.integers(0, 3))
        alpha = tuple(sorted(rng.integers(1, 4, n_alpha).tolist(), reverse=True))
        if sum(alpha) + n0 > n_max:
            alpha = alpha[:1]
        pencil = assemble_pencil(rng, n0, label, alpha=alpha, transform=transform)
        exp = expected[label]
        if label == "asymptotic" and not alpha:
            pass  # plain ODE case stays labeled asymptotic
        out.append((pencil, exp))
    return out


def controllable_pair(rng, n1, k=1):
    """Anti-stable (a1, b1) with (a1, b1) controllable (Kalman-verified)."""
    while True:
        a1 = sample_a0(rng, n1, "antistable")
        b1 = rng.standard_normal((n1, k))
        kal = np.hstack([np.linalg.matrix_power(a1, j) @ b1 for j in range(n1)])
        if np.linalg.matrix_rank(kal) == n1:
            return a1, b1


def stabilizable_descriptor(rng, n1, n2, alpha=(), k=1, transform="orthogonal",
                            b_alpha_zero=True, controllable=True):
    """Descriptor system assembled in refined form, then disguised.

    ``transform='orthogonal'`` keeps the certificate subspace geometry
    exact; conditioned transforms are available for the weaker checks.
    """
    n0 = n1 + n2
    n = n0 + sum(alpha)
    if controllable and n1:
        a1, b1 = controllable_pair(rng, n1, k)
    else:
        a1 = sample_a0(rng, n1, "antistable")
        b1 = np.zeros((n1, k))
    a2 = sample_a0(rng, n2, "stable" if (n2 and rng.random() < 0.4) else
                   ("asymptotic" if n2 else "asymptotic"))
    e_c, a_c = canonical_blocks(n0, np.zeros((n0, n0)), alpha, (), ())
    a_c[:n1, :n1] = a1
    a_c[n1:n0, n1:n0] = a2
    b_c = np.zeros((n, k))
    b_c[:n1] = b1
    if n2:
        b_c[n1:n0] = rng.standard_normal((n2, k))
    if not b_alpha_zero and n > n0:
        b_c[n0:] = rng.standard_normal((n - n0, k))
    if transform == "orthogonal":
        s = rand_orth(n, rng)
        t = rand_orth(n, rng)
    elif transform == "none":
        s = np.eye(n)
        t = np.eye(n)
    else:
        s = rand_conditioned(n, rng)
        t = rand_conditioned(n, rng)
    return DescriptorSystem(s @ e_c @ t, s @ a_c @ t, s @ b_c)


def random_dh(rng, n, rank_q=None, kernel_condition=True):
    """Valid dissipative-Hamiltonian factors (E, J, R, Q) with known layout.

    Built as E = M^T De N, Q = M^T Dq N with M orthogonal so Q^T E stays
    symmetric positive semidefinite; the diagonal sign patterns control
    rank(Q) and whether ker Q is contained in ker E.
    """
    if rank_q is None:
        rank_q = n
    d_q = np.zeros(n)
    d_q[:rank_q] = rng.uniform(0.5, 2.0, rank_q)
    d_e = np.zeros(n)
    ne = rank_q if kernel_condition else min(n, rank_q + 1)
    d_e[:ne] = rng.uniform(0.5, 2.0, ne)
    m = rand_orth(n, rng)
    nmat = rand_conditioned(n, rng, cond=10.0)
    e = m.T @ np.diag(d_e) @ nmat
    q = m.T @ np.diag(d_q) @ nmat
    jskew = rng.standard_normal((n, n))
    j = 0.5 * (jskew - jskew.T)
    g = rng.standard_normal((n, n)) / np.sqrt(n)
    r = g @ g.T
    return e, j, r, q


def random_lagrangian(rng, n, nonnegative=True, singular_l1=False):
    """Range representation of a Lagrangian subspace from a commuting pair."""
    u = rand_orth(n, rng)
    if nonnegative:
        c = rng.uniform(0.2, 1.5, n)
        s = rng.uniform(0.0, 1.5, n)
        if singular_l1:
            c[0] = 0.0
            s[0] = 1.0
    else:
        c = rng.uniform(0.2, 1.5, n)
        s = rng.uniform(-1.5, 1.5, n)
        if singular_l1:
            c[0] = 0.0
            s[0] = 1.0
    l1 = u @ np.diag(c) @ u.T
    l2 = u @ np.diag(s) @ u.T
    w = rand_conditioned(n, rng, cond=10.0)
    return l1 @ w, l2 @ w


def random_dissipative(rng, n, dirac=False):
    """Graph-type dissipative representation, disguised on the right."""
    jskew = rng.standard_normal((n, n))
    j = 0.5 * (jskew - jskew.T)
    if dirac:
        r = np.zeros((n, n))
    else:
        g = rng.standard_normal((n, n)) / np.sqrt(n)
        r = g @ g.T
    w = rand_conditioned(n, rng, cond=10.0)
    return w.copy(), (j - r) @ w
