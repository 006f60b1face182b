"""Stability classification and the restricted Lyapunov certificate."""

import numpy as np
import pytest

from pencilph.config import ToleranceConfig
from pencilph.errors import NotStable
from pencilph.pencil import MatrixPencil
from pencilph.stability import (check_stability, psd_lyapunov_solution,
                                solve_lyapunov_inequality)
from pencilph.subspace import compare_on
from recipes import assemble_pencil, rand_conditioned, stability_corpus

TOL = ToleranceConfig()
# Corpus pencils hide Jordan blocks behind random transforms; their zero
# eigenvalues split by ~sqrt(eps * cond) ~ 1e-7, so label-agreement tests
# need an axis band and clustering radius above that scale.
CORPUS_TOL = ToleranceConfig(atol=1e-6, rtol=1e-8)

JORDAN0 = MatrixPencil(np.eye(2), [[0.0, -1.0], [0.0, 0.0]])
SKEW = MatrixPencil(np.eye(2), [[0.0, 1.0], [-1.0, 0.0]])
INDEX1 = MatrixPencil(np.diag([1.0, 0.0]), np.diag([-1.0, 1.0]))


class TestCheckStability:
    def test_jordan_axis_block_unstable(self):
        verdict = check_stability(JORDAN0, TOL)
        assert verdict.classification == "unstable"
        sp = verdict.spectrum_report[0]
        assert (sp.algebraic, sp.geometric) == (2, 1)

    def test_skew_is_stable_not_asymptotic(self):
        verdict = check_stability(SKEW, TOL)
        assert verdict.classification == "stable"

    def test_index1_asymptotic(self):
        # explicit solution: x1(t) = exp(-t) x1(0), x2 = 0
        verdict = check_stability(INDEX1, TOL)
        assert verdict.classification == "asymptotically_stable"

    def test_singular_classification(self):
        p = MatrixPencil([[1.0, 0.0], [0.0, 0.0]], [[0.0, 1.0], [0.0, 0.0]])
        verdict = check_stability(p, TOL)
        assert verdict.classification == "singular"
        assert not verdict.is_stable

    def test_no_finite_dynamics(self):
        p = MatrixPencil([[0.0, 1.0], [0.0, 0.0]], np.eye(2))
        assert check_stability(p, TOL).classification == "asymptotically_stable"

    def test_right_half_plane(self):
        p = MatrixPencil(np.eye(2), np.diag([1.0, -1.0]))
        assert check_stability(p, TOL).classification == "unstable"


class TestLyapunovInequality:
    def test_scalar_ode(self):
        cert = solve_lyapunov_inequality(MatrixPencil(np.eye(2), -np.eye(2)), False, TOL)
        assert np.allclose(cert.x, 0.5 * np.eye(2))
        assert cert.residual_lyap == pytest.approx(-1.0)

    def test_skew_equality_case(self):
        cert = solve_lyapunov_inequality(SKEW, False, TOL)
        # any positive multiple of the identity certifies the rotation
        assert np.allclose(cert.x, cert.x[0, 0] * np.eye(2))
        assert cert.x[0, 0] > 0
        assert abs(cert.residual_lyap) <= 1e-12

    def test_index1_matches_hand_value(self):
        cert = solve_lyapunov_inequality(INDEX1, False, TOL)
        assert np.allclose(cert.x, np.diag([0.5, 0.0]))
        # restricted inequality evaluated on the basis vector e1 gives -1
        z = cert.system_space.basis
        form = z.T @ (INDEX1.a.T @ cert.x @ INDEX1.e
                      + INDEX1.e.T @ cert.x @ INDEX1.a) @ z
        assert form[0, 0] == pytest.approx(-1.0)

    def test_unstable_raises(self):
        with pytest.raises(NotStable):
            solve_lyapunov_inequality(JORDAN0, False, TOL)

    def test_strict_requires_asymptotic(self):
        with pytest.raises(NotStable):
            solve_lyapunov_inequality(SKEW, True, TOL)

    def test_equivalence_certificate_iff_stable(self, rng):
        """Certificate construction succeeds exactly when the spectral test
        passes, over labeled random pencils (the two clauses agree)."""
        corpus = stability_corpus(rng, 120)
        for pencil, expected in corpus:
            verdict = check_stability(pencil, CORPUS_TOL)
            assert verdict.classification == expected
            if verdict.is_stable:
                cert = solve_lyapunov_inequality(pencil, False, CORPUS_TOL)
                assert cert.pd_margin > 0
            else:
                with pytest.raises(NotStable):
                    solve_lyapunov_inequality(pencil, False, CORPUS_TOL)

    def test_certificate_soundness(self, rng):
        for pencil, expected in stability_corpus(rng, 60):
            if expected not in ("stable", "asymptotically_stable"):
                continue
            cert = solve_lyapunov_inequality(pencil, False, CORPUS_TOL)
            sub = cert.system_space
            e, a, x = pencil.e, pencil.a, cert.x
            lyap_form = a.T @ x @ e + e.T @ x @ a
            assert compare_on(np.zeros_like(x), lyap_form, sub, "geq", CORPUS_TOL)
            gram = e.T @ x @ e
            assert compare_on(gram, np.zeros_like(x), sub, "gt", CORPUS_TOL)
            assert cert.invariance_defect <= 1e-7
            bound = 1e-7 * (1 + np.linalg.norm(a) * np.linalg.norm(x) * np.linalg.norm(e))
            assert cert.residual_lyap <= bound

    def test_transform_equivariance(self, rng):
        for _ in range(15):
            pencil = assemble_pencil(rng, int(rng.integers(1, 4)), "stable",
                                     alpha=(1,), transform="conditioned")
            cert = solve_lyapunov_inequality(pencil, False, TOL)
            assert cert.pd_margin > 0
            s = rand_conditioned(pencil.n, rng, cond=20.0)
            t = rand_conditioned(pencil.n, rng, cond=20.0)
            moved = MatrixPencil(s @ pencil.e @ t, s @ pencil.a @ t)
            assert check_stability(moved, TOL).classification \
                == check_stability(pencil, TOL).classification
            cert2 = solve_lyapunov_inequality(moved, False, TOL)
            assert cert2.pd_margin > 0

    def test_strict_negative_definite_restriction(self, rng):
        for _ in range(10):
            pencil = assemble_pencil(rng, int(rng.integers(1, 5)), "asymptotic",
                                     alpha=(1,), transform="conditioned")
            cert = solve_lyapunov_inequality(pencil, True, TOL)
            scale = 1 + np.linalg.norm(pencil.a) + np.linalg.norm(cert.x)
            assert cert.residual_lyap <= -TOL.atol * scale


class TestPsdLyapunovSolution:
    def test_mixed_spectrum(self, rng):
        # strictly stable block plus a rotation: the solution must be
        # positive definite with zero derivative on the rotation part
        h = np.zeros((3, 3))
        h[0, 0] = -2.0
        h[1:, 1:] = [[0.0, 3.0], [-3.0, 0.0]]
        w = rand_conditioned(3, rng, cond=5.0)
        h = w @ h @ np.linalg.inv(w)
        m = psd_lyapunov_solution(h, TOL)
        assert np.linalg.eigvalsh(m)[0] > 0
        deriv = h.T @ m + m @ h
        assert np.linalg.eigvalsh(0.5 * (deriv + deriv.T))[-1] <= 1e-9

    def test_rejects_unstable(self):
        with pytest.raises(NotStable):
            psd_lyapunov_solution(np.array([[1.0]]), TOL)
