"""Quasi-Kronecker decomposition, regularity, spectrum, index, system space."""

import numpy as np
import pytest

from exact_oracles import det_interpolation_regular
from pencilph.config import ToleranceConfig
from pencilph.errors import InvalidInput, SingularPencil
from pencilph.pencil import (DescriptorSystem, MatrixPencil, canonical_blocks,
                             index_of, is_regular, quasi_kronecker, spectrum,
                             system_space)
from pencilph.subspace import Subspace
from recipes import assemble_pencil, rand_conditioned, rand_orth

TOL = ToleranceConfig()

NILPOTENT2 = MatrixPencil([[0.0, 1.0], [0.0, 0.0]], np.eye(2))
SINGULAR2 = MatrixPencil([[1.0, 0.0], [0.0, 0.0]], [[0.0, 1.0], [0.0, 0.0]])
INDEX1 = MatrixPencil(np.diag([1.0, 0.0]), np.diag([-1.0, 1.0]))
JORDAN0 = MatrixPencil(np.eye(2), [[0.0, -1.0], [0.0, 0.0]])


class TestTypes:
    def test_shape_mismatch(self):
        with pytest.raises(InvalidInput):
            MatrixPencil(np.eye(2), np.eye(3))

    def test_nonsquare(self):
        with pytest.raises(InvalidInput):
            MatrixPencil(np.zeros((2, 3)), np.zeros((2, 3)))

    def test_descriptor_column_vector_b(self):
        d = DescriptorSystem(np.eye(2), np.eye(2), [1.0, 0.0])
        assert d.b.shape == (2, 1)
        assert d.k == 1

    def test_descriptor_empty_b_rejected(self):
        with pytest.raises(InvalidInput):
            DescriptorSystem(np.eye(2), np.eye(2), np.zeros((2, 0)))


class TestQuasiKronecker:
    def test_plain_ode(self):
        qkf = quasi_kronecker(MatrixPencil(np.eye(2), np.diag([-1.0, -2.0])), TOL)
        assert qkf.n0 == 2 and qkf.alpha == () and qkf.beta == () and qkf.gamma == ()
        assert np.allclose(qkf.a0, np.diag([-1.0, -2.0]))

    def test_nilpotent_block(self):
        qkf = quasi_kronecker(NILPOTENT2, TOL)
        assert qkf.n0 == 0 and qkf.alpha == (2,)

    def test_singular_structure(self):
        qkf = quasi_kronecker(SINGULAR2, TOL)
        assert (qkf.n0, qkf.alpha, qkf.beta, qkf.gamma) == (0, (), (2,), (1,))

    def test_block_layout_covers_everything(self):
        qkf = quasi_kronecker(SINGULAR2, TOL)
        rows = sum(entry.rows[1] - entry.rows[0] for entry in qkf.block_layout)
        cols = sum(entry.cols[1] - entry.cols[0] for entry in qkf.block_layout)
        assert rows == cols == 2
        kinds = [entry.kind for entry in qkf.block_layout]
        assert kinds == ["singular_col", "singular_row"]

    def test_zero_size_singular_blocks_recorded(self):
        qkf = quasi_kronecker(MatrixPencil(np.zeros((2, 2)), np.zeros((2, 2))), TOL)
        assert qkf.beta == (1, 1) and qkf.gamma == (1, 1)
        col_sizes = [e.cols[1] - e.cols[0] for e in qkf.block_layout
                     if e.kind == "singular_col"]
        row_sizes = [e.rows[1] - e.rows[0] for e in qkf.block_layout
                     if e.kind == "singular_row"]
        assert col_sizes == [1, 1] and row_sizes == [1, 1]

    def test_reconstruction_bound(self):
        qkf = quasi_kronecker(SINGULAR2, TOL)
        e_can, a_can = canonical_blocks(qkf.n0, qkf.a0, qkf.alpha, qkf.beta, qkf.gamma)
        lhs_e = qkf.s @ SINGULAR2.e @ qkf.t
        lhs_a = qkf.s @ SINGULAR2.a @ qkf.t
        resid = np.linalg.norm(lhs_e - e_can) + np.linalg.norm(lhs_a - a_can)
        assert resid <= 1e-7 * 3.0 * qkf.cond_s * qkf.cond_t
        assert resid == pytest.approx(qkf.residual, abs=1e-12)

    def test_round_trip_random_recipes(self, rng):
        count = 0
        for trial in range(500):
            n0 = int(rng.integers(0, 4))
            nb = int(rng.integers(0, 3))
            alpha = tuple(sorted(rng.integers(1, 4, rng.integers(0, 3)).tolist(),
                                 reverse=True))
            beta = tuple(sorted(rng.integers(1, 4, nb).tolist(), reverse=True))
            gamma = tuple(sorted(rng.integers(1, 4, nb).tolist(), reverse=True))
            a0 = rng.standard_normal((n0, n0))
            e_c, a_c = canonical_blocks(n0, a0, alpha, beta, gamma)
            n = e_c.shape[0]
            if n == 0 or n > 8:
                continue
            count += 1
            s = rand_conditioned(n, rng)
            t = rand_conditioned(n, rng)
            p = MatrixPencil(s @ e_c @ t, s @ a_c @ t)
            qkf = quasi_kronecker(p, TOL)
            assert qkf.n0 == n0
            assert qkf.alpha == alpha
            assert sorted(qkf.beta) == sorted(beta)
            assert sorted(qkf.gamma) == sorted(gamma)
            e_can, a_can = canonical_blocks(qkf.n0, qkf.a0, qkf.alpha,
                                            qkf.beta, qkf.gamma)
            s_inv = np.linalg.inv(qkf.s)
            t_inv = np.linalg.inv(qkf.t)
            bound = 1e-6 * (np.linalg.norm(p.e) + np.linalg.norm(p.a) + 1) \
                * qkf.cond_s ** 2 * qkf.cond_t ** 2
            assert np.linalg.norm(s_inv @ e_can @ t_inv - p.e) <= bound
            assert np.linalg.norm(s_inv @ a_can @ t_inv - p.a) <= bound
        assert count >= 300


class TestIsRegular:
    def test_identity(self):
        assert is_regular(MatrixPencil(np.eye(2), np.zeros((2, 2))), TOL)

    def test_singular_example(self):
        assert not is_regular(SINGULAR2, TOL)

    def test_jordan_case(self):
        assert is_regular(JORDAN0, TOL)

    def test_matches_interpolation_oracle(self, rng):
        agree = 0
        for _ in range(60):
            n = int(rng.integers(1, 5))
            e = rng.integers(-3, 4, (n, n))
            a = rng.integers(-3, 4, (n, n))
            expected = det_interpolation_regular(e, a)
            got = is_regular(MatrixPencil(e.astype(float), a.astype(float)), TOL)
            assert got == expected
            agree += 1
        assert agree == 60


class TestSpectrum:
    def test_diagonal(self):
        points = spectrum(MatrixPencil(np.eye(2), np.diag([-1.0, -2.0])), TOL)
        assert [(sp.eigenvalue, sp.algebraic, sp.geometric, sp.semi_simple)
                for sp in points] == [(-2, 1, 1, True), (-1, 1, 1, True)]

    def test_index1_single_eigenvalue(self):
        points = spectrum(INDEX1, TOL)
        assert len(points) == 1
        assert points[0].eigenvalue == -1
        assert points[0].semi_simple

    def test_jordan_block_detected(self):
        points = spectrum(JORDAN0, TOL)
        assert len(points) == 1
        sp = points[0]
        assert sp.eigenvalue == 0 and sp.algebraic == 2 and sp.geometric == 1
        assert not sp.semi_simple

    def test_singular_raises(self):
        with pytest.raises(SingularPencil):
            spectrum(SINGULAR2, TOL)

    def test_invariant_under_equivalence(self, rng):
        for _ in range(20):
            p = assemble_pencil(rng, int(rng.integers(1, 5)), "stable",
                                alpha=(1,), transform="none")
            base = spectrum(p, TOL)
            s = rand_conditioned(p.n, rng, cond=50.0)
            t = rand_conditioned(p.n, rng, cond=50.0)
            moved = spectrum(MatrixPencil(s @ p.e @ t, s @ p.a @ t), TOL)
            assert len(base) == len(moved)
            key = lambda sp: (round(sp.eigenvalue.real, 6), round(sp.eigenvalue.imag, 6))
            for b, m in zip(sorted(base, key=key), sorted(moved, key=key)):
                assert abs(b.eigenvalue - m.eigenvalue) <= 1e-6 * (1 + abs(b.eigenvalue))
                assert (b.algebraic, b.geometric) == (m.algebraic, m.geometric)


class TestIndex:
    @pytest.mark.parametrize("a", [np.zeros((2, 2)), np.diag([-1.0, 3.0])])
    def test_ode_index_zero(self, a):
        assert index_of(MatrixPencil(np.eye(2), a), TOL) == 0

    def test_index_one(self):
        assert index_of(INDEX1, TOL) == 1

    def test_index_two(self):
        assert index_of(NILPOTENT2, TOL) == 2


class TestSystemSpace:
    def test_full_for_ode(self):
        sub = system_space(MatrixPencil(np.eye(2), np.diag([-1.0, -2.0])), TOL)
        assert sub.dim == 2

    def test_algebraic_constraint(self):
        sub = system_space(INDEX1, TOL)
        assert sub.dim == 1
        assert sub.contains([1.0, 0.0])

    def test_singular_free_directions(self):
        sub = system_space(SINGULAR2, TOL)
        assert sub.dim == 2

    def test_transform_equivariance(self, rng):
        for _ in range(15):
            p = assemble_pencil(rng, int(rng.integers(1, 4)), "asymptotic",
                                alpha=(2,), transform="conditioned")
            base = system_space(p, TOL)
            s = rand_orth(p.n, rng)
            t = rand_orth(p.n, rng)
            moved = system_space(MatrixPencil(s @ p.e @ t, s @ p.a @ t), TOL)
            expected = Subspace.from_span(t.T @ base.basis)
            assert moved.dim == base.dim
            assert moved.is_same(expected, angle_tol=1e-7)


def test_empty_pencil():
    qkf = quasi_kronecker(MatrixPencil(np.zeros((0, 0)), np.zeros((0, 0))), TOL)
    assert qkf.n0 == 0 and qkf.regular
