"""Backend parity and correctness of the Sylvester back-substitution kernel."""

import numpy as np
import pytest
import scipy.linalg as sla

from pencilph._kernels import available_backends, backend_name
from pencilph._kernels.sylvester_py import quasi_block_starts
from pencilph.errors import SpectrumClash

BACKENDS = available_backends()


def schur_factor(mat):
    return sla.schur(np.asarray(mat, dtype=float), output="real")[0]


def test_compiled_backend_built():
    # the build is expected to produce the extension in this environment
    assert "compiled" in BACKENDS
    assert backend_name() in BACKENDS


def test_block_starts_detects_complex_pairs():
    t = schur_factor([[0.0, 2.0], [-2.0, 0.0]])
    assert quasi_block_starts(t) == [0]
    t = schur_factor(np.diag([1.0, 2.0, 3.0]))
    assert quasi_block_starts(t) == [0, 1, 2]


@pytest.mark.parametrize("backend", sorted(BACKENDS))
@pytest.mark.parametrize("transa,transb,sign", [
    (False, False, 1), (False, False, -1),
    (True, False, 1), (True, False, -1),
    (False, True, 1), (False, True, -1),
    (True, True, 1), (True, True, -1),
])
def test_residual_all_modes(backend, transa, transb, sign, rng):
    solver = BACKENDS[backend]
    for _ in range(20):
        m, n = rng.integers(1, 9, 2)
        # shift spectra apart so no sign combination clashes
        ta = schur_factor(rng.standard_normal((m, m)) + 6.0 * np.eye(m))
        tb = schur_factor(rng.standard_normal((n, n)) + 2.0 * np.eye(n))
        c = rng.standard_normal((m, n))
        x = solver(ta, tb, c, transa=transa, transb=transb, sign=sign)
        op_a = ta.T if transa else ta
        op_b = tb.T if transb else tb
        resid = np.linalg.norm(op_a @ x + sign * x @ op_b - c)
        assert resid <= 1e-10 * (1.0 + np.linalg.norm(x)) * (1 + np.linalg.norm(ta) + np.linalg.norm(tb))


@pytest.mark.skipif("compiled" not in BACKENDS, reason="extension not built")
def test_backend_parity(rng):
    for _ in range(40):
        m, n = rng.integers(1, 10, 2)
        ta = schur_factor(rng.standard_normal((m, m)) + 5.0 * np.eye(m))
        tb = schur_factor(rng.standard_normal((n, n)))
        c = rng.standard_normal((m, n))
        x_py = BACKENDS["python"](ta, tb, c, transa=True, transb=False, sign=1)
        x_c = BACKENDS["compiled"](ta, tb, c, transa=True, transb=False, sign=1)
        assert np.allclose(x_py, x_c, atol=1e-12, rtol=1e-10)


@pytest.mark.parametrize("backend", sorted(BACKENDS))
def test_matches_scipy_sylvester(backend, rng):
    solver = BACKENDS[backend]
    for _ in range(10):
        m, n = rng.integers(2, 7, 2)
        a = rng.standard_normal((m, m)) + 4.0 * np.eye(m)
        b = rng.standard_normal((n, n))
        c = rng.standard_normal((m, n))
        ta, ua = sla.schur(a, output="real")
        tb, ub = sla.schur(b, output="real")
        y = solver(ta, tb, ua.T @ c @ ub, transa=False, transb=False, sign=-1)
        x = ua @ y @ ub.T
        x_ref = sla.solve_sylvester(a, -b, c)
        assert np.allclose(x, x_ref, atol=1e-9, rtol=1e-8)


@pytest.mark.parametrize("backend", sorted(BACKENDS))
def test_spectrum_clash_raises(backend):
    solver = BACKENDS[backend]
    ta = np.array([[1.0]])
    tb = np.array([[-1.0]])
    with pytest.raises(SpectrumClash):
        solver(ta, tb, np.array([[1.0]]), transa=False, transb=False, sign=1)


@pytest.mark.parametrize("backend", sorted(BACKENDS))
def test_empty_dimensions(backend):
    solver = BACKENDS[backend]
    x = solver(np.zeros((0, 0)), np.eye(2), np.zeros((0, 2)),
               transa=False, transb=False, sign=1)
    assert x.shape == (0, 2)
