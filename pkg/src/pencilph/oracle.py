"""Independent verification helpers: closed-form simulation and exact checks.

``simulate`` produces trajectories of d/dt(E x) = A x through the
decomposed coordinates (matrix exponential on the finite part, zero on the
nilpotent part), which is what the property tests compare certificates
against.  ``exact_regularity`` decides regularity of integer pencils in
fraction arithmetic, independent of every floating-point rank decision.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.linalg as sla

from .config import DEFAULT_TOL, ToleranceConfig
from .errors import InvalidInput, SingularPencil
from .pencil import MatrixPencil, quasi_kronecker

__all__ = [
    "Trajectory",
    "simulate",
    "simulate_closed_loop",
    "check_energy_decay",
    "exact_regularity",
]


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution: x(t) per row of ``states``, optional inputs."""

    times: np.ndarray
    states: np.ndarray
    inputs: np.ndarray | None = None

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        states = np.asarray(self.states, dtype=float)
        if times.ndim != 1 or states.ndim != 2 or states.shape[0] != times.size:
            raise InvalidInput("times and states lengths differ")
        if not (np.all(np.isfinite(times)) and np.all(np.diff(times) > 0)):
            raise InvalidInput("times must be finite and strictly increasing")
        if not np.all(np.isfinite(states)):
            raise InvalidInput("states contain non-finite entries")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)
        if self.inputs is not None:
            inputs = np.asarray(self.inputs, dtype=float)
            if inputs.shape[0] != times.size:
                raise InvalidInput("inputs length differs from times")
            object.__setattr__(self, "inputs", inputs)

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.linalg.norm(self.states, axis=1)))


def simulate(p: MatrixPencil, x0, horizon: float, samples: int,
             tol: ToleranceConfig = DEFAULT_TOL) -> Trajectory:
    """Closed-form homogeneous solution from an admissible initial state.

    In decomposed coordinates the finite part evolves by the matrix
    exponential and the nilpotent part stays zero; the initial state must be
    in the system space up to a 1e-8 relative defect.
    """
    qkf = quasi_kronecker(p, tol)
    if not qkf.regular:
        raise SingularPencil("simulation requires a regular pencil")
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if x0.size != p.n:
        raise InvalidInput(f"x0 must have length {p.n}")
    if samples < 2 or horizon <= 0:
        raise InvalidInput("need horizon > 0 and at least two samples")
    n0 = qkf.n0
    z0 = np.linalg.solve(qkf.t, x0)
    tail = np.linalg.norm(z0[n0:])
    if tail > 1e-8 * (1.0 + np.linalg.norm(z0)):
        raise InvalidInput(
            f"x0 is not in the system space (nilpotent coordinates {tail:.3e})")
    times = np.linspace(0.0, horizon, samples)
    states = np.zeros((samples, p.n))
    if n0:
        t_fin = qkf.t[:, :n0]
        step = sla.expm(qkf.a0 * (times[1] - times[0]))
        zf = z0[:n0]
        for i in range(samples):
            states[i] = t_fin @ zf
            zf = step @ zf
    return Trajectory(times, states)


def simulate_closed_loop(e, a, b, k_gain, x0, horizon: float, samples: int,
                         tol: ToleranceConfig = DEFAULT_TOL) -> Trajectory:
    """Trajectory of the state feedback loop u = K x (substituted beforehand)."""
    a_cl = np.asarray(a, dtype=float) + np.asarray(b, dtype=float) @ np.asarray(k_gain, dtype=float)
    traj = simulate(MatrixPencil(e, a_cl), x0, horizon, samples, tol)
    inputs = traj.states @ np.asarray(k_gain, dtype=float).T
    return Trajectory(traj.times, traj.states, inputs)


def check_energy_decay(traj: Trajectory, e, q, tol: ToleranceConfig = DEFAULT_TOL):
    """Monotonicity report for H(x) = x^T Q^T E x along a trajectory.

    ``monotone`` holds when every forward difference stays below
    ``tol.rtol * (1 + |H|)``; ``max_increase`` is the worst difference.
    """
    e = np.asarray(e, dtype=float)
    q = np.asarray(q, dtype=float)
    gram = q.T @ e
    vals = np.einsum("ij,jk,ik->i", traj.states, gram, traj.states)
    diffs = np.diff(vals)
    bounds = tol.rtol * (1.0 + np.abs(vals[:-1]))
    max_increase = float(np.max(diffs, initial=0.0))
    monotone = bool(np.all(diffs <= bounds))
    return {"monotone": monotone, "max_increase": max_increase}


def _to_fraction(value):
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, (float, np.floating)):
        if float(value).is_integer():
            return Fraction(int(value))
        raise InvalidInput(f"entry {value!r} is not exactly representable")
    raise InvalidInput(f"entry {value!r} is not exactly representable")


def _fraction_det(rows):
    """Determinant by fraction-exact Gaussian elimination with pivoting."""
    n = len(rows)
    mat = [row[:] for row in rows]
    det = Fraction(1)
    for col in range(n):
        pivot = None
        for r in range(col, n):
            if mat[r][col] != 0:
                pivot = r
                break
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            mat[col], mat[pivot] = mat[pivot], mat[col]
            det = -det
        det *= mat[col][col]
        inv = Fraction(1) / mat[col][col]
        for r in range(col + 1, n):
            factor = mat[r][col] * inv
            if factor:
                mat[r] = [mr - factor * mc for mr, mc in zip(mat[r], mat[col])]
    return det


def exact_regularity(e, a) -> bool:
    """Regularity of an integer/rational pencil decided in exact arithmetic.

    Evaluates det(s E - A) at n + 1 integer points; a polynomial of degree
    at most n vanishing at all of them is identically zero.  Capped at
    n <= 8 (desk-scale cross-checks only).
    """
    e = np.atleast_2d(np.asarray(e, dtype=object))
    a = np.atleast_2d(np.asarray(a, dtype=object))
    if e.shape != a.shape or e.shape[0] != e.shape[1]:
        raise InvalidInput("E and A must be square with equal shapes")
    n = e.shape[0]
    if n > 8:
        raise InvalidInput("exact regularity is capped at n <= 8")
    ef = [[_to_fraction(e[i, j]) for j in range(n)] for i in range(n)]
    af = [[_to_fraction(a[i, j]) for j in range(n)] for i in range(n)]
    for s in range(n + 1):
        rows = [[Fraction(s) * ef[i][j] - af[i][j] for j in range(n)] for i in range(n)]
        if _fraction_det(rows) != 0:
            return True
    return False
