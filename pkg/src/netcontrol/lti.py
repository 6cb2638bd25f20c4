"""Dense LTI kernel: matrix exponential, controllability Gramian, output
controllability, minimum control energy and the input that realizes it.

The system is  x'(t) = A x(t) + B u(t),  y(t) = C x(t).  Drivers are single
wires (one nonzero per column of B) and C selects the controlled nodes.  The
expected steering cost over unit-variance random initial states is

    E = tr( C^T (C W C^T)^{-1} C e^{A t_f} e^{A^T t_f} ),

with W the controllability Gramian over [0, t_f]; the minimizing input is
u(t) = -B^T e^{A^T (t_f - t)} C^T (C W C^T)^{-1} C e^{A t_f} x0.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np
import scipy.linalg
from scipy.linalg import expm

CONDITION_LIMIT = 1e12
RANK_TOLERANCE = 1e-9


class UncontrollableError(RuntimeError):
    """The (A, B, C) triple is not output controllable, or C W C^T is too
    ill-conditioned to invert reliably."""

    def __init__(self, message: str, condition: float | None = None):
        super().__init__(message)
        self.condition = condition


@dataclass(frozen=True)
class ControlPlacement:
    """Driver-node and controlled-node selection plus the control horizon.

    drivers[m] is the node wired to input m (so B has a single 1 per column);
    controlled[k] is the node reported by output k (a single 1 per row of C).
    """

    drivers: tuple[int, ...]
    controlled: tuple[int, ...]
    t_f: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "drivers", tuple(int(v) for v in self.drivers))
        object.__setattr__(self, "controlled", tuple(int(v) for v in self.controlled))
        if len(set(self.drivers)) != len(self.drivers):
            raise ValueError("duplicate driver node")
        if len(set(self.controlled)) != len(self.controlled):
            raise ValueError("duplicate controlled node")
        if self.t_f <= 0:
            raise ValueError("t_f must be positive")

    def b_matrix(self, n: int) -> np.ndarray:
        b = np.zeros((n, len(self.drivers)))
        for col, v in enumerate(self.drivers):
            b[v, col] = 1.0
        return b

    def c_matrix(self, n: int) -> np.ndarray:
        c = np.zeros((len(self.controlled), n))
        for row, v in enumerate(self.controlled):
            c[row, v] = 1.0
        return c


def _as_matrix(a, name: str = "matrix") -> np.ndarray:
    m = np.asarray(a, dtype=float)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def mat_exp(a: np.ndarray, t: float = 1.0) -> np.ndarray:
    """e^(A t) by scaling-and-squaring with Pade approximants."""
    a = _as_matrix(a, "A")
    if a.shape[0] != a.shape[1]:
        raise ValueError("A must be square")
    return expm(a * t)


def gramian(a: np.ndarray, b: np.ndarray, t_f: float) -> np.ndarray:
    """Controllability Gramian W = int_0^tf e^(At) B B^T e^(A^T t) dt.

    Uses the block-exponential identity: with
    Z = exp(t_f [[A, BB^T], [0, -A^T]]), W = Z12 Z11^T to machine precision.
    """
    a = _as_matrix(a, "A")
    b = _as_matrix(b, "B")
    n = a.shape[0]
    if a.shape[1] != n or b.shape[0] != n:
        raise ValueError("A must be square and B must have matching rows")
    if t_f <= 0:
        raise ValueError("t_f must be positive")
    block = np.zeros((2 * n, 2 * n))
    block[:n, :n] = a
    block[:n, n:] = b @ b.T
    block[n:, n:] = -a.T
    z = expm(block * t_f)
    w = z[:n, n:] @ z[:n, :n].T
    return (w + w.T) / 2.0


def reachable_basis(a: np.ndarray, b: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of span{B, AB, A^2 B, ...}.

    Grown one Krylov step at a time with re-orthonormalization, which keeps
    long chains well-scaled where the raw block matrix would underflow.
    Column-pivoted QR makes the rank decision robust to zeroed-out columns.
    """
    n = a.shape[0]
    basis = np.zeros((n, 0))
    new = b.copy()
    while basis.shape[1] < n:
        if basis.shape[1]:
            new = new - basis @ (basis.T @ new)
            new = new - basis @ (basis.T @ new)  # second pass for stability
        q, r, _ = scipy.linalg.qr(new, mode="economic", pivoting=True)
        diag = np.abs(np.diag(r))
        scale = max(1.0, float(diag[0])) if diag.size else 1.0
        rank = int(np.sum(diag > tol * scale))
        if rank == 0:
            break
        q = q[:, :rank]
        basis = np.hstack([basis, q])
        new = a @ q
    return basis


def output_controllable(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> bool:
    """True iff rank [CB, CAB, ..., CA^(N-1)B] equals the output count.

    The rank is evaluated on C restricted to the reachable subspace, with
    tolerance 1e-9 times the largest column norm.
    """
    a = _as_matrix(a, "A")
    b = _as_matrix(b, "B")
    c = _as_matrix(c, "C")
    if a.shape[0] != a.shape[1] or b.shape[0] != a.shape[0] or c.shape[1] != a.shape[0]:
        raise ValueError("incompatible dimensions")
    if c.shape[0] == 0:
        return True
    k = c @ reachable_basis(a, b)
    if k.size == 0:
        return False
    scale = float(np.linalg.norm(k, axis=0).max())
    if scale == 0.0:
        return False
    rank = int(np.sum(np.linalg.svd(k, compute_uv=False) > RANK_TOLERANCE * scale))
    return rank == c.shape[0]


def _output_gram(a: np.ndarray, b: np.ndarray, c: np.ndarray, t_f: float) -> np.ndarray:
    """C W C^T with the controllability and conditioning preconditions."""
    if not output_controllable(a, b, c):
        raise UncontrollableError("(A, B, C) is not output controllable")
    w = gramian(a, b, t_f)
    g = c @ w @ c.T
    condition = float(np.linalg.cond(g))
    if not np.isfinite(condition) or condition >= CONDITION_LIMIT:
        raise UncontrollableError(
            f"C W C^T condition {condition:.3e} exceeds {CONDITION_LIMIT:.0e}",
            condition=condition,
        )
    return g


def control_cost_matrices(a: np.ndarray, b: np.ndarray, c: np.ndarray, t_f: float) -> float:
    """Expected minimum steering energy for dense (not necessarily 0/1) B, C."""
    a = _as_matrix(a, "A")
    b = _as_matrix(b, "B")
    c = _as_matrix(c, "C")
    g = _output_gram(a, b, c, t_f)
    y = c @ expm(a * t_f)
    return float(np.trace(np.linalg.solve(g, y @ y.T)))


def control_cost(a: np.ndarray, placement: ControlPlacement) -> float:
    """Expected minimum energy to steer the selected outputs to the origin."""
    a = _as_matrix(a, "A")
    n = a.shape[0]
    return control_cost_matrices(a, placement.b_matrix(n), placement.c_matrix(n), placement.t_f)


def optimal_input_function(
    a: np.ndarray, placement: ControlPlacement, x0: np.ndarray
) -> Callable[[float], np.ndarray]:
    """The minimum-energy input u(t) steering y(t_f) to the origin."""
    a = _as_matrix(a, "A")
    n = a.shape[0]
    b = placement.b_matrix(n)
    c = placement.c_matrix(n)
    t_f = placement.t_f
    x0 = np.asarray(x0, dtype=float).reshape(n)
    g = _output_gram(a, b, c, t_f)
    v = c.T @ np.linalg.solve(g, c @ (expm(a * t_f) @ x0))
    at = a.T

    def u(t: float) -> np.ndarray:
        return -b.T @ (expm(at * (t_f - t)) @ v)

    return u


def optimal_input(a: np.ndarray, placement: ControlPlacement, x0: np.ndarray, t: float) -> np.ndarray:
    """u(t) of the minimum-energy input at a single time 0 <= t <= t_f."""
    if not (0 <= t <= placement.t_f):
        raise ValueError("t must lie in [0, t_f]")
    return optimal_input_function(a, placement, x0)(t)


def simulate(
    a: np.ndarray,
    b: np.ndarray,
    u: Callable[[float], np.ndarray],
    x0: np.ndarray,
    t_f: float,
    steps: int = 1000,
    return_trajectory: bool = False,
):
    """Fixed-step RK4 integration of x' = Ax + Bu(t) over [0, t_f].

    Returns x(t_f), or (times, states) when return_trajectory is set.
    """
    a = _as_matrix(a, "A")
    b = _as_matrix(b, "B")
    if t_f <= 0:
        raise ValueError("t_f must be positive")
    steps = max(int(steps), 1000)
    h = t_f / steps
    x = np.asarray(x0, dtype=float).reshape(a.shape[0]).copy()
    times = [0.0]
    states = [x.copy()]
    u_left = np.asarray(u(0.0), dtype=float)
    for k in range(steps):
        t = k * h
        u_mid = np.asarray(u(t + h / 2), dtype=float)
        u_right = np.asarray(u(t + h), dtype=float)
        k1 = a @ x + b @ u_left
        k2 = a @ (x + h / 2 * k1) + b @ u_mid
        k3 = a @ (x + h / 2 * k2) + b @ u_mid
        k4 = a @ (x + h * k3) + b @ u_right
        x = x + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        u_left = u_right
        if return_trajectory:
            times.append((k + 1) * h)
            states.append(x.copy())
    if return_trajectory:
        return np.array(times), np.array(states)
    return x


def drive_to_origin(
    a: np.ndarray, placement: ControlPlacement, x0: np.ndarray, steps: int = 2000
) -> tuple[np.ndarray, float, float]:
    """Simulate the optimal input; report (x(t_f), output residual, energy).

    residual = ||C x(t_f)|| / ||C x0||, energy = int_0^tf u^T u dt by
    composite Simpson on the integration grid.
    """
    a = _as_matrix(a, "A")
    n = a.shape[0]
    x0 = np.asarray(x0, dtype=float).reshape(n)
    c = placement.c_matrix(n)
    u = optimal_input_function(a, placement, x0)
    x_f = simulate(a, placement.b_matrix(n), u, x0, placement.t_f, steps=steps)
    y0 = float(np.linalg.norm(c @ x0))
    residual = float(np.linalg.norm(c @ x_f)) / y0 if y0 > 0 else 0.0
    m = 2 * max(int(steps), 2)  # even Simpson panel count
    h = placement.t_f / m
    vals = np.array([float(np.dot(u(i * h), u(i * h))) for i in range(m + 1)])
    weights = np.ones(m + 1)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    energy = float(h / 3 * np.dot(weights, vals))
    return x_f, residual, energy


@lru_cache(maxsize=None)
def chain_control_cost(length: int, t_f: float = 2.0) -> float:
    """Single-driver cost of a unit-weight directed chain of `length` nodes.

    Exact rational arithmetic: the chain's A is nilpotent, so e^(At) is a
    polynomial and W, e^(A t_f) have closed-form rational entries.  This
    stays accurate far past the point where the floating-point Gramian
    becomes numerically singular (costs grow like 1e16 by length 10).
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    tf = Fraction(t_f)
    fact = [Fraction(1)] * (length + 1)
    for i in range(1, length + 1):
        fact[i] = fact[i - 1] * i
    w = [
        [tf ** (i + j + 1) / ((i + j + 1) * fact[i] * fact[j]) for j in range(length)]
        for i in range(length)
    ]
    x = [
        [tf ** (i - j) / fact[i - j] if i >= j else Fraction(0) for j in range(length)]
        for i in range(length)
    ]
    y = [[sum(x[i][k] * x[j][k] for k in range(length)) for j in range(length)] for i in range(length)]
    # Solve W Z = Y by exact Gauss-Jordan; the answer is tr(Z).
    aug = [row[:] + y[i][:] for i, row in enumerate(w)]
    size = length
    for col in range(size):
        pivot = next(r for r in range(col, size) if aug[r][col] != 0)
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for r in range(size):
            if r != col and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [v - factor * p for v, p in zip(aug[r], aug[col])]
    trace = sum(aug[i][size + i] for i in range(size))
    return float(trace)
