"""Implicit reaction-diffusion half step on a fixed moving-support grid.

One backward Euler step of ``u_t - u u_xx = m u^(q+1)`` with P1 elements and
a lumped (diagonal) mass quadrature.  The diffusion coefficient is frozen at
the incoming field and the source is linearized: ``m q u^q`` of it acts
implicitly on the new values while the remaining ``m (1-q) u^(q+1)`` stays
explicit.  Under the step restriction ``m q dt |u|_inf^q < 1`` the resulting
tridiagonal matrix is a strictly diagonally dominant M-matrix, so the new
values exist, are unique and stay nonnegative, and nodes where the incoming
field vanishes decouple and remain exactly zero: this half step never
enlarges the support.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        def wrap(fn):
            return fn
        return wrap

from .mesh import MovingGrid, NodalField

__all__ = [
    "lumped_weights",
    "lumped_inner_product",
    "existence_condition",
    "assemble",
    "solve",
    "parabolic_step",
    "TridiagonalSystem",
]


def lumped_weights(grid: MovingGrid) -> np.ndarray:
    """Diagonal quadrature weight per node: half the width of its two cells.

    Equals the exact integral of each nodal hat function, i.e.
    ``(h_minus + h)/2`` at the leftmost node, ``h`` inside, and
    ``(h + h_plus)/2`` at the rightmost node.  A grid with a single interior
    node gets the merged weight ``(h_minus + h_plus)/2``.
    """
    n = grid.num_nodes
    if n == 1:
        return np.array([0.5 * (grid.h_minus + grid.h_plus)])
    w = np.full(n, grid.h)
    w[0] = 0.5 * (grid.h_minus + grid.h)
    w[-1] = 0.5 * (grid.h + grid.h_plus)
    return w


def lumped_inner_product(a: NodalField, b: NodalField) -> float:
    """Lumped scalar product sum(w_i a_i b_i); both fields share one grid."""
    if a.grid != b.grid:
        raise ValueError("lumped inner product requires both fields on the same grid")
    return float(np.sum(lumped_weights(a.grid) * a.values * b.values))


def existence_condition(field_half: NodalField, dt: float, m: float, q: float) -> bool:
    """True iff ``m q dt |u|_inf^q < 1`` (solvability of the implicit step)."""
    sup = field_half.sup_norm()
    return bool(m * q * dt * sup**q < 1.0)


@dataclass(frozen=True)
class TridiagonalSystem:
    """Tridiagonal linear system for the implicit step, rows indexed by node.

    ``lower[k-1]``, ``diag[k]``, ``upper[k]`` are the coefficients of
    ``u_{k-1}``, ``u_k``, ``u_{k+1}`` in row k.  The main diagonal is
    strictly positive, the off-diagonals are nonpositive and every row is
    strictly diagonally dominant, which is what guarantees a unique
    nonnegative solution for a nonnegative right-hand side.
    """

    grid: MovingGrid
    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray
    rhs: np.ndarray

    def __post_init__(self) -> None:
        n = self.diag.size
        if self.rhs.size != n or self.lower.size != n - 1 or self.upper.size != n - 1:
            raise ValueError("inconsistent tridiagonal band sizes")
        if n != self.grid.num_nodes:
            raise ValueError("system size does not match the grid")

    def dense(self) -> np.ndarray:
        """Dense matrix form (for oracles and debugging)."""
        a = np.diag(self.diag)
        if self.diag.size > 1:
            a += np.diag(self.lower, -1) + np.diag(self.upper, 1)
        return a


def assemble(field_half: NodalField, dt: float, m: float, q: float) -> TridiagonalSystem:
    """Build the implicit-step system from the post-propagation field.

    Row k reads ``(1 - m q dt u_k^q) u_k(new) + diffusion_k = u_k +
    m (1-q) dt u_k^(q+1)`` where the diffusion stencil is
    ``(dt/h^2) u_k (2 u_k(new) - u_{k-1}(new) - u_{k+1}(new))`` inside and
    uses the end-interval widths in the two boundary rows.  On a grid with a
    single interior node the two boundary diffusion terms are summed on the
    one row.  Raises if the existence condition fails.
    """
    if not (0.0 < q < 1.0):
        raise ValueError(f"exponent q must lie in (0, 1), got {q}")
    if not existence_condition(field_half, dt, m, q):
        raise ValueError(
            "existence condition violated: "
            f"m*q*dt*|u|^q = {m * q * dt * field_half.sup_norm() ** q} >= 1"
        )
    g = field_half.grid
    u = field_half.values
    h = g.h
    n = u.size

    uq = u**q
    diag = 1.0 - m * q * dt * uq
    rhs = u + m * (1.0 - q) * dt * uq * u
    lower = np.zeros(max(n - 1, 0))
    upper = np.zeros(max(n - 1, 0))

    if n == 1:
        diag = diag + (dt / h) * u * (2.0 / g.h_minus + 2.0 / g.h_plus)
    else:
        c = dt / h**2
        diag[1:-1] += 2.0 * c * u[1:-1]
        lower[:-1] = -c * u[1:-1]
        upper[1:] = -c * u[1:-1]
        diag[0] += (dt / h) * u[0] * (2.0 / g.h_minus)
        upper[0] = -(dt / h) * u[0] * (2.0 / (g.h_minus + h))
        diag[-1] += (dt / h) * u[-1] * (2.0 / g.h_plus)
        lower[-1] = -(dt / h) * u[-1] * (2.0 / (h + g.h_plus))

    # Dominance must hold row by row when the existence condition does;
    # failure here means the assembly itself is wrong.
    off = np.zeros(n)
    if n > 1:
        off[:-1] += np.abs(upper)
        off[1:] += np.abs(lower)
    if np.any(diag - off <= 0.0):
        raise RuntimeError("assembled system is not strictly diagonally dominant")

    return TridiagonalSystem(grid=g, lower=lower, diag=diag, upper=upper, rhs=rhs)


@njit(cache=True)
def _thomas(lower, diag, upper, rhs):
    # Single-pass elimination without pivoting; safe under strict diagonal
    # dominance.  With nonpositive off-diagonals and nonnegative rhs every
    # intermediate quantity keeps its sign, so the result is nonnegative
    # in floating point as well.
    n = diag.size
    cp = np.empty(n - 1)
    x = np.empty(n)
    beta = diag[0]
    if beta == 0.0:
        raise ZeroDivisionError("zero pivot in tridiagonal elimination")
    x[0] = rhs[0] / beta
    for i in range(1, n):
        cp[i - 1] = upper[i - 1] / beta
        beta = diag[i] - lower[i - 1] * cp[i - 1]
        if beta == 0.0:
            raise ZeroDivisionError("zero pivot in tridiagonal elimination")
        x[i] = (rhs[i] - lower[i - 1] * x[i - 1]) / beta
    for i in range(n - 2, -1, -1):
        x[i] -= cp[i] * x[i + 1]
    return x


def solve(system: TridiagonalSystem) -> NodalField:
    """Solve the tridiagonal system; the solution is a field on its grid."""
    if system.diag.size == 1:
        x = system.rhs / system.diag
    else:
        x = _thomas(system.lower, system.diag, system.upper, system.rhs)
    return NodalField(system.grid, x)


def parabolic_step(field_half: NodalField, dt: float, m: float, q: float) -> NodalField:
    """One implicit reaction-diffusion step; same grid and support."""
    return solve(assemble(field_half, dt, m, q))
