"""Moving-support piecewise-linear meshes on the line.

The computational support is an interval [-s_minus, s_plus] discretized by a
uniform interior step ``h`` plus two variable end intervals whose widths stay
in ``[h, 2h)``.  Interior nodes sit at ``x_i = i*h``; the two support
endpoints are not nodes, and every field represented on such a grid is
continuous, piecewise linear and identically zero outside the support, so
only interior node values are stored.

Fronts only ever move outward here, so a grid update may insert at most one
new node per side; the end-interval widths absorb the fractional remainder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MovingGrid",
    "NodalField",
    "SlopeField",
    "build_initial_grid",
    "regrid",
    "interpolate",
]

# Absolute snap tolerance (in units of h) for deciding that a support
# endpoint sits exactly on a node; avoids duplicate node insertion from
# roundoff when a front lands on a multiple of h.
FRONT_SNAP = 2.0 ** -40

_REL_TOL = 1e-9


def _front_index(s: float, h: float) -> int:
    """Number of mesh cells fully to one side of the origin for endpoint s.

    Greatest integer ``n`` with ``n*h <= s``, snapped to the nearest integer
    when ``s/h`` is within FRONT_SNAP of it.  The resulting end-interval
    width ``s - (n-1)h`` then lies in ``[h, 2h)`` up to the snap tolerance.
    """
    ratio = s / h
    nearest = round(ratio)
    if abs(ratio - nearest) <= FRONT_SNAP:
        return int(nearest)
    return int(math.floor(ratio))


@dataclass(frozen=True)
class MovingGrid:
    """Uniform-step grid with two variable end intervals.

    Attributes
    ----------
    h : float
        Uniform interior mesh width.
    s_minus, s_plus : float
        Distances from the origin to the left/right support endpoints
        (both positive; the support is ``(-s_minus, s_plus)``).
    n_minus, n_plus : int
        Cell counts toward each endpoint; interior nodes are ``x_i = i*h``
        for ``-n_minus + 1 <= i <= n_plus - 1``.
    h_minus, h_plus : float
        End-interval widths ``s - (n - 1)*h``, each in ``[h, 2h)``.
    """

    h: float
    s_minus: float
    s_plus: float
    n_minus: int
    n_plus: int
    h_minus: float
    h_plus: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.h) and self.h > 0.0):
            raise ValueError(f"mesh width must be positive, got h={self.h}")
        for name, s, n, he in (
            ("left", self.s_minus, self.n_minus, self.h_minus),
            ("right", self.s_plus, self.n_plus, self.h_plus),
        ):
            if not (np.isfinite(s) and s > 0.0):
                raise ValueError(f"{name} support endpoint must be positive, got {s}")
            if n < 1:
                raise ValueError(
                    f"{name} endpoint {s} is closer than one cell to the origin (h={self.h})"
                )
            if abs(he - (s - (n - 1) * self.h)) > _REL_TOL * self.h:
                raise ValueError(f"inconsistent {name} end-interval width {he}")
            if not (self.h * (1.0 - _REL_TOL) <= he < 2.0 * self.h * (1.0 + _REL_TOL)):
                raise ValueError(
                    f"{name} end-interval width {he} outside [h, 2h) for h={self.h}"
                )

    @property
    def num_nodes(self) -> int:
        """Number of interior nodes."""
        return self.n_minus + self.n_plus - 1

    def nodes(self) -> np.ndarray:
        """Coordinates of the interior nodes, left to right."""
        return np.arange(1 - self.n_minus, self.n_plus) * self.h

    def breakpoints(self) -> np.ndarray:
        """All breakpoints: left endpoint, interior nodes, right endpoint."""
        return np.concatenate(([-self.s_minus], self.nodes(), [self.s_plus]))

    def interval_widths(self) -> np.ndarray:
        """Widths of the ``num_nodes + 1`` intervals, left end to right end."""
        return np.concatenate(
            ([self.h_minus], np.full(self.num_nodes - 1, self.h), [self.h_plus])
        )


def build_initial_grid(s0: float, n: int) -> MovingGrid:
    """Symmetric start grid on [-s0, s0] with n cells per side (h = s0/n)."""
    if n < 1:
        raise ValueError(f"cell count must be at least 1, got {n}")
    if not (np.isfinite(s0) and s0 > 0.0):
        raise ValueError(f"initial half-support must be positive, got {s0}")
    h = s0 / n
    he = s0 - (n - 1) * h
    return MovingGrid(h=h, s_minus=s0, s_plus=s0, n_minus=n, n_plus=n,
                      h_minus=he, h_plus=he)


def regrid(s_minus: float, s_plus: float, h: float) -> MovingGrid:
    """Grid for the given support endpoints at fixed mesh width h.

    Callers tracking a moving front compare ``n_minus``/``n_plus`` against
    the previous grid to detect node insertion.  Supports closer than one
    cell to the origin are rejected.
    """
    nm = _front_index(s_minus, h)
    npl = _front_index(s_plus, h)
    return MovingGrid(
        h=h,
        s_minus=s_minus,
        s_plus=s_plus,
        n_minus=nm,
        n_plus=npl,
        h_minus=s_minus - (nm - 1) * h,
        h_plus=s_plus - (npl - 1) * h,
    )


@dataclass(frozen=True)
class NodalField:
    """Nonnegative piecewise-linear field on a MovingGrid.

    Stores the interior node values only; the field is zero at the support
    endpoints and outside the support.  Evaluation between breakpoints is
    linear.  Instances are immutable (the value array is locked).
    """

    grid: MovingGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.ascontiguousarray(self.values, dtype=np.float64)
        if vals.ndim != 1 or vals.size != self.grid.num_nodes:
            raise ValueError(
                f"expected {self.grid.num_nodes} node values, got shape {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("node values must be finite")
        if np.any(vals < 0.0):
            raise ValueError("node values must be nonnegative")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def __call__(self, x) -> np.ndarray:
        """Evaluate the piecewise-linear field at x (scalar or array)."""
        padded = np.concatenate(([0.0], self.values, [0.0]))
        return np.interp(x, self.grid.breakpoints(), padded, left=0.0, right=0.0)

    def sup_norm(self) -> float:
        """Maximum of the field (attained at a node)."""
        return float(self.values.max())

    def padded_values(self) -> np.ndarray:
        """Values at all breakpoints, including the zero endpoints."""
        return np.concatenate(([0.0], self.values, [0.0]))


@dataclass(frozen=True)
class SlopeField:
    """Piecewise-constant derivative of a NodalField, one slope per interval.

    ``slopes[0]`` belongs to the left end interval and ``slopes[-1]`` to the
    right end interval.
    """

    grid: MovingGrid
    slopes: np.ndarray

    def __post_init__(self) -> None:
        sl = np.ascontiguousarray(self.slopes, dtype=np.float64)
        if sl.ndim != 1 or sl.size != self.grid.num_nodes + 1:
            raise ValueError(
                f"expected {self.grid.num_nodes + 1} slopes, got shape {sl.shape}"
            )
        sl.flags.writeable = False
        object.__setattr__(self, "slopes", sl)

    def sup_norm(self) -> float:
        return float(np.abs(self.slopes).max())

    def l1_norm(self) -> float:
        """Integral of |slope| over the support (total variation)."""
        return float(np.dot(np.abs(self.slopes), self.grid.interval_widths()))


def interpolate(field: NodalField, target: MovingGrid) -> NodalField:
    """Lagrange interpolate of a field onto a grid with larger support.

    Exact for fields already representable on the target grid; the result is
    zero at the target support endpoints by construction.
    """
    src = field.grid
    slack = _REL_TOL * src.h
    if target.s_minus < src.s_minus - slack or target.s_plus < src.s_plus - slack:
        raise ValueError(
            "target support "
            f"[-{target.s_minus}, {target.s_plus}] does not contain the source "
            f"support [-{src.s_minus}, {src.s_plus}]"
        )
    return NodalField(target, field(target.nodes()))
