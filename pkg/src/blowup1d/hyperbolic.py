"""Exact one-step front-propagation solve of u_t = u_x^2 / m at the nodes.

For nonnegative piecewise-linear data the variational (sup-convolution)
solution of the quadratic Hamilton-Jacobi flow can be evaluated in closed
form at every node, provided the step satisfies the stability condition
``dt * |slope|_max / h <= m/2``.  The support endpoints move outward with
the end-interval slopes, which may bring at most one new node per side into
the support per step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import NodalField, SlopeField, regrid

__all__ = [
    "compute_slopes",
    "cfl_max_dt",
    "hopf_lax_step",
    "hopf_lax_oracle",
    "HyperbolicStepResult",
]


def compute_slopes(field: NodalField) -> SlopeField:
    """Per-interval difference quotients of a field, end intervals included.

    Interior intervals use ``(u_i - u_{i-1}) / h``; the end intervals run
    down to the zero value at the support endpoints, so the left end slope
    is ``u_first / h_minus`` and the right end slope is ``-u_last / h_plus``.
    """
    g = field.grid
    u = field.values
    v = np.empty(u.size + 1)
    v[0] = u[0] / g.h_minus
    if u.size > 1:
        v[1:-1] = np.diff(u) / g.h
    v[-1] = -u[-1] / g.h_plus
    return SlopeField(g, v)


def cfl_max_dt(slopes: SlopeField, m: float, h: float | None = None) -> float:
    """Largest stable time step, (m/2) * h / |slope|_max.

    Returns ``inf`` for a slope-free (identically zero) field.  ``h``
    defaults to the grid's mesh width.
    """
    if m <= 0.0:
        raise ValueError(f"m must be positive, got {m}")
    if h is None:
        h = slopes.grid.h
    vmax = slopes.sup_norm()
    if vmax == 0.0:
        return np.inf
    return 0.5 * m * h / vmax


@dataclass(frozen=True)
class HyperbolicStepResult:
    """Outcome of one front-propagation step.

    ``field_half`` lives on the regridded support; the flags record whether
    a node entered the support on either side.
    """

    field_half: NodalField
    s_minus_new: float
    s_plus_new: float
    new_node_left: bool
    new_node_right: bool


def hopf_lax_step(field: NodalField, dt: float, m: float) -> HyperbolicStepResult:
    """Advance a nonnegative field by dt through the quadratic-gradient flow.

    Node values follow ``u_i + (dt/m) * max(0, -v_i, v_{i+1})^2`` with the
    left/right adjacent slopes ``v_i``/``v_{i+1}``; the support endpoints
    move outward by ``(dt/m) * |end slope|``.  When the right front passes
    the next node x_k, that node gets
    ``(1 - h/h_plus) * u_last + (dt/m) * v_end^2`` (mirrored on the left).
    Requires the stability condition; the front then advances less than one
    cell per step, so at most one node appears per side.
    """
    if not (dt > 0.0 and np.isfinite(dt)):
        raise ValueError(f"time step must be positive and finite, got {dt}")
    if m <= 0.0:
        raise ValueError(f"m must be positive, got {m}")
    g = field.grid
    u = field.values
    v = compute_slopes(field).slopes

    vmax = float(np.abs(v).max())
    if dt * vmax / g.h > 0.5 * m * (1.0 + 1e-12):
        raise ValueError(
            f"time step {dt} violates the stability condition: "
            f"dt*|v|max/h = {dt * vmax / g.h} > m/2 = {0.5 * m}"
        )

    # Updated values at the retained nodes; every term is nonnegative.
    gain = np.maximum(0.0, np.maximum(-v[:-1], v[1:]))
    updated = u + (dt / m) * gain**2

    s_minus_new = g.s_minus + (dt / m) * v[0]
    s_plus_new = g.s_plus - (dt / m) * v[-1]
    new_grid = regrid(s_minus_new, s_plus_new, g.h)

    grow_l = new_grid.n_minus - g.n_minus
    grow_r = new_grid.n_plus - g.n_plus
    if grow_l not in (0, 1) or grow_r not in (0, 1):
        raise RuntimeError(
            f"front moved by more than one cell in a single step "
            f"(node counts {g.n_minus},{g.n_plus} -> {new_grid.n_minus},{new_grid.n_plus})"
        )

    parts = [updated]
    if grow_l:
        left_val = (1.0 - g.h / g.h_minus) * u[0] + (dt / m) * v[0] ** 2
        parts.insert(0, np.array([left_val]))
    if grow_r:
        right_val = (1.0 - g.h / g.h_plus) * u[-1] + (dt / m) * v[-1] ** 2
        parts.append(np.array([right_val]))
    half = NodalField(new_grid, np.concatenate(parts))

    return HyperbolicStepResult(
        field_half=half,
        s_minus_new=s_minus_new,
        s_plus_new=s_plus_new,
        new_node_left=bool(grow_l),
        new_node_right=bool(grow_r),
    )


def hopf_lax_oracle(field: NodalField, dt: float, m: float, x,
                    samples_per_interval: int = 16):
    """Brute-force variational value of the quadratic-gradient flow at x.

    Maximizes ``u(y) - m (x - y)^2 / (4 dt)`` over y.  Candidates are every
    breakpoint, a dense uniform sample of each interval, the per-interval
    stationary points ``y = x + 2 dt v / m`` (the objective is concave on
    each linear piece, so these make the maximization exact), and y = x
    itself, which clamps the result at ``u(x) >= 0``.  Accepts scalar or
    array ``x``.
    """
    if not (dt > 0.0 and np.isfinite(dt)):
        raise ValueError(f"time step must be positive and finite, got {dt}")
    if m <= 0.0:
        raise ValueError(f"m must be positive, got {m}")
    xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
    b = field.grid.breakpoints()
    f = field.padded_values()
    v = np.diff(f) / np.diff(b)

    # Dense sample, shared by all evaluation points.
    dense = np.concatenate(
        [np.linspace(b[j], b[j + 1], samples_per_interval, endpoint=False)
         for j in range(b.size - 1)]
        + [b[-1:]]
    )
    fdense = np.interp(dense, b, f)
    best = np.max(fdense[None, :] - m * (xs[:, None] - dense[None, :]) ** 2 / (4.0 * dt),
                  axis=1)

    # Exact stationary candidates, clipped to their interval.
    ystar = np.clip(xs[:, None] + (2.0 * dt / m) * v[None, :], b[:-1], b[1:])
    fstar = f[:-1] + v[None, :] * (ystar - b[:-1])
    best = np.maximum(best, np.max(fstar - m * (xs[:, None] - ystar) ** 2 / (4.0 * dt),
                                   axis=1))

    # y = x keeps the value at least u(x) (and 0 outside the support).
    best = np.maximum(best, field(xs))

    return best if np.ndim(x) else float(best[0])
