"""Time-stepping driver: step selection, a priori bound monitors, blow-up.

Each step chains the front-propagation solve and the implicit
reaction-diffusion solve, with the step size capped by both stability
conditions.  The driver checks the scheme's provable estimates as it goes:

* per-step sup growth by at most the factor
  ``(1 + m(1-q) dt s^q) / (1 - m q dt s^q)`` with ``s`` the current sup;
* the a priori sup bound ``s0 / (1 - m q t s0^q)^(1/q)`` on the guaranteed
  lifetime window ``t < 1 / (m q s0^q)``;
* contraction of the slope sup and L1 norms across the propagation half
  step, and no sup increase there;
* outward-only support motion.

Violations beyond floating-point slack either abort (strict mode, the test
default) or are recorded on the step report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hyperbolic import compute_slopes, hopf_lax_step
from .mesh import NodalField
from .parabolic import parabolic_step

__all__ = [
    "derive_q",
    "SchemeParams",
    "StepReport",
    "RunTrace",
    "select_dt",
    "advance",
    "run",
    "growth_factor",
    "lifetime_sup_bound",
    "MonitorViolation",
    "TimeStepUnderflow",
    "ExistenceUnsatisfiable",
]

# Relative slack accepted on bound checks (the bounds are exact-arithmetic
# theorems; only rounding may eat into them).
BOUND_RTOL = 1e-10
CONTRACTION_RTOL = 1e-12

# Multiples of the initial sup at which first-crossing times are recorded.
THRESHOLD_MULTIPLIERS = (1e4, 1e5, 1e6)


class MonitorViolation(RuntimeError):
    """A provable bound failed beyond the accepted floating-point slack."""


class TimeStepUnderflow(RuntimeError):
    """The admissible step fell below the configured floor."""


class ExistenceUnsatisfiable(TimeStepUnderflow):
    """Repeated halving could not restore the implicit-step condition."""


def derive_q(m: float, p: float) -> float:
    """Reaction exponent q = (p - 1)/m of the transformed equation.

    Only the fast-reaction range ``1 < p < m + 1`` (i.e. ``0 < q < 1``) is
    covered by this solver.
    """
    if not (np.isfinite(m) and m > 0.0):
        raise ValueError(f"m must be positive, got {m}")
    if not (1.0 < p < m + 1.0):
        raise ValueError(
            f"p={p} outside the supported range: need 1 < p < m+1 = {m + 1.0}"
        )
    return (p - 1.0) / m


@dataclass(frozen=True)
class SchemeParams:
    """Equation and control parameters for a run.

    ``blowup_threshold`` is the absolute sup level declared blown up
    (default: 1e6 times the initial sup); ``dt_floor`` defaults to
    ``1e-12 * t_end``.
    """

    m: float
    p: float
    t_end: float
    cfl_safety: float = 1.0
    existence_safety: float = 0.5
    dt_max: float = np.inf
    blowup_threshold: float | None = None
    dt_floor: float | None = None
    strict: bool = True

    def __post_init__(self) -> None:
        derive_q(self.m, self.p)  # validates m and the (m, p) range
        if not (0.0 < self.cfl_safety <= 1.0):
            raise ValueError(f"cfl_safety must lie in (0, 1], got {self.cfl_safety}")
        if not (0.0 < self.existence_safety < 1.0):
            raise ValueError(
                f"existence_safety must lie in (0, 1), got {self.existence_safety}"
            )
        if not self.t_end > 0.0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if not self.dt_max > 0.0:
            raise ValueError(f"dt_max must be positive, got {self.dt_max}")
        if self.blowup_threshold is not None and not self.blowup_threshold > 0.0:
            raise ValueError("blowup_threshold must be positive")

    @property
    def q(self) -> float:
        return (self.p - 1.0) / self.m

    @property
    def effective_dt_floor(self) -> float:
        return self.dt_floor if self.dt_floor is not None else 1e-12 * self.t_end


@dataclass(frozen=True)
class StepReport:
    """Diagnostics for one completed step (state after the step).

    Slacks are relative: ``(bound - value) / bound``; negative beyond the
    tolerance means the bound failed.  ``lifetime_slack`` is NaN outside the
    guaranteed-lifetime window.
    """

    t: float
    dt: float
    sup_u: float
    sup_v: float
    l1_v: float
    s_minus: float
    s_plus: float
    growth_slack: float
    lifetime_slack: float
    sup_half_slack: float
    slope_sup_slack: float
    slope_l1_slack: float
    new_node_left: bool
    new_node_right: bool
    violations: tuple[str, ...] = ()


@dataclass
class RunTrace:
    """Whole-run time series and outcome.

    ``cause`` is one of ``"horizon"``, ``"blowup"``, ``"step_floor"``,
    ``"existence"``.  ``threshold_times`` maps each recorded multiple of the
    initial sup to its first crossing time.
    """

    reports: list[StepReport]
    cause: str
    final_field: NodalField
    blowup_time: float | None
    threshold_times: dict[float, float]
    t1: float
    u0_sup: float
    slope_growth_rate: float
    violation_count: int

    def series(self, name: str) -> np.ndarray:
        """Column of a StepReport attribute as an array."""
        return np.array([getattr(r, name) for r in self.reports])


def _rel_slack(bound: float, value: float) -> float:
    if bound == 0.0 and value == 0.0:
        return 0.0
    scale = abs(bound) if bound != 0.0 else 1.0
    return (bound - value) / scale


def growth_factor(sup_u: float, dt: float, m: float, q: float) -> float:
    """Per-step sup growth factor; requires ``m q dt sup^q < 1``."""
    if sup_u == 0.0:
        return 1.0
    a = m * dt * sup_u**q
    denom = 1.0 - q * a
    if denom <= 0.0:
        return np.inf
    return (1.0 + (1.0 - q) * a) / denom


def lifetime_sup_bound(t: float, u0_sup: float, m: float, q: float) -> float:
    """A priori sup bound at time t (valid for ``t < 1/(m q u0^q)``)."""
    if u0_sup == 0.0:
        return 0.0
    denom = 1.0 - m * q * t * u0_sup**q
    if denom <= 0.0:
        return np.inf
    return u0_sup / denom ** (1.0 / q)


def select_dt(field: NodalField, params: SchemeParams, t_now: float = 0.0) -> float:
    """Admissible step from the current state.

    Minimum of the stability cap, the implicit-step cap (evaluated on the
    current sup, which bounds the post-propagation sup), ``dt_max`` and the
    remaining horizon.  Raises TimeStepUnderflow below the floor.
    """
    v = compute_slopes(field)
    return _select_dt(field.sup_norm(), v.sup_norm(), field.grid.h, params, t_now)


def _select_dt(sup_u: float, sup_v: float, h: float, params: SchemeParams,
               t_now: float) -> float:
    dt = min(params.dt_max, params.t_end - t_now)
    if sup_v > 0.0:
        dt = min(dt, params.cfl_safety * 0.5 * params.m * h / sup_v)
    if sup_u > 0.0:
        dt = min(dt, params.existence_safety / (params.m * params.q * sup_u**params.q))
    if dt < params.effective_dt_floor or dt <= 0.0:
        raise TimeStepUnderflow(
            f"admissible step {dt} fell below the floor "
            f"{params.effective_dt_floor} at t={t_now}"
        )
    return dt


def advance(field: NodalField, params: SchemeParams, t_now: float = 0.0,
            lifetime_ref: tuple[float, float] | None = None
            ) -> tuple[NodalField, StepReport]:
    """One full step: slopes, step selection, propagation, implicit solve.

    ``lifetime_ref = (u0_sup, t1)`` enables the a priori sup bound check;
    without it that slack is reported as NaN.  In strict mode a monitor
    violation raises; otherwise it is recorded on the report.
    """
    m, q = params.m, params.q
    v = compute_slopes(field)
    sup_u = field.sup_norm()
    sup_v = v.sup_norm()
    l1_v = v.l1_norm()

    dt = _select_dt(sup_u, sup_v, field.grid.h, params, t_now)

    # The pre-step sup bounds the post-propagation sup, so the existence cap
    # chosen above normally transfers; recheck and halve as a backstop.
    for _ in range(200):
        hyp = hopf_lax_step(field, dt, m)
        half = hyp.field_half
        if m * q * dt * half.sup_norm()**q <= params.existence_safety * (1.0 + 1e-12):
            break
        dt *= 0.5
        if dt < params.effective_dt_floor:
            raise ExistenceUnsatisfiable(
                f"could not satisfy the implicit-step condition above the "
                f"step floor at t={t_now}"
            )
    else:  # pragma: no cover - the halving loop always terminates or raises
        raise ExistenceUnsatisfiable(f"implicit-step condition unsatisfiable at t={t_now}")

    v_half = compute_slopes(half)
    new_field = parabolic_step(half, dt, m, q)
    t_new = t_now + dt

    sup_new = new_field.sup_norm()
    bound = sup_u * growth_factor(sup_u, dt, m, q)
    growth_slack = _rel_slack(bound, sup_new)
    sup_half_slack = _rel_slack(sup_u, half.sup_norm())
    slope_sup_slack = _rel_slack(sup_v, v_half.sup_norm())
    slope_l1_slack = _rel_slack(l1_v, v_half.l1_norm())

    if lifetime_ref is not None and lifetime_ref[0] > 0.0 and t_new < lifetime_ref[1]:
        lt_bound = lifetime_sup_bound(t_new, lifetime_ref[0], m, q)
        lifetime_slack = _rel_slack(lt_bound, sup_new)
    else:
        lifetime_slack = math.nan

    violations = []
    if growth_slack < -BOUND_RTOL:
        violations.append("growth")
    if not math.isnan(lifetime_slack) and lifetime_slack < -BOUND_RTOL:
        violations.append("lifetime")
    if sup_half_slack < -BOUND_RTOL:
        violations.append("propagation_sup")
    if slope_sup_slack < -CONTRACTION_RTOL:
        violations.append("slope_sup")
    if slope_l1_slack < -CONTRACTION_RTOL:
        violations.append("slope_l1")
    if hyp.s_minus_new < field.grid.s_minus or hyp.s_plus_new < field.grid.s_plus:
        violations.append("support")

    v_new = compute_slopes(new_field)
    report = StepReport(
        t=t_new,
        dt=dt,
        sup_u=sup_new,
        sup_v=v_new.sup_norm(),
        l1_v=v_new.l1_norm(),
        s_minus=hyp.s_minus_new,
        s_plus=hyp.s_plus_new,
        growth_slack=growth_slack,
        lifetime_slack=lifetime_slack,
        sup_half_slack=sup_half_slack,
        slope_sup_slack=slope_sup_slack,
        slope_l1_slack=slope_l1_slack,
        new_node_left=hyp.new_node_left,
        new_node_right=hyp.new_node_right,
        violations=tuple(violations),
    )
    if violations and params.strict:
        raise MonitorViolation(
            f"bound check(s) failed at t={t_new}: {', '.join(violations)} "
            f"(growth_slack={growth_slack}, lifetime_slack={lifetime_slack})"
        )
    return new_field, report


def run(initial: NodalField, params: SchemeParams, observer=None) -> RunTrace:
    """Step from t=0 until the horizon, blow-up threshold or step floor.

    Records first-crossing times for 1e4/1e5/1e6 times the initial sup, and
    the largest relative slope-growth rate per unit time observed inside
    the guaranteed-lifetime window (where boundedness is the provable
    claim).  ``observer(step_index, field, report)``, when given, is called
    after every accepted step.
    """
    u0_sup = initial.sup_norm()
    m, q = params.m, params.q
    t1 = np.inf if u0_sup == 0.0 else 1.0 / (m * q * u0_sup**q)
    if params.blowup_threshold is not None:
        threshold = params.blowup_threshold
    else:
        threshold = 1e6 * u0_sup if u0_sup > 0.0 else np.inf

    reports: list[StepReport] = []
    threshold_times: dict[float, float] = {}
    field = initial
    t = 0.0
    cause = "horizon"
    blowup_time = None
    violation_count = 0
    slope_growth_rate = 0.0
    prev_sup_v = compute_slopes(initial).sup_norm()
    step_index = 0

    while True:
        remaining = params.t_end - t
        if remaining <= max(params.effective_dt_floor, 1e-14 * params.t_end):
            cause = "horizon"
            break
        try:
            field, report = advance(field, params, t, (u0_sup, t1))
        except ExistenceUnsatisfiable:
            cause = "existence"
            break
        except TimeStepUnderflow:
            cause = "step_floor"
            break
        t = report.t
        reports.append(report)
        violation_count += len(report.violations)
        if prev_sup_v > 0.0 and report.dt > 0.0 and report.t < t1:
            rate = (report.sup_v / prev_sup_v - 1.0) / report.dt
            slope_growth_rate = max(slope_growth_rate, rate)
        prev_sup_v = report.sup_v
        for mult in THRESHOLD_MULTIPLIERS:
            if mult not in threshold_times and report.sup_u >= mult * u0_sup > 0.0:
                threshold_times[mult] = report.t
        if observer is not None:
            observer(step_index, field, report)
        step_index += 1
        if report.sup_u >= threshold:
            cause = "blowup"
            blowup_time = report.t
            break

    return RunTrace(
        reports=reports,
        cause=cause,
        final_field=field,
        blowup_time=blowup_time,
        threshold_times=threshold_times,
        t1=t1,
        u0_sup=u0_sup,
        slope_growth_rate=slope_growth_rate,
        violation_count=violation_count,
    )
