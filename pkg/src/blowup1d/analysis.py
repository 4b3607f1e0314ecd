"""Blow-up certification via a self-similar discrete subsolution family.

The family is the rescaled parabolic cap

    u_hat(t, x) = lam / (T - t)^(1/q) * theta((x - x0) / zeta(t)),
    theta(xi)   = max(0, 1 - xi^2 / a^2),
    zeta(t)     = (T - t)^((q-1)/(2q)),

whose sup diverges and whose support widens as t -> T.  If the scheme's
state dominates this profile initially and the parameter check below
passes, domination is preserved step by step, which forces the numerical
solution to blow up no later than T.

The per-step domination argument reduces to the sign of

    Phi(y) = A lam^q y^(q+1) + C - B y   on  y in (0, 1),

with step-dependent coefficients.  ``feasibility`` evaluates the
conservative, step-independent version of that check, driven by the mesh
slack ``delta = h / (a zeta(0))``; ``certificate_search`` automates the
choice of (lam, a, T) from a plateau of the initial data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .mesh import MovingGrid, NodalField, regrid

__all__ = [
    "theta",
    "SubsolutionParams",
    "subsolution_field",
    "subsolution_snapshot",
    "zeta_ratio_increment",
    "phi_coefficients",
    "phi_min_value",
    "FeasibilityReport",
    "feasibility",
    "minimal_amplitude",
    "blowup_time_bound",
    "find_plateau",
    "domination_check",
    "BlowupCertificate",
    "CertificateSearchResult",
    "certificate_search",
]


def theta(x, a: float):
    """Parabolic cap profile max(0, 1 - x^2/a^2); scalar or array x."""
    if a <= 0.0:
        raise ValueError(f"profile half-width must be positive, got {a}")
    return np.maximum(0.0, 1.0 - np.square(np.asarray(x, dtype=np.float64)) / a**2)


@dataclass(frozen=True)
class SubsolutionParams:
    """Parameters of one member of the subsolution family.

    ``delta = h / (a * zeta(0))`` is the mesh slack entering every
    feasibility constant; ``x0`` recenters the profile.  The useful range
    has ``4 lam / (m a^2) > (1-q)/q`` and ``lam`` above ``(1/(m q))^(1/q)``;
    both are what ``feasibility`` checks rather than hard constructor
    constraints, so that boundary cases remain representable.
    """

    lam: float
    a: float
    T: float
    q: float
    m: float
    delta: float
    x0: float = 0.0

    def __post_init__(self) -> None:
        if not (self.lam > 0.0 and self.a > 0.0 and self.T > 0.0 and self.m > 0.0):
            raise ValueError("lam, a, T, m must all be positive")
        if not (0.0 < self.q < 1.0):
            raise ValueError(f"exponent q must lie in (0, 1), got {self.q}")
        if not (0.0 <= self.delta):
            raise ValueError(f"mesh slack delta must be nonnegative, got {self.delta}")

    @classmethod
    def for_mesh(cls, lam: float, a: float, T: float, q: float, m: float,
                 h: float, x0: float = 0.0) -> "SubsolutionParams":
        """Build params with ``delta`` derived from the mesh width h."""
        zeta0 = T ** ((q - 1.0) / (2.0 * q))
        return cls(lam=lam, a=a, T=T, q=q, m=m, delta=h / (a * zeta0), x0=x0)

    def zeta(self, t: float) -> float:
        """Support stretch factor at time t < T (increasing in t)."""
        if t >= self.T:
            raise ValueError(f"time {t} is past the profile's blow-up time {self.T}")
        return (self.T - t) ** ((self.q - 1.0) / (2.0 * self.q))

    def amplitude(self, t: float) -> float:
        """Peak value lam / (T - t)^(1/q)."""
        if t >= self.T:
            raise ValueError(f"time {t} is past the profile's blow-up time {self.T}")
        return self.lam / (self.T - t) ** (1.0 / self.q)

    def support_halfwidth(self, t: float) -> float:
        return self.a * self.zeta(t)


def subsolution_field(params: SubsolutionParams, t: float, grid: MovingGrid) -> NodalField:
    """Nodal interpolate of the subsolution profile at time t on a grid."""
    amp = params.amplitude(t)
    xi = (grid.nodes() - params.x0) / params.zeta(t)
    return NodalField(grid, amp * theta(xi, params.a))


def subsolution_snapshot(params: SubsolutionParams, t: float, h: float) -> NodalField:
    """Subsolution on a fresh grid of width h just covering its own support.

    Useful for domination checks: the returned field keeps the profile's
    full support, so comparing against a narrower state honestly fails.
    """
    hw = params.support_halfwidth(t)
    s_minus = max(hw - params.x0, h) + h
    s_plus = max(hw + params.x0, h) + h
    return subsolution_field(params, t, regrid(s_minus, s_plus, h))


def zeta_ratio_increment(q: float, T: float, t: float, dt: float) -> tuple[float, float]:
    """Step increment of the squared support stretch, with its upper bound.

    Returns ``(r - 1, bound)`` where ``r = zeta(t+dt)^2 / zeta(t)^2 >= 1``
    and ``r - 1 <= bound = (1-q)/q * dt/(T-t-dt) * r`` (mean value theorem
    applied to ``s -> s^(-(1-q)/q)`` between the two remaining times).
    """
    if not (0.0 < q < 1.0):
        raise ValueError(f"exponent q must lie in (0, 1), got {q}")
    if not (0.0 < dt < T - t):
        raise ValueError("need 0 < dt < T - t")
    alpha = (1.0 - q) / q
    r = ((T - t - dt) / (T - t)) ** (-alpha)
    bound = alpha * dt / (T - t - dt) * r
    return r - 1.0, bound


def phi_coefficients(params: SubsolutionParams, t: float, dt: float
                     ) -> tuple[float, float, float]:
    """Exact step-n coefficients (A, B, C) of Phi for the step t -> t + dt."""
    m, q, lam, a, T = params.m, params.q, params.lam, params.a, params.T
    if not (0.0 < dt < T - t):
        raise ValueError("need 0 < dt < T - t")
    beta = 4.0 * lam / (m * a**2)
    twol = 2.0 * lam / a**2
    mu = beta * dt / (T - t)
    ratio = (T - t - dt) / (T - t)
    zr = ratio ** (-(1.0 - q) / q)
    coef_a = m * (1.0 - mu) ** q * (q + (1.0 - q) * (1.0 - mu) * ratio)
    coef_b = 1.0 + beta + twol - mu * (1.0 + twol)
    coef_c = (beta - mu * (1.0 + twol)) * (1.0 - params.delta) \
        - (zr - 1.0) * (T - t) / dt
    return coef_a, coef_b, coef_c


def phi_min_value(coef_a: float, coef_b: float, coef_c: float,
                  lam: float, q: float) -> float:
    """Minimum of Phi(y) = A lam^q y^(q+1) + C - B y over y in [0, 1].

    Phi is convex in y, so the minimum sits at the stationary point when it
    falls inside, else at an endpoint.
    """
    def phi(y: float) -> float:
        return coef_a * lam**q * y ** (q + 1.0) + coef_c - coef_b * y

    candidates = [0.0, 1.0]
    lead = coef_a * lam**q
    if lead > 0.0 and coef_b > 0.0:
        ystar = (coef_b / ((q + 1.0) * lead)) ** (1.0 / q)
        if 0.0 < ystar < 1.0:
            candidates.append(ystar)
    return min(phi(y) for y in candidates)


@dataclass(frozen=True)
class FeasibilityReport:
    """Step-independent domination check with conservative constants.

    ``A = m q (1-delta)^q``, ``B`` at worst-case zero step fraction, ``C``
    lower-bounded with the worst-case mesh slack; ``passed`` is
    ``C > 0 and lam^q >= (B - C) / (A y0^(q+1))`` with ``y0 = C/B``.
    The two closed-form inequality variants (the denominator term read with
    or without the extra 1/m) are reported separately; certification uses
    their conservative maximum.
    """

    A: float
    B: float
    C: float
    y0: float
    phi_min: float
    passed: bool
    delta: float
    rhs_with_m: float
    rhs_without_m: float
    ok_with_m: bool
    ok_without_m: bool

    @property
    def ok_both(self) -> bool:
        return self.ok_with_m and self.ok_without_m


def feasibility(params: SubsolutionParams, mu_bound: float | None = None
                ) -> FeasibilityReport:
    """Evaluate the conservative domination certificate for the family.

    ``mu_bound`` caps the per-step fraction mu_n; it defaults to ``delta``
    (its provable bound under the stability condition).  Raises when the
    mesh is too coarse for the chosen profile (``delta >= 1``).
    """
    m, q, lam, a, delta = params.m, params.q, params.lam, params.a, params.delta
    if delta >= 1.0:
        raise ValueError(
            f"mesh too coarse for this profile: delta = {delta} >= 1"
        )
    mu_b = delta if mu_bound is None else mu_bound
    alpha = (1.0 - q) / q
    beta = 4.0 * lam / (m * a**2)
    twol = 2.0 * lam / a**2

    coef_a = m * q * (1.0 - delta) ** q
    coef_b = 1.0 + beta + twol
    coef_c = (beta - mu_b * (1.0 + twol)) * (1.0 - delta) - alpha

    if coef_c > 0.0:
        y0 = coef_c / coef_b
        required = (coef_b - coef_c) / (coef_a * y0 ** (q + 1.0))
        passed = lam**q >= required
    else:
        y0 = 0.0
        passed = False
    pmin = phi_min_value(coef_a, coef_b, coef_c, lam, q)

    # Closed-form variants of the same requirement, fixed numerator
    # factor 1/q + 2 lam/a^2 + beta*delta and the two denominator readings.
    factor = 1.0 / q + twol + beta * delta
    rhs = {}
    for key, one_plus in (("with_m", 1.0 + 0.5 * beta), ("without_m", 1.0 + twol)):
        denom = beta * (1.0 - delta) - delta * one_plus - alpha
        if denom > 0.0:
            rhs[key] = factor / (m * q * (1.0 - delta) ** q) \
                * (coef_b / denom) ** (q + 1.0)
        else:
            rhs[key] = np.inf

    return FeasibilityReport(
        A=coef_a, B=coef_b, C=coef_c, y0=y0, phi_min=pmin, passed=passed,
        delta=delta,
        rhs_with_m=rhs["with_m"],
        rhs_without_m=rhs["without_m"],
        ok_with_m=bool(lam**q >= rhs["with_m"]),
        ok_without_m=bool(lam**q >= rhs["without_m"]),
    )


def minimal_amplitude(ratio: float, q: float, m: float, delta: float,
                      lam_lo: float = 1e-12, lam_hi: float = 1e12,
                      iterations: int = 200) -> float:
    """Smallest lam passing ``feasibility`` at fixed profile ratio lam/a^2.

    At fixed ratio and mesh slack the conservative constants do not depend
    on lam, so the check is monotone in lam and bisection converges to the
    exact threshold.  Returns ``inf`` when even ``lam_hi`` fails.
    """
    def passes(lam: float) -> bool:
        params = SubsolutionParams(lam=lam, a=math.sqrt(lam / ratio), T=1.0,
                                   q=q, m=m, delta=delta)
        return feasibility(params).passed

    if not passes(lam_hi):
        return np.inf
    if passes(lam_lo):
        return lam_lo
    lo, hi = lam_lo, lam_hi
    for _ in range(iterations):
        mid = math.sqrt(lo * hi)
        if passes(mid):
            hi = mid
        else:
            lo = mid
    return hi


def blowup_time_bound(lam: float, a: float, q: float, eps: float, rho: float) -> float:
    """Certified upper bound max((lam/eps)^q, (a/rho)^(2q/(1-q))).

    Smallest nominal time T making the initial profile fit under a plateau
    of height eps and half-width rho; blow-up then happens no later.
    """
    if eps <= 0.0 or rho <= 0.0:
        raise ValueError("plateau height and half-width must be positive")
    return max((lam / eps) ** q, (a / rho) ** (2.0 * q / (1.0 - q)))


def _level_intervals(b: np.ndarray, f: np.ndarray, eps: float) -> list[tuple[float, float]]:
    """Maximal closed intervals where the piecewise-linear (b, f) is >= eps."""
    pieces: list[tuple[float, float]] = []
    for j in range(b.size - 1):
        f0, f1 = f[j], f[j + 1]
        if f0 >= eps and f1 >= eps:
            pieces.append((b[j], b[j + 1]))
        elif f0 >= eps > f1:
            x = b[j] + (eps - f0) * (b[j + 1] - b[j]) / (f1 - f0)
            pieces.append((b[j], x))
        elif f1 >= eps > f0:
            x = b[j] + (eps - f0) * (b[j + 1] - b[j]) / (f1 - f0)
            pieces.append((x, b[j + 1]))
    merged: list[tuple[float, float]] = []
    for lo, hi in pieces:
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(hi, merged[-1][1]))
        else:
            merged.append((lo, hi))
    return merged


def _longest_level_interval(b: np.ndarray, f: np.ndarray, eps: float
                            ) -> tuple[float, float]:
    intervals = _level_intervals(b, f, eps)
    if not intervals:
        return 0.0, 0.0
    return max(intervals, key=lambda iv: iv[1] - iv[0])


def find_plateau(field: NodalField) -> tuple[float, float, float]:
    """Certified plateau (x0, eps, rho): field >= eps on |x - x0| < rho.

    Scans the level structure of the piecewise-linear field and maximizes
    the product eps * rho (the quantity that drives the blow-up time bound)
    over the level within each band between consecutive node values, then
    refines around the best band.  Raises for an identically zero field.
    """
    if field.sup_norm() <= 0.0:
        raise ValueError("cannot certify a plateau of an identically zero field")
    b = field.grid.breakpoints()
    f = field.padded_values()

    def product(eps: float) -> tuple[float, tuple[float, float]]:
        lo, hi = _longest_level_interval(b, f, eps)
        return eps * 0.5 * (hi - lo), (lo, hi)

    levels = np.unique(f[f > 0.0])
    candidates: list[float] = []
    prev = 0.0
    for lv in levels:
        candidates.extend(np.linspace(prev, lv, 16)[1:])
        prev = lv

    best_eps, best_prod = candidates[0], -1.0
    for eps in candidates:
        val, _ = product(eps)
        if val > best_prod:
            best_prod, best_eps = val, eps

    # Ternary refinement in a small bracket around the best sample; the
    # product is concave within a band of fixed level-set topology.
    span = (levels[-1] - 0.0) / (16 * levels.size)
    lo_e = max(best_eps - 2 * span, 1e-300)
    hi_e = min(best_eps + 2 * span, float(levels[-1]))
    for _ in range(60):
        m1 = lo_e + (hi_e - lo_e) / 3.0
        m2 = hi_e - (hi_e - lo_e) / 3.0
        if product(m1)[0] >= product(m2)[0]:
            hi_e = m2
        else:
            lo_e = m1
    eps_ref = 0.5 * (lo_e + hi_e)
    val, _ = product(eps_ref)
    if val > best_prod:
        best_prod, best_eps = val, eps_ref

    _, (lo, hi) = product(best_eps)
    return 0.5 * (lo + hi), float(best_eps), 0.5 * (hi - lo)


def domination_check(sub: NodalField, field: NodalField) -> bool:
    """True iff sub <= field everywhere (exact for piecewise-linear fields).

    Both fields are compared at the union of their breakpoints, which is
    sufficient for piecewise-linear functions.
    """
    xs = np.union1d(sub.grid.breakpoints(), field.grid.breakpoints())
    return bool(np.all(sub(xs) <= field(xs)))


@dataclass(frozen=True)
class BlowupCertificate:
    """A verified (lam, a, T) choice for given initial data.

    ``t_star`` is the certified upper bound on the blow-up time; the
    profile's own nominal time ``params.T`` sits just above it by a margin
    tuned so that a threshold crossing of the dominated run lands at or
    below ``t_star``.
    """

    params: SubsolutionParams
    x0: float
    eps: float
    rho: float
    t_star: float
    report: FeasibilityReport


@dataclass(frozen=True)
class CertificateSearchResult:
    certificate: BlowupCertificate | None
    plateau: tuple[float, float, float]
    last_delta: float
    tries: int

    @property
    def found(self) -> bool:
        return self.certificate is not None


def _certificate_at(lam: float, field: NodalField, plateau: tuple[float, float, float],
                    m: float, q: float, beta: float, threshold: float,
                    existence_safety: float) -> BlowupCertificate | None:
    """Verify one amplitude; None when any part of the certificate fails."""
    x0, eps, rho = plateau
    h = field.grid.h
    alpha = (1.0 - q) / q
    mu_profile = 0.25 * m * beta  # lam / a^2
    lam0 = (1.0 / (m * q)) ** (1.0 / q)
    if lam <= 1.04 * lam0:
        return None

    a = math.sqrt(lam / mu_profile)
    t_star = blowup_time_bound(lam, a, q, eps, rho)
    # T barely above the bound: close enough that the dominated run crosses
    # its blow-up threshold before t_star, far enough for strict domination.
    if np.isfinite(threshold) and threshold > lam:
        margin = min(1e-3 * t_star, 0.25 * (lam / threshold) ** q)
    else:
        margin = 1e-3 * t_star
    margin = max(margin, 64.0 * np.finfo(float).eps * t_star)
    big_t = t_star + margin

    params = SubsolutionParams.for_mesh(lam, a, big_t, q, m, h, x0=x0)
    if params.delta >= 1.0:
        return None
    rep = feasibility(params)
    if not (rep.passed and rep.ok_both):
        return None

    # Finite-step sharpening: with per-step fractions dt/(T - t) capped by
    # c, the stretch-increment term is at most z(c) >= (1-q)/q; require the
    # certificate to survive that too.
    c = existence_safety / (m * q * lam**q)
    if not (0.0 < c < 1.0):
        return None
    z = ((1.0 - c) ** (-alpha) - 1.0) / c
    coef_b = 1.0 + beta + 2.0 * mu_profile
    coef_a = m * q * (1.0 - params.delta) ** q
    coef_c = (beta - params.delta * (1.0 + 2.0 * mu_profile)) * (1.0 - params.delta) \
        - z
    if coef_c <= 0.0:
        return None
    if lam**q < (coef_b - coef_c) * coef_b ** (q + 1.0) / (coef_a * coef_c ** (q + 1.0)):
        return None

    # The initial state must actually dominate the profile.
    if not domination_check(subsolution_field(params, 0.0, field.grid), field):
        return None
    return BlowupCertificate(params=params, x0=x0, eps=eps, rho=rho,
                             t_star=t_star, report=rep)


def certificate_search(field: NodalField, m: float, q: float,
                       blowup_threshold: float | None = None,
                       existence_safety: float = 0.5,
                       ratio_scale: float = 1.0,
                       amplitude_margin: float = 1.6,
                       lam_cap: float = 1e12) -> CertificateSearchResult:
    """Search a blow-up certificate for the given initial data.

    Fixes the profile ratio (``4 lam/(m a^2)`` at a safe multiple of
    ``(1-q)/q``), then ladders the amplitude upward until the full
    certificate verifies, and finally applies ``amplitude_margin`` for
    robustness.  ``blowup_threshold`` defaults to 1e6 times the initial
    sup and controls how tightly T hugs the certified bound.
    """
    plateau = find_plateau(field)
    alpha = (1.0 - q) / q
    beta = max(2.0 * alpha, 1.0) * max(ratio_scale, 1e-6)
    if beta <= alpha:
        beta = 2.0 * alpha
    threshold = (blowup_threshold if blowup_threshold is not None
                 else 1e6 * field.sup_norm())

    lam0 = (1.0 / (m * q)) ** (1.0 / q)
    lam = 1.05 * lam0
    tries = 0
    last_delta = np.nan
    first_hit = None
    while lam <= lam_cap:
        tries += 1
        cert = _certificate_at(lam, field, plateau, m, q, beta, threshold,
                               existence_safety)
        if cert is not None:
            first_hit = lam
            last_delta = cert.params.delta
            break
        a_try = math.sqrt(lam / (0.25 * m * beta))
        t_try = blowup_time_bound(lam, a_try, q, plateau[1], plateau[2])
        last_delta = field.grid.h / (a_try * t_try ** ((q - 1.0) / (2.0 * q)))
        lam *= 1.3

    if first_hit is None:
        return CertificateSearchResult(certificate=None, plateau=plateau,
                                       last_delta=float(last_delta), tries=tries)

    lam_final = first_hit * max(amplitude_margin, 1.0)
    cert = _certificate_at(lam_final, field, plateau, m, q, beta, threshold,
                           existence_safety)
    while cert is None and lam_final <= lam_cap:
        tries += 1
        lam_final *= 1.3
        cert = _certificate_at(lam_final, field, plateau, m, q, beta, threshold,
                               existence_safety)
    if cert is None:  # extremely unlikely: fall back to the first hit
        cert = _certificate_at(first_hit, field, plateau, m, q, beta, threshold,
                               existence_safety)
    return CertificateSearchResult(certificate=cert, plateau=plateau,
                                   last_delta=float(cert.params.delta if cert else last_delta),
                                   tries=tries)
