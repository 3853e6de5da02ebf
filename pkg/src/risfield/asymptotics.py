"""Asymptotic machinery: regime classification, stationary points of the
propagation phase, the stationary-phase and boundary (corner) approximations
of the oscillatory surface integral, the closed-form field expressions for
the canonical profiles, and the focusing upper bound.

The phase under study is always P(x, y) = d_tx + d_rx - c(x, y) with c
affine-linear; its Hessian is the (positive definite) sum of the two
point-distance Hessians, so P has at most one stationary point and the
signature there is always +2.
"""

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .errors import BudgetExceededError, ContractError
from .geometry import angles, distances, electrical_metrics, propagation_unit_vector
from .em_core import omega_pattern
from .fields import QuadratureSpec, _affine_probe, _midpoint_axes, integrate_type2
from .profiles import (
    AnomalousPhase,
    FocusingPhase,
    Mode,
    SpecularPhase,
    gamma_magnitude,
    steering_angles,
)

# operationalization of the "much greater than one" regime condition
EL_CONDITION_THRESHOLD = 10.0
# Lemma-6 style distance-vs-diagonal branch thresholds for focusing profiles
_TYPE2_FAR_FACTOR = 10.0

_NEWTON_MAX_ITER = 50
_NEWTON_STEP_TOL = 1e-12
_GRAD_TOL = 1e-10


class Regime(Enum):
    SMALL = "small"
    LARGE = "large"


@dataclass(frozen=True)
class StationaryPoint:
    x: float
    y: float
    inside_surface: bool
    hessian: np.ndarray
    det: float
    signature: int
    grad_norm: float


@dataclass(frozen=True)
class RegimeReport:
    r_es: float
    r_el: float
    d_tx0: float
    d_rx0: float
    stationary: tuple
    electrically_small: bool
    electrically_large: bool
    el_condition_value: Optional[float]
    type2_branch: Optional[str] = None


def _grad_sum_distance(geom, x, y):
    d_tx, d_rx = distances(geom, x, y)
    gx = (x - geom.tx.x) / d_tx + (x - geom.rx.x) / d_rx
    gy = (y - geom.tx.y) / d_tx + (y - geom.rx.y) / d_rx
    return gx, gy


def hessian_at(geom, alpha, beta, x, y):
    """Analytic Hessian of P = d_tx + d_rx - alpha*x - beta*y at (x, y).

    Returns (H, det, signature). The linear term drops out of the second
    derivatives; alpha/beta are accepted so call sites read naturally.
    """
    del alpha, beta
    h = np.zeros((2, 2))
    for p in (geom.tx, geom.rx):
        d = math.sqrt((x - p.x) ** 2 + (y - p.y) ** 2 + p.z**2)
        h[0, 0] += (d * d - (x - p.x) ** 2) / d**3
        h[1, 1] += (d * d - (y - p.y) ** 2) / d**3
        h[0, 1] += -(x - p.x) * (y - p.y) / d**3
    h[1, 0] = h[0, 1]
    eig = np.linalg.eigvalsh(h)
    signature = int(np.sum(eig > 0) - np.sum(eig < 0))
    return h, float(np.linalg.det(h)), signature


def _bisect_axis(geom, fixed, value_range, target, axis, tol=1e-13):
    """1-D bisection on the monotone per-axis gradient equation."""
    lo, hi = value_range

    def f(v):
        x, y = (v, fixed) if axis == 0 else (fixed, v)
        gx, gy = _grad_sum_distance(geom, x, y)
        return (gx if axis == 0 else gy) - target

    flo, fhi = f(lo), f(hi)
    grow = hi - lo
    while flo * fhi > 0 and grow < 1e9:
        lo -= grow
        hi += grow
        grow *= 2
        flo, fhi = f(lo), f(hi)
    if flo * fhi > 0:
        return None
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0 or hi - lo < tol:
            return mid
        if flo * fm <= 0:
            hi, fhi = mid, fm
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def _solve_stationary(geom, alpha, beta):
    """Unique root of grad(d_tx + d_rx) = (alpha, beta), or None if unreachable."""
    if math.hypot(alpha, beta) >= 2.0:
        return None
    x = 0.5 * (geom.tx.x + geom.rx.x)
    y = 0.5 * (geom.tx.y + geom.rx.y)

    def resid(x, y):
        gx, gy = _grad_sum_distance(geom, x, y)
        return gx - alpha, gy - beta

    fx, fy = resid(x, y)
    for _ in range(_NEWTON_MAX_ITER):
        h, _, _ = hessian_at(geom, alpha, beta, x, y)
        try:
            step = np.linalg.solve(h, [fx, fy])
        except np.linalg.LinAlgError:
            break
        t = 1.0
        norm0 = math.hypot(fx, fy)
        for _ in range(30):
            xn, yn = x - t * step[0], y - t * step[1]
            fxn, fyn = resid(xn, yn)
            if math.hypot(fxn, fyn) < norm0:
                break
            t *= 0.5
        x, y, fx, fy = xn, yn, fxn, fyn
        if t * math.hypot(*step) < _NEWTON_STEP_TOL:
            break
    if math.hypot(fx, fy) < _GRAD_TOL:
        return x, y
    # fallback: alternating per-axis bisection (each equation is monotone
    # in its own coordinate)
    span = geom.surface.diagonal + abs(geom.tx.z) + abs(geom.rx.z)
    for _ in range(100):
        xn = _bisect_axis(geom, y, (x - span, x + span), alpha, axis=0)
        if xn is None:
            return None
        yn = _bisect_axis(geom, xn, (y - span, y + span), beta, axis=1)
        if yn is None:
            return None
        moved = math.hypot(xn - x, yn - y)
        x, y = xn, yn
        if moved < _NEWTON_STEP_TOL:
            break
    fx, fy = resid(x, y)
    if math.hypot(fx, fy) < _GRAD_TOL:
        return x, y
    return None


def find_stationary_point(geom, alpha, beta, clip_to_surface=True):
    """Stationary point of d_tx + d_rx - alpha*x - beta*y, if one exists.

    With clip_to_surface (the default), a solution falling outside the
    surface is reported as absent (None), matching the role of the set of
    stationary points in the surface integral. Pass clip_to_surface=False to
    obtain the off-surface solution for diagnostics.
    """
    sol = _solve_stationary(geom, alpha, beta)
    if sol is None:
        return None
    x, y = sol
    h, det, sig = hessian_at(geom, alpha, beta, x, y)
    gx, gy = _grad_sum_distance(geom, x, y)
    inside = bool(geom.surface.contains(x, y, strict=True))
    point = StationaryPoint(
        x=float(x),
        y=float(y),
        inside_surface=inside,
        hessian=h,
        det=det,
        signature=sig,
        grad_norm=math.hypot(gx - alpha, gy - beta),
    )
    if clip_to_surface and not inside:
        return None
    return point


def spm_value(a1, b1, c, geom, k, points):
    """Stationary-phase approximation of the type-1 integral.

    Sums (2*pi/k) a1 b1 |det H|^(-1/2) exp(-j k P - j pi sig/4) over the
    given stationary points. Empty point set is a contract error: use
    boundary_value for that case.
    """
    points = list(points)
    if not points:
        raise ContractError("no stationary points inside the surface; use boundary_value")
    total = 0j
    for sp in points:
        if sp.det == 0:
            raise ContractError("degenerate (zero-determinant) stationary point")
        d_tx, d_rx = distances(geom, sp.x, sp.y)
        p = d_tx + d_rx - float(c(sp.x, sp.y))
        total += (
            (2.0 * math.pi / k)
            * float(a1(d_tx, d_rx))
            * float(b1(sp.x, sp.y))
            * abs(sp.det) ** -0.5
            * np.exp(-1j * k * p - 1j * math.pi * sp.signature / 4.0)
        )
    return complex(total)


def boundary_value(a1, b1, c, geom, k):
    """Four-corner (no-stationary-point) approximation of the type-1 integral."""
    s = geom.surface
    cx, cy = _affine_probe(c, s.half_len_x, s.half_len_y)
    total = 0j
    for sx, x in ((1, s.half_len_x), (-1, -s.half_len_x)):
        for sy, y in ((1, s.half_len_y), (-1, -s.half_len_y)):
            gx, gy = _grad_sum_distance(geom, x, y)
            px, py = gx - cx, gy - cy
            if abs(px) < 1e-9 or abs(py) < 1e-9:
                raise ContractError(
                    f"degenerate corner ({x:g}, {y:g}): phase gradient vanishes along an axis"
                )
            d_tx, d_rx = distances(geom, x, y)
            p = d_tx + d_rx - float(c(x, y))
            total += sx * sy * float(a1(d_tx, d_rx)) * float(b1(x, y)) * np.exp(-1j * k * p) / (
                px * py
            )
    return complex(total / (-1j * k) ** 2)


def type1_small_value(a1, b1, c, geom, k, quad=None):
    """Far-regime (electrically-small) approximation of the type-1 integral:
    the slowly-varying amplitude is frozen at the surface center and the
    propagation phase linearized there."""
    quad = quad or QuadratureSpec()
    s = geom.surface
    cx, cy = _affine_probe(c, s.half_len_x, s.half_len_y)
    a = angles(geom, 0.0, 0.0)
    dx = math.sin(a.theta_inc) * math.cos(a.phi_inc_az) + math.sin(a.theta_rec) * math.cos(
        a.phi_rec_az
    )
    dy = math.sin(a.theta_inc) * math.sin(a.phi_inc_az) + math.sin(a.theta_rec) * math.sin(
        a.phi_rec_az
    )
    lam_k = 2.0 * math.pi / k
    nx = max(32, math.ceil(quad.samples_per_wavelength * 2 * s.half_len_x * abs(dx + cx) / lam_k))
    ny = max(32, math.ceil(quad.samples_per_wavelength * 2 * s.half_len_y * abs(dy + cy) / lam_k))
    if nx * ny > quad.budget:
        raise BudgetExceededError(required=nx * ny, budget=quad.budget)
    x, y, da = _midpoint_axes(s, nx, ny)
    X, Y = x[None, :], y[:, None]
    inner = np.sum(b1(X, Y) * np.exp(1j * k * (dx * X + dy * Y + c(X, Y)))) * da
    d_tx0, d_rx0 = distances(geom, 0.0, 0.0)
    return complex(float(a1(d_tx0, d_rx0)) * np.exp(-1j * k * (d_tx0 + d_rx0)) * inner)


def type2_far_value(a2, b2, geom):
    """Far-regime approximation of the smooth type-2 integral: amplitude frozen
    at the center times the plain integral of b2."""
    d_tx0, d_rx0 = distances(geom, 0.0, 0.0)
    b_int = integrate_type2(lambda dt, dr: np.ones_like(dt), b2, geom)
    return float(a2(d_tx0, d_rx0)) * b_int


def _sinc(z):
    """sin(z)/z with the removable singularity filled."""
    return np.sinc(z / np.pi)


def _omega_at(geom, profile_pol, rec_pol, source, carrier, x, y, efficiency):
    s_hat = propagation_unit_vector(geom, x, y)
    return float(
        omega_pattern(s_hat, profile_pol, rec_pol, source.p_dm, carrier.k, carrier.eps0, efficiency)
    )


def _phase_sum(profile, rec_pol):
    return profile.phi0 + profile.pol_out.phase + rec_pol.phase


def closed_form_scattered(geom, profile, source, rec_pol, carrier, regime, variant="weighted-sum"):
    """Closed-form surface contribution for the supported (phase law, regime)
    pairs; reflection and transmission share the same expressions with their
    respective output polarizations.

    In the large regime the anomalous/specular forms come from the
    stationary-phase term: `variant` picks the weighted-sum distance law
    (default) or the exact Hessian form ("stationary-exact"); the two agree
    when the two link distances coincide and for any specular profile. The
    focusing law has no oscillatory phase, hence no large-regime closed form:
    that pairing is rejected.
    """
    k = carrier.k
    law = profile.phase_law
    if regime is Regime.LARGE and isinstance(law, FocusingPhase):
        raise ContractError(
            "no large-regime closed form for a focusing profile; use bound or quadrature"
        )
    if regime is Regime.SMALL:
        return _closed_form_small(geom, profile, source, rec_pol, carrier)
    if regime is not Regime.LARGE:
        raise ContractError(f"unknown regime {regime!r}")
    alpha, beta = steering_angles(law)
    sp = find_stationary_point(geom, alpha, beta)
    if sp is None:
        raise ContractError(
            "no stationary point inside the surface; use boundary_value or quadrature"
        )
    a = angles(geom, sp.x, sp.y)
    d_tx, d_rx = distances(geom, sp.x, sp.y)
    cos_i, cos_r = math.cos(a.theta_inc), math.cos(a.theta_rec)
    cc = cos_i + cos_r
    r1 = cos_r**2 / cc**2
    r2 = cos_i**2 / cc**2
    r3 = (
        cos_i**2
        + cos_r**2
        + math.sin(a.theta_inc) ** 2
        * math.sin(a.theta_rec) ** 2
        * math.sin(a.phi_inc_az - a.phi_rec_az) ** 2
    ) / cc**2
    if variant == "weighted-sum":
        # Taylor anchor with equal reference distances, making the weights
        # independent of the anchor choice
        root = math.sqrt(r1 + r2 + r3)
        k1 = (r1 + r3 / 2.0) / root
        k2 = (r2 + r3 / 2.0) / root
        denom = 8.0 * math.pi * (k1 * d_tx + k2 * d_rx)
    elif variant == "stationary-exact":
        denom = 8.0 * math.pi * math.sqrt(r1 * d_tx**2 + r2 * d_rx**2 + r3 * d_tx * d_rx)
    else:
        raise ContractError(f"unknown closed-form variant {variant!r}")
    mag = float(gamma_magnitude(profile, sp.x, sp.y))
    om = _omega_at(geom, profile.pol_out, rec_pol, source, carrier, sp.x, sp.y, profile.efficiency)
    phase = d_tx + d_rx - (alpha * sp.x + beta * sp.y) - _phase_sum(profile, rec_pol) / k
    return complex(mag * om / denom * np.exp(-1j * k * phase))


def _closed_form_small(geom, profile, source, rec_pol, carrier):
    k = carrier.k
    s = geom.surface
    law = profile.phase_law
    d_tx0, d_rx0 = distances(geom, 0.0, 0.0)
    a = angles(geom, 0.0, 0.0)
    cc = math.cos(a.theta_inc) + math.cos(a.theta_rec)
    om = _omega_at(geom, profile.pol_out, rec_pol, source, carrier, 0.0, 0.0, profile.efficiency)
    if isinstance(law, FocusingPhase):
        mag = profile.constant_magnitude
        if mag is not None:
            mag_int = mag * s.area
        else:
            mag_int = integrate_type2(
                lambda dt, dr: np.ones_like(dt),
                lambda x, y: gamma_magnitude(profile, x, y),
                geom,
            )
        pref = 1j * k * om * cc / (16.0 * math.pi**2 * d_tx0 * d_rx0)
        return complex(pref * mag_int * np.exp(1j * _phase_sum(profile, rec_pol)))
    alpha, beta = steering_angles(law)
    dx = math.sin(a.theta_inc) * math.cos(a.phi_inc_az) + math.sin(a.theta_rec) * math.cos(
        a.phi_rec_az
    )
    dy = math.sin(a.theta_inc) * math.sin(a.phi_inc_az) + math.sin(a.theta_rec) * math.sin(
        a.phi_rec_az
    )
    d_alpha, d_beta = alpha + dx, beta + dy
    mag = profile.constant_magnitude
    if mag is not None:
        inner = (
            mag * s.area * _sinc(k * s.half_len_x * d_alpha) * _sinc(k * s.half_len_y * d_beta)
        )
    else:
        lam_k = 2.0 * math.pi / k
        nx = max(32, math.ceil(10.0 * 2 * s.half_len_x * abs(d_alpha) / lam_k))
        ny = max(32, math.ceil(10.0 * 2 * s.half_len_y * abs(d_beta) / lam_k))
        x, y, da = _midpoint_axes(s, nx, ny)
        X, Y = x[None, :], y[:, None]
        inner = complex(
            np.sum(gamma_magnitude(profile, X, Y) * np.exp(1j * k * (d_alpha * X + d_beta * Y)))
            * da
        )
    pref = 1j * k * om * cc / (16.0 * math.pi**2 * d_tx0 * d_rx0)
    phase = d_tx0 + d_rx0 - _phase_sum(profile, rec_pol) / k
    return complex(pref * inner * np.exp(-1j * k * phase))


def focusing_bound(geom, profile, source, carrier):
    """Upper bound on |reradiated| for a focusing profile with constant |Gamma|.

    Uses the closed arctan corner expression of the 1/d^3 kernel integral
    around the nearer endpoint. When neither endpoint is pointwise closer
    over the whole surface the bound is still returned (anchored at the
    endpoint nearer to the center) with a RuntimeWarning.
    """
    if not isinstance(profile.phase_law, FocusingPhase):
        raise ContractError("the closed-form bound applies to focusing profiles only")
    mag = profile.constant_magnitude
    if mag is None:
        raise ContractError("the closed-form bound requires a constant |Gamma|")
    d_tx0, d_rx0 = distances(geom, 0.0, 0.0)
    p1, p2 = (geom.tx, geom.rx) if d_tx0 <= d_rx0 else (geom.rx, geom.tx)
    s = geom.surface
    xs = np.linspace(-s.half_len_x, s.half_len_x, 17)
    ys = np.linspace(-s.half_len_y, s.half_len_y, 17)
    X, Y = np.meshgrid(xs, ys)
    d1 = np.sqrt((X - p1.x) ** 2 + (Y - p1.y) ** 2 + p1.z**2)
    d2 = np.sqrt((X - p2.x) ** 2 + (Y - p2.y) ** 2 + p2.z**2)
    if np.any(d1 > d2):
        warnings.warn(
            "endpoint dominance does not hold over the whole surface; "
            "bound anchored at the endpoint nearer the center",
            RuntimeWarning,
        )
    k = carrier.k
    c_const = 2.0 * k**3 * source.p_dm * mag * profile.efficiency / (16.0 * math.pi**2 * carrier.eps0)
    factor = (abs(p1.z) + abs(p2.z)) / abs(p1.z)

    def corner(x, y):
        return math.atan2(
            (p1.x - x) * (p1.y - y),
            abs(p1.z) * math.sqrt((p1.x - x) ** 2 + (p1.y - y) ** 2 + p1.z**2),
        )

    lx, ly = s.half_len_x, s.half_len_y
    corner_sum = corner(lx, ly) - corner(lx, -ly) - corner(-lx, ly) + corner(-lx, -ly)
    return float(c_const * factor * corner_sum)


def classify_regime(geom, profile, carrier):
    """RegimeReport for a link/profile pair: far-regime radius, near-regime
    condition value, stationary point, and the boolean verdicts."""
    lam = carrier.wavelength
    diag, _, r_es = electrical_metrics(geom.surface, lam)
    d_tx0, d_rx0 = distances(geom, 0.0, 0.0)
    small = bool(d_tx0 > r_es and d_rx0 > r_es)
    law = profile.phase_law

    def r_el_at(x, y):
        d1, d2 = distances(geom, x, y)
        ds = min(d1, d2)
        b1, b2 = d1 / ds, d2 / ds
        return r_es * math.sqrt(geom.tx.z / b1**2 + abs(geom.rx.z) / b2**2)

    if isinstance(law, FocusingPhase):
        dmin, dmax = min(d_tx0, d_rx0), max(d_tx0, d_rx0)
        if dmin >= _TYPE2_FAR_FACTOR * diag:
            branch = "far"
        elif dmax <= diag / _TYPE2_FAR_FACTOR:
            branch = "near"
        else:
            branch = "intermediate"
        return RegimeReport(
            r_es=r_es,
            r_el=r_el_at(0.0, 0.0),
            d_tx0=float(d_tx0),
            d_rx0=float(d_rx0),
            stationary=(),
            electrically_small=small,
            electrically_large=branch == "near",
            el_condition_value=None,
            type2_branch=branch,
        )
    alpha, beta = steering_angles(law)
    sp = find_stationary_point(geom, alpha, beta, clip_to_surface=False)
    cond = None
    large = False
    if sp is not None and sp.inside_surface:
        d1, d2 = distances(geom, sp.x, sp.y)
        cond = float(
            (2.0 * diag**2 / lam) * (geom.tx.z / d1**2 + abs(geom.rx.z) / d2**2)
        )
        large = cond >= EL_CONDITION_THRESHOLD
    anchor = (sp.x, sp.y) if sp is not None else (0.0, 0.0)
    return RegimeReport(
        r_es=r_es,
        r_el=r_el_at(*anchor),
        d_tx0=float(d_tx0),
        d_rx0=float(d_rx0),
        stationary=(sp,) if sp is not None else (),
        electrically_small=small,
        electrically_large=large,
        el_condition_value=cond,
        type2_branch=None,
    )
