"""Locate and certify ``m0 T``-periodic solutions.

The search follows the existence argument step by step:

1. integrate from ``q(0) = 0`` and read the sign vector ``xi`` of the
   endpoint in signed coordinates,
2. scale a corner ``(lam xi0, lam xi1, mu xi2, mu xi3)`` until every
   coordinate of ``V(0) - V(m0 T)`` has sign ``xi_n``,
3. bisect all four coordinate intervals at once, one trajectory per
   iteration, moving ``alpha_n`` up when ``V_n(0) < V_n(m0 T)``,
4. optionally polish the midpoint with a damped Newton iteration on
   ``P(q) - q`` (off in strict-proof mode).

All coordinates in this module are signed coordinates
(``q = c0 - i c1 - j c2 - k c3``) unless stated otherwise.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import conditions as cond
from .coefficients import RiccatiSystem
from .errors import (
    CalibrationFailed,
    CapExceeded,
    CertificationFailure,
    MidpointEscape,
    NoConvergence,
    NotApplicable,
)
from .integrator import Escaped, IntegrationSettings, flow, integrate_ivp
from .quaternion import SignedComponents, from_signed, qmul, to_signed
from .transforms import time_reverse

log = logging.getLogger(__name__)

SIGN_TOL = 1e-8


@dataclass(frozen=True)
class FinderSettings:
    tol: float = 1e-8
    accept_residual: float = 1e-6
    polish: bool = True
    newton_tol: float = 1e-10
    newton_maxiter: int = 20
    max_bisection_iter: int = 200
    scale_cap_exponent: int = 60
    max_m0: int = 64
    grid_size: int = 512
    use_remark31: bool = True


class PoincareMap:
    """``c -> P(c)`` on signed coordinates with an evaluation counter."""

    def __init__(self, sys: RiccatiSystem, m0: int, settings: IntegrationSettings):
        self.sys = sys
        self.m0 = m0
        self.settings = settings
        self.count = 0

    def __call__(self, c):
        self.count += 1
        out = flow(self.sys, from_signed(c), 0.0, self.m0 * self.sys.T, self.settings)
        if isinstance(out, Escaped):
            return out
        return to_signed(out)

    def residual(self, c) -> float:
        img = self(c)
        if isinstance(img, Escaped):
            return math.inf
        return float(np.linalg.norm(img - np.asarray(c, dtype=float)))


def _sign(x: float) -> int:
    return 1 if x >= 0 else -1


def initial_signature(sys: RiccatiSystem, m0: int, settings: IntegrationSettings | None = None, *, pmap=None):
    """Signs of the zero-start solution at ``m0 T``; zero maps to +1.

    Returns ``(xi, endpoint)`` with ``endpoint`` a :class:`SignedComponents`.
    """
    pmap = pmap or PoincareMap(sys, m0, settings or IntegrationSettings())
    end = pmap(np.zeros(4))
    if isinstance(end, Escaped):
        raise CertificationFailure(f"the solution starting at 0 escapes at t = {end.t_escape:.6g}")
    return signature_from_endpoint(end), SignedComponents.from_array(end)


def signature_from_endpoint(end) -> tuple:
    return tuple(1 if v == 0.0 else int(np.sign(v)) for v in np.asarray(tuple(end), dtype=float))


def calibrate_corner(
    sys: RiccatiSystem,
    m0: int,
    xi,
    settings: IntegrationSettings | None = None,
    *,
    cap_exponent: int = 60,
    pmap=None,
):
    """Double ``lam = mu`` from 1 until ``sign(V_n(0) - V_n(m0 T)) = xi_n`` for all n.

    Returns ``(lam, mu, corner)``; an escape at a trial scale counts as a
    failed sign test. Raises :class:`CalibrationFailed` past ``2**cap_exponent``.
    """
    pmap = pmap or PoincareMap(sys, m0, settings or IntegrationSettings())
    xi = np.asarray(xi, dtype=float)
    last = None
    for k in range(cap_exponent + 1):
        lam = mu = float(2**k)
        corner = np.array([lam, lam, mu, mu]) * xi
        img = pmap(corner)
        if isinstance(img, Escaped):
            last = None
            continue
        diff = corner - img
        last = tuple(_sign(v) if v != 0 else 0 for v in diff)
        if all(last[n] == xi[n] for n in range(4)):
            return lam, mu, SignedComponents.from_array(corner)
    raise CalibrationFailed(f"no scale up to 2**{cap_exponent} satisfies the corner signs", last, 2.0**cap_exponent)


@dataclass
class BisectionState:
    alpha: np.ndarray
    beta: np.ndarray
    iteration: int
    gamma: np.ndarray
    image: np.ndarray | None
    residual: float
    initial_alpha: np.ndarray
    initial_beta: np.ndarray
    widths: list = field(default_factory=list)

    @property
    def max_width(self) -> float:
        return float(np.max(self.beta - self.alpha))


def bisection_find(
    sys: RiccatiSystem,
    m0: int,
    corner,
    settings: IntegrationSettings | None = None,
    tol: float = 1e-8,
    *,
    max_iter: int = 200,
    pmap=None,
) -> BisectionState:
    """Coordinatewise nested-interval search for a fixed point of the Poincare map.

    Starts from ``[min(0, corner_n), max(0, corner_n)]``. Each iteration
    integrates once from the midpoint ``gamma`` and halves every interval
    according to the sign of ``gamma_n - P_n(gamma)``. Stops when the widest
    interval is below ``tol`` or the midpoint residual is below ``tol``.
    """
    pmap = pmap or PoincareMap(sys, m0, settings or IntegrationSettings())
    corner = np.asarray(tuple(corner), dtype=float)
    alpha = np.minimum(0.0, corner)
    beta = np.maximum(0.0, corner)
    state = BisectionState(alpha.copy(), beta.copy(), 0, 0.5 * (alpha + beta), None, math.inf, alpha.copy(), beta.copy())
    state.widths.append(beta - alpha)
    for l in range(max_iter):
        gamma = 0.5 * (alpha + beta)
        img = pmap(gamma)
        if isinstance(img, Escaped):
            raise MidpointEscape(f"midpoint {gamma} escapes at t = {img.t_escape:.6g}", gamma, img.t_escape)
        state.gamma = gamma
        state.image = img
        state.residual = float(np.linalg.norm(img - gamma))
        if state.residual < tol:
            break
        up = gamma < img
        alpha = np.where(up, gamma, alpha)
        beta = np.where(up, beta, gamma)
        state.alpha, state.beta, state.iteration = alpha, beta, l + 1
        state.widths.append(beta - alpha)
        if state.max_width < tol:
            break
    return state


def _fd_jacobian(pmap: PoincareMap, c, fc=None):
    c = np.asarray(c, dtype=float)
    if fc is None:
        fc = pmap(c)
        if isinstance(fc, Escaped):
            return None, fc
    h = 1e-6 * (1.0 + np.linalg.norm(c))
    J = np.empty((4, 4))
    for n in range(4):
        e = c.copy()
        e[n] += h
        img = pmap(e)
        if isinstance(img, Escaped):
            return None, fc
        J[:, n] = (img - fc) / h
    return J, fc


@dataclass
class PolishResult:
    q0: SignedComponents
    residual: float
    iterations: int
    singular: bool = False


def newton_polish(
    sys: RiccatiSystem,
    m0: int,
    q0_guess,
    settings: IntegrationSettings | None = None,
    *,
    tol: float = 1e-10,
    max_iter: int = 20,
    cond_max: float = 1e12,
    pmap=None,
) -> PolishResult:
    """Damped Newton on ``F(c) = P(c) - c`` with a forward-difference Jacobian."""
    pmap = pmap or PoincareMap(sys, m0, settings or IntegrationSettings())
    c = np.asarray(tuple(q0_guess), dtype=float)
    img = pmap(c)
    if isinstance(img, Escaped):
        raise ValueError("the initial guess escapes before m0 T")
    F = img - c
    res = float(np.linalg.norm(F))
    it = 0
    while res >= tol and it < max_iter:
        J, _ = _fd_jacobian(pmap, c, img)
        if J is None:
            break
        G = J - np.eye(4)
        if np.linalg.cond(G) > cond_max:
            return PolishResult(SignedComponents.from_array(c), res, it, singular=True)
        step = np.linalg.solve(G, -F)
        it += 1
        t = 1.0
        for _ in range(12):
            cand = c + t * step
            cimg = pmap(cand)
            if not isinstance(cimg, Escaped):
                cF = cimg - cand
                cres = float(np.linalg.norm(cF))
                if cres < res:
                    c, img, F, res = cand, cimg, cF, cres
                    break
            t *= 0.5
        else:
            break
    return PolishResult(SignedComponents.from_array(c), res, it)


def floquet_multipliers(pmap: PoincareMap, c) -> np.ndarray | None:
    """Eigenvalues of the finite-difference Jacobian of the Poincare map at ``c``."""
    J, _ = _fd_jacobian(pmap, c)
    if J is None:
        return None
    # the sign flip S is its own inverse; S J S has the same spectrum
    return np.linalg.eigvals(J)


def stability_label(multipliers) -> str:
    if multipliers is None:
        return "unknown"
    mods = np.abs(multipliers)
    if np.all(mods < 1.0 - 1e-6):
        return "asymptotically stable"
    if np.any(mods > 1.0 + 1e-6):
        return "unstable"
    return "marginal"


@dataclass
class PeriodicSolutionReport:
    q0: SignedComponents
    m0: int
    residual: float
    route: str
    sign_certificate: dict
    floquet: list
    stability: str
    iterations: int
    poincare_evaluations: int
    m0_method: str = ""
    scale: tuple = (1.0, 1.0)
    signature: tuple = ()
    polished: bool = False
    polish_singular: bool = False
    bisection_width: float = math.nan
    extension_deviation: float = math.nan
    diagnostics: list = field(default_factory=list)
    companion: PeriodicSolutionReport | None = None
    normality: dict | None = None

    @property
    def q0_quaternion(self):
        return self.q0.to_quaternion()

    def to_dict(self):
        out = {
            "q0": list(self.q0),
            "q0_quaternion": list(self.q0.to_quaternion()),
            "m0": self.m0,
            "m0_method": self.m0_method,
            "residual": self.residual,
            "route": self.route,
            "sign_certificate": self.sign_certificate,
            "floquet": [{"re": float(z.real), "im": float(z.imag), "abs": float(abs(z))} for z in self.floquet],
            "stability": self.stability,
            "iterations": self.iterations,
            "poincare_evaluations": self.poincare_evaluations,
            "scale": {"lambda": self.scale[0], "mu": self.scale[1]},
            "signature": list(self.signature),
            "polished": self.polished,
            "polish_singular": self.polish_singular,
            "bisection_width": self.bisection_width,
            "extension_deviation": self.extension_deviation,
            "diagnostics": list(self.diagnostics),
        }
        if self.companion is not None:
            out["companion"] = self.companion.to_dict()
        if self.normality is not None:
            out["normality"] = self.normality
        return out


@dataclass
class _Attempt:
    c0: np.ndarray
    m0: int
    residual: float
    iterations: int
    pmap: PoincareMap
    scale: tuple
    signature: tuple
    polished: bool
    singular: bool
    width: float
    diagnostics: list


def _m0_candidates(sys, finder: FinderSettings, m0_override, diagnostics):
    if m0_override is not None:
        return [int(m0_override)], "Override"
    try:
        est = cond.estimate_m0(sys, use_remark31=finder.use_remark31)
        start, method = est.m0, est.method
    except CapExceeded as exc:
        diagnostics.append(f"m0 estimate: {exc}; searching m0 = 1, 2, 4, ...")
        start, method = 1, "Search"
    cands = [start]
    while cands[-1] * 2 <= finder.max_m0:
        cands.append(cands[-1] * 2)
    return cands, method


def _inside_box(c, lo, hi, slack):
    return bool(np.all(c >= lo - slack) and np.all(c <= hi + slack))


def _attempt(sys, m0, settings, finder, diagnostics):
    pmap = PoincareMap(sys, m0, settings)
    xi, _ = initial_signature(sys, m0, pmap=pmap)
    lam, mu, corner = calibrate_corner(sys, m0, xi, cap_exponent=finder.scale_cap_exponent, pmap=pmap)
    try:
        state = bisection_find(sys, m0, corner, tol=finder.tol, max_iter=finder.max_bisection_iter, pmap=pmap)
    except MidpointEscape as exc:
        diagnostics.append(f"certification failure: {exc}; retrying with 10x tighter tolerances")
        pmap.settings = settings.tightened()
        state = bisection_find(sys, m0, corner, tol=finder.tol, max_iter=finder.max_bisection_iter, pmap=pmap)
        pmap.settings = settings
    c, res = state.gamma, state.residual
    polished = singular = False
    if finder.polish and res >= finder.newton_tol:
        pol = newton_polish(sys, m0, c, tol=finder.newton_tol, max_iter=finder.newton_maxiter, pmap=pmap)
        singular = pol.singular
        pc = pol.q0.as_array()
        slack = 1e-6 * (1.0 + float(np.max(state.initial_beta - state.initial_alpha)))
        if pol.residual < res and _inside_box(pc, state.initial_alpha, state.initial_beta, slack):
            c, res, polished = pc, pol.residual, True
        elif pol.residual < res:
            diagnostics.append("Newton polish left the initial bracket; kept the bisection midpoint")
    return _Attempt(c, m0, res, state.iteration, pmap, (lam, mu), xi, polished, singular, state.max_width, diagnostics)


def _solve_direct(sys, settings, finder, m0_override):
    """Try the estimated ``m0`` first, then doubled values, until the residual is acceptable."""
    diagnostics = []
    cands, method = _m0_candidates(sys, finder, m0_override, diagnostics)
    best = None
    spent = 0
    for m0 in cands:
        try:
            att = _attempt(sys, m0, settings, finder, diagnostics)
        except (CalibrationFailed, CertificationFailure, MidpointEscape) as exc:
            diagnostics.append(f"m0 = {m0}: {type(exc).__name__}: {exc}")
            continue
        spent += att.pmap.count
        if best is None or att.residual < best.residual:
            best = att
        if att.residual < finder.accept_residual:
            break
        diagnostics.append(f"m0 = {m0}: residual {att.residual:.3e} stalled; doubling m0")
    if best is None or best.residual >= finder.accept_residual:
        raise NoConvergence(
            "no periodic solution certified",
            {"diagnostics": diagnostics, "best_residual": None if best is None else best.residual},
        )
    # report the evaluations of every attempt, not only the successful one
    best.pmap.count = spent
    best.diagnostics = diagnostics
    if m0_override is not None:
        method = "Override"
    elif best.m0 != cands[0]:
        method = "Search"
    return best, method


def _sign_certificate(sys, c0, m0, settings, sign_mode):
    traj = integrate_ivp(sys, from_signed(c0), 0.0, m0 * sys.T, settings)
    signed = to_signed(traj.q)
    min0, min1 = float(signed[:, 0].min()), float(signed[:, 1].min())
    max0, max1 = float(signed[:, 0].max()), float(signed[:, 1].max())
    if sign_mode > 0:
        ok0, ok1 = min0 >= -SIGN_TOL, min1 >= -SIGN_TOL
    else:
        ok0, ok1 = max0 <= SIGN_TOL, max1 <= SIGN_TOL
    return {
        "convention": "c0, c1 >= 0" if sign_mode > 0 else "c0, c1 <= 0",
        "c0": ok0, "c1": ok1,
        "min_c0": min0, "min_c1": min1, "max_c0": max0, "max_c1": max1,
        "completed": traj.completed,
    }


def _report_from(sys, att: _Attempt, route, method, settings, sign_mode=+1) -> PeriodicSolutionReport:
    pmap = att.pmap
    cert = _sign_certificate(sys, att.c0, att.m0, settings, sign_mode)
    pmap.count += 1
    residual = pmap.residual(att.c0)
    mult = floquet_multipliers(pmap, att.c0)
    diags = list(att.diagnostics)
    if not (cert["c0"] and cert["c1"]):
        diags.append("CERTIFICATION-FAILURE: sign certificate violated along the period")
    return PeriodicSolutionReport(
        q0=SignedComponents.from_array(att.c0),
        m0=att.m0,
        residual=residual,
        route=route,
        sign_certificate=cert,
        floquet=[] if mult is None else sorted(mult.tolist(), key=lambda z: (-abs(z), z.real, z.imag)),
        stability=stability_label(mult),
        iterations=att.iterations,
        poincare_evaluations=pmap.count,
        m0_method=method,
        scale=att.scale,
        signature=att.signature,
        polished=att.polished,
        polish_singular=att.singular,
        bisection_width=att.width,
        extension_deviation=periodic_extension_deviation(sys, att.c0, att.m0, settings=settings),
        diagnostics=diags,
    )


def _solve_reversed(sys, settings, finder, m0_override, route):
    """Nonpositive solution via ``q*(t) = -p(-t)`` with ``p`` found on the reversed system."""
    rsys = time_reverse(sys)
    # the Remark 3.1 shortcut is only used on the direct route
    att, method = _solve_direct(rsys, settings, replace(finder, use_remark31=False), m0_override)
    c_star = -att.c0
    star = replace(att, c0=c_star, pmap=PoincareMap(sys, att.m0, settings))
    star.pmap.count = att.pmap.count
    rep = _report_from(sys, star, route, method, settings, sign_mode=-1)
    rep.diagnostics.append(f"reversed-frame residual {att.residual:.3e}")
    return rep


def periodic_extension_deviation(sys: RiccatiSystem, c0, m0: int, periods: int = 3, settings=None, samples: int = 128) -> float:
    """Largest gap between successive periods of the extended solution.

    Each period is integrated afresh from the previous period's endpoint and
    sampled on the same relative grid; the result is the maximum deviation of
    any later period (and of its endpoint) from the first one. A fixed point
    of the Poincare map with residual ``r`` gives a value of order ``r``.
    """
    settings = settings or IntegrationSettings()
    span = m0 * sys.T
    rel = np.linspace(0.0, span, samples + 1)
    start = from_signed(np.asarray(tuple(c0), dtype=float))
    first = None
    worst = 0.0
    for k in range(periods):
        traj = integrate_ivp(sys, start, k * span, (k + 1) * span, settings)
        if not traj.completed:
            return math.inf
        path = traj.at(k * span + rel)
        if first is None:
            first = path
        else:
            worst = max(worst, float(np.max(np.abs(path - first))))
        start = traj.final
    return max(worst, float(np.max(np.abs(start - first[0]))))


def periodic_drift(sys: RiccatiSystem, c_a, c_b, m0: int, settings=None, samples_per_period=256):
    """Increment over one period ``m0 T`` of ``int Re[a (q_a - q_b)]`` for two periodic solutions."""
    settings = settings or IntegrationSettings()
    span = m0 * sys.T
    t = np.linspace(0.0, span, m0 * samples_per_period + 1)
    ta = integrate_ivp(sys, from_signed(c_a), 0.0, span, settings)
    tb = integrate_ivp(sys, from_signed(c_b), 0.0, span, settings)
    if not (ta.completed and tb.completed):
        return math.nan
    integrand = qmul(sys.a(t), ta.at(t) - tb.at(t))[:, 0]
    return float(np.sum(0.5 * np.diff(t) * (integrand[1:] + integrand[:-1])))


def find_periodic_solution(
    sys: RiccatiSystem,
    settings: IntegrationSettings | None = None,
    finder: FinderSettings | None = None,
    *,
    m0: int | None = None,
    force: bool = False,
    report=None,
) -> PeriodicSolutionReport:
    """Full pipeline: conditions, m0, signature, calibration, bisection, polish.

    ``Theorem31`` returns the solution with ``c0, c1 >= 0``; ``Corollary31``
    returns ``q*(t) = -p(-t)`` from the time-reversed system; ``Corollary32``
    returns the former with the latter attached as ``companion``.
    """
    settings = settings or IntegrationSettings()
    finder = finder or FinderSettings()
    report = report or cond.check_theorem31_conditions(sys, finder.grid_size, with_wilczynski=False)
    route = report.route
    if route == cond.NOT_APPLICABLE:
        if not force:
            raise NotApplicable("hypotheses of the existence theorem are not met", report)
        route = cond.THEOREM31 if report.integral_b0c0 >= 0 else cond.COROLLARY31
        log.info("forced run outside the hypotheses on route %s", route)

    if route == cond.COROLLARY31:
        return _solve_reversed(sys, settings, finder, m0, route)

    att, method = _solve_direct(sys, settings, finder, m0)
    rep = _report_from(sys, att, route, method, settings)
    if not report.theorem31_applicable:
        rep.diagnostics.append("forced run: hypotheses not satisfied")
    if route == cond.COROLLARY32:
        try:
            rep.companion = _solve_reversed(sys, settings, finder, m0, route)
        except (NoConvergence, CertificationFailure, CalibrationFailed) as exc:
            rep.diagnostics.append(f"companion solution not found: {exc}")
        if rep.companion is not None:
            mm = math.lcm(rep.m0, rep.companion.m0)
            inc = periodic_drift(sys, rep.companion.q0.as_array(), rep.q0.as_array(), mm, settings)
            rep.normality = {
                "pair": "companion minus primary",
                "period_multiplier": mm,
                "increment_per_period": inc,
                "classification": "DriftNegative" if inc < 0 else ("BoundedPair" if inc == 0 else "Inconclusive"),
            }
    return rep


# ---------------------------------------------------------------------------
# normality of solution pairs

BOUNDED_PAIR = "BoundedPair"
DRIFT_NEGATIVE = "DriftNegative"
INCONCLUSIVE = "Inconclusive"


@dataclass
class NormalityReport:
    q0_a: SignedComponents
    q0_b: SignedComponents
    times: np.ndarray
    values: np.ndarray
    classification: str
    drift_rate: float
    note: str = ""

    def to_dict(self):
        step = max(1, self.times.size // 512)
        return {
            "q0_a": list(self.q0_a),
            "q0_b": list(self.q0_b),
            "classification": self.classification,
            "drift_rate": self.drift_rate,
            "note": self.note,
            "samples": [[float(t), float(v)] for t, v in zip(self.times[::step], self.values[::step])],
        }


def classify_pair(
    sys: RiccatiSystem,
    q0_a,
    q0_b,
    periods: int = 50,
    settings: IntegrationSettings | None = None,
    *,
    samples_per_period: int = 256,
) -> NormalityReport:
    """Boundedness of ``I(t) = int_0^t Re[a (q_a - q_b)]`` over ``periods`` periods.

    ``q0_a``/``q0_b`` are signed coordinates. ``BoundedPair`` when the range
    of ``I`` over the second half is below ``1e-3 (1 + range over the first
    half)``; ``DriftNegative`` when every per-period increment in the second
    half is negative with relative spread under 10%.
    """
    settings = settings or IntegrationSettings()
    ca = np.asarray(tuple(q0_a), dtype=float)
    cb = np.asarray(tuple(q0_b), dtype=float)
    span = periods * sys.T
    t = np.linspace(0.0, span, periods * samples_per_period + 1)
    ta = integrate_ivp(sys, from_signed(ca), 0.0, span, settings)
    tb = integrate_ivp(sys, from_signed(cb), 0.0, span, settings)
    sa, sb = SignedComponents.from_array(ca), SignedComponents.from_array(cb)
    if not (ta.completed and tb.completed):
        which = "a" if not ta.completed else "b"
        tr = ta if which == "a" else tb
        note = f"solution {which} stopped ({tr.status.value}) at t = {tr.step_t[-1]:.6g}"
        return NormalityReport(sa, sb, t[:1], np.zeros(1), INCONCLUSIVE, math.nan, note)
    integrand = qmul(sys.a(t), ta.at(t) - tb.at(t))[:, 0]
    dt = np.diff(t)
    I = np.concatenate([[0.0], np.cumsum(0.5 * dt * (integrand[1:] + integrand[:-1]))])
    half = periods // 2
    cut = half * samples_per_period
    first, second = I[: cut + 1], I[cut:]
    range1 = float(first.max() - first.min())
    range2 = float(second.max() - second.min())
    marks = I[::samples_per_period]
    inc = np.diff(marks)[half:]
    rate = float(np.mean(inc) / sys.T) if inc.size else math.nan
    if range2 < 1e-3 * (1.0 + range1):
        cls = BOUNDED_PAIR
    elif inc.size and np.all(inc < 0) and (inc.max() - inc.min()) < 0.1 * abs(inc.mean()):
        cls = DRIFT_NEGATIVE
    else:
        cls = INCONCLUSIVE
    return NormalityReport(sa, sb, t, I, cls, rate)
