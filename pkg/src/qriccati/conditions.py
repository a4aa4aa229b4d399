"""Applicability checks for the periodic-solution construction.

All identity (``== 0``) and sign (``<= 0``) hypotheses are decided on a
uniform grid over one period, with the tolerances held in
:class:`Tolerances`. Every verdict carries its margin so borderline systems
are visible in the report.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coefficients import (
    DEFAULT_GRID,
    DiscriminantProfile,
    RiccatiSystem,
    bracket_ratio,
    discriminant_values,
    discriminants,
)
from .errors import CapExceeded
from .quaternion import qark, qmul, qnorm

PASS, FAIL, INDETERMINATE = "pass", "fail", "indeterminate"

THEOREM31 = "Theorem31"
COROLLARY31 = "Corollary31"
COROLLARY32 = "Corollary32"
NOT_APPLICABLE = "NotApplicable"

REMARK31_THRESHOLD = math.log(math.sqrt(2.0))
M0_CAP = 10**6


@dataclass(frozen=True)
class Tolerances:
    identity: float = 1e-12
    sign: float = 1e-9
    integral: float = 1e-10
    bracket_bound: float = 1e9


@dataclass
class Verdict:
    verdict: str
    witness_t: float | None = None
    margin: float | None = None
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def to_dict(self):
        return {"verdict": self.verdict, "witness_t": self.witness_t, "margin": self.margin, "detail": self.detail}


@dataclass
class ConditionReport:
    conditions: dict
    integral_b0c0: float
    route: str
    discriminant_profile: DiscriminantProfile
    reversed_conditions: dict | None = None
    wilczynski: dict | None = None
    notes: list = field(default_factory=list)

    def passes(self, *names) -> bool:
        return all(self.conditions[n].passed for n in names)

    @property
    def theorem31_applicable(self) -> bool:
        return self.route != NOT_APPLICABLE

    @property
    def theorem11_applicable(self) -> bool:
        return bool(self.wilczynski) and all(self.wilczynski[k].passed for k in ("i", "ii", "iii"))

    def to_dict(self):
        out = {
            "theorem31": {
                "conditions": {k: v.to_dict() for k, v in self.conditions.items()},
                "integral_b0_plus_c0": self.integral_b0c0,
                "route": self.route,
                "discriminants": self.discriminant_profile.to_dict(),
                "applicable": self.theorem31_applicable,
            },
            "notes": list(self.notes),
        }
        if self.reversed_conditions is not None:
            out["theorem31"]["time_reversed_conditions"] = {k: v.to_dict() for k, v in self.reversed_conditions.items()}
        if self.wilczynski is not None:
            out["theorem11"] = {k: v.to_dict() for k, v in self.wilczynski.items()}
            out["theorem11"]["applicable"] = self.theorem11_applicable
        return out


def _worst(grid, bad_mask):
    """First grid point where ``bad_mask`` holds, as a witness time."""
    idx = np.flatnonzero(bad_mask)
    return float(grid[idx[0]]) if idx.size else None


def _conditions_1_to_4(sys: RiccatiSystem, grid, profile: DiscriminantProfile, tol: Tolerances) -> dict:
    a, b, c, d = sys.evaluate(grid)
    out = {}

    # 1) a0, a1 >= 0; a0 + a1 not identically 0; a2, a3 identically 0
    neg = np.minimum(a[:, 0], a[:, 1])
    off = np.max(np.abs(a[:, 2:]), axis=1)
    active = a[:, 0] + a[:, 1]
    detail = {"min_a0_a1": float(neg.min()), "max_abs_a2_a3": float(off.max()), "max_a0_plus_a1": float(active.max())}
    if np.any(neg < -tol.identity):
        out["1"] = Verdict(FAIL, _worst(grid, neg < -tol.identity), float(neg.min()), detail)
    elif np.any(off > tol.identity):
        out["1"] = Verdict(FAIL, _worst(grid, off > tol.identity), float(-off.max()), detail)
    elif active.max() <= tol.sign:
        detail["reason"] = "a0 + a1 vanishes identically"
        out["1"] = Verdict(FAIL, float(grid[0]), float(active.max()), detail)
    else:
        out["1"] = Verdict(PASS, None, float(min(neg.min(), active.max())), detail)

    # 2) sign part: D_n <= 0 for n = 0, 1, 2 (D_0 is needed by the sign-preservation guard)
    D = profile.D
    checked = (0, 1, 2)
    maxD = {n: float(D[n].max()) for n in checked}
    bad = [n for n in checked if maxD[n] > tol.sign]
    detail = {"max_D": {str(n): maxD[n] for n in checked}}
    if bad:
        n = max(bad, key=lambda m: maxD[m])
        t_w, _ = profile.witness_positive(n)
        detail["offending_n"] = bad
        out["2"] = Verdict(FAIL, t_w, -maxD[n], detail)
    else:
        out["2"] = Verdict(PASS, None, -max(maxD.values()), detail)

    # 2, nondegenerate part: D_1, D_2 not identically zero
    mins = {n: float(D[n].min()) for n in (1, 2)}
    degenerate = [n for n in (1, 2) if mins[n] >= -tol.sign]
    detail = {"min_D": {str(n): mins[n] for n in (1, 2)}, "degenerate_n": degenerate}
    if degenerate:
        detail["reason"] = "D_n vanishes identically on the grid; only the constructive m0 bound depends on this"
        out["2_nondegenerate"] = Verdict(INDETERMINATE, float(grid[0]), max(-mins[n] for n in degenerate), detail)
    else:
        out["2_nondegenerate"] = Verdict(PASS, None, min(-mins[n] for n in (1, 2)), detail)

    # 3) supp(b_n + c_n) in supp(a_0), supp(b_n - c_n) in supp(a_1), n = 2, 3
    plus = np.abs(b[:, 2:] + c[:, 2:]).max(axis=1)
    minus = np.abs(b[:, 2:] - c[:, 2:]).max(axis=1)
    viol_plus = (plus > tol.identity) & (np.abs(a[:, 0]) <= tol.identity)
    viol_minus = (minus > tol.identity) & (np.abs(a[:, 1]) <= tol.identity)
    viol = viol_plus | viol_minus
    if np.any(viol):
        out["3"] = Verdict(FAIL, _worst(grid, viol), None,
                           {"plus_violations": int(viol_plus.sum()), "minus_violations": int(viol_minus.sum())})
    else:
        out["3"] = Verdict(PASS)

    # 4) bracket ratios bounded
    sups = {}
    for n in (2, 3):
        bs, cs = sys.b[n], sys.c[n]
        sups[f"(b{n}+c{n})/a0"] = float(np.max(np.abs(bracket_ratio(bs + cs, sys.a[0], grid, tol.identity))))
        sups[f"(b{n}-c{n})/a1"] = float(np.max(np.abs(bracket_ratio(bs - cs, sys.a[1], grid, tol.identity))))
    worst = max(sups.values())
    if math.isfinite(worst) and worst <= tol.bracket_bound:
        out["4"] = Verdict(PASS, None, tol.bracket_bound - worst, {"sup": sups})
    else:
        out["4"] = Verdict(INDETERMINATE, None, None, {"sup": sups, "reason": "bracket ratio exceeds the finiteness bound"})
    return out


def check_theorem31_conditions(
    sys: RiccatiSystem,
    grid_size: int = DEFAULT_GRID,
    *,
    tol: Tolerances = Tolerances(),
    literal_discriminants: bool = False,
    with_wilczynski: bool = True,
) -> ConditionReport:
    """Check the five hypotheses and pick the route.

    Route rules: conditions 1-4 must pass (the nondegeneracy half of
    condition 2 may be indeterminate); then the sign of ``I0 = int_0^T (b0 + c0)``
    selects ``Theorem31`` (> 0), ``Corollary32`` (= 0 within tolerance) or
    ``Corollary31`` (< 0, confirmed on the time-reversed system).
    """
    grid = sys.grid(grid_size)
    profile = discriminants(sys, grid_size, literal=literal_discriminants, flag_tol=tol.sign)
    conds = _conditions_1_to_4(sys, grid, profile, tol)
    I0 = (sys.b[0] + sys.c[0]).integral(0.0, sys.T)
    if I0 >= -tol.integral:
        conds["5"] = Verdict(PASS, None, I0)
    else:
        conds["5"] = Verdict(FAIL, sys.T, I0, {"reason": "int_0^T (b0 + c0) < 0"})

    notes = []
    if profile.p23_reading_disagrees:
        notes.append("D_2 sign flags differ under the p_{2,3} = b3 + c3 reading")
    core = all(conds[k].passed for k in ("1", "2", "3", "4"))
    reversed_conds = None
    if not core:
        route = NOT_APPLICABLE
    elif I0 > tol.integral:
        route = THEOREM31
    elif I0 >= -tol.integral:
        route = COROLLARY32
    else:
        from .transforms import time_reverse

        rsys = time_reverse(sys)
        rprofile = discriminants(rsys, grid_size, literal=literal_discriminants, flag_tol=tol.sign)
        reversed_conds = _conditions_1_to_4(rsys, rsys.grid(grid_size), rprofile, tol)
        route = COROLLARY31 if all(reversed_conds[k].passed for k in ("1", "2", "3", "4")) else NOT_APPLICABLE
    if conds["2_nondegenerate"].verdict != PASS and route != NOT_APPLICABLE:
        notes.append("D_1 or D_2 vanishes identically: m0 falls back to search")
    report = ConditionReport(conds, float(I0), route, profile, reversed_conds, notes=notes)
    if with_wilczynski:
        report.wilczynski = check_wilczynski(sys, grid_size, tol=tol)
    return report


# ---------------------------------------------------------------------------
# m0 estimate

@dataclass
class M0Estimate:
    m0: int
    method: str
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {"m0": self.m0, "method": self.method, "details": self.details}


def reciprocal_m0(I0: float) -> int:
    """Smallest multiplier making ``m I0 >= 1``: ``floor(1 / I0) + 1``."""
    if not I0 > 0:
        raise ValueError("the reciprocal estimate needs a positive integral")
    return int(math.floor(1.0 / I0)) + 1


def _gauss_period(T, panels=64, order=8):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, T, panels + 1)
    h = np.diff(edges)
    nodes = (edges[:-1, None] + 0.5 * h[:, None] * (x + 1.0)).ravel()
    weights = (0.5 * h[:, None] * w).ravel()
    return nodes, weights


def double_integral_coefficients(sys: RiccatiSystem, n: int, *, literal=False):
    """``(A, B)`` with ``A = int_0^T -D_n`` and ``B = int_0^T tau (-D_n(tau)) dtau``.

    By periodicity ``int_0^{mT} int_0^t -D_n = T A m(m+1)/2 - m B``.
    """
    nodes, weights = _gauss_period(sys.T)
    _, D = discriminant_values(sys, nodes, literal=literal)
    f = -D[n]
    return float(weights @ f), float(weights @ (nodes * f))


def iterated_integral(A: float, B: float, T: float, m: int) -> float:
    return T * A * m * (m + 1) / 2.0 - m * B


def oscillation_epsilon(sys: RiccatiSystem, grid) -> tuple[float, float]:
    """``(eps0, omega)`` where ``omega`` is the range of ``int_0^t (b0 + c0)`` over a period."""
    s = sys.b[0] + sys.c[0]
    P = s.antiderivative_periodic()
    R = s.const * grid + P(grid) - P(0.0)
    omega = float(R.max() - R.min())
    return math.exp(-omega), omega


def estimate_m0(
    sys: RiccatiSystem,
    profile: DiscriminantProfile | None = None,
    *,
    use_remark31: bool = True,
    tol: Tolerances = Tolerances(),
    cap: int = M0_CAP,
    literal_discriminants: bool = False,
) -> M0Estimate:
    """Period multiplier following the existence argument.

    ``I0 > 0``: ``floor(1/I0) + 1``, or 1 when ``I0 > ln sqrt 2`` and
    ``use_remark31``. ``I0 = 0``: smallest ``m`` with
    ``eps0^2 * F0(m) * F1(m) >= e^3`` where ``Fn(m)`` is the iterated integral
    of ``-D_n`` over ``[0, mT]``. Raises :class:`CapExceeded` when no
    ``m <= cap`` works and ``ValueError`` when ``I0 < 0``.
    """
    I0 = (sys.b[0] + sys.c[0]).integral(0.0, sys.T)
    if I0 > tol.integral:
        m_rec = reciprocal_m0(I0)
        details = {"I0": I0, "reciprocal_m0": m_rec, "remark31_threshold": REMARK31_THRESHOLD}
        if use_remark31 and I0 > REMARK31_THRESHOLD:
            return M0Estimate(1, "Remark31", details)
        return M0Estimate(m_rec, "ReciprocalIntegral", details)
    if I0 < -tol.integral:
        raise ValueError(f"integral of b0 + c0 is negative ({I0:.3e}); estimate on the time-reversed system")

    grid = profile.grid if profile is not None else sys.grid(DEFAULT_GRID)
    eps0, omega = oscillation_epsilon(sys, grid)
    A0, B0 = double_integral_coefficients(sys, 0, literal=literal_discriminants)
    A1, B1 = double_integral_coefficients(sys, 1, literal=literal_discriminants)
    T = sys.T
    target = math.e**3

    def lhs(m):
        return eps0**2 * iterated_integral(A0, B0, T, m) * iterated_integral(A1, B1, T, m)

    details = {"I0": I0, "eps0": eps0, "omega": omega, "A0": A0, "B0": B0, "A1": A1, "B1": B1}
    if lhs(cap) < target:
        details["lhs_at_cap"] = lhs(cap)
        raise CapExceeded(f"no m <= {cap} satisfies the constructive bound (D0*D1 degenerate?)")
    # lhs is nondecreasing in m because -D_n >= 0; bisect on integers
    lo, hi = 0, cap
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if lhs(mid) >= target:
            hi = mid
        else:
            lo = mid
    details["bound_value"] = lhs(hi)
    return M0Estimate(hi, "ConstructiveBound", details)


# ---------------------------------------------------------------------------
# comparison criterion based on the Ark angle

def check_wilczynski(sys: RiccatiSystem, grid_size: int = DEFAULT_GRID, *, tol: Tolerances = Tolerances()) -> dict:
    grid = sys.grid(grid_size)
    a, b, c, d = sys.evaluate(grid)
    ark_a = qark(a)
    ark_md = qark(-d)
    max_ark_a = float(ark_a.max())
    max_ark_md = float(ark_md.max())
    ad = qnorm(qmul(a, d))
    out = {}

    detail = {"max_ark_a": max_ark_a, "max_abs_ad": float(ad.max())}
    if ad.max() <= tol.identity:
        detail["reason"] = "a d vanishes identically"
        out["i"] = Verdict(FAIL, float(grid[0]), float(ad.max()), detail)
    elif max_ark_a >= math.pi / 4:
        out["i"] = Verdict(FAIL, float(grid[int(np.argmax(ark_a))]), math.pi / 4 - max_ark_a, detail)
    else:
        out["i"] = Verdict(PASS, None, math.pi / 4 - max_ark_a, detail)

    total = max_ark_a + max_ark_md
    detail = {"max_ark_a": max_ark_a, "max_ark_minus_d": max_ark_md}
    if total <= math.pi / 2 + tol.identity:
        out["ii"] = Verdict(PASS, None, math.pi / 2 - total, detail)
    else:
        out["ii"] = Verdict(FAIL, float(grid[int(np.argmax(ark_md))]), math.pi / 2 - total, detail)

    s = b + c
    re_max = float(s[:, 0].max())
    im_max = float(np.abs(s[:, 1:]).max())
    detail = {"max_re_b_plus_c": re_max, "max_abs_im_b_plus_c": im_max}
    if re_max > tol.identity:
        out["iii"] = Verdict(FAIL, float(grid[int(np.argmax(s[:, 0]))]), -re_max, detail)
    elif im_max > tol.identity:
        out["iii"] = Verdict(FAIL, float(grid[int(np.argmax(np.abs(s[:, 1:]).max(axis=1)))]), -im_max, detail)
    else:
        out["iii"] = Verdict(PASS, None, -max(re_max, im_max), detail)
    return out
