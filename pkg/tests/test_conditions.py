import math

import pytest

from qriccati import conditions as cond
from qriccati.coefficients import QuaternionCoefficient, RealFourierSeries, RiccatiSystem
from qriccati.errors import CapExceeded
from qriccati.transforms import time_reverse

T = 1.0


def series(const=0.0, harmonics=()):
    return RealFourierSeries.from_harmonics(T, const, harmonics)


def coef(*comps):
    comps = list(comps) + [0.0] * (4 - len(comps))
    return QuaternionCoefficient([c if isinstance(c, RealFourierSeries) else series(c) for c in comps])


def quaternionic_system():
    return RiccatiSystem(coef(1.0, 1.0), coef(), coef(), coef(-0.8, series(0.5, [(1, 0.0, 0.3)]), 0.2))


def tanh_system(b0=0.0):
    return RiccatiSystem(coef(1.0), coef(b0), coef(), coef(-1.0))


def test_quaternionic_example_routes_corollary32():
    rep = cond.check_theorem31_conditions(quaternionic_system())
    for k in ("1", "2", "2_nondegenerate", "3", "4", "5"):
        assert rep.conditions[k].verdict == cond.PASS, k
    assert rep.route == cond.COROLLARY32
    assert rep.theorem31_applicable


def test_zero_a_not_applicable_with_witness():
    rep = cond.check_theorem31_conditions(RiccatiSystem(coef(), coef(), coef(), coef(-1.0)))
    assert rep.conditions["1"].verdict == cond.FAIL
    assert rep.route == cond.NOT_APPLICABLE
    for v in rep.conditions.values():
        if v.verdict == cond.FAIL:
            assert v.witness_t is not None and 0.0 <= v.witness_t <= T


def test_negative_integral_routes_corollary31():
    rep = cond.check_theorem31_conditions(tanh_system(b0=-1.0))
    assert rep.conditions["5"].verdict == cond.FAIL
    assert rep.route == cond.COROLLARY31
    assert rep.reversed_conditions is not None


def test_positive_integral_routes_theorem31():
    rep = cond.check_theorem31_conditions(tanh_system(b0=0.5))
    assert rep.route == cond.THEOREM31


def test_negative_a_component_fails_condition_1():
    sys = RiccatiSystem(coef(1.0, series(0.0, [(1, 0.0, 1.0)])), coef(), coef(), coef(-1.0))
    rep = cond.check_theorem31_conditions(sys)
    v = rep.conditions["1"]
    assert v.verdict == cond.FAIL
    # sin(2 pi t) is negative on (1/2, 1)
    assert 0.5 < v.witness_t < 1.0


def test_positive_discriminant_fails_condition_2():
    sys = RiccatiSystem(coef(1.0, 1.0), coef(), coef(), coef(-1.0, -0.5))
    rep = cond.check_theorem31_conditions(sys)
    assert rep.conditions["2"].verdict == cond.FAIL
    assert rep.route == cond.NOT_APPLICABLE


def test_degenerate_discriminants_are_indeterminate_not_fail():
    rep = cond.check_theorem31_conditions(tanh_system())
    assert rep.conditions["2"].verdict == cond.PASS
    assert rep.conditions["2_nondegenerate"].verdict == cond.INDETERMINATE
    assert rep.route == cond.COROLLARY32


def test_support_inclusion_condition_3():
    # b2 + c2 nonzero where a0 vanishes
    a0 = series(0.5, [(1, 0.5, 0.0)])  # zero at t = 1/2
    sys = RiccatiSystem(coef(a0, 1.0), coef(0.0, 0.0, 0.3), coef(), coef(-1.0, -1.0))
    # 513 points put a node exactly on t = 1/2
    rep = cond.check_theorem31_conditions(sys, 513)
    assert rep.conditions["3"].verdict == cond.FAIL
    assert rep.conditions["3"].witness_t == 0.5


def test_route_is_unique():
    for sys in (quaternionic_system(), tanh_system(), tanh_system(-1.0), tanh_system(1.0)):
        rep = cond.check_theorem31_conditions(sys)
        assert rep.route in (cond.THEOREM31, cond.COROLLARY31, cond.COROLLARY32, cond.NOT_APPLICABLE)


def test_time_reversal_flips_integral():
    sys = RiccatiSystem(coef(1.0), coef(0.3, series(0.0, [(1, 0.2, 0.1)])), coef(-0.1), coef(-1.0))
    i_fwd = cond.check_theorem31_conditions(sys, with_wilczynski=False).integral_b0c0
    i_rev = cond.check_theorem31_conditions(time_reverse(sys), with_wilczynski=False).integral_b0c0
    assert i_rev == -i_fwd


def test_reciprocal_m0():
    sys = tanh_system(b0=0.5)
    est = cond.estimate_m0(sys, use_remark31=False)
    assert (est.m0, est.method) == (3, "ReciprocalIntegral")
    assert cond.reciprocal_m0(0.5) == 3


def test_remark31_threshold():
    assert cond.REMARK31_THRESHOLD == pytest.approx(math.log(math.sqrt(2.0)))
    est = cond.estimate_m0(tanh_system(b0=0.4))
    assert (est.m0, est.method) == (1, "Remark31")
    # below the threshold the reciprocal formula applies
    est = cond.estimate_m0(tanh_system(b0=0.3))
    assert (est.m0, est.method) == (4, "ReciprocalIntegral")


def test_constructive_bound_constant_discriminants():
    # D0 = -4, D1 = -2: the iterated integrals are 2 m^2 and m^2
    sys = RiccatiSystem(coef(1.0, 1.0), coef(), coef(), coef(-1.0, 0.5))
    est = cond.estimate_m0(sys)
    assert est.method == "ConstructiveBound"
    assert est.m0 == 2
    assert est.details["eps0"] == 1.0
    for m in range(1, 5):
        assert cond.iterated_integral(est.details["A0"], est.details["B0"], T, m) == pytest.approx(2 * m * m)
        assert cond.iterated_integral(est.details["A1"], est.details["B1"], T, m) == pytest.approx(m * m)
    # closed form: smallest m with 2 m^4 >= e^3
    assert min(m for m in range(1, 10) if 2 * m**4 >= math.e**3) == 2


def test_constructive_bound_monotone_in_discriminants():
    base = RiccatiSystem(coef(1.0, 1.0), coef(), coef(), coef(-0.05, 0.02))
    stronger = RiccatiSystem(coef(1.0, 1.0), coef(), coef(), coef(-0.5, 0.2))
    assert cond.estimate_m0(stronger).m0 <= cond.estimate_m0(base).m0


def test_constructive_bound_degenerate_raises():
    with pytest.raises(CapExceeded):
        cond.estimate_m0(tanh_system())


def test_negative_integral_rejected():
    with pytest.raises(ValueError):
        cond.estimate_m0(tanh_system(b0=-0.2))


def test_oscillation_epsilon():
    sys = RiccatiSystem(coef(1.0), coef(series(0.0, [(1, 0.0, 2 * math.pi)])), coef(), coef(-1.0))
    eps0, omega = cond.oscillation_epsilon(sys, sys.grid(2049))
    # the running integral is 1 - cos(2 pi t), whose range is 2
    assert omega == pytest.approx(2.0, abs=1e-6)
    assert eps0 == pytest.approx(math.exp(-2.0), rel=1e-6)


def test_wilczynski_tanh_all_hold():
    w = cond.check_wilczynski(tanh_system())
    assert all(v.verdict == cond.PASS for v in w.values())


def test_wilczynski_zero_d_fails_i():
    w = cond.check_wilczynski(RiccatiSystem(coef(1.0), coef(), coef(), coef()))
    assert w["i"].verdict == cond.FAIL


def test_wilczynski_imaginary_b_plus_c_fails_iii():
    sys = RiccatiSystem(coef(1.0), coef(0.0, 0.1), coef(), coef(-1.0))
    w = cond.check_wilczynski(sys)
    assert w["iii"].verdict == cond.FAIL
    rep = cond.check_theorem31_conditions(sys)
    assert rep.route == cond.COROLLARY32
    assert not rep.theorem11_applicable


def test_wilczynski_ark_scale_invariant():
    sys = RiccatiSystem(coef(1.0, 0.5), coef(), coef(), coef(-1.0))
    scaled = RiccatiSystem(coef(3.0, 1.5), coef(), coef(), coef(-1.0))
    w1 = cond.check_wilczynski(sys)["i"]
    w2 = cond.check_wilczynski(scaled)["i"]
    assert w1.detail["max_ark_a"] == pytest.approx(w2.detail["max_ark_a"], abs=1e-15)


def test_report_serializes():
    rep = cond.check_theorem31_conditions(quaternionic_system())
    d = rep.to_dict()
    assert d["theorem31"]["route"] == cond.COROLLARY32
    assert set(d["theorem11"]) >= {"i", "ii", "iii", "applicable"}
