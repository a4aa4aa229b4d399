import numpy as np
import pytest

from qriccati.coefficients import QuaternionCoefficient, RealFourierSeries, RiccatiSystem
from qriccati.errors import NonUnitQuaternion, StrictRefusal, Unclassified, VanishingLambda
from qriccati.integrator import IntegrationSettings, integrate_ivp
from qriccati.transforms import (
    CASE_TABLE,
    CONJUGATE,
    DIRECTLY_COVERED,
    LEFT_UNIT_MUL,
    NEGATE,
    RIGHT_UNIT_MUL,
    TIME_REVERSE,
    TransformStep,
    apply_basic_transform,
    classify_sign_case,
    forward_value,
    lambda_conjugation,
    lambda_step,
    pullback_solution,
    push_forward,
    reduce_to_case_I,
    replay,
)

T = 1.0
SPAN = 2.0 * T
# tight enough that integration error stays far below the 1e-6 oracle bound
TIGHT = IntegrationSettings(rel_tol=1e-13, abs_tol=1e-14)


def random_coef(rng, scale, nh=2):
    return QuaternionCoefficient(
        [RealFourierSeries(T, scale * rng.normal(), scale * rng.normal(size=nh), scale * rng.normal(size=nh)) for _ in range(4)]
    )


def random_system(rng, scale=0.3):
    return RiccatiSystem(*(random_coef(rng, scale) for _ in range(4)))


def random_unit(rng):
    u = rng.normal(size=4)
    return tuple(u / np.linalg.norm(u))


def lam_example():
    # 2 + 0.5 sin(2 pi t / T) i
    return QuaternionCoefficient(
        [RealFourierSeries(T, 2.0), RealFourierSeries.from_harmonics(T, 0.0, [(1, 0.0, 0.5)]), RealFourierSeries(T, 0.0), RealFourierSeries(T, 0.0)]
    )


def trajectory_deviation(sys, step, q0, n_harmonics=None):
    """Integrate both equations and compare through the substitution."""
    if step.kind == "LambdaConjugate":
        target = lambda_conjugation(sys, step.lam, n_harmonics=n_harmonics)[0]
    else:
        target = apply_basic_transform(sys, step)
    times = np.linspace(0.0, SPAN, 81)
    src = integrate_ivp(sys, q0, 0.0, SPAN, TIGHT)
    assert src.completed
    mapped_t, mapped_q = forward_value(step, src.at(times), times)
    if step.kind == TIME_REVERSE:
        # r(s) = -q(-s) lives on [-SPAN, 0]; start from r(-SPAN) and run forward
        _, r0 = forward_value(step, src.final, SPAN)
        dst = integrate_ivp(target, r0, -SPAN, 0.0, TIGHT)
        got = dst.at(np.clip(mapped_t, -SPAN, 0.0))
    else:
        _, r0 = forward_value(step, np.asarray(q0, dtype=float), 0.0)
        dst = integrate_ivp(target, r0, 0.0, SPAN, TIGHT)
        got = dst.at(mapped_t)
    assert dst.completed
    return float(np.max(np.abs(got - mapped_q)))


def _steps(rng):
    return [
        TransformStep(CONJUGATE),
        TransformStep(NEGATE),
        TransformStep(TIME_REVERSE),
        TransformStep(LEFT_UNIT_MUL, random_unit(rng)),
        TransformStep(RIGHT_UNIT_MUL, random_unit(rng)),
    ]


@pytest.mark.parametrize("index", range(5))
def test_basic_steps_trajectory_consistency(index):
    for seed in range(5):
        rng = np.random.default_rng(100 * index + seed)
        sys = random_system(rng)
        q0 = 0.3 * rng.normal(size=4)
        step = _steps(rng)[index]
        assert trajectory_deviation(sys, step, q0) <= 1e-6, (step.kind, seed)


def test_lambda_conjugation_trajectory_consistency():
    for seed in range(5):
        rng = np.random.default_rng(500 + seed)
        sys = random_system(rng)
        q0 = 0.3 * rng.normal(size=4)
        assert trajectory_deviation(sys, lambda_step(lam_example()), q0) <= 1e-6


def test_lambda_conjugation_of_lambda_a_lambda():
    # a = lam * a_base * lam goes back to a_base
    rng = np.random.default_rng(7)
    lam = lam_example()
    base = random_coef(rng, 0.5, nh=1)
    t = np.arange(256) / 256
    from qriccati.quaternion import qmul

    A_vals = qmul(qmul(lam(t), base(t)), lam(t))
    A, _ = QuaternionCoefficient.fit(T, A_vals, 8)
    sys = RiccatiSystem(A, random_coef(rng, 0.3), random_coef(rng, 0.3), random_coef(rng, 0.3))
    new, resid = lambda_conjugation(sys, lam)
    grid = np.linspace(0, 1, 97)
    assert np.max(np.abs(new.a(grid) - base(grid))) <= 1e-10


def test_lambda_constant_real_commutes_with_negate():
    rng = np.random.default_rng(8)
    sys = random_system(rng)
    lam = QuaternionCoefficient.constant(T, 1.7)
    left = apply_basic_transform(lambda_conjugation(sys, lam)[0], NEGATE)
    right = lambda_conjugation(apply_basic_transform(sys, NEGATE), lam)[0]
    grid = np.linspace(0, 1, 65)
    for f, g in zip(left.coefficients, right.coefficients):
        assert np.max(np.abs(f(grid) - g(grid))) <= 1e-12


def test_lambda_vanishing_rejected():
    rng = np.random.default_rng(9)
    sys = random_system(rng)
    lam = QuaternionCoefficient([RealFourierSeries.from_harmonics(T, 0.0, [(1, 1.0, 0.0)])] + [RealFourierSeries(T, 0.0)] * 3)
    # cos(2 pi t) vanishes between grid nodes, so the floor decides
    with pytest.raises(VanishingLambda):
        lambda_conjugation(sys, lam, min_norm=0.05)
    with pytest.raises(VanishingLambda):
        lambda_conjugation(sys, QuaternionCoefficient.zero(T))


def test_involutions_exact():
    rng = np.random.default_rng(10)
    sys = random_system(rng)
    for kind in (CONJUGATE, NEGATE, TIME_REVERSE):
        twice = apply_basic_transform(apply_basic_transform(sys, kind), kind)
        assert twice == sys, kind


def test_unit_multiplier_must_be_unit():
    rng = np.random.default_rng(11)
    with pytest.raises(NonUnitQuaternion):
        apply_basic_transform(random_system(rng), TransformStep(LEFT_UNIT_MUL, (2.0, 0.0, 0.0, 0.0)))


def _pattern_system(m, sm, n, sn):
    comps = [RealFourierSeries(T, 0.0) for _ in range(4)]
    comps[m] = sm * RealFourierSeries.from_harmonics(T, 1.0, [(1, 0.0, 0.5)])
    comps[n] = sn * RealFourierSeries.from_harmonics(T, 0.7, [(1, 0.2, 0.0)])
    rng = np.random.default_rng(m * 8 + n)
    return RiccatiSystem(QuaternionCoefficient(comps), random_coef(rng, 0.3), random_coef(rng, 0.3), random_coef(rng, 0.3))


@pytest.mark.parametrize("name,p,q", CASE_TABLE, ids=[c[0] for c in CASE_TABLE])
def test_reduction_lands_in_covered_pattern(name, p, q):
    sys = _pattern_system(p[0], p[1], q[0], q[1])
    assert classify_sign_case(sys.a).name == name
    reduced, record = reduce_to_case_I(sys)
    assert classify_sign_case(reduced.a).name in DIRECTLY_COVERED
    assert replay(record, sys) == reduced


def test_reduction_pullback_recovers_original_trajectory():
    sys = _pattern_system(2, -1, 3, +1)  # case VII
    reduced, record = reduce_to_case_I(sys)
    q0 = np.array([0.1, -0.2, 0.05, 0.1])
    _, r0 = push_forward(record, q0, 0.0)
    times = np.linspace(0.0, SPAN, 41)
    red = integrate_ivp(reduced, r0, 0.0, SPAN)
    orig = integrate_ivp(sys, q0, 0.0, SPAN)
    _, back = pullback_solution(record, red.at(times), times)
    assert np.max(np.abs(back - orig.at(times))) <= 1e-6


def test_unclassified_pattern():
    comps = [RealFourierSeries(T, 1.0), RealFourierSeries(T, 1.0), RealFourierSeries(T, 1.0), RealFourierSeries(T, 0.0)]
    sys = RiccatiSystem(QuaternionCoefficient(comps), *(QuaternionCoefficient.zero(T) for _ in range(3)))
    assert not classify_sign_case(sys.a).classified
    with pytest.raises(Unclassified):
        reduce_to_case_I(sys)


def test_strict_mode_refuses_negation():
    sys = _pattern_system(0, -1, 1, -1)  # case IV
    with pytest.raises(StrictRefusal):
        reduce_to_case_I(sys, strict=True)
    # case II only needs conjugation and is allowed
    reduce_to_case_I(_pattern_system(0, +1, 1, -1), strict=True)
