"""Changes of variable that move a system into the covered sign pattern.

Each step is a substitution ``r = phi(q)``; :func:`apply_basic_transform`
returns the coefficients of the equation satisfied by ``r``. The coefficient
maps were derived from the substitution and are checked in the test suite
by integrating both equations and comparing trajectories.

====================  ==============================  =====================================
step                  substitution                    new (a, b, c, d)
====================  ==============================  =====================================
Conjugate             r = conj(q)                     (conj a, conj c, conj b, conj d)
Negate                r = -q                          (-a, b, c, -d)
TimeReverse           r(t) = -q(-t)                   (a(-t), -b(-t), -c(-t), d(-t))
LeftUnitMul(u)        r = u q                         (a u^-1, u b u^-1, c, u d)
RightUnitMul(u)       r = q u                         (u^-1 a, b, u^-1 c u, d u)
LambdaConjugate(l)    r = l(t) q l(t)                 see :func:`lambda_conjugation`
====================  ==============================  =====================================
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .coefficients import DEFAULT_GRID, ZERO_TOL, QuaternionCoefficient, RiccatiSystem
from .errors import NonUnitQuaternion, StrictRefusal, Unclassified, VanishingLambda
from .quaternion import Quaternion, inverse, qconj, qinv, qmul, qnorm

CONJUGATE = "Conjugate"
NEGATE = "Negate"
TIME_REVERSE = "TimeReverse"
LEFT_UNIT_MUL = "LeftUnitMul"
RIGHT_UNIT_MUL = "RightUnitMul"
LAMBDA_CONJUGATE = "LambdaConjugate"

# (name, (component, sign), (component, sign)); the remaining two components vanish.
# Order matters: the first matching row wins for degenerate patterns.
CASE_TABLE = (
    ("I", (0, +1), (1, +1)),
    ("II", (0, +1), (1, -1)),
    ("III", (0, -1), (1, +1)),
    ("IV", (0, -1), (1, -1)),
    ("V", (2, +1), (3, +1)),
    ("VI", (2, +1), (3, -1)),
    ("VII", (2, -1), (3, +1)),
    ("VIII", (2, -1), (3, -1)),
    ("IX", (0, +1), (2, +1)),
    ("X", (0, +1), (3, +1)),
    ("XI", (0, +1), (2, -1)),
    ("XII", (0, -1), (2, +1)),
    ("XIII", (0, -1), (2, -1)),
    ("XIV", (0, +1), (3, -1)),
    ("XV", (0, -1), (3, +1)),
    ("XVI", (0, -1), (3, -1)),
    ("XVII", (1, +1), (3, +1)),
    ("XVIII", (1, +1), (3, -1)),
    ("XIX", (1, -1), (3, +1)),
    ("XX", (1, -1), (3, -1)),
    ("XXI", (1, +1), (2, +1)),
    ("XXII", (1, +1), (2, -1)),
    ("XXIII", (1, -1), (2, +1)),
    ("XXIV", (1, -1), (2, -1)),
)
CASE_PATTERNS = {name: (p, q) for name, p, q in CASE_TABLE}
DIRECTLY_COVERED = frozenset({"I", "IX", "X", "XVII", "XXI"})
UNCLASSIFIED = "Unclassified"

_BASIS = np.eye(4)


@dataclass(frozen=True)
class SignCase:
    name: str
    signs: tuple

    @property
    def classified(self) -> bool:
        return self.name != UNCLASSIFIED


def _component_signs(a: QuaternionCoefficient, grid, tol):
    vals = a(grid)
    signs = []
    for n in range(4):
        v = vals[:, n]
        if np.all(np.abs(v) <= tol):
            signs.append(0)
        elif np.all(v >= -tol):
            signs.append(+1)
        elif np.all(v <= tol):
            signs.append(-1)
        else:
            signs.append(None)
    return tuple(signs)


def classify_sign_case(a: QuaternionCoefficient, grid_size: int = DEFAULT_GRID, tol: float = ZERO_TOL) -> SignCase:
    """Match the grid sign pattern of ``(a0, a1, a2, a3)`` against the case table."""
    grid = np.linspace(0.0, a.T, grid_size)
    signs = _component_signs(a, grid, tol)
    for name, (m, sm), (n, sn) in CASE_TABLE:
        others = [k for k in range(4) if k not in (m, n)]
        if any(signs[k] != 0 for k in others):
            continue
        if signs[m] in (0, sm) and signs[n] in (0, sn):
            return SignCase(name, signs)
    return SignCase(UNCLASSIFIED, signs)


@dataclass(frozen=True)
class TransformStep:
    kind: str
    unit: tuple | None = None
    lam: QuaternionCoefficient | None = None
    n_harmonics: int | None = None

    def to_dict(self):
        out = {"kind": self.kind}
        if self.unit is not None:
            out["unit"] = list(self.unit)
        if self.lam is not None:
            from .io import coefficient_to_dict

            out["lambda"] = coefficient_to_dict(self.lam)
            out["n_harmonics"] = self.n_harmonics
        return out


@dataclass
class TransformRecord:
    """Ordered steps and the system obtained after each of them."""

    steps: list = field(default_factory=list)
    systems: list = field(default_factory=list)

    def append(self, step: TransformStep, sys: RiccatiSystem):
        self.steps.append(step)
        self.systems.append(sys)

    def __len__(self):
        return len(self.steps)

    def to_dict(self):
        return {"steps": [s.to_dict() for s in self.steps]}


def _unit(u) -> Quaternion:
    u = u if isinstance(u, Quaternion) else Quaternion.from_array(u)
    if abs(u.norm() - 1.0) > 1e-12:
        raise NonUnitQuaternion(f"unit multiplier must have norm 1, got {u.norm():.17g}")
    return u


def time_reverse(sys: RiccatiSystem) -> RiccatiSystem:
    """Equation for ``r(t) = -q(-t)``."""
    return sys.replace(
        a=sys.a.time_reversed(),
        b=-sys.b.time_reversed(),
        c=-sys.c.time_reversed(),
        d=sys.d.time_reversed(),
    )


def apply_basic_transform(sys: RiccatiSystem, step: TransformStep | str) -> RiccatiSystem:
    if isinstance(step, str):
        step = TransformStep(step)
    kind = step.kind
    if kind == CONJUGATE:
        return sys.replace(a=sys.a.conjugate(), b=sys.c.conjugate(), c=sys.b.conjugate(), d=sys.d.conjugate())
    if kind == NEGATE:
        return sys.replace(a=-sys.a, d=-sys.d)
    if kind == TIME_REVERSE:
        return time_reverse(sys)
    if kind == LEFT_UNIT_MUL:
        u = _unit(step.unit)
        ui = inverse(u)
        return sys.replace(a=sys.a.right_mul(ui), b=sys.b.left_mul(u).right_mul(ui), d=sys.d.left_mul(u))
    if kind == RIGHT_UNIT_MUL:
        u = _unit(step.unit)
        ui = inverse(u)
        return sys.replace(a=sys.a.left_mul(ui), c=sys.c.left_mul(ui).right_mul(u), d=sys.d.right_mul(u))
    if kind == LAMBDA_CONJUGATE:
        return lambda_conjugation(sys, step.lam, n_harmonics=step.n_harmonics)[0]
    raise ValueError(f"unknown transform {kind!r}")


def forward_value(step: TransformStep, q, t=0.0):
    """Map solution values ``q(t)`` of the source equation to the target variable.

    Returns ``(t_new, r)``; only ``TimeReverse`` changes the time argument.
    """
    q = np.asarray(q, dtype=float)
    t = np.asarray(t, dtype=float)
    kind = step.kind
    if kind == CONJUGATE:
        return t, qconj(q)
    if kind == NEGATE:
        return t, -q
    if kind == TIME_REVERSE:
        return -t, -q
    if kind == LEFT_UNIT_MUL:
        return t, qmul(np.asarray(tuple(step.unit)), q)
    if kind == RIGHT_UNIT_MUL:
        return t, qmul(q, np.asarray(tuple(step.unit)))
    if kind == LAMBDA_CONJUGATE:
        lam = step.lam(t)
        return t, qmul(qmul(lam, q), lam)
    raise ValueError(f"unknown transform {kind!r}")


def backward_value(step: TransformStep, r, t=0.0):
    """Inverse of :func:`forward_value`: target-frame ``r(t)`` to source-frame values."""
    r = np.asarray(r, dtype=float)
    t = np.asarray(t, dtype=float)
    kind = step.kind
    if kind == CONJUGATE:
        return t, qconj(r)
    if kind == NEGATE:
        return t, -r
    if kind == TIME_REVERSE:
        return -t, -r
    if kind == LEFT_UNIT_MUL:
        return t, qmul(qinv(np.asarray(tuple(step.unit))), r)
    if kind == RIGHT_UNIT_MUL:
        return t, qmul(r, qinv(np.asarray(tuple(step.unit))))
    if kind == LAMBDA_CONJUGATE:
        li = qinv(step.lam(t))
        return t, qmul(qmul(li, r), li)
    raise ValueError(f"unknown transform {kind!r}")


def pullback_solution(record: TransformRecord, q_reduced, t=0.0):
    """Map values of the reduced equation back to the original variable.

    ``q_reduced`` is a single value (shape ``(4,)``) or samples ``(N, 4)`` at
    times ``t``. Returns ``(t_original, q_original)``.
    """
    t_cur, q_cur = np.asarray(t, dtype=float), np.asarray(q_reduced, dtype=float)
    for step in reversed(record.steps):
        t_cur, q_cur = backward_value(step, q_cur, t_cur)
    return t_cur, q_cur


def push_forward(record: TransformRecord, q, t=0.0):
    t_cur, q_cur = np.asarray(t, dtype=float), np.asarray(q, dtype=float)
    for step in record.steps:
        t_cur, q_cur = forward_value(step, q_cur, t_cur)
    return t_cur, q_cur


def replay(record: TransformRecord, sys: RiccatiSystem) -> RiccatiSystem:
    for step in record.steps:
        sys = apply_basic_transform(sys, step)
    return sys


def _rotation_to_i(h: np.ndarray) -> np.ndarray:
    """Unit ``u`` with ``u h u^-1 = i`` for a pure unit quaternion ``h != -i``."""
    u = np.array([1.0, 0.0, 0.0, 0.0]) - qmul(_BASIS[1], h)
    return u / qnorm(u)


def reduce_to_case_I(sys: RiccatiSystem, grid_size: int = DEFAULT_GRID, tol: float = ZERO_TOL, *, strict: bool = False):
    """Chain of substitutions bringing ``a`` to ``a0 >= 0, a1 >= 0, a2 = a3 = 0``.

    Cases II-IV use conjugation and negation. Every other two-component
    pattern ``s_m e_m, s_n e_n`` is handled by a unit multiplication that
    sends ``s_m e_m`` to 1 (or by negation when ``e_m = 1``), followed by
    conjugation or a constant rotation ``r = u q u^-1`` sending the second
    direction to ``i``.

    With ``strict=True`` any chain that needs ``Negate`` is refused with
    :class:`StrictRefusal`, because the printed form of that substitution is
    ambiguous (``q -> -2``) and is only read here as ``q -> -q``.
    """
    case = classify_sign_case(sys.a, grid_size, tol)
    if not case.classified:
        raise Unclassified(f"coefficient a has no recognised sign pattern (signs {case.signs})")
    record = TransformRecord()

    def push(step):
        nonlocal sys
        if strict and step.kind == NEGATE:
            raise StrictRefusal(f"case {case.name} needs the Negate step, which strict mode refuses")
        sys = apply_basic_transform(sys, step)
        record.append(step, sys)

    name = case.name
    if name == "I":
        return sys, record
    if name == "II":
        push(TransformStep(CONJUGATE))
    elif name == "III":
        push(TransformStep(CONJUGATE))
        push(TransformStep(NEGATE))
    elif name == "IV":
        push(TransformStep(NEGATE))
    else:
        (m, sm), (n, sn) = CASE_PATTERNS[name]
        g = sm * _BASIS[m]
        h = sn * _BASIS[n]
        if m == 0:
            if sm < 0:
                push(TransformStep(NEGATE))
                h = -h
        else:
            push(TransformStep(LEFT_UNIT_MUL, tuple(float(v) for v in g)))
            h = qmul(h, qinv(g))
        if np.allclose(h, _BASIS[1]):
            pass
        elif np.allclose(h, -_BASIS[1]):
            push(TransformStep(CONJUGATE))
        else:
            u = _rotation_to_i(h)
            push(TransformStep(LEFT_UNIT_MUL, tuple(float(v) for v in u)))
            push(TransformStep(RIGHT_UNIT_MUL, tuple(float(v) for v in qinv(u))))
    final = classify_sign_case(sys.a, grid_size, tol)
    if final.name != "I":
        raise AssertionError(f"reduction of case {name} ended in case {final.name}")
    return sys, record


def lambda_conjugation(
    sys: RiccatiSystem,
    lam: QuaternionCoefficient,
    *,
    n_harmonics: int | None = None,
    min_norm: float = 1e-6,
):
    """Equation for ``v = lam(t) q lam(t)``.

    With ``A = lam a lam`` the coefficient of ``sys``, ``v`` satisfies

        v' + v a v + (lam b - lam') lam^-1 v + v lam^-1 (c lam - lam') + lam d lam = 0.

    The new coefficients are not trigonometric polynomials in general; they
    are sampled and projected onto ``n_harmonics`` harmonics (default: 64 or
    four times the input bandwidth). Returns ``(system, projection_residual)``.
    """
    if lam.T != sys.T:
        raise ValueError("lambda must share the system period")
    nh = n_harmonics or max(64, 4 * max(lam.n_harmonics, max(f.n_harmonics for f in sys.coefficients)))
    N = 4 * nh + 4
    t = np.arange(N) * (sys.T / N)
    L = lam(t)
    check = lam(np.linspace(0.0, sys.T, max(DEFAULT_GRID, N)))
    if qnorm(check).min() <= min_norm:
        raise VanishingLambda(f"|lambda| drops to {qnorm(check).min():.3e} on the grid")
    dL = lam.derivative()(t)
    Li = qinv(L)
    A, b, c, d = sys.evaluate(t)
    new = {
        "a": qmul(qmul(Li, A), Li),
        "b": qmul(qmul(L, b) - dL, Li),
        "c": qmul(Li, qmul(c, L) - dL),
        "d": qmul(qmul(L, d), L),
    }
    fitted = {}
    resid = 0.0
    for key, vals in new.items():
        coef, r = QuaternionCoefficient.fit(sys.T, vals, nh)
        fitted[key] = coef
        resid = max(resid, r)
    return sys.replace(**fitted), resid


def lambda_step(lam: QuaternionCoefficient, n_harmonics: int | None = None) -> TransformStep:
    return TransformStep(LAMBDA_CONJUGATE, lam=lam, n_harmonics=n_harmonics)

