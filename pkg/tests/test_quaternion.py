import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qriccati.errors import ZeroQuaternion
from qriccati.quaternion import (
    I,
    J,
    K,
    ONE,
    Quaternion,
    SignedComponents,
    ark,
    conjugate,
    hamilton_mul,
    inverse,
    left_matrix,
    norm,
    qark,
    qinv,
    qmul,
    right_matrix,
)


def as_complex_matrix(q):
    """Independent oracle: w + xi + yj + zk as a 2x2 complex matrix."""
    w, x, y, z = q
    return np.array([[w + 1j * x, y + 1j * z], [-y + 1j * z, w - 1j * x]])


def from_complex_matrix(m):
    return Quaternion(m[0, 0].real, m[0, 0].imag, m[0, 1].real, m[0, 1].imag)


finite = st.floats(-1e3, 1e3, allow_nan=False)
quaternions = st.builds(Quaternion, finite, finite, finite, finite)


def test_unit_products():
    assert I * J == K
    assert J * I == -K
    assert J * K == I
    assert K * I == J
    for u in (I, J, K):
        assert u * u == -ONE
    assert I * J * K == -ONE


def test_identity_and_expansion():
    q = Quaternion(0.3, -1.2, 2.5, 4.0)
    assert ONE * q == q
    assert q * ONE == q
    assert (ONE + I) * (ONE + J) == Quaternion(1, 1, 1, 1)


@given(quaternions, quaternions)
def test_product_matches_matrix_representation(p, q):
    expected = from_complex_matrix(as_complex_matrix(p) @ as_complex_matrix(q))
    got = hamilton_mul(p, q)
    scale = 1.0 + norm(p) * norm(q)
    assert np.allclose(got.as_array(), expected.as_array(), atol=1e-12 * scale, rtol=0)


def test_norm_multiplicative_on_random_pairs():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(1000):
        p = Quaternion.from_array(rng.normal(size=4) * rng.uniform(0.1, 10))
        q = Quaternion.from_array(rng.normal(size=4) * rng.uniform(0.1, 10))
        lhs = norm(p * q)
        rhs = norm(p) * norm(q)
        worst = max(worst, abs(lhs - rhs) / rhs)
    assert worst <= 1e-12


def test_associativity_unit_inputs():
    rng = np.random.default_rng(11)
    for _ in range(200):
        p, q, r = (Quaternion.from_array(v / np.linalg.norm(v)) for v in rng.normal(size=(3, 4)))
        assert np.max(np.abs(((p * q) * r).as_array() - (p * (q * r)).as_array())) <= 1e-10


def test_conjugate():
    assert conjugate(Quaternion(1, 1, 1, 1)) == Quaternion(1, -1, -1, -1)
    assert conjugate(Quaternion.real(3.0)) == Quaternion.real(3.0)
    rng = np.random.default_rng(3)
    for _ in range(100):
        p, q = (Quaternion.from_array(v) for v in rng.normal(size=(2, 4)))
        assert conjugate(conjugate(p)) == p
        diff = conjugate(p * q).as_array() - (conjugate(q) * conjugate(p)).as_array()
        assert np.max(np.abs(diff)) <= 1e-15


def test_inverse():
    assert inverse(I) == -I
    assert inverse(Quaternion.real(2.0)) == Quaternion.real(0.5)
    rng = np.random.default_rng(5)
    for _ in range(100):
        q = Quaternion.from_array(rng.normal(size=4))
        assert np.allclose((q * inverse(q)).as_array(), [1, 0, 0, 0], atol=1e-12, rtol=0)
    with pytest.raises(ZeroQuaternion):
        inverse(Quaternion())


def test_ark_values():
    assert ark(Quaternion()) == 0.0
    assert ark(ONE) == 0.0
    assert abs(ark(ONE + I) - math.pi / 4) <= 1e-12
    assert abs(ark(J) - math.pi / 2) <= 1e-12
    assert abs(ark(Quaternion.real(-1.0)) - math.pi) <= 1e-12


@given(quaternions, st.floats(1e-3, 1e3))
def test_ark_scale_invariant(q, lam):
    assert ark(q * lam) == pytest.approx(ark(q), abs=1e-12)


def test_signed_components_round_trip():
    q = Quaternion(1.0, 2.0, -3.0, 4.0)
    c = SignedComponents.from_quaternion(q)
    assert tuple(c) == (1.0, -2.0, 3.0, -4.0)
    assert c.to_quaternion() == q
    s = SignedComponents(0.5, 0.25, -1.0, 2.0)
    assert SignedComponents.from_quaternion(s.to_quaternion()) == s


def test_array_layer_agrees_with_value_type():
    rng = np.random.default_rng(1)
    P = rng.normal(size=(50, 4))
    Q = rng.normal(size=(50, 4))
    prod = qmul(P, Q)
    for p, q, r in zip(P, Q, prod):
        assert np.allclose((Quaternion.from_array(p) * Quaternion.from_array(q)).as_array(), r, atol=1e-14)
    assert np.allclose(qmul(qinv(P), P), np.tile([1.0, 0, 0, 0], (50, 1)), atol=1e-12)
    assert np.allclose(qark(P), [ark(Quaternion.from_array(p)) for p in P], atol=1e-15)
    u = rng.normal(size=4)
    assert np.allclose(left_matrix(u) @ Q.T, qmul(u, Q).T, atol=1e-14)
    assert np.allclose(right_matrix(u) @ Q.T, qmul(Q, u).T, atol=1e-14)
