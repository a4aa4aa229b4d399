"""Quaternion algebra with the Hamilton product.

Two layers live here: the :class:`Quaternion` value type used at API
boundaries, and array helpers operating on ``(..., 4)`` float arrays laid
out as ``(w, x, y, z)`` for vectorized work on grids and trajectories.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ZeroQuaternion


@dataclass(frozen=True)
class Quaternion:
    """``w + x i + y j + z k`` with float64 components."""

    w: float = 0.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    @classmethod
    def from_array(cls, arr) -> Quaternion:
        a = np.asarray(arr, dtype=float).reshape(4)
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))

    @classmethod
    def real(cls, value: float) -> Quaternion:
        return cls(float(value), 0.0, 0.0, 0.0)

    def as_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z], dtype=float)

    def __iter__(self):
        yield from (self.w, self.x, self.y, self.z)

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return Quaternion(self.w + other.w, self.x + other.x, self.y + other.y, self.z + other.z)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return Quaternion(self.w - other.w, self.x - other.x, self.y - other.y, self.z - other.z)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __neg__(self):
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Quaternion(self.w * other, self.x * other, self.y * other, self.z * other)
        if isinstance(other, Quaternion):
            return hamilton_mul(self, other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, float)):
            return Quaternion(self.w / other, self.x / other, self.y / other, self.z / other)
        return NotImplemented

    def norm(self) -> float:
        return norm(self)

    def conjugate(self) -> Quaternion:
        return conjugate(self)

    def inverse(self) -> Quaternion:
        return inverse(self)


def _coerce(value):
    if isinstance(value, Quaternion):
        return value
    if isinstance(value, (int, float)):
        return Quaternion.real(value)
    return NotImplemented


ONE = Quaternion(1.0, 0.0, 0.0, 0.0)
I = Quaternion(0.0, 1.0, 0.0, 0.0)
J = Quaternion(0.0, 0.0, 1.0, 0.0)
K = Quaternion(0.0, 0.0, 0.0, 1.0)
BASIS = (ONE, I, J, K)


def hamilton_mul(p: Quaternion, q: Quaternion) -> Quaternion:
    return Quaternion(
        p.w * q.w - p.x * q.x - p.y * q.y - p.z * q.z,
        p.w * q.x + p.x * q.w + p.y * q.z - p.z * q.y,
        p.w * q.y - p.x * q.z + p.y * q.w + p.z * q.x,
        p.w * q.z + p.x * q.y - p.y * q.x + p.z * q.w,
    )


def conjugate(q: Quaternion) -> Quaternion:
    return Quaternion(q.w, -q.x, -q.y, -q.z)


def norm(q: Quaternion) -> float:
    return math.sqrt(q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z)


def inverse(q: Quaternion) -> Quaternion:
    n2 = q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z
    if n2 == 0.0:
        raise ZeroQuaternion("cannot invert the zero quaternion")
    return Quaternion(q.w / n2, -q.x / n2, -q.y / n2, -q.z / n2)


def ark(q: Quaternion) -> float:
    """Angle between the scalar part and the length of the vector part.

    Returns ``|Arg(s + i|v|)|`` in ``[0, pi]``; the zero quaternion maps to 0.
    """
    v = math.sqrt(q.x * q.x + q.y * q.y + q.z * q.z)
    if q.w == 0.0 and v == 0.0:
        return 0.0
    return math.atan2(v, q.w)


@dataclass(frozen=True)
class SignedComponents:
    """Solution coordinates in the convention ``q = c0 - i c1 - j c2 - k c3``.

    The sign hypotheses of the existence theorem (``c0, c1 >= 0``) are stated
    on these coordinates, not on the raw quaternion components.
    """

    c0: float
    c1: float
    c2: float
    c3: float

    @classmethod
    def from_quaternion(cls, q: Quaternion) -> SignedComponents:
        return cls(q.w, -q.x, -q.y, -q.z)

    @classmethod
    def from_array(cls, arr) -> SignedComponents:
        a = np.asarray(arr, dtype=float).reshape(4)
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))

    def to_quaternion(self) -> Quaternion:
        return Quaternion(self.c0, -self.c1, -self.c2, -self.c3)

    def as_array(self) -> np.ndarray:
        return np.array([self.c0, self.c1, self.c2, self.c3], dtype=float)

    def __iter__(self):
        yield from (self.c0, self.c1, self.c2, self.c3)


# Sign flip between raw (w, x, y, z) and signed (c0, c1, c2, c3) coordinates;
# it is its own inverse.
SIGN_FLIP = np.array([1.0, -1.0, -1.0, -1.0])


def to_signed(q_arr):
    return np.asarray(q_arr, dtype=float) * SIGN_FLIP


def from_signed(c_arr):
    return np.asarray(c_arr, dtype=float) * SIGN_FLIP


# ---------------------------------------------------------------------------
# array layer: (..., 4) arrays in (w, x, y, z) order

def qmul(p, q):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    pw, px, py, pz = np.moveaxis(p, -1, 0)
    qw, qx, qy, qz = np.moveaxis(q, -1, 0)
    return np.stack(
        [
            pw * qw - px * qx - py * qy - pz * qz,
            pw * qx + px * qw + py * qz - pz * qy,
            pw * qy - px * qz + py * qw + pz * qx,
            pw * qz + px * qy - py * qx + pz * qw,
        ],
        axis=-1,
    )


def qconj(q):
    return np.asarray(q, dtype=float) * SIGN_FLIP


def qnorm(q):
    return np.sqrt(np.sum(np.square(q), axis=-1))


def qinv(q):
    q = np.asarray(q, dtype=float)
    n2 = np.sum(q * q, axis=-1, keepdims=True)
    if np.any(n2 == 0.0):
        raise ZeroQuaternion("cannot invert the zero quaternion")
    return qconj(q) / n2


def qark(q):
    q = np.asarray(q, dtype=float)
    v = np.sqrt(np.sum(q[..., 1:] ** 2, axis=-1))
    # atan2(0, 0) is already 0 in numpy, which matches the ark(0) = 0 convention.
    return np.arctan2(v, q[..., 0])


def left_matrix(u) -> np.ndarray:
    """Matrix ``L`` with ``L @ q == u * q`` for 4-vectors."""
    w, x, y, z = np.asarray(u, dtype=float).reshape(4)
    return np.array(
        [
            [w, -x, -y, -z],
            [x, w, -z, y],
            [y, z, w, -x],
            [z, -y, x, w],
        ]
    )


def right_matrix(u) -> np.ndarray:
    """Matrix ``R`` with ``R @ q == q * u`` for 4-vectors."""
    w, x, y, z = np.asarray(u, dtype=float).reshape(4)
    return np.array(
        [
            [w, -x, -y, -z],
            [x, w, z, -y],
            [y, -z, w, x],
            [z, y, -x, w],
        ]
    )
