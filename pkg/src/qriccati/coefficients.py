"""Periodic quaternion-valued coefficients and the discriminant quantities.

Every coefficient component is a finite real Fourier series

    f(t) = const + sum_k [ cos_k cos(2 pi k t / T) + sin_k sin(2 pi k t / T) ]

which keeps periodicity, derivatives and integrals exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .quaternion import Quaternion, left_matrix, right_matrix

ZERO_TOL = 1e-12
DEFAULT_GRID = 512


class RealFourierSeries:
    """Real trigonometric polynomial with period ``T``.

    Harmonic ``k`` lives at index ``k - 1`` of the dense ``cos_amps`` and
    ``sin_amps`` arrays.
    """

    __slots__ = ("T", "const", "cos_amps", "sin_amps")

    def __init__(self, T, const=0.0, cos_amps=(), sin_amps=()):
        if not T > 0:
            raise ValueError(f"period must be positive, got {T}")
        c = np.asarray(cos_amps, dtype=float).ravel()
        s = np.asarray(sin_amps, dtype=float).ravel()
        n = max(c.size, s.size)
        self.T = float(T)
        self.const = float(const)
        self.cos_amps = np.pad(c, (0, n - c.size))
        self.sin_amps = np.pad(s, (0, n - s.size))

    @classmethod
    def constant(cls, T, value):
        return cls(T, value)

    @classmethod
    def from_harmonics(cls, T, const=0.0, harmonics=()):
        """Build from ``[(k, cos_amp, sin_amp), ...]``; repeated ``k`` accumulate."""
        harmonics = list(harmonics)
        kmax = max((int(h[0]) for h in harmonics), default=0)
        c = np.zeros(kmax)
        s = np.zeros(kmax)
        for k, ca, sa in harmonics:
            k = int(k)
            if k < 1:
                raise ValueError(f"harmonic index must be >= 1, got {k}")
            c[k - 1] += ca
            s[k - 1] += sa
        return cls(T, const, c, s)

    @classmethod
    def fit(cls, T, samples, n_harmonics):
        """Least-squares fit to samples taken uniformly on ``[0, T)``.

        Returns ``(series, rms_residual)``. For uniform samples the
        least-squares solution with ``n_harmonics < N/2`` is the truncated DFT.
        """
        y = np.asarray(samples, dtype=float).ravel()
        n = y.size
        if n_harmonics < 0 or 2 * n_harmonics >= n:
            raise ValueError(f"need more than {2 * n_harmonics} samples for {n_harmonics} harmonics")
        spectrum = np.fft.rfft(y) / n
        c = 2.0 * spectrum.real[1 : n_harmonics + 1]
        s = -2.0 * spectrum.imag[1 : n_harmonics + 1]
        series = cls(T, spectrum.real[0], c, s)
        resid = y - series(np.arange(n) * (T / n))
        return series, float(np.sqrt(np.mean(resid**2)))

    @property
    def n_harmonics(self) -> int:
        return self.cos_amps.size

    @property
    def harmonics(self):
        return [
            (k + 1, float(c), float(s))
            for k, (c, s) in enumerate(zip(self.cos_amps, self.sin_amps))
            if c != 0.0 or s != 0.0
        ]

    @property
    def omega(self) -> float:
        return 2.0 * math.pi / self.T

    def _phase(self, t):
        # reduced phase keeps f(t + nT) == f(t) up to one rounding of t / T
        return 2.0 * math.pi * np.mod(np.asarray(t, dtype=float) / self.T, 1.0)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, self.const)
        if self.n_harmonics:
            ks = np.arange(1, self.n_harmonics + 1)
            ph = self._phase(t)[..., None] * ks
            out = out + np.cos(ph) @ self.cos_amps + np.sin(ph) @ self.sin_amps
        return out if out.ndim else float(out)

    def derivative(self) -> RealFourierSeries:
        kw = np.arange(1, self.n_harmonics + 1) * self.omega
        return RealFourierSeries(self.T, 0.0, kw * self.sin_amps, -kw * self.cos_amps)

    def antiderivative_periodic(self) -> RealFourierSeries:
        """Periodic part of the antiderivative (the ``const * t`` drift is excluded)."""
        kw = np.arange(1, self.n_harmonics + 1) * self.omega
        return RealFourierSeries(self.T, 0.0, -self.sin_amps / kw, self.cos_amps / kw)

    def integral(self, t0, t1) -> float:
        """Exact ``int_{t0}^{t1} f``."""
        P = self.antiderivative_periodic()
        return float(self.const * (t1 - t0) + P(t1) - P(t0))

    def time_reversed(self) -> RealFourierSeries:
        return RealFourierSeries(self.T, self.const, self.cos_amps, -self.sin_amps)

    def _binary(self, other, op):
        if isinstance(other, (int, float)):
            return RealFourierSeries(self.T, op(self.const, other), self.cos_amps, self.sin_amps)
        if not isinstance(other, RealFourierSeries):
            return NotImplemented
        if other.T != self.T:
            raise ValueError(f"period mismatch: {self.T} vs {other.T}")
        n = max(self.n_harmonics, other.n_harmonics)
        a, b = _padded(self, n), _padded(other, n)
        return RealFourierSeries(self.T, op(self.const, other.const), op(a[0], b[0]), op(a[1], b[1]))

    def __add__(self, other):
        return self._binary(other, lambda u, v: u + v)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, lambda u, v: u - v)

    def __neg__(self):
        return RealFourierSeries(self.T, -self.const, -self.cos_amps, -self.sin_amps)

    def __mul__(self, scalar):
        if not isinstance(scalar, (int, float)):
            return NotImplemented
        return RealFourierSeries(self.T, self.const * scalar, self.cos_amps * scalar, self.sin_amps * scalar)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return self.const == 0.0 and not np.any(self.cos_amps) and not np.any(self.sin_amps)

    def __eq__(self, other):
        if not isinstance(other, RealFourierSeries) or other.T != self.T:
            return NotImplemented
        n = max(self.n_harmonics, other.n_harmonics)
        a, b = _padded(self, n), _padded(other, n)
        return self.const == other.const and np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])

    __hash__ = None

    def __repr__(self):
        return f"RealFourierSeries(T={self.T}, const={self.const}, harmonics={self.harmonics})"


def _padded(f: RealFourierSeries, n: int):
    pad = n - f.n_harmonics
    return np.pad(f.cos_amps, (0, pad)), np.pad(f.sin_amps, (0, pad))


def mean_integral(f: RealFourierSeries, t0: float, t1: float) -> float:
    if t0 > t1:
        raise ValueError("mean_integral requires t0 <= t1")
    return f.integral(t0, t1)


class QuaternionCoefficient:
    """T-periodic quaternion function with components ``f0 + i f1 + j f2 + k f3``."""

    __slots__ = ("components",)

    def __init__(self, components):
        comps = tuple(components)
        if len(comps) != 4:
            raise ValueError("a quaternion coefficient needs exactly four component series")
        if len({c.T for c in comps}) != 1:
            raise ValueError("all four component series must share one period")
        self.components = comps

    @classmethod
    def constant(cls, T, q) -> QuaternionCoefficient:
        w, x, y, z = q if not isinstance(q, (int, float)) else (q, 0.0, 0.0, 0.0)
        return cls([RealFourierSeries(T, v) for v in (w, x, y, z)])

    @classmethod
    def zero(cls, T) -> QuaternionCoefficient:
        return cls.constant(T, 0.0)

    @classmethod
    def fit(cls, T, samples, n_harmonics):
        """Fit ``(N, 4)`` samples on ``[0, T)``; returns ``(coef, max rms residual)``."""
        samples = np.asarray(samples, dtype=float)
        fits = [RealFourierSeries.fit(T, samples[:, n], n_harmonics) for n in range(4)]
        return cls([f for f, _ in fits]), max(r for _, r in fits)

    @property
    def T(self) -> float:
        return self.components[0].T

    @property
    def n_harmonics(self) -> int:
        return max(c.n_harmonics for c in self.components)

    def __getitem__(self, n) -> RealFourierSeries:
        return self.components[n]

    def __call__(self, t) -> np.ndarray:
        """Values as a ``(..., 4)`` array."""
        return np.stack([np.asarray(c(t), dtype=float) for c in self.components], axis=-1)

    def at(self, t: float) -> Quaternion:
        return Quaternion.from_array(self(float(t)))

    def _stacked(self):
        n = self.n_harmonics
        consts = np.array([c.const for c in self.components])
        cos = np.stack([_padded(c, n)[0] for c in self.components])
        sin = np.stack([_padded(c, n)[1] for c in self.components])
        return consts, cos, sin

    def _from_stacked(self, consts, cos, sin) -> QuaternionCoefficient:
        return QuaternionCoefficient(RealFourierSeries(self.T, consts[n], cos[n], sin[n]) for n in range(4))

    def linear_map(self, M) -> QuaternionCoefficient:
        """Apply a constant real 4x4 matrix to the component vector."""
        consts, cos, sin = self._stacked()
        return self._from_stacked(M @ consts, M @ cos, M @ sin)

    def conjugate(self) -> QuaternionCoefficient:
        return self.linear_map(np.diag([1.0, -1.0, -1.0, -1.0]))

    def __neg__(self) -> QuaternionCoefficient:
        return self.linear_map(-np.eye(4))

    def __add__(self, other) -> QuaternionCoefficient:
        return QuaternionCoefficient(a + b for a, b in zip(self.components, other.components))

    def __sub__(self, other) -> QuaternionCoefficient:
        return QuaternionCoefficient(a - b for a, b in zip(self.components, other.components))

    def left_mul(self, u) -> QuaternionCoefficient:
        """``u * f(t)`` for a constant quaternion ``u``."""
        return self.linear_map(left_matrix(np.asarray(tuple(u), dtype=float)))

    def right_mul(self, u) -> QuaternionCoefficient:
        """``f(t) * u`` for a constant quaternion ``u``."""
        return self.linear_map(right_matrix(np.asarray(tuple(u), dtype=float)))

    def time_reversed(self) -> QuaternionCoefficient:
        return QuaternionCoefficient(c.time_reversed() for c in self.components)

    def derivative(self) -> QuaternionCoefficient:
        return QuaternionCoefficient(c.derivative() for c in self.components)

    def __eq__(self, other):
        if not isinstance(other, QuaternionCoefficient):
            return NotImplemented
        return all(a == b for a, b in zip(self.components, other.components))

    __hash__ = None

    def __repr__(self):
        return f"QuaternionCoefficient({list(self.components)!r})"


def evaluate_coefficient(f: QuaternionCoefficient, t: float) -> Quaternion:
    return f.at(t)


@dataclass(frozen=True, eq=False)
class RiccatiSystem:
    """Coefficients of ``q' + q a q + b q + q c + d = 0`` with common period ``T``."""

    a: QuaternionCoefficient
    b: QuaternionCoefficient
    c: QuaternionCoefficient
    d: QuaternionCoefficient
    name: str = field(default="", compare=False)

    def __post_init__(self):
        periods = {self.a.T, self.b.T, self.c.T, self.d.T}
        if len(periods) != 1:
            raise ValueError(f"coefficients must share one period, got {sorted(periods)}")

    @classmethod
    def constant(cls, a=0.0, b=0.0, c=0.0, d=0.0, T=1.0, name=""):
        """Constant-coefficient system; each argument is a real or a 4-tuple/Quaternion."""
        return cls(*(QuaternionCoefficient.constant(T, v) for v in (a, b, c, d)), name=name)

    @property
    def T(self) -> float:
        return self.a.T

    @property
    def coefficients(self):
        return (self.a, self.b, self.c, self.d)

    def __eq__(self, other):
        # exact comparison of the Fourier data; the name is a label only
        if not isinstance(other, RiccatiSystem):
            return NotImplemented
        return all(x == y for x, y in zip(self.coefficients, other.coefficients))

    __hash__ = None

    def replace(self, **changes) -> RiccatiSystem:
        kw = dict(a=self.a, b=self.b, c=self.c, d=self.d, name=self.name)
        kw.update(changes)
        return RiccatiSystem(**kw)

    @cached_property
    def packed(self):
        """Dense arrays for the integration kernels.

        ``consts`` has shape ``(4, 4)`` indexed ``[coefficient, component]``;
        ``cos``/``sin`` have shape ``(4, 4, K)``.
        """
        K = max(f.n_harmonics for f in self.coefficients)
        consts = np.zeros((4, 4))
        cos = np.zeros((4, 4, K))
        sin = np.zeros((4, 4, K))
        for i, f in enumerate(self.coefficients):
            for n, s in enumerate(f.components):
                consts[i, n] = s.const
                cos[i, n, : s.n_harmonics] = s.cos_amps
                sin[i, n, : s.n_harmonics] = s.sin_amps
        return consts, cos, sin

    def evaluate(self, t):
        """``(a, b, c, d)`` values, each of shape ``(..., 4)``."""
        return tuple(f(t) for f in self.coefficients)

    def grid(self, size: int = DEFAULT_GRID, breakpoints=()) -> np.ndarray:
        if size < 2:
            raise ValueError("grid size must be at least 2")
        g = np.linspace(0.0, self.T, size)
        extra = [b % self.T for b in breakpoints]
        return np.unique(np.concatenate([g, extra])) if extra else g


# ---------------------------------------------------------------------------
# discriminants

def _p_table(b, c, p23_plus=False):
    """``p[n, m-1]`` for n = 0..3, m = 1..3 on sampled ``b``/``c`` arrays."""
    s = b[..., 1:] + c[..., 1:]
    d = b[..., 1:] - c[..., 1:]
    p = np.empty((4, 3) + b.shape[:-1])
    p[0] = np.moveaxis(s, -1, 0)
    p[1] = np.moveaxis(np.stack([s[..., 0], d[..., 1], d[..., 2]], axis=-1), -1, 0)
    p[2] = np.moveaxis(
        np.stack([d[..., 0], s[..., 1], s[..., 2] if p23_plus else d[..., 2]], axis=-1), -1, 0
    )
    p[3] = np.moveaxis(d, -1, 0)
    return p


def discriminant_values(sys: RiccatiSystem, t, *, literal=False, p23_plus=False, zero_tol=ZERO_TOL):
    """Return ``(p, D)`` with shapes ``(4, 3, ...)`` and ``(4, ...)`` at times ``t``.

    ``D_0 = sum_m p_{0,m}^2 + 4 a_0 d_0`` (``4 d_0`` where ``a_0 = 0``) and, for
    n >= 1, ``D_n = sum_m p_{n,m}^2 - 4 a_n d_n`` (``-4 d_n`` where ``a_n = 0``).
    With ``literal=True`` the n >= 1 rows branch on ``a_0`` and use ``a_0 d_0``
    exactly as printed in the source table.
    """
    a, b, c, d = sys.evaluate(t)
    p = _p_table(b, c, p23_plus)
    sq = np.sum(p**2, axis=1)
    D = np.empty_like(sq)
    a0 = a[..., 0]
    D[0] = np.where(np.abs(a0) > zero_tol, sq[0] + 4.0 * a0 * d[..., 0], 4.0 * d[..., 0])
    for n in range(1, 4):
        if literal:
            D[n] = np.where(np.abs(a0) > zero_tol, sq[n] - 4.0 * a0 * d[..., 0], -4.0 * d[..., n])
        else:
            an = a[..., n]
            D[n] = np.where(np.abs(an) > zero_tol, sq[n] - 4.0 * an * d[..., n], -4.0 * d[..., n])
    return p, D


@dataclass(eq=False)
class DiscriminantProfile:
    grid: np.ndarray
    p: np.ndarray
    D: np.ndarray
    nonpositive: tuple
    identically_zero: tuple
    flag_tol: float = 1e-9
    p23_alternative_D2: np.ndarray | None = None
    p23_reading_disagrees: bool = False

    def witness_positive(self, n):
        i = int(np.argmax(self.D[n]))
        return float(self.grid[i]), float(self.D[n, i])

    def to_dict(self):
        return {
            "grid_size": int(self.grid.size),
            "max_D": [float(v) for v in self.D.max(axis=1)],
            "min_D": [float(v) for v in self.D.min(axis=1)],
            "nonpositive": list(self.nonpositive),
            "identically_zero": list(self.identically_zero),
            "p23_reading_disagrees": self.p23_reading_disagrees,
        }


def discriminants(
    sys: RiccatiSystem,
    grid_size: int = DEFAULT_GRID,
    *,
    breakpoints=(),
    literal=False,
    flag_tol=1e-9,
) -> DiscriminantProfile:
    g = sys.grid(grid_size, breakpoints)
    p, D = discriminant_values(sys, g, literal=literal)
    _, D_alt = discriminant_values(sys, g, literal=literal, p23_plus=True)
    nonpos = tuple(bool(np.all(D[n] <= flag_tol)) for n in range(4))
    zero = tuple(bool(np.all(np.abs(D[n]) <= flag_tol)) for n in range(4))
    alt_flags = (bool(np.all(D_alt[2] <= flag_tol)), bool(np.all(np.abs(D_alt[2]) <= flag_tol)))
    return DiscriminantProfile(
        grid=g,
        p=p,
        D=D,
        nonpositive=nonpos,
        identically_zero=zero,
        flag_tol=flag_tol,
        p23_alternative_D2=D_alt[2],
        p23_reading_disagrees=alt_flags != (nonpos[2], zero[2]),
    )


def bracket_ratio(u, v, t, zero_tol=ZERO_TOL):
    """``u(t)/v(t)`` where ``|v(t)| > zero_tol``, else 0. Vectorized over ``t``."""
    uv = np.asarray(u(t), dtype=float)
    vv = np.asarray(v(t), dtype=float)
    mask = np.abs(vv) > zero_tol
    out = np.zeros(np.broadcast(uv, vv).shape)
    np.divide(uv, vv, out=out, where=mask)
    return out if out.ndim else float(out)


def bracket_sup(u, v, grid, zero_tol=ZERO_TOL) -> float:
    return float(np.max(np.abs(bracket_ratio(u, v, grid, zero_tol))))

