"""Bessel-family functions of complex argument in log-scaled form.

Values are returned as :class:`Scaled` numbers ``mantissa * exp(log_scale)``
so that high orders and large imaginary parts neither overflow nor
underflow in double precision.  Every routine accepts scalars or numpy
arrays of arguments and works elementwise.

Evaluation strategy
-------------------
* power series where the first term dominates (``|z|**2 <= 4*(m+1)``) or
  ``|z|`` is tiny;
* otherwise Miller's backward recurrence started well above
  ``max(m, |z|)``.  Cylindrical values are normalized with the
  Jacobi-Anger sum ``J_0 + 2 sum (-i)^k J_k = exp(-iz)`` (for ``Im z >= 0``),
  which has no cancellation even for large ``Im z``.  Spherical values are
  normalized against the closed forms of ``j_0`` or ``j_1``, whichever is
  larger.

Arguments in the lower half plane are handled by reflection,
``J(conj z) = conj J(z)``, so conjugation symmetry holds exactly.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from scipy.special import gammaln

from .errors import DomainOverflow, OrderOverflow

MAX_ORDER = 2048
MAX_ARGUMENT = 1.0e6

_LN2 = math.log(2.0)
_RESCALE_AT = 1.0e250
_RESCALE_LOG = math.log(_RESCALE_AT)
_SERIES_TOL = 1.0e-18


@dataclass(frozen=True)
class Scaled:
    """A complex number (or array) stored as ``mantissa * exp(log_scale)``.

    Nonzero mantissas satisfy ``0.5 <= |mantissa| < 1``; zero is stored
    with ``log_scale == 0``.
    """

    mantissa: np.ndarray
    log_scale: np.ndarray

    @classmethod
    def make(cls, mantissa, log_scale=0.0) -> "Scaled":
        m = np.asarray(mantissa, dtype=complex)
        s = np.asarray(log_scale, dtype=float)
        m, s = np.broadcast_arrays(m, s)
        return cls(*_normalize(m.copy(), s.copy()))

    @classmethod
    def from_value(cls, value) -> "Scaled":
        return cls.make(value, 0.0)

    def value(self) -> np.ndarray:
        """Unscaled value (may overflow to inf or underflow to 0)."""
        with np.errstate(over="ignore", under="ignore"):
            out = self.mantissa * np.exp(self.log_scale)
        return out[()] if out.ndim == 0 else out

    def log_abs(self) -> np.ndarray:
        """Natural log of the modulus; ``-inf`` for an exact zero."""
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.mantissa)) + self.log_scale

    def is_zero(self) -> np.ndarray:
        return self.mantissa == 0

    def conj(self) -> "Scaled":
        return Scaled(np.conj(self.mantissa), self.log_scale.copy())

    def __neg__(self) -> "Scaled":
        return Scaled(-self.mantissa, self.log_scale.copy())

    def __getitem__(self, idx) -> "Scaled":
        return Scaled(self.mantissa[idx], self.log_scale[idx])

    @property
    def shape(self):
        return self.mantissa.shape

    def __mul__(self, other) -> "Scaled":
        if isinstance(other, Scaled):
            return Scaled.make(self.mantissa * other.mantissa,
                               self.log_scale + other.log_scale)
        return Scaled.make(self.mantissa * np.asarray(other, dtype=complex),
                           self.log_scale)

    __rmul__ = __mul__

    def __add__(self, other: "Scaled") -> "Scaled":
        return scaled_sum([self, other])

    def __sub__(self, other: "Scaled") -> "Scaled":
        return scaled_sum([self, -other])

    def ratio(self, other: "Scaled") -> np.ndarray:
        """Plain complex quotient ``self / other`` (finite when both are)."""
        with np.errstate(over="ignore", under="ignore"):
            return (self.mantissa / other.mantissa) * np.exp(
                self.log_scale - other.log_scale)


def _normalize(m, s):
    a = np.abs(m)
    _, e = np.frexp(a)
    e = np.where(a > 0, e, 0)
    m = np.ldexp(m.real, -e) + 1j * np.ldexp(m.imag, -e)
    s = np.where(a > 0, s + e * _LN2, 0.0)
    return m, s


def scaled_sum(terms) -> Scaled:
    """Sum of Scaled values with a common broadcast shape."""
    ms = np.broadcast_arrays(*[t.mantissa for t in terms])
    ss = np.broadcast_arrays(*[t.log_scale for t in terms])
    ss = [np.where(m != 0, s, -np.inf) for m, s in zip(ms, ss)]
    top = np.maximum.reduce(ss)
    top = np.where(np.isfinite(top), top, 0.0)
    acc = np.zeros(top.shape, dtype=complex)
    for m, s in zip(ms, ss):
        acc = acc + m * np.exp(s - top)
    return Scaled.make(acc, top)


def _check(order, z):
    if int(order) != order or order < 0:
        raise ValueError(f"order must be a nonnegative integer, got {order!r}")
    if order > MAX_ORDER:
        raise OrderOverflow(f"order {order} exceeds cap {MAX_ORDER}")
    z = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(z)):
        raise DomainOverflow("argument is not finite")
    if z.size and np.max(np.abs(z)) > MAX_ARGUMENT:
        raise DomainOverflow(f"|argument| exceeds cap {MAX_ARGUMENT:g}")
    return int(order), z


# ---------------------------------------------------------------- series --

def _series(log_pref, w, coef):
    """``exp(log_pref) * sum_s w**s / prod_{t<=s} coef(t)``, elementwise.

    ``coef(t)`` gives the denominator growth of the t-th term (t >= 1).
    """
    total = np.ones(w.shape, dtype=complex)
    term = np.ones(w.shape, dtype=complex)
    small = np.zeros(w.shape, dtype=int)
    t = 0
    while True:
        t += 1
        term = term * w / coef(t)
        total = total + term
        tiny = np.abs(term) <= _SERIES_TOL * np.abs(total)
        small = np.where(tiny, small + 1, 0)
        if np.all(small >= 3) or t > 5000:
            break
    mant = total * np.exp(1j * log_pref.imag)
    return Scaled.make(mant, log_pref.real)


def bessel_j_series(order, z) -> Scaled:
    """J_order(z) by its power series (any z; cancellation grows with |z|)."""
    m, z = _check(order, z)
    shape = z.shape
    z = z.ravel()
    nz = z != 0
    zs = np.where(nz, z, 1.0)
    log_pref = m * (np.log(zs) - _LN2) - gammaln(m + 1)
    out = _series(log_pref, -(zs * zs) / 4, lambda t: t * (m + t))
    mant = np.where(nz, out.mantissa, 1.0 if m == 0 else 0.0)
    logs = np.where(nz, out.log_scale, 0.0)
    return Scaled.make(mant.reshape(shape), logs.reshape(shape))


def spherical_j_series(order, z) -> Scaled:
    """j_order(z) by its power series."""
    l, z = _check(order, z)
    shape = z.shape
    z = z.ravel()
    nz = z != 0
    zs = np.where(nz, z, 1.0)
    log_dfact = gammaln(2 * l + 2) - l * _LN2 - gammaln(l + 1)
    log_pref = l * np.log(zs) - log_dfact
    out = _series(log_pref, -(zs * zs) / 2, lambda t: t * (2 * l + 2 * t + 1))
    mant = np.where(nz, out.mantissa, 1.0 if l == 0 else 0.0)
    logs = np.where(nz, out.log_scale, 0.0)
    return Scaled.make(mant.reshape(shape), logs.reshape(shape))


# ------------------------------------------------------------ recurrence --

def _start_index(m, absz):
    top = max(float(m), float(np.max(absz, initial=0.0)))
    return int(top + 30 + 6 * top ** (1.0 / 3.0))


def _miller_cyl(m, z):
    """J_m, J_{m+1} for 1-D z with Im z >= 0 and z != 0."""
    start = _start_index(m + 1, np.abs(z))
    n_pts = z.shape[0]
    acc = np.zeros(n_pts, dtype=complex)  # normalization sum, scaled by shift
    phase = [1.0, -1j, -1.0, 1j]
    captured = {}
    p_next = np.zeros(n_pts, dtype=complex)
    p = np.full(n_pts, 1e-200, dtype=complex)
    shift = np.zeros(n_pts)
    inv_z = 1.0 / z
    n = start
    while True:
        if n in (m, m + 1):
            captured[n] = (p.copy(), shift.copy())
        if n == 0:
            acc = acc + p
            break
        acc = acc + 2.0 * phase[n % 4] * p
        p_prev = (2.0 * n) * inv_z * p - p_next
        p_next, p = p, p_prev
        n -= 1
        big = np.abs(p) > _RESCALE_AT
        if big.any():
            p = np.where(big, p / _RESCALE_AT, p)
            p_next = np.where(big, p_next / _RESCALE_AT, p_next)
            acc = np.where(big, acc / _RESCALE_AT, acc)
            shift = shift + np.where(big, _RESCALE_LOG, 0.0)
    # acc * exp(shift) = exp(-iz) / (true scale of the p sequence)
    out = []
    for k in (m, m + 1):
        pk, sk = captured[k]
        mant = pk / acc * np.exp(-1j * z.real)
        out.append(Scaled.make(mant, sk - shift + z.imag))
    return out


def _sph_closed(z):
    """j_0, j_1 for 1-D z with Im z >= 0, |z| moderate, as Scaled."""
    # sin z * exp(-Im z) and cos z * exp(-Im z) without overflow
    e1 = np.exp(1j * z.real - 2.0 * z.imag)   # exp(iz) * exp(-Im z) ...
    e2 = np.exp(-1j * z.real)                 # exp(-iz) * exp(-Im z)
    sin_s = (e1 - e2) / 2j
    cos_s = (e1 + e2) / 2
    j0 = Scaled.make(sin_s / z, z.imag)
    j1 = Scaled.make(sin_s / (z * z) - cos_s / z, z.imag)
    return j0, j1


def _miller_sph(l, z):
    """j_l, j_{l+1} for 1-D z with Im z >= 0 and |z| >= 0.5."""
    start = _start_index(l + 1, np.abs(z))
    n_pts = z.shape[0]
    captured = {}
    p_next = np.zeros(n_pts, dtype=complex)
    p = np.full(n_pts, 1e-200, dtype=complex)
    shift = np.zeros(n_pts)
    inv_z = 1.0 / z
    n = start
    while True:
        if n in (l, l + 1, 0, 1):
            captured[n] = (p.copy(), shift.copy())
        if n == 0:
            break
        p_prev = (2.0 * n + 1.0) * inv_z * p - p_next
        p_next, p = p, p_prev
        n -= 1
        big = np.abs(p) > _RESCALE_AT
        if big.any():
            p = np.where(big, p / _RESCALE_AT, p)
            p_next = np.where(big, p_next / _RESCALE_AT, p_next)
            shift = shift + np.where(big, _RESCALE_LOG, 0.0)
    j0, j1 = _sph_closed(z)
    p0, s0 = captured[0]
    p1, s1 = captured[1]
    use0 = np.abs(p0) * np.exp(s1 - s0) >= np.abs(p1)
    # scale factor mapping the p-sequence (at shift s) onto true values
    ref_m = np.where(use0, j0.mantissa / p0, j1.mantissa / p1)
    ref_s = np.where(use0, j0.log_scale - s0, j1.log_scale - s1)
    out = []
    for k in (l, l + 1):
        pk, sk = captured[k]
        out.append(Scaled.make(pk * ref_m, sk + ref_s))
    return out


# --------------------------------------------------------------- drivers --

def _pair(order, z, kind):
    m, z = _check(order, z)
    shape = z.shape
    zf = z.ravel()
    lower = zf.imag < 0
    zu = np.where(lower, np.conj(zf), zf)
    az = np.abs(zu)
    if kind == "cyl":
        use_series = az * az <= 4.0 * (m + 1)
        series = bessel_j_series
        miller = _miller_cyl
    else:
        use_series = (az < 0.5) | (az * az <= 2.0 * (2 * m + 3))
        series = spherical_j_series
        miller = _miller_sph
    mant = np.zeros((2, zu.size), dtype=complex)
    logs = np.zeros((2, zu.size))
    idx = np.nonzero(use_series)[0]
    if idx.size:
        for row, k in enumerate((m, m + 1)):
            v = series(k, zu[idx])
            mant[row, idx], logs[row, idx] = v.mantissa, v.log_scale
    idx = np.nonzero(~use_series)[0]
    if idx.size:
        for row, v in enumerate(miller(m, zu[idx])):
            mant[row, idx], logs[row, idx] = v.mantissa, v.log_scale
    mant = np.where(lower, np.conj(mant), mant)
    return (Scaled.make(mant[0].reshape(shape), logs[0].reshape(shape)),
            Scaled.make(mant[1].reshape(shape), logs[1].reshape(shape)))


def bessel_j_pair(order, z):
    """(J_order(z), J_{order+1}(z)) as Scaled values."""
    return _pair(order, z, "cyl")


def spherical_j_pair(order, z):
    """(j_order(z), j_{order+1}(z)) as Scaled values."""
    return _pair(order, z, "sph")


def bessel_j(order, argument) -> Scaled:
    """Cylindrical Bessel function J_order(argument)."""
    return bessel_j_pair(order, argument)[0]


def spherical_j(order, argument) -> Scaled:
    """Spherical Bessel function j_order(argument)."""
    return spherical_j_pair(order, argument)[0]


def bessel_j_recurrence(order, z) -> Scaled:
    """J_order(z) forced through the backward-recurrence path (z != 0)."""
    m, z = _check(order, z)
    zf = z.ravel()
    lower = zf.imag < 0
    zu = np.where(lower, np.conj(zf), zf)
    v = _miller_cyl(m, zu)[0]
    mant = np.where(lower, np.conj(v.mantissa), v.mantissa)
    return Scaled.make(mant.reshape(z.shape), v.log_scale.reshape(z.shape))


def bessel_j_prime(order, argument) -> Scaled:
    """J'_order(argument) = (J_{m-1} - J_{m+1}) / 2, regular at 0."""
    m, _ = _check(order, argument)
    if m == 0:
        return -bessel_j_pair(1, argument)[0]
    lo, _ = bessel_j_pair(m - 1, argument)
    _, hi = bessel_j_pair(m, argument)
    return (lo - hi) * 0.5


def spherical_j_prime(order, argument) -> Scaled:
    """j'_l = (l j_{l-1} - (l+1) j_{l+1}) / (2l+1), regular at 0."""
    l, _ = _check(order, argument)
    if l == 0:
        return -spherical_j_pair(1, argument)[0]
    lo, _ = spherical_j_pair(l - 1, argument)
    _, hi = spherical_j_pair(l, argument)
    return (lo * float(l) - hi * float(l + 1)) * (1.0 / (2 * l + 1))
