"""Media description and the per-mode characteristic determinant.

After separation of variables on the disk (d=2) or ball (d=3) a mode-m
solution of ``(div c_j grad + lambda n_j) u_j = 0`` is ``F_m(k_j r)`` times an
angular factor, with ``k_j = sqrt(lambda n_j / c_j)`` and ``F`` the
cylindrical (d=2) or spherical (d=3) Bessel function.  Matching trace and
weighted flux at ``r = R`` gives the 2x2 determinant

    det [[F_m(k1 R),          -F_m(k2 R)],
         [c1 k1 F_m'(k1 R),  -c2 k2 F_m'(k2 R)]]

which, multiplied by ``lambda**-m``, is an entire function of lambda whose
nonzero zeros are the mode-m transmission eigenvalues.  Writing
``A = F_m(x)``, ``B = x F_m'(x) = m F_m(x) - x F_{m+1}(x)`` and ``x = kR``
the determinant is ``(c1 A2 B1 - c2 A1 B2) / R``, which is free of the
``m/x`` singularity.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
import math

import numpy as np
from scipy.optimize import brentq

from .complexfn import Scaled, bessel_j_pair, scaled_sum, spherical_j_pair
from .errors import Condition14Violated

# Below this |lambda| the determinant is evaluated from its Taylor series,
# recovered by trapezoidal Cauchy integrals on a small circle.
_TAYLOR_RADIUS = 1e-6
_CAUCHY_CIRCLE = 0.05
_CAUCHY_NODES = 64


@dataclass(frozen=True)
class MediumPair:
    dimension: int
    radius: float
    c1: float
    n1: float
    c2: float
    n2: float
    strict: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        if self.dimension not in (2, 3):
            raise ValueError(f"dimension must be 2 or 3, got {self.dimension!r}")
        for name in ("radius", "c1", "n1", "c2", "n2"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise TypeError(f"{name} must be a real number, got {v!r}")
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and positive, got {v!r}")
        if self.strict and _exact(self.c1) * _exact(self.n1) == _exact(self.c2) * _exact(self.n2):
            raise Condition14Violated(self.c1 * self.n1)

    @classmethod
    def unchecked(cls, dimension, radius, c1, n1, c2, n2) -> "MediumPair":
        """Build a pair without enforcing c1*n1 != c2*n2 (evaluator tests)."""
        return cls(dimension, radius, c1, n1, c2, n2, strict=False)

    @property
    def m1(self) -> float:
        return self.n1 / self.c1

    @property
    def m2(self) -> float:
        return self.n2 / self.c2

    @property
    def max_index(self) -> float:
        """max_j sqrt(n_j / c_j)."""
        return math.sqrt(max(self.m1, self.m2))

    def to_dict(self) -> dict:
        return {"dimension": self.dimension, "radius": self.radius,
                "c1": self.c1, "n1": self.n1, "c2": self.c2, "n2": self.n2}


def _exact(x) -> Fraction:
    return Fraction(x)


@dataclass(frozen=True)
class ConditionProfile:
    holds_1_5: bool
    holds_1_6: bool
    holds_1_8: bool
    holds_1_9: bool
    kappa: float


def classify(media: MediumPair) -> ConditionProfile:
    """Evaluate the coefficient conditions exactly and pick kappa.

    For constant coefficients the normal derivatives of c_j vanish, so
    ``c1 == c2`` already gives the equal-c case.
    """
    c1, n1, c2, n2 = (_exact(v) for v in (media.c1, media.n1, media.c2, media.n2))
    if c1 * n1 == c2 * n2:
        raise Condition14Violated(media.c1 * media.n1)
    equal_c = c1 == c2
    ratio_differs = n1 * c2 != n2 * c1
    holds_1_8 = ratio_differs
    holds_1_9 = not ratio_differs
    if equal_c or holds_1_8 or holds_1_9:
        kappa = 0.5
    else:  # unreachable for constants; kept for the variable-coefficient case
        kappa = 0.4
    return ConditionProfile(equal_c, not equal_c, holds_1_8, holds_1_9, kappa)


def angular_weight(dimension: int, mode: int) -> int:
    """Number of independent angular functions sharing the radial mode."""
    if dimension == 2:
        return 1 if mode == 0 else 2
    return 2 * mode + 1


@dataclass(frozen=True)
class ModalDeterminant:
    """The entire function D_m(lambda) for one angular mode."""

    media: MediumPair
    mode: int

    def __post_init__(self):
        if int(self.mode) != self.mode or self.mode < 0:
            raise ValueError(f"mode must be a nonnegative integer, got {self.mode!r}")

    # -- radial building blocks -------------------------------------------
    def _blocks(self, lam, branch=1):
        """A_j, B_j, Q_j = x_j F_{m+1}(x_j) (Scaled) and x_j at the points ``lam``."""
        med, m = self.media, self.mode
        pair = bessel_j_pair if med.dimension == 2 else spherical_j_pair
        root = branch * np.sqrt(lam)
        out = []
        for mj in (med.m1, med.m2):
            x = root * math.sqrt(mj) * med.radius
            a, p = pair(m, x)
            q = p * x
            out.append((a, scaled_sum([a * float(m), -q]), q, x))
        return out

    def _parts(self, lam, branch=1):
        """Return (Delta, E) with D = lam**-m Delta / R, D' = lam**(-m-1) E / (2R).

        Both are written in A and Q = A*m - B so that the m*A1*A2 terms,
        which cancel to many digits near the origin at high order, never
        appear:
            Delta = m (c1-c2) A1 A2 + c2 A1 Q2 - c1 A2 Q1
            E     = (c1-c2) Q1 Q2 + lam R^2 (n2-n1) A1 A2 - al A1 Q2 + be A2 Q1
        with al = be = m (c1+c2) for d=2 and al = l c1 + (l+1) c2,
        be = (l+1) c1 + l c2 for d=3.
        """
        med, m = self.media, self.mode
        (a1, _, q1, _), (a2, _, q2, _) = self._blocks(lam, branch)
        c1, c2 = med.c1, med.c2
        aa = a1 * a2
        a1q2, a2q1 = a1 * q2, a2 * q1
        cross = scaled_sum([aa * (m * (c1 - c2)), a1q2 * c2, -(a2q1 * c1)])
        if med.dimension == 2:
            al = be = m * (c1 + c2)
        else:
            al, be = m * c1 + (m + 1) * c2, (m + 1) * c1 + m * c2
        e = scaled_sum([q1 * q2 * (c1 - c2),
                        aa * (lam * med.radius ** 2 * (med.n2 - med.n1)),
                        -(a1q2 * float(al)), a2q1 * float(be)])
        return cross, e

    def _power(self, lam, shift):
        """lam**-(m+shift) as a Scaled value (principal logarithm)."""
        k = self.mode + shift
        log_lam = np.log(lam)
        return Scaled.make(np.exp(-1j * k * log_lam.imag), -k * log_lam.real)

    def _direct(self, lam, branch=1):
        cross, e = self._parts(lam, branch)
        r = self.media.radius
        d = cross * self._power(lam, 0) * (1.0 / r)
        dd = e * self._power(lam, 1) * (0.5 / r)
        return d, dd

    def _taylor(self, lam):
        """D and D' near the origin from Cauchy-integral Taylor coefficients."""
        n = _CAUCHY_NODES
        nodes = _CAUCHY_CIRCLE * np.exp(2j * np.pi * np.arange(n) / n)
        d, _ = self._direct(nodes)
        top = float(np.max(d.log_scale))
        vals = d.mantissa * np.exp(d.log_scale - top)
        coef = np.fft.fft(vals) / n / _CAUCHY_CIRCLE ** np.arange(n)
        coef = coef[: n // 2]
        powers = lam[:, None] ** np.arange(coef.size)[None, :]
        val = powers @ coef
        dcoef = coef[1:] * np.arange(1, coef.size)
        dval = powers[:, : dcoef.size] @ dcoef
        return Scaled.make(val, top), Scaled.make(dval, top)

    def evaluate_both(self, lam, branch=1):
        """(D_m(lam), D_m'(lam)) as Scaled arrays."""
        lam = np.asarray(lam, dtype=complex)
        shape = lam.shape
        flat = lam.ravel()
        small = np.abs(flat) < _TAYLOR_RADIUS
        mant = np.zeros((2, flat.size), dtype=complex)
        logs = np.zeros((2, flat.size))
        for mask, fn in ((~small, lambda z: self._direct(z, branch)),
                         (small, self._taylor)):
            idx = np.nonzero(mask)[0]
            if idx.size:
                d, dd = fn(flat[idx])
                mant[0, idx], logs[0, idx] = d.mantissa, d.log_scale
                mant[1, idx], logs[1, idx] = dd.mantissa, dd.log_scale
        return (Scaled.make(mant[0].reshape(shape), logs[0].reshape(shape)),
                Scaled.make(mant[1].reshape(shape), logs[1].reshape(shape)))

    def __call__(self, lam, branch=1) -> Scaled:
        return self.evaluate_both(lam, branch)[0]

    def derivative(self, lam) -> Scaled:
        return self.evaluate_both(lam)[1]

    def logderiv(self, lam) -> np.ndarray:
        """D'/D; infinite at exact zeros."""
        d, dd = self.evaluate_both(lam)
        with np.errstate(divide="ignore", invalid="ignore"):
            return dd.ratio(d)

    def log_abs(self, lam) -> np.ndarray:
        return self(lam).log_abs()

    def dirichlet_degenerate(self, lam, tol=1e-6) -> bool:
        """True when lam is (numerically) a Dirichlet eigenvalue of both media."""
        lam = complex(lam)
        hits = 0
        for a, b, _, x in self._blocks(np.array([lam])):
            # Newton distance in lambda for A(lambda) = F_m(x(lambda)):
            # dA/dlambda = B / (2 lambda)
            step = abs(2 * lam * a.ratio(b)[0]) if not b.is_zero()[0] else math.inf
            hits += step < tol * (1 + abs(lam))
        return hits == 2


def eval_determinant(det: ModalDeterminant, lam) -> Scaled:
    return det(lam)


def eval_determinant_derivative(det: ModalDeterminant, lam) -> Scaled:
    return det.derivative(lam)


# ----------------------------------------------------------- Dirichlet --

def _real_radial(dimension, order, x):
    pair = bessel_j_pair if dimension == 2 else spherical_j_pair
    return pair(order, np.asarray(x, dtype=float))[0]


def radial_zeros(dimension: int, order: int, xmax: float) -> list:
    """Positive zeros of J_order (d=2) or j_order (d=3) up to xmax, ascending."""
    if xmax <= order:
        return []
    lo = max(float(order), 1e-3)
    grid = np.arange(lo, xmax + 0.25, 0.25)
    vals = _real_radial(dimension, order, grid)
    sign = np.sign(vals.mantissa.real)

    def fn(t):
        v = _real_radial(dimension, order, t)
        return float(np.real(v.value()))

    zeros = []
    for i in np.nonzero(sign[:-1] * sign[1:] < 0)[0]:
        z = brentq(fn, grid[i], grid[i + 1], xtol=1e-14, maxiter=200)
        if z <= xmax:
            zeros.append(z)
    return zeros


def dirichlet_eigenvalues(media: MediumPair, which: int, r: float):
    """Dirichlet eigenvalues of -(c/n) Laplacian for medium ``which`` up to r**2.

    Returns a list of ``(lambda, multiplicity)`` sorted ascending; the
    multiplicity is the angular weight of the mode.
    """
    if which not in (1, 2):
        raise ValueError("which must be 1 or 2")
    if r < 1:
        raise ValueError("r must be >= 1")
    c, n = (media.c1, media.n1) if which == 1 else (media.c2, media.n2)
    scale = media.radius * math.sqrt(n / c)
    xmax = r * scale
    out = []
    m = 0
    while m <= xmax:
        for z in radial_zeros(media.dimension, m, xmax):
            out.append(((z / scale) ** 2, angular_weight(media.dimension, m)))
        m += 1
    out.sort()
    return out
