"""Principal boundary symbols and the ellipticity check.

On the boundary cotangent fiber the Dirichlet-to-Neumann map of medium j
has principal symbol ``rho_j = i sqrt(r0 - z m_j)`` (``m_j = n_j / c_j``,
``r0`` the symbol of the boundary Laplacian).  The combination
``b0 = (c1 rho1 - c2 rho2)(1 - chi)`` is elliptic of order -1 when
``c1 == c2`` and of order +1 otherwise; :func:`verify_ellipticity` checks
this on a grid.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .errors import EllipticityFailure, OutsideEllipticZone
from .modal import MediumPair, classify

DELTA0 = 1e-2
R0_RANGE = (1e-2, 1e6)
FLATNESS = 0.2
C1_FLOOR = 1e-8
AGREE = 1e-12


def cutoff(s):
    """C^2 smoothstep: 1 for s <= 1, 0 for s >= 2."""
    t = np.clip(np.asarray(s, dtype=float) - 1.0, 0.0, 1.0)
    return 1.0 - t ** 3 * (10 - 15 * t + 6 * t ** 2)


def in_window(z) -> bool:
    z = complex(z)
    return 0.5 < abs(z.real) < 3 and abs(z.imag) < 1


@dataclass(frozen=True)
class SymbolPoint:
    r0: float
    z: complex
    delta0: float = DELTA0

    def __post_init__(self):
        if not (math.isfinite(self.r0) and self.r0 >= 0):
            raise ValueError("r0 must be a nonnegative real")
        if not self.delta0 > 0:
            raise ValueError("delta0 must be positive")
        object.__setattr__(self, "z", complex(self.z))

    @property
    def chi(self) -> float:
        return float(cutoff(self.delta0 * self.r0))


def _rho(r0, z, m):
    r0 = np.asarray(r0, dtype=float)
    z = np.asarray(z, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = z * m / r0
    bad = ~(np.abs(w) <= 0.5)
    if np.any(bad):
        raise OutsideEllipticZone(
            f"|z| m / r0 exceeds 1/2 (max {np.max(np.abs(np.where(bad, w, 0))):.3g})")
    return 1j * np.sqrt(r0) * np.sqrt(1 - w)


def rho(point: SymbolPoint, m: float) -> complex:
    """i sqrt(r0) (1 - z m / r0)^(1/2), principal branch."""
    if not m > 0:
        raise ValueError("m must be positive")
    return complex(_rho(point.r0, point.z, m))


def _b0(r0, z, media, chi):
    """Direct and factorized b0 arrays plus the operand scale c1|rho1| + c2|rho2|.

    Points with chi == 1 give exactly 0.  For equal c's the direct
    difference cancels like 1/r0, so agreement is judged against the
    operand scale; the factorized form is the accurate one.
    """
    r0 = np.asarray(r0, dtype=float)
    z = np.asarray(z, dtype=complex)
    r0, z, chi = np.broadcast_arrays(r0, z, np.asarray(chi, dtype=float))
    direct = np.zeros(r0.shape, dtype=complex)
    factored = np.zeros(r0.shape, dtype=complex)
    scale = np.zeros(r0.shape)
    live = chi < 1
    if live.any():
        c1, c2 = media.c1, media.c2
        r1 = _rho(r0[live], z[live], media.m1)
        r2 = _rho(r0[live], z[live], media.m2)
        keep = 1 - chi[live]
        direct[live] = (c1 * r1 - c2 * r2) * keep
        scale[live] = (c1 * np.abs(r1) + c2 * np.abs(r2)) * keep
        ct = c1 * media.n1 - c2 * media.n2
        if ct == 0:
            factored[live] = direct[live]
        else:
            c0 = (c1 * c1 - c2 * c2) / ct
            # c1^2 rho1^2 - c2^2 rho2^2 = ct (z - c0 r0)
            factored[live] = ct * (z[live] - c0 * r0[live]) / (c1 * r1 + c2 * r2) * keep
    return direct, factored, scale


def b0(point: SymbolPoint, media: MediumPair):
    """(direct, factorized) values of b0; their agreement is asserted."""
    d, f, scale = (complex(v) if np.iscomplexobj(v) else float(v)
                   for v in _b0(point.r0, point.z, media, point.chi))
    if abs(d - f) > AGREE * max(abs(d), abs(f), scale):
        raise AssertionError(f"b0 factorization mismatch: {d} vs {f}")
    return d, f


@dataclass(frozen=True)
class EllipticityReport:
    k: int
    C1: float
    C2: float
    flatness: float
    flat: bool
    grid_size: int

    def __iter__(self):
        return iter((self.k, self.C1, self.C2))

    def to_dict(self) -> dict:
        return {"k": self.k, "C1": self.C1, "C2": self.C2, "flatness": self.flatness,
                "flat": self.flat, "grid_size": self.grid_size}


def z_grid(n: int):
    """Interior points of the window on both sides of the imaginary axis."""
    re = np.linspace(0.5, 3.0, n + 2)[1:-1]
    im = np.linspace(-1.0, 1.0, n + 2)[1:-1]
    zz = (re[:, None] + 1j * im[None, :]).ravel()
    return np.concatenate([zz, -zz.conj()])


def verify_ellipticity(media: MediumPair, grid_size: int = 32,
                       delta0: float = DELTA0) -> EllipticityReport:
    """Bound |chi0 + b0| / <xi'>^k above and below on an (r0, z) grid.

    k is -1 for equal c's and +1 otherwise; ``<xi'> = sqrt(1 + r0)`` and
    ``chi0 = phi(delta0 r0 / 4)``, which is 1 wherever chi is nonzero.
    """
    if int(grid_size) != grid_size or grid_size < 16:
        raise ValueError("grid_size must be an integer >= 16")
    profile = classify(media)
    k = -1 if profile.holds_1_5 else 1
    r0 = np.geomspace(*R0_RANGE, grid_size)
    zs = z_grid(max(4, grid_size // 4))
    R, Z = np.meshgrid(r0, zs, indexing="ij")
    chi = cutoff(delta0 * R)
    chi0 = cutoff(delta0 * R / 4)
    direct, factored, scale = _b0(R, Z, media, chi)
    if np.any(np.abs(direct - factored) > AGREE * np.maximum(scale, np.abs(factored))):
        raise AssertionError("b0 factorization mismatch on the grid")
    ratio = np.abs(chi0 + factored) / (1 + R) ** (k / 2)
    c1, c2 = float(ratio.min()), float(ratio.max())
    top = r0 >= R0_RANGE[1] / 10
    sub = ratio[top]
    flatness = float(np.max(sub.max(axis=0) / sub.min(axis=0)) - 1)
    if c1 <= C1_FLOOR:
        raise EllipticityFailure(f"symbol degenerates: C1 = {c1:.3g}")
    return EllipticityReport(k, c1, c2, flatness, flatness <= FLATNESS, int(grid_size))
