"""Counting function N(r), Weyl constants, remainder fit and free-region scan.

Per angular mode the zeros of D_m in ``{delta0 <= |lam| <= r**2, |Im lam| <= band}``
are counted by winding over the band-limited disc minus the small disc
``|lam| < delta0`` (whose count is the structural zero order at the origin
plus anything else too close to it).  Counts are weighted by the number of
angular functions sharing the mode and summed.  Modes are independent and
may be spread over worker processes; results are merged in mode order, so
the output never depends on the worker count.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import math
import os

import numpy as np
from scipy.integrate import quad

from .errors import CountMismatch, NumericalError, TailNotEmpty
from .modal import MediumPair, ModalDeterminant, angular_weight, classify
from .winding import BandDisc, Circle, ContourRect, ZeroRecord, locate_zeros, winding_number

DELTA0 = 1e-2
C_FREE = 1.0
MIN_SIDE = 1e-6
TAIL_MODES = 3
FIT_ALLOWANCE = 0.3
C_SEARCH = (0.1, 50.0)
C_STEPS = 20


# ---------------------------------------------------------------- Weyl --

def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


@dataclass(frozen=True)
class WeylConstants:
    tau1: float
    tau2: float
    dimension: int

    @property
    def total(self) -> float:
        return self.tau1 + self.tau2

    def predict(self, r: float) -> float:
        return self.total * r ** self.dimension


def weyl_constants(media: MediumPair, method: str = "closed") -> WeylConstants:
    """tau_j = omega_d / (2 pi)^d * integral over the domain of (n_j/c_j)^(d/2).

    ``method="quadrature"`` integrates the radial profile numerically
    instead of using the closed form (coefficients are constant, so the two
    agree; the quadrature path exists as a cross-check).
    """
    d, R = media.dimension, media.radius
    w = unit_ball_volume(d)
    pref = w / (2 * math.pi) ** d
    taus = []
    for c, n in ((media.c1, media.n1), (media.c2, media.n2)):
        if method == "closed":
            integral = (n / c) ** (d / 2) * w * R ** d
        elif method == "quadrature":
            shell = d * w  # surface area of the unit sphere
            integral, _ = quad(lambda s: (n / c) ** (d / 2) * shell * s ** (d - 1),
                               0.0, R, epsabs=0.0, epsrel=1e-13)
        else:
            raise ValueError(f"unknown method {method!r}")
        taus.append(pref * integral)
    return WeylConstants(taus[0], taus[1], d)


def mode_limit(media: MediumPair, r: float) -> int:
    """Highest mode that can carry eigenvalues with |lam| <= r**2 (with margin)."""
    return math.ceil(1.5 * r * media.radius * media.max_index) + 10


def default_band(r: float, kappa: float, epsilon: float, c_free: float = C_FREE) -> float:
    return c_free * r ** (2 - kappa + epsilon)


# ------------------------------------------------------------ per mode --

@dataclass
class _ModeResult:
    mode: int
    origin_order: int
    counts: list
    records: list
    warnings: list


def _origin_check(det, delta0, min_side):
    """Zero order inside |lam| < delta0 plus warnings for zeros off the origin."""
    order = winding_number(det, Circle(0j, delta0, min_side)).count
    warnings = []
    if order:
        box = ContourRect(complex(-delta0, -delta0), complex(delta0, delta0), min_side)
        try:
            near = [z.lam for z in locate_zeros(det, box)]
        except NumericalError:
            near = None
        if near is None:
            warnings.append(f"mode {det.mode}: {order} zeros inside the origin-exclusion "
                            f"disc |lam| < {delta0:g} not counted")
        for z in near or ():
            if 1e-6 * delta0 < abs(z) < delta0:
                warnings.append(f"mode {det.mode}: zero at {z:.6g} inside the "
                                f"origin-exclusion disc |lam| < {delta0:g} not counted")
    return order, warnings


def _in_count_region(lam, r, band, delta0):
    return delta0 <= abs(lam) <= r * r and abs(lam.imag) <= band


def _mode_task(args):
    media, m, radii, bands, delta0, min_side, seed, locate = args
    det = ModalDeterminant(media, m)
    weight = angular_weight(media.dimension, m)
    p0, warnings = _origin_check(det, delta0, min_side)
    counts = []
    for r, b in zip(radii, bands):
        c = winding_number(det, BandDisc(r * r, b, min_side)).count - p0
        counts.append(c)
    records = []
    if locate and counts[-1] > 0:
        rmax, bmax = radii[-1], bands[-1]
        rect = ContourRect(complex(-rmax * rmax, -bmax), complex(rmax * rmax, bmax), min_side)
        found = locate_zeros(det, rect, mode=m, angular_weight=weight,
                             symmetric=True, seed=seed)
        records = [z for z in found if _in_count_region(z.lam, rmax, bmax, delta0)]
        for z in records:
            z.degenerate = det.dirichlet_degenerate(z.lam)
        for r, b, c in zip(radii, bands, counts):
            got = sum(z.multiplicity for z in records if _in_count_region(z.lam, r, b, delta0))
            if got != c:
                raise CountMismatch(f"mode {m}, r={r:g}: located {got} zeros, winding says {c}")
    return _ModeResult(m, p0, [c * weight for c in counts], records, warnings)


def worker_count(workers=None) -> int:
    if workers is None:
        env = os.environ.get("TC_WORKERS")
        workers = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(workers))


def _run(fn, tasks, workers):
    workers = worker_count(workers)
    if workers == 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=1))


def _census_modes(media, radii, bands, delta0, min_side, seed, locate, workers):
    """Run all modes up to the mode limit plus verified-empty tail modes."""
    r_top = radii[-1]
    m_max = mode_limit(media, r_top)
    done = {}

    def run(modes):
        tasks = [(media, m, radii, bands, delta0, min_side, seed, locate)
                 for m in modes if m not in done]
        for res in _run(_mode_task, tasks, workers):
            done[res.mode] = res

    for attempt in range(2):
        run(range(m_max + TAIL_MODES + 1))
        tail = [m for m in range(m_max + 1, m_max + TAIL_MODES + 1) if done[m].counts[-1]]
        if not tail:
            break
        if attempt == 1:
            raise TailNotEmpty(f"modes {tail} above the mode limit still carry zeros")
        m_max = max(m_max + 2 * TAIL_MODES, math.ceil(1.5 * m_max))
    return [done[m] for m in sorted(done)], m_max


# ---------------------------------------------------------- count_ite --

def count_ite(media: MediumPair, r: float, band: float | None = None, *,
              delta0: float = DELTA0, epsilon: float = 0.05, c_free: float = C_FREE,
              min_side: float = MIN_SIDE, seed: int = 0, workers=None, locate=True):
    """Weighted number of eigenvalues with delta0 <= |lam| <= r**2, |Im lam| <= band.

    Returns ``(count, records)``; records are sorted by (mode, Re, Im) and
    their weighted multiplicities add up to ``count``.
    """
    if not r >= 1:
        raise ValueError("r must be >= 1")
    if band is None:
        band = default_band(r, classify(media).kappa, epsilon, c_free)
    if not band > 0:
        raise ValueError("band must be positive")
    results, _ = _census_modes(media, [r], [band], delta0, min_side, seed, locate, workers)
    count = sum(res.counts[0] for res in results)
    records = sorted((z for res in results for z in res.records), key=ZeroRecord.sort_key)
    if locate and sum(z.weighted for z in records) != count:
        raise CountMismatch("records and winding count disagree")
    return count, records


# -------------------------------------------------------------- census --

@dataclass
class CensusReport:
    r_grid: list
    counts: list
    weyl: list
    residuals: list
    fitted_exponent: float
    kappa_used: float
    epsilon: float
    warnings: list = field(default_factory=list)
    records: list = field(default_factory=list)
    dyadic: list = field(default_factory=list)
    tau: WeylConstants | None = None
    m_max: int = 0
    bands: list = field(default_factory=list)

    @property
    def exponent_bound(self) -> float:
        return self.tau.dimension - self.kappa_used + self.epsilon + FIT_ALLOWANCE


def radius_grid(r_max: float, n: int) -> list:
    """Geometric grid ending at r_max with ratio sqrt(2) (wider ratio if it would dip below 1)."""
    lo = r_max / math.sqrt(2) ** (n - 1)
    if n == 1:
        return [float(r_max)]
    if lo < 1:
        return [float(x) for x in np.geomspace(1.0, r_max, n)]
    out = []
    for i in range(n):
        k = n - 1 - i
        r = r_max / 2 ** (k // 2)
        out.append(float(r / math.sqrt(2) if k % 2 else r))
    return out


def fit_exponent(radii, residuals):
    """Least-squares slope of log|residual| against log r over the upper half."""
    half = len(radii) // 2
    pts = [(math.log(r), math.log(abs(e))) for r, e in zip(radii[half:], residuals[half:]) if e]
    if len(pts) < 2:
        return float("nan")
    x, y = np.array(pts).T
    return float(np.polyfit(x, y, 1)[0])


def _weighted(records, r, band, delta0):
    return sum(z.weighted for z in records if _in_count_region(z.lam, r, band, delta0))


def census(media: MediumPair, r_max: float, n_samples: int, epsilon: float, *,
           delta0: float = DELTA0, c_free: float = C_FREE, min_side: float = MIN_SIDE,
           seed: int = 0, workers=None) -> CensusReport:
    if not r_max >= 8:
        raise ValueError("r_max must be >= 8")
    if not 0 < epsilon <= 0.2:
        raise ValueError("epsilon must lie in (0, 0.2]")
    if int(n_samples) != n_samples or n_samples < 1:
        raise ValueError("n_samples must be a positive integer")
    kappa = classify(media).kappa
    tau = weyl_constants(media)
    radii = radius_grid(r_max, int(n_samples))
    bands = [default_band(r, kappa, epsilon, c_free) for r in radii]
    results, m_max = _census_modes(media, radii, bands, delta0, min_side, seed, True, workers)
    counts = [sum(res.counts[i] for res in results) for i in range(len(radii))]
    records = sorted((z for res in results for z in res.records), key=ZeroRecord.sort_key)
    warnings = [w for res in results for w in res.warnings]
    for r, b, n in zip(radii, bands, counts):
        if _weighted(records, r, b, delta0) != n:
            raise CountMismatch(f"r={r:g}: records and winding count disagree")
    weyl = [tau.predict(r) for r in radii]
    residuals = [n - w for n, w in zip(counts, weyl)]
    shrink = 1 - 2 ** (-media.dimension / 2)
    dyadic = []
    for r, b, n in zip(radii, bands, counts):
        inner = _weighted(records, r / math.sqrt(2), b, delta0)
        dyadic.append({"r": r, "shell_count": n - inner,
                       "predicted": shrink * tau.predict(r)})
    degenerate = [z for z in records if z.degenerate]
    for z in degenerate:
        warnings.append(f"mode {z.mode}: eigenvalue {z.lam:.12g} is a Dirichlet eigenvalue "
                        f"of both media; multiplicity is the zero order")
    return CensusReport(radii, counts, weyl, residuals, fit_exponent(radii, residuals),
                        kappa, epsilon, warnings, records, dyadic, tau, m_max, bands)


def telescoped(count_at, r: float, k0: int) -> int:
    """Sum of dyadic shells N(r/2^(k/2)) - N(r/2^((k+1)/2)), k=0..k0, plus the core."""
    total = count_at(r / 2 ** ((k0 + 1) / 2))
    for k in range(k0 + 1):
        total += count_at(r / 2 ** (k / 2)) - count_at(r / 2 ** ((k + 1) / 2))
    return total


# --------------------------------------------------------- free region --

@dataclass
class FreeRegionReport:
    C: float
    kappa: float
    boxes_scanned: int
    violations: list
    min_modulus_floor: float
    minimal_C: float | None = None
    candidates: list = field(default_factory=list)


def free_exponent(kappa: float) -> float:
    return 1 - kappa / 2


def in_free_region(lam, C, kappa, r, delta0=DELTA0) -> bool:
    x = abs(lam.real)
    return (delta0 <= x <= r * r
            and C * (x + 1) ** free_exponent(kappa) <= abs(lam.imag) <= r * r)


def free_region_tiles(C, kappa, r, delta0=DELTA0, min_side=MIN_SIDE, lower=False):
    """Rectangles covering the free region in one half plane.

    Columns in |Re| run from delta0 to 1 and then grow by a factor 1.5;
    each column starts at the curve's height on its inner edge, so the
    union covers the region (slightly more than it).
    """
    top = r * r
    edges = [delta0, 1.0]
    while edges[-1] < top:
        edges.append(min(top, edges[-1] * 1.5))
    edges = [e for e in edges if e <= top]
    if edges[-1] < top:
        edges.append(top)
    p = free_exponent(kappa)
    tiles = []
    for x0, x1 in zip(edges[:-1], edges[1:]):
        y0 = C * (x0 + 1) ** p
        if y0 >= top:
            continue
        for lo, hi in ((complex(x0, y0), complex(x1, top)), (complex(-x1, y0), complex(-x0, top))):
            rect = ContourRect(lo, hi, min_side)
            tiles.append(rect.conj() if lower else rect)
    return tiles


def _free_task(args):
    media, m, tiles, seed = args
    det = ModalDeterminant(media, m)
    weight = angular_weight(media.dimension, m)
    found = []
    for tile in tiles:
        k = winding_number(det, tile).count
        if k:
            for z in locate_zeros(det, tile, mode=m, angular_weight=weight, seed=seed, total=k):
                # tiles share edges; keep each zero once
                if all(abs(z.lam - y.lam) > 1e-9 * (1 + abs(z.lam)) for y in found):
                    found.append(z)
    return found


def free_region_scan(media: MediumPair, C, r: float, *, delta0: float = DELTA0,
                     min_side: float = MIN_SIDE, seed: int = 0, workers=None,
                     lower: bool = False) -> FreeRegionReport:
    """Look for eigenvalues with |Im lam| >= C (|Re lam| + 1)^(1 - kappa/2).

    ``C="auto"`` scans once at the bottom of the search interval and then
    bisects for the smallest C (to 20 steps) without violations; the
    report then carries that C.  Returns no finite ``minimal_C`` when even
    the top of the interval has violations.
    """
    if not r >= 2:
        raise ValueError("r must be >= 2")
    auto = C == "auto"
    if not auto and not (isinstance(C, (int, float)) and C > 0):
        raise ValueError("C must be positive or 'auto'")
    kappa = classify(media).kappa
    scan_c = C_SEARCH[0] if auto else float(C)
    tiles = free_region_tiles(scan_c, kappa, r, delta0, min_side, lower)
    found = []
    if tiles:
        tasks = [(media, m, tiles, seed) for m in range(mode_limit(media, r) + 1)]
        for part in _run(_free_task, tasks, workers):
            found += part
    found = [z for z in found if in_free_region(z.lam, scan_c, kappa, r, delta0)]
    found.sort(key=ZeroRecord.sort_key)

    def violations(c):
        return [z for z in found if in_free_region(z.lam, c, kappa, r, delta0)]

    minimal = None
    if auto:
        lo, hi = C_SEARCH
        if not violations(lo):
            minimal = lo
        elif not violations(hi):
            for _ in range(C_STEPS):
                mid = (lo + hi) / 2
                lo, hi = (lo, mid) if not violations(mid) else (mid, hi)
            minimal = hi
        final_c = minimal if minimal is not None else hi
    else:
        final_c = float(C)
        if not found:
            minimal = final_c
    return FreeRegionReport(final_c, kappa, len(tiles), violations(final_c), delta0,
                            minimal, found)
