"""Argument-principle zero counting and localization for entire functions.

A function handle is anything with a ``logderiv(z)`` method returning
``f'(z)/f(z)`` elementwise for a numpy array ``z`` (see
:class:`AnalyticFunction` for wrapping a plain pair ``f, f'``).  Only the
logarithmic derivative is ever needed, so handles are free to evaluate
``f`` in scaled arithmetic.

Contours are closed, positively oriented chains of straight segments and
circular arcs.  The integral of ``f'/f`` is computed piecewise with 8-point
Gauss-Legendre panels which are bisected adaptively (at most 14 times)
until each panel agrees with its two halves.  When a zero sits on or next
to the contour, the contour is deformed by an outward circular detour; the
zeros that the detour adds are located with contour moments and removed
again, so the count always refers to the original closed region.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import NonConvergent, SplitDegenerate, ZeroOnContour

GL_ORDER = 8
_GL_X, _GL_W = np.polynomial.legendre.leggauss(GL_ORDER)
_GL_T = (_GL_X + 1.0) / 2.0
_GL_W = _GL_W / 2.0

MAX_DOUBLINGS = 14
MAX_ACTIVE = 1024
EPS_EDGE = 1e-8
EDGE_SLACK = 1e-7
SNAP_TOL = 0.25
PANEL_TOL = 1e-7
NOISE_TOL = 1e-4
ENERGY_TOL = 1e-2
MAX_DETOURS = 32
DETOUR_FRACTION = 0.02
MOMENT_MAX = 4
JITTER_ATTEMPTS = 8
CONFIRM_REACH = 0.05
_SPLIT = 0.5 + (math.sqrt(2.0) - 1.0) / 64.0


# ------------------------------------------------------------- handles --

class AnalyticFunction:
    """Wrap a function and its derivative as a handle."""

    def __init__(self, f, fprime):
        self.f = f
        self.fprime = fprime

    def logderiv(self, z):
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.asarray(self.fprime(z), dtype=complex) / np.asarray(self.f(z), dtype=complex)


def _logderiv(f):
    if hasattr(f, "logderiv"):
        return f.logderiv
    if isinstance(f, tuple) and len(f) == 2:
        return AnalyticFunction(*f).logderiv
    raise TypeError("function handle needs a logderiv(z) method")


# -------------------------------------------------------------- pieces --

@dataclass(frozen=True)
class Segment:
    a: complex
    b: complex

    def point(self, t):
        return self.a + (self.b - self.a) * np.asarray(t)

    def tangent(self, t):
        return np.full(np.shape(t), self.b - self.a, dtype=complex)

    @property
    def length(self) -> float:
        return abs(self.b - self.a)

    def sub(self, t0, t1) -> "Segment":
        return Segment(complex(self.point(t0)), complex(self.point(t1)))

    def nearest(self, z) -> float:
        d = self.b - self.a
        t = ((z - self.a) * d.conjugate()).real / abs(d) ** 2
        return min(1.0, max(0.0, t))


@dataclass(frozen=True)
class Arc:
    center: complex
    radius: float
    theta0: float
    theta1: float

    def _theta(self, t):
        return self.theta0 + (self.theta1 - self.theta0) * np.asarray(t)

    def point(self, t):
        return self.center + self.radius * np.exp(1j * self._theta(t))

    def tangent(self, t):
        return 1j * self.radius * (self.theta1 - self.theta0) * np.exp(1j * self._theta(t))

    @property
    def length(self) -> float:
        return self.radius * abs(self.theta1 - self.theta0)

    def sub(self, t0, t1) -> "Arc":
        return Arc(self.center, self.radius, float(self._theta(t0)), float(self._theta(t1)))

    def nearest(self, z) -> float:
        if z == self.center:
            return 0.0
        span = self.theta1 - self.theta0
        ang = math.atan2((z - self.center).imag, (z - self.center).real)
        best, best_d = 0.0, math.inf
        for t in (0.0, 1.0, *(((ang + 2 * math.pi * k) - self.theta0) / span for k in (-2, -1, 0, 1, 2))):
            if 0.0 <= t <= 1.0:
                d = abs(complex(self.point(t)) - z)
                if d < best_d:
                    best, best_d = t, d
        return best


# ------------------------------------------------------------- regions --

@dataclass(frozen=True)
class ContourRect:
    """Axis-aligned rectangle ``[lo.re, hi.re] x [lo.im, hi.im]``."""

    lo: complex
    hi: complex
    min_side: float = 1e-6
    samples_per_side: int = 32

    def __post_init__(self):
        lo, hi = complex(self.lo), complex(self.hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if not (lo.real < hi.real and lo.imag < hi.imag):
            raise ValueError(f"degenerate rectangle {lo} .. {hi}")
        if not self.min_side > 0:
            raise ValueError("min_side must be positive")
        if self.samples_per_side < 1:
            raise ValueError("samples_per_side must be positive")

    @property
    def width(self) -> float:
        return self.hi.real - self.lo.real

    @property
    def height(self) -> float:
        return self.hi.imag - self.lo.imag

    @property
    def center(self) -> complex:
        return (self.lo + self.hi) / 2

    def pieces(self):
        lo, hi = self.lo, self.hi
        c = [lo, complex(hi.real, lo.imag), hi, complex(lo.real, hi.imag)]
        return [Segment(c[i], c[(i + 1) % 4]) for i in range(4)]

    def contains(self, z) -> bool:
        return (self.lo.real <= z.real <= self.hi.real
                and self.lo.imag <= z.imag <= self.hi.imag)

    @property
    def scale(self) -> float:
        return max(self.width, self.height)

    def conj(self) -> "ContourRect":
        return ContourRect(complex(self.lo.real, -self.hi.imag),
                           complex(self.hi.real, -self.lo.imag),
                           self.min_side, self.samples_per_side)


@dataclass(frozen=True)
class Circle:
    """Disc ``|z - center| <= radius``, traversed as four quarter arcs."""

    center: complex
    radius: float
    min_side: float = 1e-6
    samples_per_side: int = 16

    def pieces(self):
        q = math.pi / 2
        return [Arc(complex(self.center), self.radius, k * q, (k + 1) * q) for k in range(4)]

    def contains(self, z) -> bool:
        return abs(z - self.center) <= self.radius

    @property
    def scale(self) -> float:
        return 2 * self.radius


@dataclass(frozen=True)
class BandDisc:
    """``{|z| <= outer, |Im z| <= band}`` bounded by two segments and two arcs."""

    outer: float
    band: float
    min_side: float = 1e-6
    samples_per_side: int = 64

    def pieces(self):
        if self.band >= self.outer:
            return Circle(0j, self.outer).pieces()
        a = math.asin(self.band / self.outer)
        x = math.sqrt(self.outer ** 2 - self.band ** 2)
        b = self.band
        return [Segment(complex(-x, -b), complex(x, -b)),
                Arc(0j, self.outer, -a, a),
                Segment(complex(x, b), complex(-x, b)),
                Arc(0j, self.outer, math.pi - a, math.pi + a)]

    def contains(self, z) -> bool:
        return abs(z) <= self.outer and abs(z.imag) <= self.band

    @property
    def scale(self) -> float:
        return 2 * self.outer


# -------------------------------------------------------------- results --

@dataclass(frozen=True)
class WindingResult:
    count: int
    confidence: float
    refined: bool
    raw: complex = 0j
    detours: tuple = ()
    moments: tuple = ()


@dataclass
class ZeroRecord:
    lam: complex
    multiplicity: int
    mode: int = 0
    angular_weight: int = 1
    localization_radius: float = 0.0
    degenerate: bool = False

    def __post_init__(self):
        self.lam = complex(self.lam)
        self.localization_radius = float(self.localization_radius)

    @property
    def weighted(self) -> int:
        return self.multiplicity * self.angular_weight

    def sort_key(self):
        return (self.mode, self.lam.real, self.lam.imag)

    def to_dict(self) -> dict:
        return {"re": float(self.lam.real), "im": float(self.lam.imag),
                "multiplicity": int(self.multiplicity), "mode": int(self.mode),
                "angular_weight": int(self.angular_weight),
                "localization_radius": float(self.localization_radius),
                "degenerate": bool(self.degenerate)}


# ----------------------------------------------------------- quadrature --

@dataclass
class _Integral:
    total: np.ndarray
    converged: bool
    near: complex | None = None
    min_dist: float = math.inf
    evaluations: int = 0


def _integrate(g, pieces, n_mom, center, scale, near_tol, init_panels):
    """Adaptive GL integral of [u**p g(z) dz], p = 0..n_mom, u = (z-center)/scale."""
    lengths = np.array([p.length for p in pieces])
    total_len = lengths.sum()
    pid, t0, t1 = [], [], []
    for i, (p, L) in enumerate(zip(pieces, lengths)):
        k = max(1, int(math.ceil(init_panels * L / (total_len / len(pieces)))))
        edges = np.linspace(0.0, 1.0, k + 1)
        pid += [i] * k
        t0 += list(edges[:-1])
        t1 += list(edges[1:])
    pid, t0, t1 = np.array(pid), np.array(t0), np.array(t1)
    powers = np.arange(n_mom + 1)
    out = _Integral(np.zeros(n_mom + 1, dtype=complex), True)

    def panel_sums(pid, t0, t1):
        t = t0[:, None] + (t1 - t0)[:, None] * _GL_T[None, :]
        z = np.empty(t.shape, dtype=complex)
        dz = np.empty(t.shape, dtype=complex)
        for i, p in enumerate(pieces):
            sel = pid == i
            if sel.any():
                z[sel] = p.point(t[sel])
                dz[sel] = p.tangent(t[sel])
        vals = g(z.ravel()).reshape(z.shape)
        out.evaluations += z.size
        with np.errstate(divide="ignore"):
            dist = 1.0 / np.abs(vals)
        bad = ~np.isfinite(vals)
        dist[bad] = 0.0
        j = np.unravel_index(np.argmin(dist), dist.shape)
        if dist[j] < out.min_dist:
            out.min_dist = float(dist[j])
            out.near = complex(z[j]) if bad[j] else complex(z[j] - 1.0 / vals[j])
        u = (z - center) / scale
        # non-finite samples already forced min_dist to 0 above
        with np.errstate(invalid="ignore", over="ignore"):
            integrand = (vals * dz)[:, :, None] * u[:, :, None] ** powers
            # |g|^2 |dz| blows up at poles that an odd rule would cancel;
            # |g dz| sets the noise floor near multiple zeros
            energy = np.abs(vals) ** 2 * np.abs(dz)
            mass = np.abs(vals * dz)
        integrand = np.concatenate([integrand, mass[:, :, None], energy[:, :, None]], axis=2)
        return np.einsum("k,pkm->pm", _GL_W, integrand) * (t1 - t0)[:, None]

    est = panel_sums(pid, t0, t1)
    if out.min_dist < near_tol:
        out.converged = False
        return out
    depth = 0
    while pid.size:
        if depth >= MAX_DOUBLINGS or pid.size > MAX_ACTIVE:
            out.converged = False
            out.total += est[:, :-2].sum(axis=0)
            return out
        mid = (t0 + t1) / 2
        halves = panel_sums(np.concatenate([pid, pid]),
                           np.concatenate([t0, mid]), np.concatenate([mid, t1]))
        if out.min_dist < near_tol:
            out.converged = False
            return out
        n = pid.size
        refined = halves[:n] + halves[n:]
        err = np.max(np.abs(refined[:, :-2] - est[:, :-2]), axis=1)
        mass = refined[:, -2].real
        e_ref, e_est = refined[:, -1].real, est[:, -1].real
        ok = ((err <= np.maximum(PANEL_TOL * 2 * math.pi * (t1 - t0), NOISE_TOL * mass))
              & (np.abs(e_ref - e_est) <= ENERGY_TOL * e_ref))
        out.total += refined[ok, :-2].sum(axis=0)
        keep = ~ok
        pid = np.concatenate([pid[keep], pid[keep]])
        t0, t1 = np.concatenate([t0[keep], mid[keep]]), np.concatenate([mid[keep], t1[keep]])
        est = np.concatenate([halves[:n][keep], halves[n:][keep]])
        depth += 1
    return out


def _walk(pieces, i, t, step, direction):
    """Advance along the closed chain from (i, t) by ``step`` arc length."""
    n = len(pieces)
    while True:
        L = pieces[i].length
        if direction > 0:
            room = (1.0 - t) * L
            if step <= room:
                return i, t + step / L
            step -= room
            i, t = (i + 1) % n, 0.0
        else:
            room = t * L
            if step <= room:
                return i, t - step / L
            step -= room
            i, t = (i - 1) % n, 1.0


def _crossing(pieces, i, t, zc, rho, direction):
    """First position from (i, t) along ``direction`` at distance rho from zc."""
    total = sum(p.length for p in pieces)
    step = rho / 16.0
    prev = (i, t)
    travelled = 0.0
    while travelled < total:
        cur = _walk(pieces, *prev, step, direction)
        travelled += step
        if abs(complex(pieces[cur[0]].point(cur[1])) - zc) >= rho:
            lo, hi = 0.0, step
            for _ in range(60):
                m = (lo + hi) / 2
                q = _walk(pieces, *prev, m, direction)
                if abs(complex(pieces[q[0]].point(q[1])) - zc) >= rho:
                    hi = m
                else:
                    lo = m
            return _walk(pieces, *prev, hi, direction)
        prev = cur
    raise ZeroOnContour("detour circle swallows the whole contour")


def _detour(pieces, region, zc, rho):
    """Replace the part of the chain inside |z - zc| < rho by an outward arc."""
    best = None
    for i, p in enumerate(pieces):
        t = p.nearest(zc)
        d = abs(complex(p.point(t)) - zc)
        if best is None or d < best[0]:
            best = (d, i, t)
    _, i, t = best
    i_in, t_in = _crossing(pieces, i, t, zc, rho, -1)
    i_out, t_out = _crossing(pieces, i, t, zc, rho, +1)
    p_in = complex(pieces[i_in].point(t_in))
    p_out = complex(pieces[i_out].point(t_out))
    th_a = math.atan2((p_in - zc).imag, (p_in - zc).real)
    th_b = math.atan2((p_out - zc).imag, (p_out - zc).real)
    ccw = th_a + (th_b - th_a) % (2 * math.pi)
    cands = [Arc(zc, rho, th_a, ccw), Arc(zc, rho, th_a, ccw - 2 * math.pi)]
    outside = [not region.contains(complex(c.point(0.5))) for c in cands]
    arc = cands[0] if outside[0] or not outside[1] else cands[1]
    # rebuild the chain: exit point -> ... -> entry point, then the arc
    new = []
    n = len(pieces)
    if i_out == i_in and t_out < t_in:
        new.append(pieces[i_out].sub(t_out, t_in))
    else:
        new.append(pieces[i_out].sub(t_out, 1.0))
        k = (i_out + 1) % n
        while k != i_in:
            new.append(pieces[k])
            k = (k + 1) % n
        new.append(pieces[i_in].sub(0.0, t_in))
    new.append(arc)
    return [p for p in new if p.length > 0]


def _roots_from_power_sums(s):
    """Roots of the monic polynomial with power sums s[1..k]."""
    k = len(s) - 1
    e = [1.0 + 0j]
    for j in range(1, k + 1):
        acc = sum((-1) ** (i - 1) * e[j - i] * s[i] for i in range(1, j + 1))
        e.append(acc / j)
    coeffs = [(-1) ** j * e[j] for j in range(k + 1)]
    return np.roots(coeffs) if k else np.array([], dtype=complex)


def _moments_to_roots(count, moments, center, scale):
    s = [count] + list(moments[1: count + 1])
    return [center + scale * u for u in _roots_from_power_sums(s)]


def _contour_count(g, region, n_mom=0, center=0j, scale=1.0, _depth=0):
    """Winding count (and moments) over ``region`` with detours as needed."""
    pieces = region.pieces()
    near_tol = EPS_EDGE * region.scale
    min_side = region.min_side
    init = max(1, int(math.ceil(region.samples_per_side / GL_ORDER)))
    shortest = min(p.length for p in pieces)
    cap = 0.25 * shortest
    detours = []
    for _ in range(MAX_DETOURS + 1):
        res = _integrate(g, pieces, n_mom, center, scale, near_tol, init)
        if res.converged:
            break
        if res.near is None:
            raise NonConvergent("contour quadrature failed to converge")
        zc = res.near
        hit = [i for i, (c, r) in enumerate(detours) if abs(zc - c) < 2 * r]
        if hit:
            # still trouble next to an existing detour: widen it
            i = hit[0]
            c, r = detours[i]
            if r >= cap:
                raise ZeroOnContour(f"cannot clear zero near {zc} from the contour")
            detours[i] = (c, min(cap, 4 * r))
        else:
            d0 = min(abs(complex(p.point(p.nearest(zc))) - zc) for p in region.pieces())
            rho = min(cap, max(min_side / 4.0, 8.0 * d0, DETOUR_FRACTION * shortest))
            if d0 >= rho:
                raise ZeroOnContour(f"cannot clear zero near {zc} from the contour")
            detours.append((zc, rho))
        pieces = region.pieces()
        for c, r in detours:
            pieces = _detour(pieces, region, c, r)
    else:
        raise ZeroOnContour("too many near-contour zeros")
    raw = res.total / (2j * math.pi)
    count = int(round(raw[0].real))
    if abs(raw[0] - count) > SNAP_TOL:
        raise NonConvergent(f"winding integral {raw[0]:.4f} is not near an integer")
    moments = raw.copy()
    if detours:
        if _depth > 2:
            raise ZeroOnContour("nested detours")
        extra = []
        for zc, rho in detours:
            # a multiple zero comes back as a spray of roots; judge it by its centroid
            roots = _zeros_in_disc(g, zc, rho, region.min_side, _depth + 1)
            for w, k in _cluster(roots, 1e-2 * rho):
                if abs(w - zc) < rho and not _inside(region, w, EDGE_SLACK * region.scale):
                    if all(abs(w - v) > 1e-9 * (1 + abs(w)) for v, _ in extra):
                        extra.append((w, k))
        for w, k in extra:
            count -= k
            u = (w - center) / scale
            moments = moments - k * u ** np.arange(n_mom + 1)
    return count, raw[0], tuple(detours), moments


def _inside(region, w, slack):
    """Closed-region membership, counting points within ``slack`` of the edge."""
    if region.contains(w):
        return True
    return min(abs(complex(p.point(p.nearest(w))) - w) for p in region.pieces()) <= slack


def _zeros_in_disc(g, zc, rho, min_side, depth):
    """Approximate positions of all zeros inside |z - zc| < rho*1.0."""
    disc = Circle(zc, rho, min_side=min_side)
    k, _, _, _ = _contour_count(g, disc, 0, zc, rho, depth)
    if k == 0:
        return []
    if k > 8:
        raise ZeroOnContour("too many zeros crowd a detour")
    _, _, _, mom = _contour_count(g, disc, k, zc, rho, depth)
    return _moments_to_roots(k, mom, zc, rho)


def winding_number(f, contour) -> WindingResult:
    """Number of zeros of ``f`` inside the closed region ``contour``.

    ``contour`` is a :class:`ContourRect`, :class:`Circle` or
    :class:`BandDisc`.  Zeros on the boundary count as inside.
    """
    g = _logderiv(f)
    count, raw, detours, _ = _contour_count(g, contour)
    conf = max(1e-3, 1.0 - 4.0 * abs(raw - round(raw.real)))
    return WindingResult(count, conf, True, raw, detours)


# --------------------------------------------------------- localization --

def _split_rect(rect, fx, fy):
    xs = rect.lo.real + fx * rect.width
    ys = rect.lo.imag + fy * rect.height
    lo, hi = rect.lo, rect.hi
    kw = dict(min_side=rect.min_side, samples_per_side=rect.samples_per_side)
    return [ContourRect(complex(lo.real, lo.imag), complex(xs, ys), **kw),
            ContourRect(complex(xs, lo.imag), complex(hi.real, ys), **kw),
            ContourRect(complex(lo.real, ys), complex(xs, hi.imag), **kw),
            ContourRect(complex(xs, ys), complex(hi.real, hi.imag), **kw)]


def _jitter_rng(seed, rect):
    key = hash((seed, rect.lo.real, rect.lo.imag, rect.hi.real, rect.hi.imag)) & 0xFFFFFFFF
    return np.random.default_rng([seed & 0xFFFFFFFF, key])


def _cluster(points, radius):
    """Group estimates closer than 2*radius; return (center, size) pairs."""
    groups = []
    for p in sorted(points, key=lambda z: (z.real, z.imag)):
        for grp in groups:
            if abs(np.mean(grp) - p) < 2 * radius:
                grp.append(p)
                break
        else:
            groups.append([p])
    return [(complex(np.mean(gp)), len(gp)) for gp in groups]


def _confirm(g, rect, clusters, loc_radius):
    """Winding-confirm cluster centers.

    Each center gets the smallest circle from loc_radius, 10 loc_radius, ...
    on which the winding resolves to the cluster size (close to a multiple
    zero, rounding noise swamps f on very small circles).  Returns
    ``[(center, multiplicity, radius)]`` or None.
    """
    found = []
    for z, size in clusters:
        if not _inside(rect, z, EDGE_SLACK * rect.scale):
            return None
        radius = loc_radius
        while True:
            try:
                k, _, _, _ = _contour_count(g, Circle(z, radius, rect.min_side))
            except (NonConvergent, ZeroOnContour):
                k = None
            if k == size:
                break
            if k is not None or radius * 10 > CONFIRM_REACH * rect.scale:
                return None
            radius *= 10
        z = _centroid(g, rect, z, k, radius)
        found.append((z, k, radius))
    for i in range(len(found)):
        for j in range(i):
            if abs(found[i][0] - found[j][0]) <= found[i][2] + found[j][2]:
                return None
    return found


def _centroid(g, rect, z, k, radius, nodes=128):
    """Mean of the zeros inside Circle(z, radius) from its first moment.

    The trapezoid rule on a circle is spectrally accurate, and the mean of
    a cluster is first-order stable where its members are not.  A shifted
    center is re-confirmed so the record's circle still winds k times.
    """
    w = z + radius * np.exp(2j * np.pi * np.arange(nodes) / nodes)
    vals = g(w) * (w - z)
    if not np.all(np.isfinite(vals)):
        return z
    m0, m1 = np.mean(vals), np.mean(vals * (w - z))
    if abs(m0 - k) > 0.05:
        return z
    shift = m1 / m0
    if abs(shift) > 0.25 * radius:
        return z
    new = z + shift
    if abs(shift) > 1e-3 * radius:
        try:
            if _contour_count(g, Circle(new, radius, rect.min_side))[0] != k:
                return z
        except (NonConvergent, ZeroOnContour):
            return z
    return new if _inside(rect, new, EDGE_SLACK * rect.scale) else z


def _try_moments(g, rect, count, loc_radius):
    """Place ``count`` zeros of a rectangle from its contour moments.

    Multiple zeros come back from the polynomial as a small spray of
    roots, so progressively coarser groupings are tried; the centroid of
    a group is well conditioned even when its members are not.
    """
    center, scale = rect.center, abs(rect.hi - rect.lo) / 2
    try:
        c, _, _, mom = _contour_count(g, rect, count, center, scale)
    except (NonConvergent, ZeroOnContour):
        return None
    if c != count:
        return None
    roots = _moments_to_roots(count, mom, center, scale)
    if not all(np.isfinite(r) for r in roots):
        return None
    tried = set()
    for radius in (loc_radius, 1e-6 * scale, 1e-4 * scale, 1e-2 * scale):
        clusters = _cluster(roots, max(radius, loc_radius))
        key = tuple(sorted(n for _, n in clusters))
        if key in tried:
            continue
        tried.add(key)
        found = _confirm(g, rect, clusters, loc_radius)
        if found is not None:
            return found
    return None


def locate_zeros(f, region: ContourRect, *, mode=0, angular_weight=1,
                 symmetric=False, seed=0, total=None):
    """Localize all zeros of ``f`` in ``region``.

    Rectangles are split in four until each holds at most a handful of
    zeros; those are then placed by contour moments (the Delves-Lyness
    idea) and each confirmed by winding over a circle of radius
    ``min_side / 2``.  If confirmation fails the rectangle keeps splitting
    down to ``min_side``, where the center is reported with the full local
    count.  Multiplicities always sum to the region's winding count.

    With ``symmetric=True`` (for ``f`` with real Taylor coefficients) the
    returned set is made exactly invariant under conjugation.
    """
    g = _logderiv(f)
    if total is None:
        total = _contour_count(g, region)[0]
    loc_radius = region.min_side / 2
    found = []
    stack = [(region, total)]
    while stack:
        rect, k = stack.pop()
        if k <= 0:
            continue
        if k <= MOMENT_MAX:
            got = _try_moments(g, rect, k, loc_radius)
            if got is not None:
                found += got
                continue
        if max(rect.width, rect.height) <= rect.min_side:
            found.append((rect.center, k, abs(rect.hi - rect.lo) / 2))
            continue
        rng = _jitter_rng(seed, rect)
        fx = fy = _SPLIT
        for attempt in range(JITTER_ATTEMPTS + 1):
            kids = _split_rect(rect, fx, fy)
            xs, ys = kids[0].hi.real, kids[0].hi.imag
            try:
                counts = []
                clean = True
                for kid in kids:
                    c, _, det, _ = _contour_count(g, kid)
                    counts.append(c)
                    # zeros on the parent's own edge are fine; on a split line they are not
                    clean = clean and not any(
                        abs(zc.real - xs) < r or abs(zc.imag - ys) < r for zc, r in det)
            except (NonConvergent, ZeroOnContour):
                clean = False
            if clean and sum(counts) == k:
                stack += [(kid, c) for kid, c in zip(kids, counts) if c > 0]
                break
            fx = 0.5 + rng.uniform(-0.1, 0.1)
            fy = 0.5 + rng.uniform(-0.1, 0.1)
        else:
            raise SplitDegenerate(f"could not split {rect.lo}..{rect.hi} cleanly")
    if symmetric:
        found = _symmetrize(found)
    records = [ZeroRecord(z, m, mode, angular_weight, r) for z, m, r in found]
    records.sort(key=ZeroRecord.sort_key)
    if sum(r.multiplicity for r in records) != total:
        raise NonConvergent("localized multiplicities do not add up")
    return records


def _symmetrize(found):
    """Snap near-real zeros to the axis and pair the rest exactly."""
    real, upper, lower = [], [], []
    for z, m, r in found:
        tol = max(r, 1e-9 * (1 + abs(z)))
        if abs(z.imag) <= tol:
            real.append((complex(z.real, 0.0), m, r))
        elif z.imag > 0:
            upper.append((z, m, r))
        else:
            lower.append((z, m, r))
    out = list(real)
    unused = list(lower)
    for z, m, r in upper:
        tol = max(2 * r, 1e-8 * (1 + abs(z)))
        j = min(range(len(unused)), key=lambda i: abs(unused[i][0] - z.conjugate()),
                default=None)
        if j is None or abs(unused[j][0] - z.conjugate()) > tol or unused[j][1] != m:
            raise NonConvergent(f"zero {z} has no conjugate partner")
        unused.pop(j)
        out += [(z, m, r), (z.conjugate(), m, r)]
    if unused:
        raise NonConvergent(f"unpaired zeros below the axis: {[u[0] for u in unused]}")
    return out
