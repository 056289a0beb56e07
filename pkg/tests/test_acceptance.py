"""Acceptance criteria, one test each; every test prints one PASS/FAIL line.

Run on its own with ``pytest tests/test_acceptance.py -v -s``; the lines are
also repeated in the terminal summary.
"""
import json
import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest
from scipy.special import jv

from conftest import ACCEPTANCE, LOCATE_CHECKS
from transmission_census import winding
from transmission_census.census import census, count_ite, free_region_scan, weyl_constants
from transmission_census.ellipt import verify_ellipticity
from transmission_census.modal import MediumPair, ModalDeterminant, dirichlet_eigenvalues
from transmission_census.winding import AnalyticFunction, ContourRect, winding_number

REF2 = MediumPair(2, 1.0, 1.0, 1.0, 1.0, 4.0)
REF3 = MediumPair(3, 1.0, 1.0, 1.0, 1.0, 4.0)
PAIR = MediumPair(2, 1.0, 1.0, 1.0, 2.0, 1.0)
UNIT2 = MediumPair.unchecked(2, 1.0, 1.0, 1.0, 1.0, 1.0)

CENSUS_RUNS = []


def report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}"
    print(line)
    ACCEPTANCE[n] = line
    assert ok, line


@pytest.fixture(scope="module")
def census32():
    t0 = time.perf_counter()
    rep = census(REF2, 32, 8, 0.05)
    CENSUS_RUNS.append(("d=2 (1,1,1,4) r_max=32", rep))
    return rep, time.perf_counter() - t0


def poly(roots):
    c = np.poly(roots)
    return AnalyticFunction(lambda z: np.polyval(c, z), lambda z: np.polyval(np.polyder(c), z))


def test_criterion_1_argument_principle_oracles():
    t0 = time.perf_counter()
    cases = []
    for k in range(1, 6):
        cases.append((poly([0.0] * k), ContourRect(-1 - 1j, 1 + 1j), k))
    sin = AnalyticFunction(lambda z: np.sin(np.pi * z), lambda z: np.pi * np.cos(np.pi * z))
    for lo, hi, k in ((0.5 - 1j, 3.5 + 1j, 3), (-2.5 - 0.3j, 0.5 + 2j, 3), (0.2 + 0.1j, 0.8 + 5j, 0),
                      (-10.5 - 1j, 10.5 + 1j, 21)):
        cases.append((sin, ContourRect(lo, hi), k))
    exp = AnalyticFunction(np.exp, np.exp)
    for lo, hi in ((-1 - 1j, 1 + 1j), (-30 - 3j, 40 + 70j)):
        cases.append((exp, ContourRect(lo, hi), 0))
    rng = np.random.default_rng(2024)
    box = ContourRect(-2 - 2j, 2 + 2j)
    while len(cases) < 11 + 40:
        deg = int(rng.integers(1, 9))
        roots = rng.uniform(-3, 3, deg) + 1j * rng.uniform(-3, 3, deg)
        if min(min(abs(abs(r.real) - 2), abs(abs(r.imag) - 2)) for r in roots) < 1e-3:
            continue
        inside = sum(abs(r.real) < 2 and abs(r.imag) < 2 for r in roots)
        cases.append((poly(roots), box, inside))
    wrong = [(i, want, winding_number(f, rect).count) for i, (f, rect, want) in enumerate(cases)
             if winding_number(f, rect).count != want]
    dt = time.perf_counter() - t0
    report(1, not wrong and dt < 5,
           f"{len(cases) - len(wrong)}/{len(cases)} exact counts in {dt:.2f} s (limit 5 s)")


def _bisection_count(r):
    """Unit-disc Dirichlet eigenvalues <= r**2 from sign changes of scipy's J_m."""
    total = 0
    for m in range(int(r) + 2):
        xs = np.linspace(1e-3, r, 4000)
        v = jv(m, xs)
        for i in np.nonzero(v[:-1] * v[1:] < 0)[0]:
            a, b = xs[i], xs[i + 1]
            for _ in range(80):
                c = 0.5 * (a + b)
                if (jv(m, a) < 0) == (jv(m, c) < 0):
                    a = c
                else:
                    b = c
            if 0.5 * (a + b) <= r:
                total += 1 if m == 0 else 2
    return total


def test_criterion_2_dirichlet_weyl():
    t0 = time.perf_counter()
    count = sum(mult for _, mult in dirichlet_eigenvalues(UNIT2, 1, 30))
    target = weyl_constants(UNIT2).tau1 * 900
    dev = abs(count - target) / target
    oracle = _bisection_count(30)
    dt = time.perf_counter() - t0
    report(2, dev <= 0.06 and count == oracle and dt < 30,
           f"count {count} vs tau r^2 = {target:g} (deviation {dev:.2%}, limit 6%); "
           f"bisection oracle {oracle}; {dt:.1f} s")


def test_criterion_3_weyl_asymptotics(census32):
    rep, dt = census32
    ratio = rep.counts[-1] / rep.r_grid[-1] ** 2
    ok = abs(ratio - 1.25) <= 0.125 and rep.fitted_exponent <= 1.85 and dt < 600
    report(3, ok, f"N(32)/32^2 = {ratio:.4f} (target 1.25 +/- 10%), fitted exponent "
                  f"{rep.fitted_exponent:.3f} (limit 1.85), {dt:.0f} s")


def test_criterion_4_shared_eigenfunction_zero():
    det = ModalDeterminant(REF3, 0)
    recs = winding.locate_zeros(det, ContourRect(9 - 0.5j, 10.7 + 0.5j), symmetric=True)
    err_box = min(abs(z.lam - math.pi ** 2) for z in recs)
    _, found = count_ite(REF3, 3.2)
    hits = [z for z in found if z.mode == 0 and abs(z.lam - math.pi ** 2) <= 1e-6]
    err_count = min((abs(z.lam - math.pi ** 2) for z in hits), default=math.inf)
    ok = err_box <= 1e-6 and len(hits) == 1
    report(4, ok, f"lambda = pi^2 found in mode 0 (multiplicity {hits[0].multiplicity if hits else 0}),"
                  f" localization error {max(err_box, err_count):.1e} (limit 1e-6)")


def _symmetric(records):
    key = sorted((z.mode, z.lam.real, z.lam.imag, z.multiplicity) for z in records)
    conj = sorted((z.mode, z.lam.real, -z.lam.imag, z.multiplicity) for z in records)
    return key == conj


def test_criterion_5_conjugation_symmetry(census32):
    for name, media in (("d=3 (1,1,1,4) r_max=8", REF3), ("d=2 (1,1,2,1) r_max=8", PAIR)):
        CENSUS_RUNS.append((name, census(media, 8, 4, 0.05)))
    bad = [name for name, rep in CENSUS_RUNS if not _symmetric(rep.records)]
    total = sum(len(rep.records) for _, rep in CENSUS_RUNS)
    report(5, not bad, f"{len(CENSUS_RUNS) - len(bad)}/{len(CENSUS_RUNS)} census runs "
                       f"conjugation-invariant ({total} records)")


def test_criterion_6_free_region():
    t0 = time.perf_counter()
    r = 10
    fixed = free_region_scan(REF2, 5.0, r)
    auto = free_region_scan(REF2, "auto", r)
    _, recs = count_ite(REF2, r, band=r * r)
    p = 1 - fixed.kappa / 2
    outside = []
    for c, rep in ((5.0, fixed), (auto.minimal_C, auto)):
        if c is None:
            continue
        for z in recs:
            in_band = abs(z.lam.imag) < c * (abs(z.lam.real) + 1) ** p
            listed = any(abs(z.lam - v.lam) <= 1e-6 * (1 + abs(z.lam)) for v in rep.violations)
            if in_band == listed and z.lam.imag >= 0:
                outside.append((c, z.lam))
    dt = time.perf_counter() - t0
    finite = auto.minimal_C is not None and math.isfinite(auto.minimal_C)
    ok = not fixed.violations and finite and not outside and dt < 300
    report(6, ok, f"C=5: {len(fixed.violations)} violations over {fixed.boxes_scanned} boxes; "
                  f"minimal C = {auto.minimal_C}; {len(recs)} records, "
                  f"{len(outside)} outside the band; {dt:.0f} s")


def test_criterion_7_ellipticity():
    t0 = time.perf_counter()
    eq = verify_ellipticity(REF2, 32)
    ne = verify_ellipticity(PAIR, 32)
    dt = time.perf_counter() - t0
    ok = (eq.k == -1 and ne.k == 1 and min(eq.C1, ne.C1) >= 1e-3
          and eq.flatness <= 0.2 and ne.flatness <= 0.2 and dt < 10)
    report(7, ok, f"k = {eq.k} (C1 {eq.C1:.3g}, flatness {eq.flatness:.1e}) and k = {ne.k} "
                  f"(C1 {ne.C1:.3g}, flatness {ne.flatness:.1e}); {dt:.2f} s")


def test_criterion_8_multiplicity_conservation():
    # runs last in this module: every locate_zeros call so far went through the guard
    det = ModalDeterminant(PAIR, 1)
    recs = winding.locate_zeros(det, ContourRect(-30 - 30j, 30 + 30j))
    assert sum(z.multiplicity for z in recs) == winding_number(det, ContourRect(-30 - 30j, 30 + 30j)).count
    report(8, LOCATE_CHECKS["calls"] > 0,
           f"{LOCATE_CHECKS['calls']} locate_zeros runs, all multiplicity sums equal to the "
           f"enclosing winding count")


def _cli_census(tmp_path, workers):
    out = tmp_path / f"workers{workers}"
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps({
        "media": {"dimension": 2, "radius": 1.0, "c1": 1.0, "n1": 1.0, "c2": 1.0, "n2": 4.0},
        "r_max": 16, "n_samples": 6, "seed": 11, "output_dir": str(out)}))
    env = dict(os.environ, TC_WORKERS=str(workers))
    proc = subprocess.run([sys.executable, "-m", "transmission_census", "census",
                           "--config", str(cfg)], env=env, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return {p.name: p.read_bytes() for p in sorted(out.iterdir())}


def test_criterion_9_determinism(tmp_path):
    one, four = _cli_census(tmp_path, 1), _cli_census(tmp_path, 4)
    same = one == four and set(one) == {"census.csv", "eigenvalues.json", "summary.json"}
    report(9, same, f"TC_WORKERS=1 and TC_WORKERS=4 outputs "
                    f"{'byte-identical' if same else 'differ'} ({', '.join(sorted(one))})")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-s"]))
