import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from transmission_census.errors import NumericalError
from transmission_census.modal import MediumPair, ModalDeterminant
from transmission_census.winding import (AnalyticFunction, BandDisc, Circle, ContourRect,
                                         locate_zeros, winding_number)

REF3 = MediumPair(3, 1.0, 1.0, 1.0, 1.0, 4.0)
# real zeros of D0 on [0.1, 100] from a sign-change scan with 120-step bisection at 40 digits
D0_REAL_ZEROS = [9.869604401089358, 39.47841760435743, 88.82643960980423]


def poly(roots):
    c = np.poly(roots)
    return AnalyticFunction(lambda z: np.polyval(c, z), lambda z: np.polyval(np.polyder(c), z))


def count(f, lo, hi):
    return winding_number(f, ContourRect(complex(lo), complex(hi))).count


SIN = AnalyticFunction(lambda z: np.sin(np.pi * z), lambda z: np.pi * np.cos(np.pi * z))
EXP = AnalyticFunction(np.exp, np.exp)


def test_examples():
    assert count(poly([0, 0, 0]), -1 - 1j, 1 + 1j) == 3
    assert count(SIN, 0.5 - 1j, 3.5 + 1j) == 3
    assert count(EXP, -3 - 2j, 5 + 40j) == 0
    assert count(ModalDeterminant(REF3, 0), 9 - 0.5j, 10.7 + 0.5j) >= 1


def test_result_fields():
    res = winding_number(SIN, ContourRect(0.5 - 1j, 3.5 + 1j))
    assert res.refined and 0 < res.confidence <= 1
    assert abs(res.raw - res.count) <= 0.25


def test_circle_counts():
    assert winding_number(poly([0.1, -0.2j, 3]), Circle(0j, 1.0)).count == 2
    assert winding_number(SIN, Circle(0j, 2.5)).count == 5


def test_band_disc():
    # zeros of sin(pi z) with |z| <= 4.5 and |Im z| <= 0.5
    assert winding_number(SIN, BandDisc(4.5, 0.5)).count == 9


def test_tuple_handle():
    f = (lambda z: z * z + 1, lambda z: 2 * z)
    assert winding_number(f, ContourRect(-1 + 0.5j, 1 + 2j)).count == 1


def test_bad_rect():
    with pytest.raises(ValueError):
        ContourRect(1 + 1j, 0j)
    with pytest.raises(ValueError):
        ContourRect(0j, 1 + 1j, min_side=0)


def test_zero_near_edge_is_nudged():
    inside = poly([1 + 1e-12j])
    res = winding_number(inside, ContourRect(-1 + 0j, 3 + 1j))
    assert res.count == 1 and res.detours
    # within the edge slack a zero is on the closed rectangle and counts
    assert winding_number(poly([1 - 1e-12j]), ContourRect(-1 + 0j, 3 + 1j)).count == 1
    assert winding_number(poly([1 - 1e-5j]), ContourRect(-1 + 0j, 3 + 1j)).count == 0


def test_zero_at_corner():
    assert count(poly([0j, 5 + 5j]), 0j, 2 + 2j) == 1


@pytest.mark.parametrize("shift", [0.0, 0.3])
def test_deformation_soundness(shift):
    # the same zeros, once exactly on the bottom edge and once clear of it
    f = poly([1 + shift * 1j, 2.5 + shift * 1j, 2 + 0.5j])
    nudged = winding_number(f, ContourRect(0j, 3 + 1j))
    plain = winding_number(f, ContourRect(-0.1j, 3 + 1j))
    assert nudged.count == plain.count == 3


def test_symmetric_pole_cancellation_is_caught():
    # 1/f' has symmetric poles; energy check must force refinement not a false answer
    f = poly([1.5 + 1e-3j, 1.5 - 1e-3j, 1.5 + 0.9j])
    assert count(f, 0.5 + 0j, 2.5 + 1j) == 2


def test_nonconvergent_on_noise():
    rng = np.random.default_rng(0)
    noisy = AnalyticFunction(lambda z: rng.normal(size=np.shape(z)) + 0j,
                             lambda z: rng.normal(size=np.shape(z)) + 0j)
    with pytest.raises(NumericalError):
        winding_number(noisy, ContourRect(0j, 1 + 1j))


roots_st = st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
                    min_size=1, max_size=8)


def _clear(roots, xs, ys, gap=1e-3):
    return all(min(abs(r.real - x) for x in xs) > gap and min(abs(r.imag - y) for y in ys) > gap
               for r in roots)


@settings(max_examples=40, deadline=None)
@given(roots_st, st.lists(st.floats(-3.5, 3.5), min_size=1, max_size=3, unique=True),
       st.lists(st.floats(-3.5, 3.5), min_size=1, max_size=3, unique=True))
def test_additivity(roots, cuts_x, cuts_y):
    xs = sorted({-4.0, 4.0, *cuts_x})
    ys = sorted({-4.0, 4.0, *cuts_y})
    assume(all(b - a > 1e-2 for a, b in zip(xs, xs[1:])))
    assume(all(b - a > 1e-2 for a, b in zip(ys, ys[1:])))
    assume(_clear(roots, xs, ys))
    f = poly(roots)
    whole = count(f, -4 - 4j, 4 + 4j)
    parts = sum(count(f, complex(x0, y0), complex(x1, y1))
                for x0, x1 in zip(xs, xs[1:]) for y0, y1 in zip(ys, ys[1:]))
    assert whole == parts == len(roots)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=1, max_size=4),
       st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
                max_size=2),
       st.floats(-3, 2), st.floats(0.05, 3))
def test_conjugation_property(real_roots, pairs, lo_im, height):
    roots = real_roots + [p for z in pairs for p in (z, z.conjugate())]
    box = ContourRect(complex(-4, lo_im), complex(4, lo_im + height))
    ys = (box.lo.imag, box.hi.imag, -box.lo.imag, -box.hi.imag)
    assume(all(min(abs(r.imag - y) for y in ys) > 1e-3 for r in roots))
    f = poly(roots)
    assert winding_number(f, box).count == winding_number(f, box.conj()).count


def _conserved(f, region, **kw):
    recs = locate_zeros(f, region, **kw)
    assert sum(z.multiplicity for z in recs) == winding_number(f, region).count
    return recs


def test_locate_examples():
    recs = _conserved(poly([1, -1]), ContourRect(-2 - 1j, 2 + 1j, min_side=1e-6))
    assert sorted(round(z.lam.real) for z in recs) == [-1, 1]
    assert all(abs(z.lam - round(z.lam.real)) <= 1e-6 and z.multiplicity == 1 for z in recs)
    recs = _conserved(poly([1j, 1j]), ContourRect(-2 - 2j, 2 + 2j))
    assert len(recs) == 1 and recs[0].multiplicity == 2 and abs(recs[0].lam - 1j) <= 1e-6


def test_locate_record_radius_confirms_multiplicity():
    f = poly([0.3 + 0.2j, 0.3 + 0.2j, 0.3 + 0.2j, -1])
    for z in _conserved(f, ContourRect(-2 - 2j, 2 + 2j)):
        assert winding_number(f, Circle(z.lam, z.localization_radius)).count == z.multiplicity


def test_locate_d0_conjugation_and_real_scan():
    det = ModalDeterminant(REF3, 0)
    recs = _conserved(det, ContourRect(0.1 - 20j, 100 + 20j), symmetric=True)
    multiset = sorted((z.lam.real, z.lam.imag, z.multiplicity) for z in recs)
    conj = sorted((z.lam.real, -z.lam.imag, z.multiplicity) for z in recs)
    assert multiset == conj
    real = sorted(z.lam.real for z in recs if z.lam.imag == 0)
    assert len(real) == len(D0_REAL_ZEROS)
    assert all(abs(a - b) <= 1e-6 for a, b in zip(real, D0_REAL_ZEROS))


def test_locate_empty_and_deterministic():
    assert locate_zeros(EXP, ContourRect(0j, 1 + 1j)) == []
    f = poly([0.5 + 0.5j, 1.5 + 0.25j, 1.2 + 1.7j, 0.1 + 0.1j])
    a = locate_zeros(f, ContourRect(0j, 2 + 2j), seed=3)
    b = locate_zeros(f, ContourRect(0j, 2 + 2j), seed=3)
    assert [z.to_dict() for z in a] == [z.to_dict() for z in b]


def test_locate_zero_on_split_line():
    # the centre of [0, 2]x[0, 2] sits near the first split; jitter must clear it
    f = poly([1 + 1j, 1.0104 + 1.0104j, 0.2 + 1.8j])
    _conserved(f, ContourRect(0j, 2 + 2j))


@settings(max_examples=25, deadline=None)
@given(roots_st)
def test_multiplicity_conservation(roots):
    box = ContourRect(-3.5 - 3.5j, 3.5 + 3.5j)
    recs = _conserved(poly(roots), box)
    for z in recs:
        assert box.contains(z.lam)


def test_record_dict_schema():
    rec = locate_zeros(poly([0.5j]), ContourRect(-1 - 1j, 1 + 1j), mode=2, angular_weight=2)[0]
    d = rec.to_dict()
    assert set(d) == {"re", "im", "multiplicity", "mode", "angular_weight",
                      "localization_radius", "degenerate"}
    assert d["mode"] == 2 and rec.weighted == 2
    assert math.isfinite(d["localization_radius"]) and d["localization_radius"] > 0
