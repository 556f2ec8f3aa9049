import math

import numpy as np
import pytest

from horseshoe import HenonMap, fiber_diameter_decay
from horseshoe.henon import Bidisc
from horseshoe.periodic import enumerate_periodic
from horseshoe.symbolic import (
    ComponentLabeling,
    NotInK,
    SymbolWord,
    UnresolvedSymbol,
    build_labeling,
    itinerary,
    refine_point,
)

M10 = HenonMap.quadratic(1.0, -10.0)
LAB = build_labeling(M10)
FIX_HI = (1 + math.sqrt(11), 1 + math.sqrt(11))
FIX_LO = (1 - math.sqrt(11), 1 - math.sqrt(11))
CYC_A = (-1 + math.sqrt(7), -1 - math.sqrt(7))
CYC_B = (-1 - math.sqrt(7), -1 + math.sqrt(7))


def test_word_str_and_parse_roundtrip():
    w = SymbolWord((1, 0, 1, 1, 0, 1, 1, 0), offset=4)
    assert str(w) == "1011^0110"
    assert SymbolWord.parse("1011^0110") == w
    assert SymbolWord.parse("^101") == SymbolWord((1, 0, 1), 0)
    assert w.at_time(0) == 0
    assert w.at_time(-4) == 1
    assert list(w.times()) == list(range(-4, 4))


def test_word_validation():
    with pytest.raises(ValueError):
        SymbolWord((), 0)
    with pytest.raises(ValueError):
        SymbolWord((0, 1), 3)
    with pytest.raises(ValueError):
        SymbolWord.parse("0101")
    with pytest.raises(ValueError):
        SymbolWord.parse("01^0^1")


def test_word_minimal_period():
    assert SymbolWord((1, 1, 1, 1), 0).minimal_period() == 1
    assert SymbolWord((0, 1, 0, 1, 0), 0).minimal_period() == 2
    assert SymbolWord((0, 1, 1, 0, 1), 0).minimal_period() == 3
    assert SymbolWord((0, 1, 1), 0).minimal_period() == 3


# --- labeling -------------------------------------------------------------

def test_labeling_two_strips_split_by_sign():
    assert LAB.d == 2
    c0, c1 = LAB.centroids
    assert c0.real < 0 < c1.real
    # strips straddle the critical line x = 0 symmetrically for real c
    assert c0.real == pytest.approx(-c1.real, abs=1e-6)


def test_fixed_point_gets_high_label():
    assert LAB.region(FIX_HI) == 1
    assert LAB.region(FIX_LO) == 0


def test_two_cycle_regions_alternate():
    assert LAB.region(CYC_A) == 1
    assert LAB.region(CYC_B) == 0


def test_region_rejects_escaping_point():
    with pytest.raises(NotInK):
        LAB.region((0.5, 0.0))  # the gap between strips leaves B in one step
    with pytest.raises(NotInK):
        LAB.region((50.0, 0.0))


def test_guard_band_refuses_to_guess():
    with pytest.raises(UnresolvedSymbol):
        LAB._label_of_x(0.0 + 0.0j)


def test_image_region_matches_preimage_label():
    for z in (FIX_HI, FIX_LO, CYC_A, CYC_B):
        assert LAB.image_region(M10.apply(z)) == LAB.region(z)


def test_swapped_labeling_is_the_symbol_automorphism():
    swapped = LAB.swapped()
    assert swapped.region(FIX_HI) == 0
    assert swapped.centroids == tuple(reversed(LAB.centroids))
    w = itinerary(M10, CYC_A, 3, 3, LAB)
    ws = itinerary(M10, CYC_A, 3, 3, swapped)
    assert ws.symbols == tuple(1 - s for s in w.symbols)


def test_labeling_rejects_non_horseshoe():
    with pytest.raises(ValueError):
        build_labeling(HenonMap.quadratic(1.0, 0.0))


def test_labeling_cubic_three_strips():
    m3 = HenonMap.normal_form(3, 0.5, -20.0)
    lab = build_labeling(m3)
    assert lab.d == 3
    c0, c1, c2 = lab.centroids
    # two strips share re(x) < 0 and are ordered by im; the third is real
    assert c0.real < 0 and c1.real < 0 and c2.real > 2
    assert c0.imag < 0 < c1.imag


# --- itineraries ----------------------------------------------------------

def test_fixed_point_itinerary_constant():
    w = itinerary(M10, FIX_HI, 4, 4, LAB)
    assert w.symbols == (1,) * 9
    assert w.offset == 4
    assert str(w) == "1111^11111"


def test_two_cycle_itinerary_alternates():
    w = itinerary(M10, CYC_A, 4, 4, LAB)
    assert str(w) == "1010^10101"
    w = itinerary(M10, CYC_B, 4, 4, LAB)
    assert str(w) == "0101^01010"


def test_itinerary_escape_error_message():
    with pytest.raises(NotInK, match="not in K to requested depth"):
        itinerary(M10, (5.0, 0.0), 0, 3, LAB)


def test_itinerary_window_validation():
    with pytest.raises(ValueError):
        itinerary(M10, FIX_HI, -1, 3, LAB)


def test_shift_equivariance_on_sampled_orbit_points():
    pts = [p.z for p in enumerate_periodic(M10, 5)]
    pts += [p.z for p in enumerate_periodic(M10, 4)]
    pts += [p.z for p in enumerate_periodic(M10, 3)]
    assert len(pts) > 50
    checks = 0
    for z in pts:
        w = itinerary(M10, z, 5, 5, LAB)
        wf = itinerary(M10, M10.apply(z), 5, 5, LAB)
        for t in range(-4, 5):
            assert wf.at_time(t - 1) == w.at_time(t)
            checks += 1
    assert checks >= 100


@pytest.mark.parametrize("n", [3, 4, 5])
def test_depth_n_words_are_complete(n):
    pts = enumerate_periodic(M10, n)
    words = {itinerary(M10, p.z, 0, n - 1, LAB).symbols for p in pts}
    assert len(words) == 2**n


def test_distinct_periodic_points_have_distinct_windows():
    pts = enumerate_periodic(M10, 4)
    windows = [str(itinerary(M10, p.z, 4, 4, LAB)) for p in pts]
    assert len(set(windows)) == len(pts) == 16


# --- refinement -----------------------------------------------------------

def test_refine_constant_words_hit_fixed_points():
    z, rad = refine_point(M10, SymbolWord((1,) * 9, 4))
    assert abs(z[0] - FIX_HI[0]) < 1e-8
    assert abs(z[1] - FIX_HI[1]) < 1e-8
    assert rad < 1e-9
    z, rad = refine_point(M10, SymbolWord((0,) * 9, 4))
    assert abs(z[0] - FIX_LO[0]) < 1e-8


def test_refine_alternating_word_selects_phase():
    z, _ = refine_point(M10, SymbolWord((0, 1) * 4, 4))
    assert abs(z[0] - CYC_B[0]) < 1e-8  # time-0 symbol 0: the low strip point
    z, _ = refine_point(M10, SymbolWord((0, 1) * 4, 3))
    assert abs(z[0] - CYC_A[0]) < 1e-8


def test_refine_itinerary_roundtrip_periodic():
    for p in enumerate_periodic(M10, 4):
        w = itinerary(M10, p.z, 5, 5, LAB)
        z, rad = refine_point(M10, w)
        err = max(abs(z[0] - p.z[0]), abs(z[1] - p.z[1]))
        assert err <= max(rad, 1e-8)


def test_refine_itinerary_roundtrip_generic_window():
    # short window so the period is invisible and no Newton polish happens
    for p in enumerate_periodic(M10, 5)[:8]:
        w = itinerary(M10, p.z, 2, 3, LAB)
        z, rad = refine_point(M10, w)
        assert rad > 1e-10  # measured spread, not a polished root
        err = max(abs(z[0] - p.z[0]), abs(z[1] - p.z[1]))
        assert err <= rad


def test_refine_radius_decays_geometrically():
    contraction = fiber_diameter_decay(M10, Bidisc.round(4.4), depth=4).contraction
    pattern = (0, 1, 1, 0, 1, 0, 0, 1, 1, 0, 1, 1, 0, 0, 1, 0)
    radii = []
    for half in (4, 5, 6, 7, 8):
        word = SymbolWord(pattern[:2 * half], half)
        _, rad = refine_point(M10, word)
        radii.append(rad)
    for a, b in zip(radii, radii[1:]):
        # one more symbol on each side; each side contracts at least as
        # fast as the measured fiber ratio
        assert b <= (contraction + 0.05) * a


def test_refine_validation():
    with pytest.raises(ValueError):
        refine_point(M10, SymbolWord((2, 0), 0))  # symbol out of range
    with pytest.raises(ValueError):
        refine_point(M10, SymbolWord((0, 1), 0), iterations=0)
