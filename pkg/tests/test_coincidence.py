import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import local_extrema, random_geometry
from hompulse import (
    BeamSplitter,
    CoincidenceQuery,
    DomainError,
    ExperimentGeometry,
    UnsupportedConfigurationError,
    erf,
    hom_probability,
    joint_probability,
    marginal_probability,
    no_interference_probability,
    windowed_probability,
)
from hompulse.coincidence import evaluate, interference_term, is_window_fast_path, window_kernel
from hompulse.oracle import QuadratureSpec, integrate_1d

mpmath.mp.dps = 40


def _taylor_erf(x, terms=200):
    """Maclaurin series summed in exact rationals, scaled by 2/sqrt(pi) at 40 digits."""
    x = Fraction(x)
    total = sum(Fraction((-1) ** n, math.factorial(n) * (2 * n + 1)) * x ** (2 * n + 1) for n in range(terms))
    return float(2 / mpmath.sqrt(mpmath.pi) * mpmath.mpf(total.numerator) / total.denominator)


# --- erf ---------------------------------------------------------------------


def test_erf_examples():
    assert erf(0.0) == 0.0
    assert abs(erf(6.0) - 1.0) <= 1e-15
    assert erf(1.0) == pytest.approx(0.8427007929497149, rel=1e-15)
    assert _taylor_erf(1.0) == 0.8427007929497149


@settings(max_examples=300, deadline=None)
@given(st.floats(min_value=-7.0, max_value=7.0))
def test_erf_against_high_precision(x):
    ref = float(mpmath.erf(mpmath.mpf(x)))
    got = float(erf(x))
    if ref == 0.0:
        assert got == 0.0
    else:
        assert abs(got - ref) <= 1e-13 * abs(ref)
    assert erf(-x) == -got
    assert abs(got) <= 1.0


def test_erf_is_vectorized():
    x = np.array([-1.0, 0.0, 0.5])
    np.testing.assert_array_equal(erf(x), [erf(v) for v in x])


def test_window_kernel_has_no_singularity_at_zero():
    assert window_kernel(1.0, 0.0, 2.0) == pytest.approx(2 * math.erf(1.0), rel=1e-15)
    assert window_kernel(0.0, 0.0, 2.0) == 0.0


# --- joint / no interference -------------------------------------------------


def test_joint_midpoint_vanishes(fig2_geom):
    assert joint_probability(fig2_geom, 4.5, 5.5) == 0.0
    assert no_interference_probability(fig2_geom, 4.5, 5.5) > 0.0


def test_joint_matches_paths(fig2_geom):
    g = fig2_geom
    tc, td = 4.0, 6.0
    f = g.G(tc, "c", "b") * g.G(td, "d", "a")
    s = g.G(tc, "c", "a") * g.G(td, "d", "b")
    assert joint_probability(g, tc, td) == pytest.approx(0.5 * (f - s) ** 2, rel=1e-15)
    assert no_interference_probability(g, tc, td) == pytest.approx(0.5 * (f * f + s * s), rel=1e-15)


def test_no_interference_equals_joint_for_far_pulses():
    g = ExperimentGeometry(2.0, 30.0, 2.0, 3.0)
    # the two path products peak at (4, 33) and (32, 5)
    for tc, td in ((4.0, 33.0), (32.0, 5.0)):
        assert abs(no_interference_probability(g, tc, td) - joint_probability(g, tc, td)) <= 1e-10


def test_closed_forms_need_balanced_splitter():
    g = ExperimentGeometry(0.0, 1.0, 0.0, 0.0, splitter=BeamSplitter(0.6, 0.8))
    for call in (
        lambda: joint_probability(g, 0.0, 0.0),
        lambda: hom_probability(g),
        lambda: marginal_probability(g, 0.0),
        lambda: windowed_probability(g, 0.0, 0.0, 1.0),
    ):
        with pytest.raises(UnsupportedConfigurationError):
            call()


def test_interference_term_and_cauchy_schwarz(rng):
    for _ in range(50):
        g = random_geometry(rng)
        tc = g.delay("c", "a") + rng.normal()
        td = g.delay("d", "b") + rng.normal()
        cross = interference_term(g, tc, td)
        f = g.G(tc, "c", "b") * g.G(td, "d", "a")
        s = g.G(tc, "c", "a") * g.G(td, "d", "b")
        free = no_interference_probability(g, tc, td)
        assert abs(free - joint_probability(g, tc, td) - cross) <= 4e-16 * free
        term1, term2 = 0.5 * f * f, 0.5 * s * s
        assert abs(cross) <= 2 * math.sqrt(term1 * term2) * (1 + 1e-12)


# --- hom -----------------------------------------------------------------------


def test_hom_zero_dip(rng):
    for _ in range(50):
        assert hom_probability(random_geometry(rng, equal_inputs=True)) <= 1e-15


@pytest.mark.parametrize("delta", [0.2, 0.5, 1.0, 2.0, 3.0])
def test_hom_plateau(delta):
    g = ExperimentGeometry(0.0, 40.0, 1.0, 1.0, delta_c=delta, delta_d=delta)
    assert hom_probability(g) == pytest.approx(1 / (2 * math.pi * (1 + delta * delta)), rel=1e-14)


def _dip_width(delta):
    t_b = np.linspace(0.0, 10.0, 2001)
    plateau = 1 / (2 * math.pi * (1 + delta * delta))
    vals = np.array([hom_probability(ExperimentGeometry(0.0, t, 1.0, 1.0, delta_c=delta, delta_d=delta)) for t in t_b])
    return t_b[np.argmax(vals >= 0.5 * plateau)]


def test_hom_dip_widens_with_filter_width():
    widths = [_dip_width(d) for d in (0.2, 0.6, 1.0, 1.5, 2.0, 3.0)]
    assert all(a < b for a, b in zip(widths, widths[1:]))


def test_hom_ignores_detector_delays():
    g = ExperimentGeometry(0.3, 1.1, 1.0, 1.0, 0.8, 1.2, 0.4, 2.0)
    assert hom_probability(g) == hom_probability(g.replace(t_c=-7.0, t_d=12.5))


def test_marginal_integrates_to_hom(rng):
    for _ in range(5):
        g = random_geometry(rng)
        centers = [g.delay("c", "a"), g.delay("c", "b")]
        reach = 12 * math.sqrt(max(g.spread("c", "a"), g.spread("c", "b")))
        res = integrate_1d(
            lambda tc: marginal_probability(g, tc),
            min(centers) - reach,
            max(centers) + reach,
            QuadratureSpec(absolute_tolerance=1e-12),
            centers,
        )
        assert abs(res.value - hom_probability(g)) <= 1e-8


# --- marginal ------------------------------------------------------------------


def _expanded_marginal(g, tc):
    """The marginal with its exponent H in expanded form.

    H keeps the four single-path quadratics and subtracts the completed square
    over ``tau_d``, ``(t_b s_da + t_a s_db + t_d S)**2 / (s_da s_db S)``. This
    must agree with the compact form in the library.
    """
    a2, b2, c2, d2 = g.delta_a**2, g.delta_b**2, g.delta_c**2, g.delta_d**2
    ta, tb, tcc, td = g.t_a, g.t_b, g.t_c, g.t_d
    sca, scb = a2 + c2, b2 + c2
    sda, sdb = a2 + d2, b2 + d2
    s = a2 + b2 + 2 * d2
    h = (
        (tc - ta - tcc) ** 2 / sca
        + (tc - tb - tcc) ** 2 / scb
        + (ta + td) ** 2 / sda
        + (tb + td) ** 2 / sdb
        - (tb * sda + ta * sdb + td * s) ** 2 / (sda * sdb * s)
    )
    via_b = math.sqrt(2) * math.exp(-2 * (tc - tb - tcc) ** 2 / scb) / (scb * math.sqrt(sda))
    via_a = math.sqrt(2) * math.exp(-2 * (tc - ta - tcc) ** 2 / sca) / (sca * math.sqrt(sdb))
    cross = 4 * math.exp(-h) / math.sqrt(sca * scb * s)
    return (via_b + via_a - cross) / (4 * math.pi**1.5)


def test_marginal_matches_expanded_exponent(rng):
    for _ in range(40):
        g = random_geometry(rng)
        tc = g.delay("c", "a") + rng.normal()
        assert abs(float(marginal_probability(g, tc)) - max(_expanded_marginal(g, tc), 0.0)) <= 1e-14


def test_marginal_vectorized(fig2_geom):
    tc = np.linspace(2, 8, 11)
    np.testing.assert_array_equal(marginal_probability(fig2_geom, tc), [marginal_probability(fig2_geom, t) for t in tc])


def _scan(fn, lo, hi, n=141):
    grid = np.array([lo + k * (hi - lo) / (n - 1) for k in range(n)])
    vals = np.array([float(fn(t)) for t in grid])
    maxima, minima = local_extrema(vals)
    return grid, vals, maxima, minima


def test_marginal_two_peaks_at_four_and_seven():
    g = ExperimentGeometry(2.0, 5.0, 2.0, 3.0)
    grid, _, maxima, _ = _scan(lambda t: marginal_probability(g, t), 1.0, 10.0, 181)
    peaks = sorted(grid[maxima])
    assert len(peaks) == 2
    assert abs(peaks[0] - 4.0) <= 0.1 and abs(peaks[1] - 7.0) <= 0.1


def test_marginal_narrow_c_keeps_two_peaks_without_interference_dip():
    g = ExperimentGeometry(2.0, 5.0, 2.0, 2.0, delta_c=0.1, delta_d=10.0)
    grid, vals, maxima, minima = _scan(lambda t: marginal_probability(g, t), 2.0, 9.0)
    assert len(maxima) == 2
    assert abs(grid[maxima[0]] - 4.0) <= 0.1 and abs(grid[maxima[1]] - 7.0) <= 0.1
    # the valley is the gap between two narrow Gaussians, already there without the cross term
    _, free, _, free_minima = _scan(lambda t: marginal_probability(g, t, interference=False), 2.0, 9.0)
    assert minima == free_minima and len(minima) == 1
    assert np.max(np.abs(vals - free)) < 0.05 * vals.max()


def test_marginal_wide_c_interference_dip():
    g = ExperimentGeometry(2.0, 5.0, 2.0, 2.0, delta_c=3.0, delta_d=10.0)
    grid, _, maxima, minima = _scan(lambda t: marginal_probability(g, t), 2.0, 9.0)
    assert len(maxima) == 2 and len(minima) == 1
    assert grid[maxima[0]] < grid[minima[0]] < grid[maxima[1]]
    _, _, free_max, free_min = _scan(lambda t: marginal_probability(g, t, interference=False), 2.0, 9.0)
    assert len(free_max) == 1 and not free_min


# --- windowed ------------------------------------------------------------------


def test_window_empty_is_zero():
    g = ExperimentGeometry(2.0, 5.0, 2.0, 2.0, delta_c=3.0, delta_d=0.1)
    assert windowed_probability(g, 5.0, 5.5, 0.0) == 0.0
    assert windowed_probability(g.replace(delta_a=0.7), 5.0, 5.5, 0.0) == 0.0


def test_window_rejects_negative_width():
    g = ExperimentGeometry(2.0, 5.0, 2.0, 2.0)
    with pytest.raises(DomainError):
        windowed_probability(g, 5.0, 5.5, -1.0)
    with pytest.raises(DomainError):
        CoincidenceQuery(window_halfwidth=-0.5)


@pytest.mark.parametrize("delta_a", [1.0, 0.6])
def test_wide_window_is_marginal(delta_a):
    g = ExperimentGeometry(2.0, 5.0, 2.0, 2.0, delta_a=delta_a, delta_c=3.0, delta_d=10.0)
    for tc in (3.0, 5.5, 8.0):
        assert abs(windowed_probability(g, tc, 5.5, 200.0) - marginal_probability(g, tc)) <= 1e-9


def test_fast_path_matches_quadrature_fallback():
    # a width that differs from 1 by one ulp forces the numerical branch
    bump = math.nextafter(1.0, 2.0)
    for dd, tw in ((0.1, 1.0), (10.0, 10.0), (1.0, 0.3)):
        fast = ExperimentGeometry(2.0, 5.0, 2.0, 2.0, delta_c=3.0, delta_d=dd)
        slow = fast.replace(delta_a=bump)
        assert is_window_fast_path(fast) and not is_window_fast_path(slow)
        for tc in (3.0, 5.5, 8.0):
            assert abs(windowed_probability(fast, tc, 5.5, tw) - windowed_probability(slow, tc, 5.5, tw)) <= 1e-12


def test_window_narrow_d_no_dip():
    g = ExperimentGeometry(2.0, 5.0, 2.0, 2.0, delta_c=3.0, delta_d=0.1)
    _, _, maxima, minima = _scan(lambda t: windowed_probability(g, t, 5.5, 10.0), 2.0, 9.0)
    assert len(maxima) == 1 and not minima


def test_window_monotone(rng):
    for _ in range(20):
        g = random_geometry(rng)
        tc = g.delay("c", "b")
        center = g.delay("d", "a")
        values = [windowed_probability(g, tc, center, tw) for tw in (0.0, 0.1, 0.5, 1.0, 3.0, 10.0, 50.0)]
        assert all(a <= b + 1e-15 for a, b in zip(values, values[1:]))


# --- shared properties ------------------------------------------------------


def test_translation_invariance(rng):
    for _ in range(20):
        g = random_geometry(rng)
        s = float(rng.uniform(-10, 10))
        h = g.replace(t_a=g.t_a + s, t_b=g.t_b + s)
        tc, td = g.delay("c", "a") + 0.3, g.delay("d", "b") - 0.2
        center = g.delay("d", "b")
        assert abs(joint_probability(g, tc, td) - joint_probability(h, tc + s, td + s)) <= 1e-12
        assert abs(hom_probability(g) - hom_probability(h)) <= 1e-12
        assert abs(marginal_probability(g, tc) - marginal_probability(h, tc + s)) <= 1e-12
        assert abs(windowed_probability(g, tc, center, 1.0) - windowed_probability(h, tc + s, center + s, 1.0)) <= 1e-12


def test_nonnegative(rng):
    for _ in range(30):
        g = random_geometry(rng)
        tc = np.linspace(g.delay("c", "a") - 5, g.delay("c", "b") + 5, 25)
        assert np.all(joint_probability(g, tc, g.delay("d", "a")) >= 0)
        assert np.all(no_interference_probability(g, tc, g.delay("d", "a")) >= 0)
        assert np.all(marginal_probability(g, tc) >= 0)
        assert hom_probability(g) >= 0
        assert windowed_probability(g, float(tc[3]), g.delay("d", "b"), 0.7) >= 0


def test_evaluate_dispatch(fig2_geom):
    q = CoincidenceQuery(tau_c=4.2, tau_d=5.9, window_center=5.5, window_halfwidth=1.0)
    g = fig2_geom
    assert evaluate("joint", g, q) == joint_probability(g, 4.2, 5.9)
    assert evaluate("no_interference", g, q) == no_interference_probability(g, 4.2, 5.9)
    assert evaluate("hom", g, q) == hom_probability(g)
    assert evaluate("marginal", g, q) == marginal_probability(g, 4.2)
    assert evaluate("windowed", g, q) == windowed_probability(g, 4.2, 5.5, 1.0)
    with pytest.raises(DomainError):
        evaluate("bogus", g, q)
