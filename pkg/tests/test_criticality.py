import math
from fractions import Fraction

import pytest

from isingtri.criticality import (
    AsymptoticFit,
    InsufficientOrder,
    NegativeEntry,
    critical_point,
    estimate_asymptotics,
    eval_at_tnu,
    eval_series_interval,
    hull_constant_below_yc,
    hull_constant_closed_form,
    mean_matrix,
    p1_poly,
    p2_poly,
    spectral_radius,
)
from isingtri.exactnum import NU_C, RHO_NU_C, Y_C, Interval, scalar_to_float
from isingtri.series import TSeries


def test_exact_critical_constants():
    assert p1_poly(NU_C, RHO_NU_C) == 0
    assert p2_poly(NU_C, RHO_NU_C) == 0


def test_critical_point_at_nu_c():
    crit = critical_point(NU_C)
    assert crit.regime == "critical"
    assert crit.rho_exact == RHO_NU_C
    assert abs(float(crit.t_nu) - 0.23451626301100736) < 1e-12


def test_critical_point_nu_one():
    crit = critical_point(Fraction(1))
    assert crit.regime == "subcritical_P2"
    # rho is the positive root of 27648 rho^2 - 16, so rho^2 = 1/1728
    sq = crit.rho.mid ** 2
    assert abs(sq - Fraction(1, 1728)) < Fraction(1, 10 ** 25)
    assert crit.selection_margin < 0.05


def test_regimes_and_monotone_rho():
    rhos = {}
    for nu in (Fraction(1, 2), Fraction(1), Fraction(2)):
        crit = critical_point(nu)
        rhos[nu] = float(crit.rho)
        expected = "subcritical_P2" if nu < NU_C else "supercritical_P1"
        assert crit.regime == expected
        poly = p2_poly if nu < NU_C else p1_poly
        lo = poly(nu, crit.rho.lo)
        hi = poly(nu, crit.rho.hi)
        assert (lo <= 0 <= hi) or (hi <= 0 <= lo)
    # the radius grows as the weight shrinks
    assert rhos[Fraction(1, 2)] > rhos[Fraction(1)] > rhos[Fraction(2)]


def test_eval_zero_series():
    crit = critical_point(NU_C)
    z = TSeries.zero(NU_C, 50)
    iv = eval_at_tnu(z, crit)
    assert iv.lo == iv.hi == 0


def test_eval_requires_order():
    crit = critical_point(NU_C)
    s = TSeries(NU_C, 10, {2: Fraction(1)})
    with pytest.raises(InsufficientOrder):
        eval_at_tnu(s, crit)


def test_eval_geometric_regime_matches_partial_sums():
    # far below the radius the tail is negligible: band must cover plain sums
    crit = critical_point(Fraction(1))
    from isingtri.partition import sphere_series

    s = sphere_series(Fraction(1), 30)
    t_half = Interval(crit.t_nu.lo / 2, crit.t_nu.hi / 2)
    with_tail = eval_series_interval(s, t_half, Fraction(5, 2))
    plain = s.eval_interval(t_half)
    assert with_tail.lo <= plain.hi and plain.lo <= with_tail.hi


def test_asymptotics_on_synthetic_model():
    # c_n = rho^-n n^(-5/2) fitted back to alpha = 2.5 within 0.02 by n = 20
    crit = critical_point(Fraction(1))
    rho = crit.rho.mid
    coeffs = {}
    for n in range(1, 21):
        coeffs[3 * n] = Fraction(1, rho ** n) * Fraction(1, int(n ** 5 * 10 ** 8)) \
            if False else None
    # build exactly: c_{3n} = round(rho^-n n^-2.5 * 2^80) / 2^80
    coeffs = {}
    for n in range(1, 21):
        value = float(1 / rho) ** n * n ** -2.5
        coeffs[3 * n] = Fraction(value).limit_denominator(10 ** 30)
    series = TSeries(Fraction(1), 60, coeffs)
    fit = estimate_asymptotics(series, crit)
    assert abs(float(fit.alpha.mid) - 2.5) <= 0.02
    assert abs(float(fit.growth.mid) * float(rho) - 1) <= 0.01


def test_asymptotics_requires_points():
    crit = critical_point(Fraction(1))
    s = TSeries(Fraction(1), 12, {3: Fraction(1), 6: Fraction(2)})
    with pytest.raises(InsufficientOrder):
        estimate_asymptotics(s, crit)


def _dummy_crit():
    return critical_point(NU_C)


def test_mean_matrix_entries():
    crit = _dummy_crit()
    z1 = Interval(Fraction(26, 100), Fraction(27, 100))
    z2 = Interval(Fraction(44, 100), Fraction(45, 100))
    zm = Interval(Fraction(29, 100), Fraction(30, 100))
    m = mean_matrix(crit, z1, z2, zm)
    nu_iv = scalar_to_float(NU_C, 96)
    t = crit.t_nu
    first = m.entries[0][0]
    expect = nu_iv * t * z1 * 2
    assert first.lo == expect.lo and first.hi == expect.hi
    # type + row: second entry nu t Z_++ / Z_+
    second = m.entries[0][1]
    expect = nu_iv * t * z2 / z1
    assert second.lo == expect.lo and second.hi == expect.hi
    for row in m.entries:
        for e in row:
            assert e.hi >= 0


def test_mean_matrix_negative_entry():
    crit = _dummy_crit()
    bad = Interval(Fraction(-2), Fraction(-1))
    with pytest.raises(NegativeEntry):
        mean_matrix(crit, bad, bad, bad)


def _const_matrix(entries):
    crit = _dummy_crit()
    m = mean_matrix(crit, Interval(Fraction(26, 100)), Interval(Fraction(45, 100)),
                    Interval(Fraction(29, 100)))
    m.entries = [[Interval(Fraction(x)) for x in row] for row in entries]
    return m


def test_spectral_radius_identity():
    m = _const_matrix([[1 if i == j else 0 for j in range(5)] for i in range(5)])
    r = spectral_radius(m)
    assert r.contains(1) and r.width < Fraction(1, 10 ** 6)


def test_spectral_radius_rank_one():
    u = [1, 2, 3, 4, 5]
    v = [5, 4, 3, 2, 1]
    m = _const_matrix([[ui * vj for vj in v] for ui in u])
    r = spectral_radius(m)
    dot = sum(a * b for a, b in zip(u, v))
    assert r.contains(dot)


def test_collatz_wielandt_sandwich():
    m = _const_matrix([[Fraction(1, 2) if abs(i - j) <= 1 else Fraction(1, 10)
                        for j in range(5)] for i in range(5)])
    r = spectral_radius(m)
    assert r.lo <= r.hi


def test_hull_constant():
    iv = hull_constant_closed_form()
    assert abs(float(iv) - 0.1050664982) < 1e-9
    assert hull_constant_below_yc()
    assert iv.hi < scalar_to_float(Y_C, 96).lo
