import itertools
from fractions import Fraction

import pytest

from isingtri.exactnum import NU_C
from isingtri.maps import oracle_series, oracle_sphere
from isingtri.partition import (
    SeedMissing,
    WordTable,
    check_q_identities,
    check_U,
    solve_dobrushin,
    solve_U,
    solve_word,
    sphere_series,
    verify_catalytic,
    zplus_recursion,
)
from isingtri.series import NotContractive, TSeries

NU = Fraction(3)


@pytest.fixture(scope="module")
def table9():
    return solve_dobrushin(NU, 10)


def test_dobrushin_examples(table9):
    assert table9.zplus.coeff(1, 2, 0) == NU          # edge 2-gon
    assert table9.z_plus.coeff(2) == NU * NU + NU
    for k in range(table9.order + 1):
        if (k + 1) % 3:
            assert table9.z_plus.coeff(k) == 0


def test_dobrushin_matches_oracle(table9):
    for word, series in (("+", table9.z_plus), ("++", table9.z_plusplus),
                         ("+-", table9.z_plusminus)):
        assert series.with_order(9).eq_to_order(oracle_series(word, NU, 9), 9)
    for p in (3, 4):
        eng = table9.zplus_slice(p)
        assert eng.with_order(9).eq_to_order(oracle_series("+" * p, NU, 9), 9)
    # mixed Dobrushin slices beyond the seeds
    assert table9.mixed.extract_tseries(2, 1).with_order(9).eq_to_order(
        oracle_series("++-", NU, 9), 9)
    assert table9.mixed.extract_tseries(2, 2).with_order(9).eq_to_order(
        oracle_series("++--", NU, 9), 9)


def test_mixed_symmetry(table9):
    assert table9.mixed.eq_to_order(table9.mixed.swap_xy(), table9.order)


def test_solve_word_matches_oracle(table9):
    words = WordTable(NU, 9, table9)
    for p in (3, 4):
        for bits in itertools.product("+-", repeat=p):
            w = "".join(bits)
            assert solve_word(w, NU, 9, words).eq_to_order(oracle_series(w, NU, 9), 9)


def test_solve_word_flip_and_pruning(table9):
    words = WordTable(NU, 9, table9)
    a = words.series("---")
    b = words.series("+++")
    assert a.coeffs == b.coeffs
    # words too long to contribute below the order are zero
    assert words.series("+" * 9).is_zero()


def test_seed_missing():
    bare = WordTable(NU, 6)
    with pytest.raises(SeedMissing):
        bare.series("+++")


def test_word_requires_length_three():
    words = WordTable(NU, 6, solve_dobrushin(NU, 6))
    with pytest.raises(ValueError):
        solve_word("++", NU, 6, words)


def test_sphere_series(table9):
    sph = sphere_series(NU, 9, table9)
    assert sph.eq_to_order(oracle_sphere(NU, 9), 9)
    assert sph.support() == [3, 6, 9]


def test_sphere_nu1_unspun_counts():
    from isingtri.maps import count_maps

    sph = sphere_series(Fraction(1), 9)
    for n in (1, 2, 3):
        assert sph.coeff(3 * n) == 2 ** (n + 2) * count_maps("sphere", 0, 3 * n)


def test_solve_U():
    for nu in (Fraction(1, 2), NU, NU_C):
        u = solve_U(nu, 15)
        assert u.coeff(0) == 0
        assert u.coeff(3) == 4 * nu * nu
        assert all(k % 3 == 0 for k in u.support())
        assert check_U(u, 15).is_zero()


def test_zplus_recursion_consistency():
    table = solve_dobrushin(NU, 14)
    words = WordTable(NU, 9, table)
    for p in (3, 4, 5):
        zr = zplus_recursion(p, NU, 9, table)
        assert zr.eq_to_order(table.zplus_slice(p), 9)
        if p <= 4:
            assert zr.eq_to_order(words.series("+" * p), 9)
    # lowest coefficient sits at the simple-boundary minimum
    z3 = zplus_recursion(3, NU, 9, table)
    assert z3.valuation() == 3


def test_zplus_rejects_nu_one():
    table = solve_dobrushin(Fraction(1), 12)
    with pytest.raises(ValueError):
        zplus_recursion(3, Fraction(1), 6, table)


def test_verify_catalytic_zero_residual():
    for nu, order in ((Fraction(2), 10), (NU_C, 8)):
        table = solve_dobrushin(nu, order + 2)
        rep = verify_catalytic(nu, order, table)
        assert rep.ok and not rep.degenerate


def test_verify_catalytic_degenerate_at_one():
    table = solve_dobrushin(Fraction(1), 10)
    rep = verify_catalytic(Fraction(1), 8, table)
    assert rep.degenerate and rep.ok


def test_verify_catalytic_detects_corruption():
    table = solve_dobrushin(Fraction(2), 10)
    table.z_plusplus = table.z_plusplus + TSeries.monomial(Fraction(2), table.order, 4)
    rep = verify_catalytic(Fraction(2), 8, table)
    assert not rep.ok


def test_q_identities_pass():
    for nu in (Fraction(1, 2), Fraction(2)):
        results = check_q_identities(nu, 9)
        assert all(r.ok for r in results), [r.to_json() for r in results]
        assert len(results) == 5


def test_q_identity_literal_form_fails():
    # guard documenting the pinched-boundary correction: without the
    # 2 Q1 (Q2 - Q1^2) term the degree-3 identity already fails at t^3
    from isingtri.maps import oracle_Q

    q1 = oracle_Q(1, NU, 6)
    q2 = oracle_Q(2, NU, 6)
    q3 = oracle_Q(3, NU, 6)
    table = solve_dobrushin(NU, 6)
    words = WordTable(NU, 6, table)
    lhs = words.series("+++") + words.series("++-").scale(Fraction(3))
    literal_rhs = q3 - q1 * q2
    assert lhs.first_difference(literal_rhs, 6) == 3
    corrected = literal_rhs - (q1 * (q2 - q1 * q1)).scale(Fraction(2))
    assert lhs.eq_to_order(corrected, 6)


def test_nonnegative_coefficients_randomized():
    import random

    rng = random.Random(5)
    for _ in range(5):
        nu = Fraction(rng.randrange(1, 8), rng.randrange(1, 5))
        table = solve_dobrushin(nu, 7)
        for (k, i, j), c in table.mixed.coeffs.items():
            assert c > 0
        for (k, i, j), c in table.zplus.coeffs.items():
            assert c > 0
