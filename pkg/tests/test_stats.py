import math

import pytest

from delottery_sim import (
    CHI2_CRIT_01,
    ProtocolError,
    binomial_sigma,
    chi_square_uniform,
    pooled_standard_error,
)


def test_uniform_counts_score_zero():
    statistic, passed, df = chi_square_uniform([10] * 10)
    assert statistic == 0.0
    assert passed
    assert df == 9


def test_pearson_statistic_by_hand():
    # E = 25 each; (O-E)^2/E = (25 + 1 + 4 + 20 ... ) / 25
    counts = [30, 24, 23, 23]
    statistic, passed, df = chi_square_uniform(counts)
    expect = sum((c - 25) ** 2 / 25 for c in counts)
    assert statistic == pytest.approx(expect, rel=1e-12)
    assert df == 3
    assert passed  # 1.36 is far below 11.34


def test_lopsided_counts_fail():
    statistic, passed, df = chi_square_uniform([100, 0, 0, 0, 0, 0, 0, 0, 0, 0])
    assert statistic == pytest.approx(900.0)
    assert not passed


def test_boundary_uses_df_critical_value():
    crit = CHI2_CRIT_01[1]
    # two categories, statistic = (d/2)^2/E * 2 = d^2 / (2E); tune d near crit
    total = 10_000
    for delta in (100, 300):
        counts = [total // 2 + delta, total // 2 - delta]
        statistic, passed, _ = chi_square_uniform(counts)
        assert passed == (statistic < crit)


def test_critical_values_match_scipy_when_available():
    scipy_stats = pytest.importorskip("scipy.stats")
    for df, crit in CHI2_CRIT_01.items():
        assert crit == scipy_stats.chi2.ppf(0.99, df)


def test_chi_square_input_validation():
    with pytest.raises(ProtocolError):
        chi_square_uniform([5])
    with pytest.raises(ProtocolError):
        chi_square_uniform([5, -1])
    with pytest.raises(ProtocolError):
        chi_square_uniform([0, 0, 0])
    with pytest.raises(ProtocolError):
        chi_square_uniform([1] * 100)  # df = 99 is beyond the table


def test_table_covers_df_1_through_64():
    assert sorted(CHI2_CRIT_01) == list(range(1, 65))
    values = [CHI2_CRIT_01[df] for df in range(1, 65)]
    assert values == sorted(values)  # critical values grow with df


def test_binomial_sigma():
    assert binomial_sigma(0.5, 100) == pytest.approx(0.05)
    assert binomial_sigma(0.0, 10) == 0.0
    with pytest.raises(ProtocolError):
        binomial_sigma(0.5, 0)


def test_pooled_standard_error():
    se = pooled_standard_error(0.1, 1000, 0.2, 500)
    expect = math.sqrt(0.1 * 0.9 / 1000 + 0.2 * 0.8 / 500)
    assert se == pytest.approx(expect, rel=1e-12)
