"""Pearson chi-square uniformity test and standard-error helpers.

The critical values are embedded so the simulator has no runtime
dependency on a statistics package: CHI2_CRIT_01[df] is the alpha = 0.01
upper critical value (the 0.99 quantile) of the chi-square distribution,
generated once by tools/gen_chi2_table.py from scipy's inverse CDF and
printed via repr so each float64 round-trips exactly.
"""

import math

from .errors import ProtocolError

CHI2_CRIT_01 = {
    1: 6.6348966010212145,
    2: 9.21034037197618,
    3: 11.344866730144373,
    4: 13.276704135987622,
    5: 15.08627246938899,
    6: 16.811893829770927,
    7: 18.475306906582357,
    8: 20.090235029663233,
    9: 21.665994333461924,
    10: 23.209251158954356,
    11: 24.724970311318277,
    12: 26.216967305535853,
    13: 27.68824961045705,
    14: 29.141237740672796,
    15: 30.57791416689249,
    16: 31.999926908815176,
    17: 33.40866360500461,
    18: 34.805305734705065,
    19: 36.19086912927004,
    20: 37.56623478662507,
    21: 38.93217268351607,
    22: 40.289360437593864,
    23: 41.638398118858476,
    24: 42.97982013935165,
    25: 44.31410489621915,
    26: 45.64168266628317,
    27: 46.962942124751436,
    28: 48.27823577031548,
    29: 49.58788447289881,
    30: 50.89218131151707,
    31: 52.19139483319193,
    32: 53.48577183623535,
    33: 54.77553976011035,
    34: 56.06090874778906,
    35: 57.3420734338592,
    36: 58.61921450168706,
    37: 59.89250004508689,
    38: 61.1620867636897,
    39: 62.4281210161849,
    40: 63.690739751564465,
    41: 64.9500713352112,
    42: 66.20623628399322,
    43: 67.45934792232582,
    44: 68.7095129693454,
    45: 69.95683206583814,
    46: 71.20140024831149,
    47: 72.44330737654823,
    48: 73.68263852010573,
    49: 74.91947430847816,
    50: 76.1538912490127,
    51: 77.38596201613736,
    52: 78.6157557150025,
    53: 79.84333812225145,
    54: 81.0687719062971,
    55: 82.29211682919967,
    56: 83.51342993198946,
    57: 84.73276570506393,
    58: 85.95017624510335,
    59: 87.16571139978757,
    60: 88.37941890144937,
    61: 89.59134449068712,
    62: 90.80153203083871,
    63: 92.01002361413214,
    64: 93.21685966023843,
}


def chi_square_uniform(counts) -> tuple:
    """Test observed category counts against the uniform expectation.

    Returns (statistic, passed, df) where statistic is the Pearson sum
    (O - E)^2 / E with E = total/k, df = k - 1, and passed is True iff
    the statistic stays below the embedded alpha = 0.01 critical value.
    """
    counts = list(counts)
    k = len(counts)
    if k < 2:
        raise ProtocolError("chi-square needs at least 2 categories")
    if any(c < 0 for c in counts):
        raise ProtocolError("counts must be non-negative")
    total = sum(counts)
    if total <= 0:
        raise ProtocolError("chi-square needs a positive total count")
    df = k - 1
    if df not in CHI2_CRIT_01:
        raise ProtocolError(f"no tabulated critical value for df={df}")
    expected = total / k
    statistic = math.fsum((c - expected) ** 2 / expected for c in counts)
    return statistic, statistic < CHI2_CRIT_01[df], df


def binomial_sigma(p: float, n: int) -> float:
    """Standard deviation of a proportion estimated from n Bernoulli trials."""
    if n <= 0:
        raise ProtocolError("need at least one trial")
    return math.sqrt(p * (1.0 - p) / n)


def pooled_standard_error(p1: float, n1: int, p2: float, n2: int) -> float:
    """Standard error of the difference between two independent proportions."""
    return math.sqrt(binomial_sigma(p1, n1) ** 2 + binomial_sigma(p2, n2) ** 2)
