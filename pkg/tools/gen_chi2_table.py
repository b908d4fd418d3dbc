"""Regenerate the chi-square critical-value table embedded in stats.py.

The table is the alpha=0.01 upper critical value of the chi-square
distribution for df 1..64, i.e. the 0.99 quantile, computed by scipy's
inverse CDF and printed with repr (17 significant digits round-trips a
float64 exactly). Run and paste the output over CHI2_CRIT_01 if the
range ever needs to change; the library itself never imports scipy.
"""

from scipy.stats import chi2

print("CHI2_CRIT_01 = {")
for df in range(1, 65):
    print(f"    {df}: {float(chi2.ppf(0.99, df))!r},")
print("}")
