#!/usr/bin/env python3
"""Regenerates tests/ttest_reference.inc.

Reference t statistics and one-sided p-values are computed with
scipy.stats.ttest_rel so the C++ implementation is checked against an
independent statistics package. Run from the repo root:

    python3 tests/tools/gen_ttest_reference.py > tests/ttest_reference.inc
"""
import numpy as np
from scipy import stats

rng = np.random.default_rng(20240817)

def emit(vals):
    return ", ".join(f"{float(v)!r}" for v in vals)

print("// Generated by tests/tools/gen_ttest_reference.py (scipy reference). Do not edit.")
print("// clang-format off")
print("inline const std::vector<TTestFixture> kTTestFixtures = {")
for i in range(20):
    n = 20
    shift = rng.normal(0.0, 2.0)
    x = np.round(rng.normal(10.0 + shift, 3.0, n), 6)
    y = np.round(rng.normal(10.0, 3.0, n), 6)
    g = stats.ttest_rel(x, y, alternative="greater")
    l = stats.ttest_rel(x, y, alternative="less")
    assert abs(g.statistic - l.statistic) < 1e-12
    print("  {")
    print(f"    {{{emit(x)}}},")
    print(f"    {{{emit(y)}}},")
    print(f"    {float(g.statistic)!r}, {float(g.pvalue)!r}, {float(l.pvalue)!r}}},")
print("};")

# Small classic fixture: paired scores before/after, n=10.
x = np.array([18.0, 21.0, 16.0, 22.0, 19.0, 24.0, 17.0, 21.0, 23.0, 18.0])
y = np.array([22.0, 25.0, 17.0, 24.0, 16.0, 29.0, 20.0, 23.0, 19.0, 20.0])
g = stats.ttest_rel(x, y, alternative="greater")
l = stats.ttest_rel(x, y, alternative="less")
print("inline const TTestFixture kTTestTextbook = {")
print(f"  {{{emit(x)}}},")
print(f"  {{{emit(y)}}},")
print(f"  {float(g.statistic)!r}, {float(g.pvalue)!r}, {float(l.pvalue)!r}}};")
print("// clang-format on")
