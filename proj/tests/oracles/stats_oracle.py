#!/usr/bin/env python3
# SPDX-FileCopyrightText: 2026 The cloudgauge Authors
# SPDX-License-Identifier: Apache-2.0
"""Reference values for the statistics tests, computed with scipy and pingouin.

Run once and commit the output as tests/stats_oracle.inc; the C++ tests never
call Python.
"""

import numpy as np
import pandas as pd
import pingouin as pg
from scipy import optimize, stats


def arr(values):
    return "{" + ", ".join(repr(float(v)) for v in values) + "}"


def group_cases():
    rng = np.random.default_rng(20261015)
    specs = [
        # (sizes, means, sds)
        ([18, 18], [3.1, 3.1], [0.6, 0.6]),
        ([18, 18, 18], [3.4, 3.0, 2.2], [0.5, 1.1, 0.7]),
        ([18, 18, 18], [3.0, 3.05, 2.95], [0.8, 0.8, 0.8]),
        ([6, 11, 25], [2.0, 2.6, 2.3], [0.3, 0.9, 1.4]),
        ([9, 9, 9, 9], [4.1, 3.2, 3.9, 1.8], [0.4, 0.4, 1.2, 0.2]),
        ([30, 12], [3.3, 2.1], [1.5, 0.3]),
        ([5, 7, 6, 8, 10], [1.5, 1.9, 2.8, 3.7, 4.4], [0.2, 0.5, 0.6, 0.3, 0.4]),
        ([20, 20, 20], [2.5, 2.5, 2.5], [0.4, 0.8, 1.6]),
    ]
    out = []
    for n, (sizes, means, sds) in enumerate(specs):
        groups = [np.round(np.clip(rng.normal(m, s, size), 1.0, 5.0), 2) for size, m, s in zip(sizes, means, sds)]
        values = np.concatenate(groups)
        labels = np.concatenate([[f"g{i}"] * len(g) for i, g in enumerate(groups)])
        df = pd.DataFrame({"y": values, "g": labels})
        w = pg.welch_anova(data=df, dv="y", between="g").iloc[0]
        a = stats.f_oneway(*groups)
        lev = stats.levene(*groups, center="median")
        gh = pg.pairwise_gameshowell(data=df, dv="y", between="g")
        rows = []
        for _, r in gh.iterrows():
            i, j = int(r["A"][1:]), int(r["B"][1:])
            rows.append((min(i, j), max(i, j), float(r["df"]), float(r["pval"])))
        rows.sort()
        out.append((f"groups_{n}", groups, w, a, lev, rows))
    return out


def wilcoxon_cases():
    rng = np.random.default_rng(7)
    cases = []
    for n, shift, decimals in [(18, 0.4, 1), (18, 0.0, 1), (12, -0.3, 2), (30, 0.15, 1), (9, 1.0, 0), (54, 0.1, 2)]:
        a = np.round(rng.normal(3.0, 0.8, n), decimals)
        b = np.round(a - shift + rng.normal(0, 0.5, n), decimals)
        b[0] = a[0]  # one zero difference is always dropped
        r = stats.wilcoxon(a, b, zero_method="wilcox", correction=False, method="approx")
        cases.append((a, b, float(r.statistic), float(r.pvalue)))
    return cases


def kurtosis_cases():
    rng = np.random.default_rng(11)
    samples = [rng.normal(0, 1, 18), rng.standard_t(3, 40), rng.uniform(-1, 1, 25), rng.exponential(1, 12)]
    return [(s, float(stats.kurtosis(s, fisher=False, bias=True))) for s in samples]


def logistic(x, b):
    return b[1] + (b[0] - b[1]) / (1.0 + np.exp(-(x - b[2]) / abs(b[3])))


def logistic_cases():
    rng = np.random.default_rng(3)
    cases = []
    for n, truth, noise, increasing in [(18, (4.6, 1.2, 40.0, 6.0), 0.3, True),
                                        (24, (4.8, 1.1, 0.02, 0.004), 0.25, True),
                                        (18, (4.5, 1.3, 70.0, 3.0), 0.4, False),
                                        (54, (4.2, 1.5, 0.6, 0.15), 0.35, True)]:
        x = np.sort(rng.uniform(truth[2] - 4 * truth[3], truth[2] + 4 * truth[3], n))
        b = truth if increasing else (truth[1], truth[0], truth[2], truth[3])
        y = np.clip(logistic(x, b) + rng.normal(0, noise, n), 1.0, 5.0)
        best = np.inf
        span = x.max() - x.min()
        for b1 in (y.max(), y.min(), 5.0, 1.0):
            for b2 in (y.min(), y.max(), 1.0, 5.0):
                for b3 in np.quantile(x, [0.25, 0.5, 0.75]):
                    for b4 in (span / 20, span / 8, span / 4, span):
                        try:
                            fit = optimize.least_squares(lambda p: logistic(x, p) - y, [b1, b2, b3, b4],
                                                         method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15,
                                                         max_nfev=20000)
                        except (ValueError, FloatingPointError):
                            continue
                        rmse = float(np.sqrt(np.mean(fit.fun ** 2)))
                        if np.isfinite(rmse):
                            best = min(best, rmse)
        cases.append((x, y, best))
    return cases


def main():
    np.seterr(all="ignore")
    print("// SPDX-FileCopyrightText: 2026 The cloudgauge Authors")
    print("// SPDX-License-Identifier: Apache-2.0")
    print("// Generated by tests/oracles/stats_oracle.py; do not edit.")
    print()
    print("const GroupCase kGroupCases[] = {")
    for name, groups, w, a, lev, rows in group_cases():
        gs = "{" + ", ".join(arr(g) for g in groups) + "}"
        gh = "{" + ", ".join(f"{{{i}, {j}, {df!r}, {p!r}}}" for i, j, df, p in rows) + "}"
        print(f"    {{\"{name}\", {gs},\n     {float(w['F'])!r}, {float(w['ddof1'])!r}, {float(w['ddof2'])!r}, {float(w['p_unc'])!r},")
        print(f"     {float(a.statistic)!r}, {float(a.pvalue)!r}, {float(lev.statistic)!r}, {float(lev.pvalue)!r},\n     {gh}}},")
    print("};")
    print()
    print("const WilcoxonCase kWilcoxonCases[] = {")
    for a, b, t, p in wilcoxon_cases():
        print(f"    {{{arr(a)},\n     {arr(b)},\n     {t!r}, {p!r}}},")
    print("};")
    print()
    print("const KurtosisCase kKurtosisCases[] = {")
    for s, k in kurtosis_cases():
        print(f"    {{{arr(s)}, {k!r}}},")
    print("};")
    print()
    print("const LogisticCase kLogisticCases[] = {")
    for x, y, best in logistic_cases():
        print(f"    {{{arr(x)},\n     {arr(y)},\n     {best!r}}},")
    print("};")
    print()
    print("const FSpot kFSpots[] = {")
    for x, d1, d2 in [(0.5, 1, 1), (1.0, 17, 17), (2.0, 17, 17), (3.7, 2, 30.5), (0.01, 5, 9), (12.0, 3, 4),
                      (1.3, 40, 200), (4.1, 2, 12.73), (0.9, 7.5, 3.2), (25.0, 1, 2), (1.05, 300, 300)]:
        print(f"    {{{x!r}, {float(d1)!r}, {float(d2)!r}, {float(stats.f.sf(x, d1, d2))!r}}},")
    print("};")
    print()
    print("const FQuantile kFQuantiles[] = {")
    for p, d1, d2 in [(0.8, 17, 17), (0.95, 2, 51), (0.8, 5, 12), (0.99, 1, 3), (0.5, 10, 10), (0.8, 53, 53)]:
        print(f"    {{{p!r}, {float(d1)!r}, {float(d2)!r}, {float(stats.f.ppf(p, d1, d2))!r}}},")
    print("};")
    print()
    print("const RangeSpot kRangeSpots[] = {")
    for q, k, df in [(3.0, 2, 5.0), (3.5, 3, 17.0), (2.1, 3, 33.4), (4.2, 4, 10.0), (5.0, 5, 6.5), (1.0, 3, 20.0),
                     (0.3, 2, 10.0), (6.5, 3, 3.0), (3.3, 10, 60.0), (4.0, 6, 1000.0), (2.77, 2, 120.0),
                     (8.0, 4, 12.0), (3.6, 3, 100000.0)]:
        print(f"    {{{q!r}, {k}, {df!r}, {float(stats.studentized_range.sf(q, k, df))!r}}},")
    print("};")
    print()
    print("const NormalSpot kNormalSpots[] = {")
    for x in [-6.0, -2.5, -1.0, 0.0, 0.3, 1.959963984540054, 3.0, 8.0]:
        print(f"    {{{x!r}, {float(stats.norm.sf(x))!r}}},")
    print("};")
    print()
    x = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
    y = np.array([2.0, 4.0, 5.0, 4.0, 5.0])
    print(f"constexpr double kTextbookPlcc = {float(stats.pearsonr(x, y).statistic)!r};")


if __name__ == "__main__":
    main()
