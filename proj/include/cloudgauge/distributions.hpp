// SPDX-FileCopyrightText: 2026 The cloudgauge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CLOUDGAUGE_DISTRIBUTIONS_HPP
#define CLOUDGAUGE_DISTRIBUTIONS_HPP

namespace cloudgauge::dist {

double normal_cdf(double x);
double normal_sf(double x);

/// Regularized incomplete beta I_x(a, b), by continued fraction.
double incomplete_beta(double x, double a, double b);

/// Snedecor F with (d1, d2) degrees of freedom; fractional df allowed.
double f_cdf(double x, double d1, double d2);
double f_sf(double x, double d1, double d2);
double f_quantile(double p, double d1, double d2);

/// Studentized range distribution for k means and df degrees of freedom
/// (df may be fractional). Evaluated by Gauss-Legendre quadrature of
///   P(q) = int_0^inf f_df(s) W(q s) ds,
///   W(w) = k int phi(z) [Phi(z) - Phi(z - w)]^(k-1) dz,
/// where f_df is the density of sqrt(chi2_df / df).
double studentized_range_cdf(double q, int k, double df);
double studentized_range_sf(double q, int k, double df);

}  // namespace cloudgauge::dist

#endif  // CLOUDGAUGE_DISTRIBUTIONS_HPP
