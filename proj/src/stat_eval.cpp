// SPDX-FileCopyrightText: 2026 The cloudgauge Authors
// SPDX-License-Identifier: Apache-2.0

#include "cloudgauge/stat_eval.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <numeric>
#include <unordered_set>

#include "cloudgauge/distributions.hpp"

namespace cloudgauge {

ScorePairSet::ScorePairSet(std::vector<ScoreEntry> entries) : entries_(std::move(entries)) {
  std::unordered_set<std::string> seen;
  for (const ScoreEntry& e : entries_) {
    if (!seen.insert(e.stimulus_id).second) {
      throw DataError("duplicate stimulus id '" + e.stimulus_id + "'");
    }
    if (!(e.mos >= 1.0 && e.mos <= 5.0)) {
      throw DataError("mos of '" + e.stimulus_id + "' outside [1, 5]");
    }
    if (!std::isfinite(e.objective_value)) {
      throw DataError("objective value of '" + e.stimulus_id + "' is not finite");
    }
  }
}

ScorePairSet ScorePairSet::from_values(const Eigen::VectorXd& objective,
                                       const Eigen::VectorXd& mos) {
  if (objective.size() != mos.size()) throw UsageError("score vectors differ in length");
  std::vector<ScoreEntry> entries(static_cast<std::size_t>(objective.size()));
  for (Eigen::Index i = 0; i < objective.size(); ++i) {
    ScoreEntry& e = entries[static_cast<std::size_t>(i)];
    e.stimulus_id = std::to_string(i);
    e.objective_value = objective[i];
    e.mos = mos[i];
  }
  return ScorePairSet(std::move(entries));
}

Eigen::VectorXd ScorePairSet::objective() const {
  Eigen::VectorXd v(size());
  for (Eigen::Index i = 0; i < size(); ++i) v[i] = entries_[static_cast<std::size_t>(i)].objective_value;
  return v;
}

Eigen::VectorXd ScorePairSet::mos() const {
  Eigen::VectorXd v(size());
  for (Eigen::Index i = 0; i < size(); ++i) v[i] = entries_[static_cast<std::size_t>(i)].mos;
  return v;
}

double sample_variance(const Eigen::VectorXd& values) {
  if (values.size() < 2) throw UsageError("variance needs at least 2 values");
  return (values.array() - values.mean()).square().sum() / static_cast<double>(values.size() - 1);
}

double median(Eigen::VectorXd values) {
  if (values.size() == 0) throw UsageError("median of empty set");
  const auto n = static_cast<std::size_t>(values.size());
  std::sort(values.data(), values.data() + n);
  return n % 2 == 1 ? values[static_cast<Eigen::Index>(n / 2)]
                    : 0.5 * (values[static_cast<Eigen::Index>(n / 2 - 1)] +
                             values[static_cast<Eigen::Index>(n / 2)]);
}

// -- logistic fit ------------------------------------------------------------

namespace {

struct FitState {
  Eigen::Vector4d beta;
  double sse = 0.0;
  int iterations = 0;
  bool converged = false;
};

double sum_squared_error(const Eigen::VectorXd& z, const Eigen::VectorXd& y,
                         const Eigen::Vector4d& beta) {
  double sse = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double r = y[i] - logistic4(z[i], beta);
    sse += r * r;
  }
  return sse;
}

// Levenberg-Marquardt from one start, on standardized abscissae.
FitState levenberg_marquardt(const Eigen::VectorXd& z, const Eigen::VectorXd& y,
                             Eigen::Vector4d beta, const LogisticOptions& options) {
  const Eigen::Index n = z.size();
  FitState state{beta, sum_squared_error(z, y, beta), 0, false};
  double lambda = 1e-3;
  Eigen::MatrixXd jac(n, 4);
  Eigen::VectorXd residual(n);

  while (state.iterations < options.max_iterations) {
    ++state.iterations;
    const Eigen::Vector4d& b = state.beta;
    const double scale = std::abs(b[3]);
    const double sign = b[3] < 0.0 ? -1.0 : 1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double u = (z[i] - b[2]) / scale;
      const double g = 1.0 / (1.0 + std::exp(-u));
      const double slope = (b[0] - b[1]) * g * (1.0 - g);
      jac(i, 0) = g;
      jac(i, 1) = 1.0 - g;
      jac(i, 2) = -slope / scale;
      jac(i, 3) = -slope * u * sign / scale;
      residual[i] = y[i] - (b[1] + (b[0] - b[1]) * g);
    }
    const Eigen::Matrix4d jtj = jac.transpose() * jac;
    const Eigen::Vector4d gradient = jac.transpose() * residual;
    if (gradient.lpNorm<Eigen::Infinity>() <= 1e-14 * (1.0 + state.sse)) {
      state.converged = true;
      break;
    }

    bool accepted = false;
    while (!accepted && state.iterations <= options.max_iterations) {
      Eigen::Matrix4d damped = jtj;
      for (int d = 0; d < 4; ++d) damped(d, d) += lambda * (jtj(d, d) + 1e-12);
      const Eigen::Vector4d step = damped.ldlt().solve(gradient);
      const Eigen::Vector4d candidate = state.beta + step;
      const double sse = step.allFinite() && candidate[3] != 0.0
                             ? sum_squared_error(z, y, candidate)
                             : std::numeric_limits<double>::infinity();
      if (sse < state.sse) {
        const double old_rmse = std::sqrt(state.sse / static_cast<double>(n));
        const double new_rmse = std::sqrt(sse / static_cast<double>(n));
        state.beta = candidate;
        state.sse = sse;
        lambda = std::max(lambda / 10.0, 1e-15);
        accepted = true;
        if (old_rmse - new_rmse <= options.tolerance * old_rmse) state.converged = true;
      } else {
        lambda *= 10.0;
        if (lambda > 1e16) {
          // No descent direction left at working precision.
          state.converged = true;
          return state;
        }
        ++state.iterations;
      }
    }
    if (state.converged) break;
  }
  return state;
}

}  // namespace

LogisticFit fit_logistic(const Eigen::VectorXd& objective, const Eigen::VectorXd& mos,
                         const LogisticOptions& options) {
  if (objective.size() != mos.size()) throw UsageError("fit_logistic: inputs differ in length");
  if (objective.size() < 5) throw UsageError("fit_logistic: needs at least 5 score pairs");
  if (!objective.allFinite() || !mos.allFinite()) throw DataError("fit_logistic: non-finite input");
  const double lo = objective.minCoeff();
  const double hi = objective.maxCoeff();
  if (!(hi > lo)) throw DataError("fit_logistic: objective values are constant");

  const double centre = median(objective);
  const double spread = hi - lo;
  const Eigen::VectorXd z = (objective.array() - centre) / spread;
  const double y_max = mos.maxCoeff();
  const double y_min = mos.minCoeff();

  FitState best;
  bool have_best = false;
  for (const auto& [top, bottom] : {std::pair{y_max, y_min}, std::pair{y_min, y_max}}) {
    for (const double width : {0.25, 0.1, 1.0}) {
      const FitState s = levenberg_marquardt(z, mos, Eigen::Vector4d(top, bottom, 0.0, width), options);
      if (!have_best || s.sse < best.sse) {
        best = s;
        have_best = true;
      }
    }
  }

  LogisticFit fit;
  fit.beta = Eigen::Vector4d(best.beta[0], best.beta[1], centre + spread * best.beta[2],
                             spread * std::abs(best.beta[3]));
  fit.predicted = fit.predict(objective);
  fit.residuals = mos - fit.predicted;
  fit.rmse = std::sqrt(fit.residuals.squaredNorm() / static_cast<double>(mos.size()));
  fit.iterations = best.iterations;
  fit.converged = best.converged;
  return fit;
}

LogisticFit fit_logistic(const ScorePairSet& pairs, const LogisticOptions& options) {
  return fit_logistic(pairs.objective(), pairs.mos(), options);
}

MetricEvaluation evaluate_metric(const ScorePairSet& pairs, const LogisticOptions& options) {
  MetricEvaluation out;
  out.fit = fit_logistic(pairs, options);
  out.plcc_percent = 100.0 * plcc(out.fit.predicted, pairs.mos());
  return out;
}

// -- significance tests --------------------------------------------------------

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("alpha must be in (0, 1)");
}

void check_groups(const Groups& groups, bool need_variance) {
  if (groups.size() < 2) throw UsageError("need at least 2 groups");
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].size() < 2) {
      throw DataError("group " + std::to_string(g) + " has fewer than 2 values");
    }
    if (!groups[g].allFinite()) throw DataError("group " + std::to_string(g) + " has non-finite values");
    if (need_variance && !(sample_variance(groups[g]) > 0.0)) {
      throw DataError("group " + std::to_string(g) + " has zero variance");
    }
  }
}

SignificanceResult decide(std::string name, double statistic, double df1, double df2, double p,
                          double alpha) {
  SignificanceResult r;
  r.test = std::move(name);
  r.statistic = statistic;
  r.df1 = df1;
  r.df2 = df2;
  r.p_value = std::clamp(p, 0.0, 1.0);
  r.alpha = alpha;
  r.significant = r.p_value < alpha;
  return r;
}

// Average ranks (1-based) with exact-equality ties; also returns the tie
// correction sum of t^3 - t.
Eigen::VectorXd average_ranks(const Eigen::VectorXd& values, double& tie_sum) {
  const auto n = static_cast<std::size_t>(values.size());
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return values[a] < values[b]; });
  Eigen::VectorXd ranks(values.size());
  tie_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    const auto t = static_cast<double>(j - i + 1);
    tie_sum += t * t * t - t;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

SignificanceResult welch_anova(const Groups& groups, double alpha) {
  check_alpha(alpha);
  check_groups(groups, true);
  const auto k = static_cast<double>(groups.size());
  Eigen::ArrayXd weight(groups.size());
  Eigen::ArrayXd mean(groups.size());
  Eigen::ArrayXd count(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto i = static_cast<Eigen::Index>(g);
    count[i] = static_cast<double>(groups[g].size());
    mean[i] = groups[g].mean();
    weight[i] = count[i] / sample_variance(groups[g]);
  }
  const double total_weight = weight.sum();
  const double grand = (weight * mean).sum() / total_weight;
  const double between = (weight * (mean - grand).square()).sum() / (k - 1.0);
  const double lambda = ((1.0 - weight / total_weight).square() / (count - 1.0)).sum();
  const double statistic = between / (1.0 + 2.0 * (k - 2.0) * lambda / (k * k - 1.0));
  const double df1 = k - 1.0;
  const double df2 = (k * k - 1.0) / (3.0 * lambda);
  return decide("welch_anova", statistic, df1, df2, dist::f_sf(statistic, df1, df2), alpha);
}

SignificanceResult oneway_anova(const Groups& groups, double alpha) {
  check_alpha(alpha);
  check_groups(groups, false);
  double total = 0.0;
  double n = 0.0;
  for (const auto& g : groups) {
    total += g.sum();
    n += static_cast<double>(g.size());
  }
  const double grand = total / n;
  double between = 0.0;
  double within = 0.0;
  for (const auto& g : groups) {
    const double m = g.mean();
    between += static_cast<double>(g.size()) * (m - grand) * (m - grand);
    within += (g.array() - m).square().sum();
  }
  const auto k = static_cast<double>(groups.size());
  const double df1 = k - 1.0;
  const double df2 = n - k;
  if (!(within > 0.0)) throw DataError("oneway_anova: zero within-group variance");
  const double statistic = (between / df1) / (within / df2);
  return decide("oneway_anova", statistic, df1, df2, dist::f_sf(statistic, df1, df2), alpha);
}

std::vector<SignificanceResult> games_howell(const Groups& groups, double alpha) {
  check_alpha(alpha);
  check_groups(groups, true);
  const int k = static_cast<int>(groups.size());
  std::vector<SignificanceResult> out;
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      const auto& a = groups[static_cast<std::size_t>(i)];
      const auto& b = groups[static_cast<std::size_t>(j)];
      const auto na = static_cast<double>(a.size());
      const auto nb = static_cast<double>(b.size());
      const double sa = sample_variance(a) / na;
      const double sb = sample_variance(b) / nb;
      const double q = std::abs(a.mean() - b.mean()) / std::sqrt(0.5 * (sa + sb));
      const double df = (sa + sb) * (sa + sb) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
      SignificanceResult r =
          decide("games_howell", q, df, 0.0, dist::studentized_range_sf(q, k, df), alpha);
      r.pair = std::pair{i, j};
      out.push_back(std::move(r));
    }
  }
  return out;
}

SignificanceResult wilcoxon_signed_rank(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                        double alpha) {
  check_alpha(alpha);
  if (a.size() != b.size()) throw UsageError("wilcoxon: samples differ in length");
  if (!a.allFinite() || !b.allFinite()) throw DataError("wilcoxon: non-finite input");
  std::vector<double> kept;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (d != 0.0) kept.push_back(d);
  }
  if (kept.empty()) throw DataError("wilcoxon: all paired differences are zero");
  if (kept.size() < 6) throw DataError("wilcoxon: fewer than 6 non-zero differences");
  const Eigen::Map<const Eigen::VectorXd> diff(kept.data(), static_cast<Eigen::Index>(kept.size()));
  double tie_sum = 0.0;
  const Eigen::VectorXd ranks = average_ranks(diff.cwiseAbs(), tie_sum);
  double positive = 0.0;
  double negative = 0.0;
  for (Eigen::Index i = 0; i < diff.size(); ++i) (diff[i] > 0.0 ? positive : negative) += ranks[i];
  const auto n = static_cast<double>(diff.size());
  const double statistic = std::min(positive, negative);
  const double mean = n * (n + 1.0) / 4.0;
  const double variance = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_sum / 48.0;
  if (!(variance > 0.0)) throw NumericError("wilcoxon: zero variance");
  const double z = (statistic - mean) / std::sqrt(variance);
  return decide("wilcoxon_signed_rank", statistic, n, 0.0, 2.0 * dist::normal_sf(std::abs(z)),
                alpha);
}

SignificanceResult levene_test(const Groups& groups, double alpha) {
  check_alpha(alpha);
  check_groups(groups, false);
  Groups deviations;
  deviations.reserve(groups.size());
  for (const auto& g : groups) deviations.push_back((g.array() - median(g)).abs().matrix());
  SignificanceResult r = oneway_anova(deviations, alpha);
  r.test = "levene_brown_forsythe";
  return r;
}

KurtosisResult kurtosis_normality(const Eigen::VectorXd& samples) {
  if (samples.size() < 8) throw UsageError("kurtosis needs at least 8 samples");
  if (!samples.allFinite()) throw DataError("kurtosis: non-finite input");
  const Eigen::ArrayXd centred = samples.array() - samples.mean();
  const double m2 = centred.square().mean();
  const double m4 = centred.square().square().mean();
  if (!(m2 > 0.0)) throw DataError("kurtosis of constant data");
  KurtosisResult r;
  r.kurtosis = m4 / (m2 * m2);
  r.is_gaussian = r.kurtosis >= 2.0 && r.kurtosis <= 4.0;
  return r;
}

ResidualFTest residual_f_test(const Eigen::VectorXd& residuals_a,
                              const Eigen::VectorXd& residuals_b, double alpha) {
  check_alpha(alpha);
  if (!residuals_a.allFinite() || !residuals_b.allFinite()) {
    throw DataError("residual_f_test: non-finite residuals");
  }
  const double va = sample_variance(residuals_a);
  const double vb = sample_variance(residuals_b);
  if (!(va > 0.0) || !(vb > 0.0)) throw DataError("residual_f_test: zero residual variance");
  const bool a_larger = va >= vb;
  const double statistic = a_larger ? va / vb : vb / va;
  const auto df1 = static_cast<double>((a_larger ? residuals_a : residuals_b).size() - 1);
  const auto df2 = static_cast<double>((a_larger ? residuals_b : residuals_a).size() - 1);
  ResidualFTest out;
  out.result = decide("residual_f_test", statistic, df1, df2, dist::f_sf(statistic, df1, df2), alpha);
  out.critical_value = dist::f_quantile(1.0 - alpha, df1, df2);
  if (out.result.significant) out.better = a_larger ? 1 : 0;
  return out;
}

}  // namespace cloudgauge
