// SPDX-FileCopyrightText: 2026 The cloudgauge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CLOUDGAUGE_STAT_EVAL_HPP
#define CLOUDGAUGE_STAT_EVAL_HPP

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cloudgauge/error.hpp"

namespace cloudgauge {

struct ScoreEntry {
  std::string stimulus_id;
  double objective_value = 0.0;
  double mos = 0.0;
  std::string codec;
  std::string rendering;
  std::string quality;
  std::string content;
};

/// Objective/subjective score pairs. MOS is on the 1..5 impairment scale and
/// stimulus ids are unique.
class ScorePairSet {
 public:
  ScorePairSet() = default;
  explicit ScorePairSet(std::vector<ScoreEntry> entries);
  /// Untagged pairs with generated ids.
  static ScorePairSet from_values(const Eigen::VectorXd& objective, const Eigen::VectorXd& mos);

  Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(entries_.size()); }
  const std::vector<ScoreEntry>& entries() const noexcept { return entries_; }
  Eigen::VectorXd objective() const;
  Eigen::VectorXd mos() const;

 private:
  std::vector<ScoreEntry> entries_;
};

/// mos ~ b2 + (b1 - b2) / (1 + exp(-(x - b3) / |b4|)).
template <typename Scalar>
Scalar logistic4(Scalar x, const Eigen::Matrix<Scalar, 4, 1>& beta) {
  using std::abs;
  using std::exp;
  return beta[1] + (beta[0] - beta[1]) / (Scalar(1) + exp(-(x - beta[2]) / abs(beta[3])));
}

struct LogisticFit {
  Eigen::Vector4d beta = Eigen::Vector4d::Zero();
  Eigen::VectorXd predicted;
  /// mos - predicted, in entry order.
  Eigen::VectorXd residuals;
  double rmse = 0.0;
  int iterations = 0;
  bool converged = false;

  double predict(double x) const { return logistic4(x, beta); }
  template <typename Derived>
  Eigen::VectorXd predict(const Eigen::DenseBase<Derived>& x) const {
    return x.derived().unaryExpr([this](double v) { return predict(v); });
  }
};

struct LogisticOptions {
  int max_iterations = 500;
  double tolerance = 1e-10;
};

LogisticFit fit_logistic(const ScorePairSet& pairs, const LogisticOptions& options = {});
LogisticFit fit_logistic(const Eigen::VectorXd& objective, const Eigen::VectorXd& mos,
                         const LogisticOptions& options = {});

/// Sample Pearson correlation.
template <typename DerivedX, typename DerivedY>
double plcc(const Eigen::DenseBase<DerivedX>& x, const Eigen::DenseBase<DerivedY>& y) {
  if (x.size() != y.size()) throw UsageError("plcc: inputs differ in length");
  if (x.size() < 3) throw UsageError("plcc: needs at least 3 values");
  const Eigen::ArrayXd a = x.derived().template cast<double>().array() -
                           x.derived().template cast<double>().mean();
  const Eigen::ArrayXd b = y.derived().template cast<double>().array() -
                           y.derived().template cast<double>().mean();
  const double saa = a.square().sum();
  const double sbb = b.square().sum();
  if (!(saa > 0.0) || !(sbb > 0.0)) throw NumericError("plcc: constant input");
  return std::clamp((a * b).sum() / std::sqrt(saa * sbb), -1.0, 1.0);
}

struct SignificanceResult {
  std::string test;
  double statistic = 0.0;
  double df1 = 0.0;
  /// Zero for tests with a single degree-of-freedom parameter or none.
  double df2 = 0.0;
  double p_value = 1.0;
  double alpha = 0.05;
  bool significant = false;
  /// Group labels or indices the result refers to, when pairwise.
  std::optional<std::pair<int, int>> pair;
};

using Groups = std::vector<Eigen::VectorXd>;

SignificanceResult welch_anova(const Groups& groups, double alpha = 0.05);
/// Classical equal-variance one-way ANOVA.
SignificanceResult oneway_anova(const Groups& groups, double alpha = 0.05);
/// One result per unordered pair (i < j), in lexicographic pair order.
std::vector<SignificanceResult> games_howell(const Groups& groups, double alpha = 0.05);
SignificanceResult wilcoxon_signed_rank(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                        double alpha = 0.05);
/// Brown-Forsythe (median-centred) variant.
SignificanceResult levene_test(const Groups& groups, double alpha = 0.05);

struct KurtosisResult {
  double kurtosis = 0.0;
  bool is_gaussian = false;
};
/// Plain m4 / m2^2 (3 for a normal sample); gaussian iff in [2, 4].
KurtosisResult kurtosis_normality(const Eigen::VectorXd& samples);

struct ResidualFTest {
  SignificanceResult result;
  /// Upper alpha quantile of F(df1, df2).
  double critical_value = 0.0;
  /// 0 or 1 when the test rejects: the input with smaller residual variance.
  std::optional<int> better;
};

/// One-tailed F-test on residual variances, larger over smaller.
ResidualFTest residual_f_test(const Eigen::VectorXd& residuals_a,
                              const Eigen::VectorXd& residuals_b, double alpha = 0.2);

struct MetricEvaluation {
  LogisticFit fit;
  double plcc_percent = 0.0;
};

MetricEvaluation evaluate_metric(const ScorePairSet& pairs, const LogisticOptions& options = {});

/// Unbiased sample variance.
double sample_variance(const Eigen::VectorXd& values);
double median(Eigen::VectorXd values);

}  // namespace cloudgauge

#endif  // CLOUDGAUGE_STAT_EVAL_HPP
