#include "rfcpca/evaluation.hpp"

#include "rfcpca/errors.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace rfcpca {
namespace {

std::uint64_t choose2(std::uint64_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

void check_labelings(std::span<const int> a, std::span<const int> b) {
  if (a.empty() || b.empty()) fail(ErrorCode::EmptyIndexSet, "no objects to compare");
  if (a.size() != b.size()) fail(ErrorCode::DimensionMismatch, "labelings differ in length");
}

}  // namespace

std::optional<int> harden(std::span<const double> row, double threshold) {
  if (row.empty()) return std::nullopt;
  std::size_t arg = 0;
  for (std::size_t j = 1; j < row.size(); ++j)
    if (row[j] > row[arg]) arg = j;
  if (row[arg] >= threshold) return static_cast<int>(arg);
  return std::nullopt;
}

std::vector<std::optional<int>> harden_fit(const FitResult& fit, double threshold) {
  const Eigen::Index regular = fit.clusters;
  std::vector<std::optional<int>> out;
  out.reserve(fit.size());
  std::vector<double> row(static_cast<std::size_t>(regular));
  for (Eigen::Index i = 0; i < fit.memberships.rows(); ++i) {
    double sum = 0.0;
    for (Eigen::Index s = 0; s < regular; ++s) {
      row[static_cast<std::size_t>(s)] = fit.memberships(i, s);
      sum += fit.memberships(i, s);
    }
    if (fit.variant == Variant::Noise) {
      if (!(sum > 0.0)) {
        out.emplace_back(std::nullopt);
        continue;
      }
      for (double& v : row) v /= sum;
    }
    out.push_back(harden(row, threshold));
  }
  return out;
}

std::vector<std::size_t> flag_outliers(const FitResult& fit) {
  std::vector<std::size_t> out;
  const auto n = fit.size();
  switch (fit.variant) {
    case Variant::Fcpca:
    case Variant::Exponential:
      for (Eigen::Index i = 0; i < fit.memberships.rows(); ++i)
        if (fit.memberships.row(i).maxCoeff() < kHardenThreshold)
          out.push_back(static_cast<std::size_t>(i));
      break;
    case Variant::Noise: {
      const Eigen::Index noise = fit.memberships.cols() - 1;
      for (Eigen::Index i = 0; i < fit.memberships.rows(); ++i)
        if (fit.memberships(i, noise) >= kNoiseFlagThreshold)
          out.push_back(static_cast<std::size_t>(i));
      break;
    }
    case Variant::Trimmed: {
      std::vector<bool> kept(n, false);
      for (std::size_t i : fit.retained) kept.at(i) = true;
      for (std::size_t i = 0; i < n; ++i)
        if (!kept[i]) out.push_back(i);
      break;
    }
  }
  return out;
}

std::string outlier_rule(Variant variant) {
  switch (variant) {
    case Variant::Fcpca:
    case Variant::Exponential: return "max membership < 0.70";
    case Variant::Noise: return "noise membership >= 0.50";
    case Variant::Trimmed: return "trimmed by the selected alpha";
  }
  return "";
}

PairCounts pair_counts(std::span<const int> a, std::span<const int> b) {
  check_labelings(a, b);
  std::map<std::pair<int, int>, std::uint64_t> joint;
  std::map<int, std::uint64_t> left, right;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++joint[{a[i], b[i]}];
    ++left[a[i]];
    ++right[b[i]];
  }
  std::uint64_t both = 0, in_a = 0, in_b = 0;
  for (const auto& [key, count] : joint) both += choose2(count);
  for (const auto& [key, count] : left) in_a += choose2(count);
  for (const auto& [key, count] : right) in_b += choose2(count);
  PairCounts pc;
  pc.same_same = both;
  pc.same_diff = in_a - both;
  pc.diff_same = in_b - both;
  pc.diff_diff = choose2(a.size()) - both - pc.same_diff - pc.diff_same;
  return pc;
}

double rand_index(std::span<const int> a, std::span<const int> b) {
  const PairCounts pc = pair_counts(a, b);
  if (pc.total() == 0) return 1.0;
  return static_cast<double>(pc.same_same + pc.diff_diff) / static_cast<double>(pc.total());
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  const PairCounts pc = pair_counts(a, b);
  const double pairs = static_cast<double>(pc.total());
  if (pairs == 0.0) return 1.0;
  const double index = static_cast<double>(pc.same_same);
  const double sum_a = static_cast<double>(pc.same_same + pc.same_diff);
  const double sum_b = static_cast<double>(pc.same_same + pc.diff_same);
  const double expected = sum_a * sum_b / pairs;
  const double maximum = 0.5 * (sum_a + sum_b);
  // Both partitions trivial (all-in-one or all singletons) and equal.
  if (maximum == expected) return 1.0;
  return (index - expected) / (maximum - expected);
}

std::optional<double> outlier_recall(std::span<const std::size_t> flagged,
                                     std::span<const std::size_t> truth) {
  if (truth.empty()) return std::nullopt;
  const std::set<std::size_t> f(flagged.begin(), flagged.end());
  const std::set<std::size_t> t(truth.begin(), truth.end());
  std::size_t hits = 0;
  for (std::size_t i : t)
    if (f.count(i)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(t.size());
}

EvalReport evaluate_fit(const FitResult& fit, std::span<const int> truth_labels,
                        std::span<const std::size_t> true_outliers) {
  const std::size_t n = fit.size();
  if (truth_labels.size() != n)
    fail(ErrorCode::DimensionMismatch, "truth labels do not match the fitted objects");
  EvalReport rep;
  rep.variant = fit.variant;
  rep.rule = outlier_rule(fit.variant);
  rep.flagged = flag_outliers(fit);

  const auto hard = harden_fit(fit);
  std::vector<bool> is_flagged(n, false);
  for (std::size_t i : rep.flagged) is_flagged[i] = true;
  const std::set<std::size_t> truth(true_outliers.begin(), true_outliers.end());
  for (std::size_t i : rep.flagged)
    if (!truth.count(i)) ++rep.false_positives;

  std::vector<int> expected, predicted;
  for (std::size_t i = 0; i < n; ++i) {
    if (!hard[i]) rep.unassigned.push_back(i);
    if (is_flagged[i]) continue;
    rep.scored.push_back(i);
    expected.push_back(truth_labels[i]);
    // Singleton label: never shares a cluster with anything.
    predicted.push_back(hard[i] ? *hard[i] : fit.clusters + static_cast<int>(i));
  }
  if (expected.size() >= 2) {
    rep.acc_rand = rand_index(expected, predicted);
    rep.acc_adjusted_rand = adjusted_rand_index(expected, predicted);
  }
  rep.outlier_recall = outlier_recall(rep.flagged, true_outliers);
  return rep;
}

}  // namespace rfcpca
