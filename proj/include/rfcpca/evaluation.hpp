#pragma once

#include "rfcpca/fcpca.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rfcpca {

inline constexpr double kHardenThreshold = 0.70;
inline constexpr double kNoiseFlagThreshold = 0.50;

/// argmax of the row if it reaches `threshold`, else nullopt. Ties go to the
/// lower cluster index.
std::optional<int> harden(std::span<const double> row, double threshold = kHardenThreshold);

/// Hard labels for a fit. Noise-variant rows are renormalized over the
/// regular clusters before thresholding.
std::vector<std::optional<int>> harden_fit(const FitResult& fit,
                                           double threshold = kHardenThreshold);

/// Per-variant outlier rule:
///   FCPCA / E : max_s u_is < 0.70
///   N         : u_iS >= 0.50
///   T         : complement of the retained set
std::vector<std::size_t> flag_outliers(const FitResult& fit);

/// Short description of the rule applied by flag_outliers.
std::string outlier_rule(Variant variant);

/// Pair counts over all unordered pairs of a common index set.
struct PairCounts {
  std::uint64_t same_same = 0;  // together in both labelings
  std::uint64_t same_diff = 0;  // together in a only
  std::uint64_t diff_same = 0;  // together in b only
  std::uint64_t diff_diff = 0;  // apart in both

  std::uint64_t total() const noexcept { return same_same + same_diff + diff_same + diff_diff; }
};

PairCounts pair_counts(std::span<const int> a, std::span<const int> b);

/// Throws EmptyIndexSet if the labelings are empty and DimensionMismatch if
/// their lengths differ. With a single object there are no pairs and the
/// index is reported as 1.
double rand_index(std::span<const int> a, std::span<const int> b);
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

/// |flagged ∩ truth| / |truth|; nullopt when truth is empty.
std::optional<double> outlier_recall(std::span<const std::size_t> flagged,
                                     std::span<const std::size_t> truth);

struct EvalReport {
  Variant variant = Variant::Fcpca;
  std::string rule;
  std::optional<double> acc_rand;           // nullopt with fewer than 2 scored objects
  std::optional<double> acc_adjusted_rand;
  std::optional<double> outlier_recall;     // nullopt without true outliers
  std::vector<std::size_t> flagged;
  std::vector<std::size_t> unassigned;      // no cluster reached 0.70
  std::vector<std::size_t> scored;          // not flagged
  std::size_t false_positives = 0;          // flagged but not a true outlier
};

/// Scores a fit against ground truth. Flagged objects are removed; scored
/// objects without a dominant cluster each get a singleton label, so they
/// count as misclassified.
EvalReport evaluate_fit(const FitResult& fit, std::span<const int> truth_labels,
                        std::span<const std::size_t> true_outliers);

}  // namespace rfcpca
