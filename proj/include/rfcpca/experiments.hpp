#pragma once

#include "rfcpca/evaluation.hpp"
#include "rfcpca/fcpca.hpp"
#include "rfcpca/selection.hpp"
#include "rfcpca/simgen.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace rfcpca {

/// One cell of a benchmark table: a contamination model at fixed (p, T).
struct ExperimentSetting {
  Contamination contamination = Contamination::Burst;
  std::size_t per_group = 10;
  Eigen::Index channels = 32;
  Eigen::Index length = 400;
  std::optional<std::pair<Eigen::Index, Eigen::Index>> length_range;
  double dominance = 0.85;
  double split_exponent = 3.0;
  BurstConfig burst;
  BlinkConfig blink;
};

/// How every variant is tuned inside one replication. The experiments fix
/// S = 2 and select m (and alpha for trimming) by CVI; the noise variant picks
/// lambda by the elbow rule at `elbow_fuzziness` first.
struct ReplicationOptions {
  std::vector<Variant> variants{Variant::Fcpca, Variant::Exponential, Variant::Noise,
                                Variant::Trimmed};
  std::vector<int> clusters{2};
  std::vector<double> fuzziness{1.1, 1.2, 1.4, 1.6, 1.8, 2.0, 2.2, 2.5};
  std::vector<double> alphas{0.1, 0.2, 0.3, 0.4, 0.5};
  double elbow_fuzziness = 2.0;
  int lambda_halvings = 20;
  SearchOptions search;
};

struct VariantOutcome {
  Variant variant = Variant::Fcpca;
  std::string error;  // set when selection failed outright
  std::optional<double> acc;
  std::optional<double> ari;
  std::optional<double> out;
  double fuzziness = 0.0;
  std::optional<double> alpha;
  std::optional<double> lambda;
  std::size_t flagged = 0;
  std::size_t false_positives = 0;
};

struct ReplicationResult {
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> contaminated;
  std::vector<VariantOutcome> outcomes;  // one per requested variant, in order
};

/// Simulates one dataset for `setting` and scores every variant on it.
ReplicationResult run_replication(const ExperimentSetting& setting,
                                  const ReplicationOptions& opts, std::uint64_t seed,
                                  std::size_t replication = 0);

/// Contaminated dataset of one replication (ground truth in labels/outliers).
SimulatedData simulate_setting(const ExperimentSetting& setting, std::uint64_t seed);

struct VariantSummary {
  Variant variant = Variant::Fcpca;
  std::size_t runs = 0;
  std::size_t failures = 0;
  std::optional<double> acc;  // means over runs where the metric is defined
  std::optional<double> ari;
  std::optional<double> out;
  std::optional<double> alpha;
  std::optional<double> fuzziness;
  std::optional<double> lambda;
};

struct SettingSummary {
  ExperimentSetting setting;
  std::vector<ReplicationResult> replications;
  std::vector<VariantSummary> variants;
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// R replications with seeds derive_seed(seed, setting_index, r).
SettingSummary run_setting(const ExperimentSetting& setting, const ReplicationOptions& opts,
                           std::size_t replications, std::uint64_t seed,
                           std::size_t setting_index = 0, const ProgressFn& progress = {});

std::vector<VariantSummary> summarize(const std::vector<ReplicationResult>& reps,
                                      const std::vector<Variant>& variants);

/// Table layouts: table1 = burst at T in {400, 1000}, table4 = eye-blink with
/// T_i in [400, 2000]; p in {32, 64}, plus p = 128 when `full`.
std::optional<std::vector<ExperimentSetting>> named_experiment(const std::string& name,
                                                               bool full);

/// One row per (setting, variant).
std::string summary_csv(const std::string& experiment, const std::vector<SettingSummary>& rows);

}  // namespace rfcpca
