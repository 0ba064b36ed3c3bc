#pragma once

#include "rfcpca/covariance.hpp"
#include "rfcpca/dataset.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace rfcpca {

enum class Variant { Fcpca, Exponential, Noise, Trimmed };

std::string_view variant_name(Variant v) noexcept;
/// Accepts "fcpca", "e", "n", "t" and the long forms "rfcpca-e" etc.
std::optional<Variant> parse_variant(std::string_view text) noexcept;

/// Cycle: the objective trace repeated with a period of 2..kCycleWindow, so
/// the fit stops early without being marked converged.
enum class StopReason { Tolerance, Patience, Cycle, MaxIterations };
inline constexpr int kCycleWindow = 10;
std::string_view stop_reason_name(StopReason r) noexcept;

enum class NoiseSchedule { Once, EveryIteration };

/// How RFCPCA-T ranks objects for trimming.
enum class TrimLoss { WeightedObjective, MinError };

/// How cluster subspaces are refit between membership updates.
///
/// Adaptive averages the block covariances and re-applies the variance rule
/// every iteration. Descent averages the Gram matrices E^T E, which is the
/// exact minimizer of the weighted residual, and keeps each rank fixed after
/// the first subspace step, so the objective can never increase.
enum class SubspaceRule { Adaptive, Descent };
std::string_view subspace_rule_name(SubspaceRule r) noexcept;
std::optional<SubspaceRule> parse_subspace_rule(std::string_view text) noexcept;

/// Ranks per cluster and lag: ranks[s][l - 1].
using RankTable = std::vector<std::vector<Eigen::Index>>;
RankTable subspace_ranks(const ClusterSubspaces& subspaces);

/// Options shared by every variant.
struct FitOptions {
  int clusters = 2;  // substantive clusters; the noise cluster is extra
  double fuzziness = 2.0;
  double variance = 0.95;
  std::uint64_t seed = 0;
  int max_iter = 1000;
  double tol = 1e-3;
  SubspaceRule subspace_rule = SubspaceRule::Adaptive;
};

struct ExponentialOptions {
  /// When unset, beta is estimated once from the first iteration's errors.
  std::optional<double> beta;
  int patience = 5;
};

struct NoiseOptions {
  double lambda = 1.0;
  NoiseSchedule schedule = NoiseSchedule::EveryIteration;
};

struct TrimOptions {
  double alpha = 0.0;
  TrimLoss loss = TrimLoss::WeightedObjective;
};

/// A converged (or iteration-capped) model.
///
/// `memberships` is N x S for FCPCA/E/T and N x (S + 1) for the noise variant,
/// whose last column is the noise cluster. `errors` always covers the
/// substantive clusters only.
struct FitResult {
  Variant variant = Variant::Fcpca;
  int clusters = 0;
  double fuzziness = 2.0;
  double variance = 0.95;
  int max_lag = 2;
  std::uint64_t seed = 0;

  Eigen::MatrixXd memberships;
  ClusterSubspaces subspaces;
  Eigen::MatrixXd errors;
  std::vector<double> objective_trace;
  int iterations = 0;
  bool converged = false;
  StopReason stop = StopReason::MaxIterations;

  std::optional<double> beta;
  std::optional<double> delta2;
  std::optional<double> lambda;
  std::optional<double> alpha;
  std::vector<std::size_t> retained;  // trimmed variant: sorted retained indices

  double objective() const { return objective_trace.back(); }
  std::size_t size() const noexcept { return static_cast<std::size_t>(memberships.rows()); }
};

/// Rows drawn from the flat simplex (S i.i.d. uniforms normalized by their
/// sum). Throws InvalidShape unless 1 <= S <= N.
Eigen::MatrixXd init_memberships(Eigen::Index n, Eigen::Index s, std::uint64_t seed);

/// u_is = [sum_s' (r_is / r_is')^(1/(m-1))]^-1 with the zero-error limit:
/// mass is split equally among the clusters with r_is == 0.
Eigen::MatrixXd update_memberships_fcpca(const Eigen::MatrixXd& errors, double m);

/// Subspaces from membership weights u^m.
ClusterSubspaces update_subspaces(const FeatureSet& features, const Eigen::MatrixXd& u,
                                  double m, double variance);

/// Subspaces from a precomputed N x S weight matrix. Throws EmptyClusterError
/// naming the cluster whose column sums to less than 1e-12. Under the descent
/// rule a non-null `ranks` fixes every rank instead of the variance rule.
ClusterSubspaces subspaces_from_weights(const FeatureSet& features,
                                        const Eigen::MatrixXd& weights, double variance,
                                        SubspaceRule rule = SubspaceRule::Adaptive,
                                        const RankTable* ranks = nullptr);

double objective_fcpca(const Eigen::MatrixXd& errors, const Eigen::MatrixXd& u, double m);

/// True when every entry is in [0, 1] and each row sums to 1 within `tol`.
bool is_row_stochastic(const Eigen::MatrixXd& u, double tol = 1e-9);

FitResult fit_fcpca(const FeatureSet& features, const FitOptions& opts);
FitResult fit_fcpca(const MtsDataset& data, const FitOptions& opts, int max_lag = 2);

namespace detail {

/// The shared alternating optimizer behind every variant.
struct VariantConfig {
  Variant variant = Variant::Fcpca;
  ExponentialOptions exponential;
  NoiseOptions noise;
  TrimOptions trim;
};

FitResult run_alternating(const FeatureSet& features, const FitOptions& opts,
                          const VariantConfig& config);

/// Softmax form of the fuzzy update for one row of positive "distances".
/// Returns memberships over the same entries.
void fuzzy_row(const double* dist, Eigen::Index count, double m, double* out);

}  // namespace detail

}  // namespace rfcpca
