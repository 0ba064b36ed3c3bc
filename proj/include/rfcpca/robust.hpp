#pragma once

#include "rfcpca/fcpca.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace rfcpca {

// ---------------------------------------------------------------------------
// Exponential loss (RFCPCA-E)
// ---------------------------------------------------------------------------

/// beta = 1 / mean_i(min_s r_is). Throws DegenerateScale when that mean is
/// below 1e-300.
double estimate_beta(const Eigen::MatrixXd& errors);

/// Per-term loss 1 - exp(-beta r), computed without cancellation.
double exponential_loss(double r, double beta) noexcept;

Eigen::MatrixXd update_memberships_exponential(const Eigen::MatrixXd& errors, double m,
                                               double beta);

double objective_exponential(const Eigen::MatrixXd& errors, const Eigen::MatrixXd& u,
                             double m, double beta);

FitResult fit_rfcpca_e(const FeatureSet& features, const FitOptions& opts,
                       const ExponentialOptions& exp = {});
FitResult fit_rfcpca_e(const MtsDataset& data, const FitOptions& opts,
                       const ExponentialOptions& exp = {}, int max_lag = 2);

// ---------------------------------------------------------------------------
// Noise cluster (RFCPCA-N)
// ---------------------------------------------------------------------------

/// errors: N x (S - 1) over the regular clusters. Returns N x S with the noise
/// cluster last.
Eigen::MatrixXd update_memberships_noise(const Eigen::MatrixXd& errors, double m,
                                         double delta2);

/// delta^2 = lambda / (N (S - 1)) * sum of all regular-cluster errors.
double update_noise_distance(const Eigen::MatrixXd& errors, double lambda);

/// Regular-cluster loss plus delta^2 * u_iS^m.
double objective_noise(const Eigen::MatrixXd& errors, const Eigen::MatrixXd& u, double m,
                       double delta2);

FitResult fit_rfcpca_n(const FeatureSet& features, const FitOptions& opts,
                       const NoiseOptions& noise);
FitResult fit_rfcpca_n(const MtsDataset& data, const FitOptions& opts,
                       const NoiseOptions& noise, int max_lag = 2);

/// Objects whose noise membership reaches `threshold`.
std::vector<std::size_t> noise_outliers(const FitResult& fit, double threshold = 0.5);

struct ElbowPoint {
  double lambda = 0.0;
  double outlier_fraction = 0.0;
};

struct ElbowResult {
  double lambda = 0.0;
  std::vector<ElbowPoint> curve;
  /// Set when the curve is flat; lambda is then the largest grid value.
  bool no_elbow = false;
  /// Grid positions k where the fraction at k+1 dropped below the one at k.
  std::vector<std::size_t> monotonicity_violations;
};

/// 1, 1/2, 1/4, ... with `halvings` halvings.
std::vector<double> default_lambda_grid(int halvings = 20);

/// Pure elbow rule on a recorded curve: the grid value immediately before the
/// largest single-step increase in outlier fraction.
ElbowResult locate_elbow(std::vector<ElbowPoint> curve);

/// Fits RFCPCA-N at every grid value (all with the same initialization seed)
/// and applies locate_elbow. Throws InvalidArgument unless the grid is
/// strictly decreasing with at least three values.
ElbowResult select_lambda_elbow(const FeatureSet& features, const FitOptions& opts,
                                std::span<const double> lambda_grid,
                                NoiseSchedule schedule = NoiseSchedule::EveryIteration);

// ---------------------------------------------------------------------------
// Trimming (RFCPCA-T)
// ---------------------------------------------------------------------------

struct TrimConfig {
  double alpha = 0.0;
  std::size_t retained_count = 0;
  std::vector<std::size_t> retained;  // ascending
};

/// floor(N (1 - alpha)); a 1e-9 guard absorbs products such as 20 * 0.7.
std::size_t retained_count(std::size_t n, double alpha);

/// Keeps the H smallest losses, ties to the lower index. Throws
/// TooFewRetained when H < min_retained.
TrimConfig select_trim_set(std::span<const double> per_object_loss, double alpha,
                           std::size_t min_retained = 1);

/// Per-object ranking loss used by the trimming step.
std::vector<double> trimming_losses(const Eigen::MatrixXd& errors, const Eigen::MatrixXd& u,
                                    double m, TrimLoss loss);

/// Objective restricted to the retained set.
double objective_trimmed(const Eigen::MatrixXd& errors, const Eigen::MatrixXd& u, double m,
                         std::span<const std::size_t> retained);

FitResult fit_rfcpca_t(const FeatureSet& features, const FitOptions& opts,
                       const TrimOptions& trim);
FitResult fit_rfcpca_t(const MtsDataset& data, const FitOptions& opts,
                       const TrimOptions& trim, int max_lag = 2);

}  // namespace rfcpca
