#include "rfcpca/robust.hpp"

#include "rfcpca/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace rfcpca {

double estimate_beta(const Eigen::MatrixXd& errors) {
  if (errors.rows() == 0 || errors.cols() == 0)
    fail(ErrorCode::InvalidShape, "empty error matrix");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < errors.rows(); ++i) sum += errors.row(i).minCoeff();
  const double mean = sum / static_cast<double>(errors.rows());
  if (!(mean >= 1e-300))
    fail(ErrorCode::DegenerateScale, "every series is reconstructed exactly");
  return 1.0 / mean;
}

double exponential_loss(double r, double beta) noexcept { return -std::expm1(-beta * r); }

Eigen::MatrixXd update_memberships_exponential(const Eigen::MatrixXd& errors, double m,
                                               double beta) {
  if (!(m > 1.0)) fail(ErrorCode::InvalidArgument, "fuzziness m must exceed 1");
  if (!(beta > 0.0)) fail(ErrorCode::InvalidArgument, "beta must be positive");
  const Eigen::Index s = errors.cols();
  Eigen::MatrixXd u(errors.rows(), s);
  std::vector<double> loss(static_cast<std::size_t>(s)), out(static_cast<std::size_t>(s));
  for (Eigen::Index i = 0; i < errors.rows(); ++i) {
    for (Eigen::Index j = 0; j < s; ++j)
      loss[static_cast<std::size_t>(j)] = exponential_loss(errors(i, j), beta);
    detail::fuzzy_row(loss.data(), s, m, out.data());
    for (Eigen::Index j = 0; j < s; ++j) u(i, j) = out[static_cast<std::size_t>(j)];
  }
  return u;
}

double objective_exponential(const Eigen::MatrixXd& errors, const Eigen::MatrixXd& u,
                             double m, double beta) {
  if (errors.rows() != u.rows() || errors.cols() > u.cols())
    fail(ErrorCode::DimensionMismatch, "errors and memberships disagree in shape");
  double total = 0.0;
  for (Eigen::Index i = 0; i < errors.rows(); ++i)
    for (Eigen::Index s = 0; s < errors.cols(); ++s)
      total += std::pow(u(i, s), m) * exponential_loss(errors(i, s), beta);
  return total;
}

FitResult fit_rfcpca_e(const FeatureSet& features, const FitOptions& opts,
                       const ExponentialOptions& exp) {
  detail::VariantConfig config;
  config.variant = Variant::Exponential;
  config.exponential = exp;
  return detail::run_alternating(features, opts, config);
}

FitResult fit_rfcpca_e(const MtsDataset& data, const FitOptions& opts,
                       const ExponentialOptions& exp, int max_lag) {
  return fit_rfcpca_e(build_features(data, max_lag), opts, exp);
}

Eigen::MatrixXd update_memberships_noise(const Eigen::MatrixXd& errors, double m,
                                         double delta2) {
  if (!(m > 1.0)) fail(ErrorCode::InvalidArgument, "fuzziness m must exceed 1");
  if (!(delta2 > 0.0)) fail(ErrorCode::InvalidArgument, "noise distance must be positive");
  const Eigen::Index regular = errors.cols();
  if (regular < 1) fail(ErrorCode::InvalidShape, "need at least one regular cluster");
  Eigen::MatrixXd u(errors.rows(), regular + 1);
  std::vector<double> dist(static_cast<std::size_t>(regular + 1));
  std::vector<double> out(dist.size());
  for (Eigen::Index i = 0; i < errors.rows(); ++i) {
    for (Eigen::Index j = 0; j < regular; ++j)
      dist[static_cast<std::size_t>(j)] = errors(i, j);
    dist.back() = delta2;
    detail::fuzzy_row(dist.data(), regular + 1, m, out.data());
    double regular_mass = 0.0;
    for (Eigen::Index j = 0; j < regular; ++j) {
      u(i, j) = out[static_cast<std::size_t>(j)];
      regular_mass += u(i, j);
    }
    u(i, regular) = std::clamp(1.0 - regular_mass, 0.0, 1.0);
  }
  return u;
}

double update_noise_distance(const Eigen::MatrixXd& errors, double lambda) {
  if (!(lambda > 0.0)) fail(ErrorCode::InvalidArgument, "lambda must be positive");
  if (errors.size() == 0) fail(ErrorCode::InvalidShape, "empty error matrix");
  const double sum = errors.sum();
  if (!(sum > 0.0)) fail(ErrorCode::DegenerateScale, "all regular-cluster errors are zero");
  return lambda * sum / static_cast<double>(errors.size());
}

double objective_noise(const Eigen::MatrixXd& errors, const Eigen::MatrixXd& u, double m,
                       double delta2) {
  const Eigen::Index regular = errors.cols();
  if (errors.rows() != u.rows() || u.cols() != regular + 1)
    fail(ErrorCode::DimensionMismatch, "noise memberships need S - 1 error columns");
  double total = 0.0;
  for (Eigen::Index i = 0; i < errors.rows(); ++i) {
    for (Eigen::Index s = 0; s < regular; ++s) total += std::pow(u(i, s), m) * errors(i, s);
    total += delta2 * std::pow(u(i, regular), m);
  }
  return total;
}

FitResult fit_rfcpca_n(const FeatureSet& features, const FitOptions& opts,
                       const NoiseOptions& noise) {
  detail::VariantConfig config;
  config.variant = Variant::Noise;
  config.noise = noise;
  return detail::run_alternating(features, opts, config);
}

FitResult fit_rfcpca_n(const MtsDataset& data, const FitOptions& opts,
                       const NoiseOptions& noise, int max_lag) {
  return fit_rfcpca_n(build_features(data, max_lag), opts, noise);
}

std::vector<std::size_t> noise_outliers(const FitResult& fit, double threshold) {
  std::vector<std::size_t> out;
  if (fit.variant != Variant::Noise) return out;
  const Eigen::Index last = fit.memberships.cols() - 1;
  for (Eigen::Index i = 0; i < fit.memberships.rows(); ++i)
    if (fit.memberships(i, last) >= threshold) out.push_back(static_cast<std::size_t>(i));
  return out;
}

std::vector<double> default_lambda_grid(int halvings) {
  std::vector<double> grid;
  double value = 1.0;
  for (int k = 0; k <= halvings; ++k) {
    grid.push_back(value);
    value *= 0.5;
  }
  return grid;
}

ElbowResult locate_elbow(std::vector<ElbowPoint> curve) {
  if (curve.size() < 3) fail(ErrorCode::InvalidArgument, "elbow needs at least three points");
  ElbowResult out;
  double jump = 0.0;
  std::size_t at = 0;
  for (std::size_t k = 0; k + 1 < curve.size(); ++k) {
    const double step = curve[k + 1].outlier_fraction - curve[k].outlier_fraction;
    if (step < 0.0) out.monotonicity_violations.push_back(k);
    if (step > jump) {
      jump = step;
      at = k;
    }
  }
  if (jump <= 0.0) {
    out.no_elbow = true;
    out.lambda = curve.front().lambda;
  } else {
    out.lambda = curve[at].lambda;
  }
  out.curve = std::move(curve);
  return out;
}

ElbowResult select_lambda_elbow(const FeatureSet& features, const FitOptions& opts,
                                std::span<const double> lambda_grid, NoiseSchedule schedule) {
  if (lambda_grid.size() < 3)
    fail(ErrorCode::InvalidArgument, "lambda grid needs at least three values");
  for (std::size_t k = 0; k < lambda_grid.size(); ++k) {
    if (!(lambda_grid[k] > 0.0)) fail(ErrorCode::InvalidArgument, "lambda must be positive");
    if (k > 0 && !(lambda_grid[k] < lambda_grid[k - 1]))
      fail(ErrorCode::InvalidArgument, "lambda grid must be strictly decreasing");
  }
  std::vector<ElbowPoint> curve;
  curve.reserve(lambda_grid.size());
  for (double lambda : lambda_grid) {
    const FitResult fit = fit_rfcpca_n(features, opts, NoiseOptions{lambda, schedule});
    const double fraction = static_cast<double>(noise_outliers(fit).size()) /
                            static_cast<double>(fit.size());
    curve.push_back({lambda, fraction});
  }
  return locate_elbow(std::move(curve));
}

std::size_t retained_count(std::size_t n, double alpha) {
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) * (1.0 - alpha) + 1e-9));
}

TrimConfig select_trim_set(std::span<const double> per_object_loss, double alpha,
                           std::size_t min_retained) {
  if (!(alpha >= 0.0 && alpha < 1.0)) fail(ErrorCode::InvalidArgument, "alpha must lie in [0, 1)");
  const std::size_t n = per_object_loss.size();
  TrimConfig out;
  out.alpha = alpha;
  out.retained_count = retained_count(n, alpha);
  if (out.retained_count < min_retained || out.retained_count == 0)
    fail(ErrorCode::TooFewRetained, "retaining " + std::to_string(out.retained_count) +
                                        " of " + std::to_string(n) + " objects");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return per_object_loss[a] < per_object_loss[b];
  });
  order.resize(out.retained_count);
  std::sort(order.begin(), order.end());
  out.retained = std::move(order);
  return out;
}

std::vector<double> trimming_losses(const Eigen::MatrixXd& errors, const Eigen::MatrixXd& u,
                                    double m, TrimLoss loss) {
  std::vector<double> out(static_cast<std::size_t>(errors.rows()));
  for (Eigen::Index i = 0; i < errors.rows(); ++i) {
    double value = 0.0;
    if (loss == TrimLoss::MinError) {
      value = errors.row(i).minCoeff();
    } else {
      for (Eigen::Index s = 0; s < errors.cols(); ++s)
        value += std::pow(u(i, s), m) * errors(i, s);
    }
    out[static_cast<std::size_t>(i)] = value;
  }
  return out;
}

double objective_trimmed(const Eigen::MatrixXd& errors, const Eigen::MatrixXd& u, double m,
                         std::span<const std::size_t> retained) {
  if (errors.rows() != u.rows() || errors.cols() > u.cols())
    fail(ErrorCode::DimensionMismatch, "errors and memberships disagree in shape");
  double total = 0.0;
  for (std::size_t idx : retained) {
    const auto i = static_cast<Eigen::Index>(idx);
    for (Eigen::Index s = 0; s < errors.cols(); ++s)
      total += std::pow(u(i, s), m) * errors(i, s);
  }
  return total;
}

FitResult fit_rfcpca_t(const FeatureSet& features, const FitOptions& opts,
                       const TrimOptions& trim) {
  detail::VariantConfig config;
  config.variant = Variant::Trimmed;
  config.trim = trim;
  return detail::run_alternating(features, opts, config);
}

FitResult fit_rfcpca_t(const MtsDataset& data, const FitOptions& opts,
                       const TrimOptions& trim, int max_lag) {
  return fit_rfcpca_t(build_features(data, max_lag), opts, trim);
}

}  // namespace rfcpca
