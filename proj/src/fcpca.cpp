#include "rfcpca/fcpca.hpp"

#include "rfcpca/errors.hpp"
#include "rfcpca/rng.hpp"
#include "rfcpca/robust.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace rfcpca {

std::string_view variant_name(Variant v) noexcept {
  switch (v) {
    case Variant::Fcpca: return "fcpca";
    case Variant::Exponential: return "rfcpca-e";
    case Variant::Noise: return "rfcpca-n";
    case Variant::Trimmed: return "rfcpca-t";
  }
  return "unknown";
}

std::optional<Variant> parse_variant(std::string_view text) noexcept {
  if (text == "fcpca") return Variant::Fcpca;
  if (text == "e" || text == "rfcpca-e") return Variant::Exponential;
  if (text == "n" || text == "rfcpca-n") return Variant::Noise;
  if (text == "t" || text == "rfcpca-t") return Variant::Trimmed;
  return std::nullopt;
}

std::string_view stop_reason_name(StopReason r) noexcept {
  switch (r) {
    case StopReason::Tolerance: return "tolerance";
    case StopReason::Patience: return "patience";
    case StopReason::Cycle: return "cycle";
    case StopReason::MaxIterations: return "max_iterations";
  }
  return "unknown";
}

std::string_view subspace_rule_name(SubspaceRule r) noexcept {
  return r == SubspaceRule::Descent ? "descent" : "adaptive";
}

std::optional<SubspaceRule> parse_subspace_rule(std::string_view text) noexcept {
  if (text == "adaptive") return SubspaceRule::Adaptive;
  if (text == "descent") return SubspaceRule::Descent;
  return std::nullopt;
}

RankTable subspace_ranks(const ClusterSubspaces& subspaces) {
  RankTable out;
  for (const auto& lags : subspaces.clusters) {
    std::vector<Eigen::Index> row;
    for (const auto& sub : lags) row.push_back(sub.rank());
    out.push_back(std::move(row));
  }
  return out;
}

Eigen::MatrixXd init_memberships(Eigen::Index n, Eigen::Index s, std::uint64_t seed) {
  if (s < 1 || s > n)
    fail(ErrorCode::InvalidShape, "need 1 <= S <= N, got S=" + std::to_string(s) +
                                      " N=" + std::to_string(n));
  Rng rng(seed);
  Eigen::MatrixXd u(n, s);
  for (Eigen::Index i = 0; i < n; ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < s; ++j) {
      u(i, j) = 1.0 - rng.uniform();  // (0, 1]
      sum += u(i, j);
    }
    u.row(i) /= sum;
  }
  return u;
}

namespace detail {

void fuzzy_row(const double* dist, Eigen::Index count, double m, double* out) {
  Eigen::Index zeros = 0;
  for (Eigen::Index j = 0; j < count; ++j)
    if (!(dist[j] > 0.0)) ++zeros;
  if (zeros > 0) {
    const double share = 1.0 / static_cast<double>(zeros);
    for (Eigen::Index j = 0; j < count; ++j) out[j] = dist[j] > 0.0 ? 0.0 : share;
    return;
  }
  // u_j = d_j^(-e) / sum_k d_k^(-e), evaluated in log space.
  const double e = 1.0 / (m - 1.0);
  double top = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < count; ++j) {
    out[j] = -e * std::log(dist[j]);
    top = std::max(top, out[j]);
  }
  double sum = 0.0;
  for (Eigen::Index j = 0; j < count; ++j) {
    out[j] = std::exp(out[j] - top);
    sum += out[j];
  }
  for (Eigen::Index j = 0; j < count; ++j) out[j] /= sum;
}

}  // namespace detail

Eigen::MatrixXd update_memberships_fcpca(const Eigen::MatrixXd& errors, double m) {
  if (!(m > 1.0)) fail(ErrorCode::InvalidArgument, "fuzziness m must exceed 1");
  const Eigen::Index s = errors.cols();
  Eigen::MatrixXd u(errors.rows(), s);
  std::vector<double> row(static_cast<std::size_t>(s)), out(static_cast<std::size_t>(s));
  for (Eigen::Index i = 0; i < errors.rows(); ++i) {
    for (Eigen::Index j = 0; j < s; ++j) row[static_cast<std::size_t>(j)] = errors(i, j);
    detail::fuzzy_row(row.data(), s, m, out.data());
    for (Eigen::Index j = 0; j < s; ++j) u(i, j) = out[static_cast<std::size_t>(j)];
  }
  return u;
}

namespace {

Eigen::MatrixXd weighted_gram_average(const FeatureSet& features, int lag,
                                      const Eigen::VectorXd& w) {
  const double total = w.sum();
  if (!(total >= 1e-12)) fail(ErrorCode::DegenerateWeights, "weights sum to zero");
  const auto& first = features.grams.front()[static_cast<std::size_t>(lag - 1)];
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(first.rows(), first.cols());
  for (std::size_t i = 0; i < features.size(); ++i)
    if (w[static_cast<Eigen::Index>(i)] != 0.0)
      sum += w[static_cast<Eigen::Index>(i)] * features.grams[i][static_cast<std::size_t>(lag - 1)];
  return sum / total;
}

}  // namespace

ClusterSubspaces subspaces_from_weights(const FeatureSet& features,
                                        const Eigen::MatrixXd& weights, double variance,
                                        SubspaceRule rule, const RankTable* ranks) {
  if (weights.rows() != static_cast<Eigen::Index>(features.size()))
    fail(ErrorCode::DimensionMismatch, "weight rows differ from object count");
  if (ranks && ranks->size() != static_cast<std::size_t>(weights.cols()))
    fail(ErrorCode::DimensionMismatch, "rank table differs from cluster count");
  ClusterSubspaces out;
  out.clusters.resize(static_cast<std::size_t>(weights.cols()));
  for (Eigen::Index s = 0; s < weights.cols(); ++s) {
    const Eigen::VectorXd w = weights.col(s);
    auto& lags = out.clusters[static_cast<std::size_t>(s)];
    for (int l = 1; l <= features.max_lag; ++l) {
      Eigen::MatrixXd sigma;
      try {
        sigma = rule == SubspaceRule::Descent ? weighted_gram_average(features, l, w)
                                              : weighted_block_average(features.blocks, l, w);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateWeights) throw;
        fail(ErrorCode::EmptyClusterError,
             "cluster " + std::to_string(s + 1) + " has no membership mass");
      }
      SubspaceAxes sub = common_axes(sigma, variance);
      if (rule == SubspaceRule::Descent && ranks)
        sub = truncate_axes(sub, ranks->at(static_cast<std::size_t>(s))
                                     .at(static_cast<std::size_t>(l - 1)));
      lags.push_back(std::move(sub));
    }
  }
  return out;
}

ClusterSubspaces update_subspaces(const FeatureSet& features, const Eigen::MatrixXd& u,
                                  double m, double variance) {
  if (!(m > 1.0)) fail(ErrorCode::InvalidArgument, "fuzziness m must exceed 1");
  return subspaces_from_weights(features, u.array().pow(m).matrix(), variance);
}

double objective_fcpca(const Eigen::MatrixXd& errors, const Eigen::MatrixXd& u, double m) {
  if (errors.rows() != u.rows() || errors.cols() > u.cols())
    fail(ErrorCode::DimensionMismatch, "errors and memberships disagree in shape");
  double total = 0.0;
  for (Eigen::Index i = 0; i < errors.rows(); ++i)
    for (Eigen::Index s = 0; s < errors.cols(); ++s)
      total += std::pow(u(i, s), m) * errors(i, s);
  return total;
}

bool is_row_stochastic(const Eigen::MatrixXd& u, double tol) {
  if ((u.array() < 0.0).any() || (u.array() > 1.0).any()) return false;
  for (Eigen::Index i = 0; i < u.rows(); ++i)
    if (std::abs(u.row(i).sum() - 1.0) > tol) return false;
  return true;
}

namespace detail {
namespace {

void validate_options(const FitOptions& opts) {
  if (opts.clusters < 1) fail(ErrorCode::InvalidShape, "need at least one cluster");
  if (!(opts.fuzziness > 1.0)) fail(ErrorCode::InvalidArgument, "fuzziness m must exceed 1");
  if (!(opts.variance > 0.0 && opts.variance <= 1.0))
    fail(ErrorCode::InvalidArgument, "variance fraction must lie in (0, 1]");
  if (opts.max_iter < 1) fail(ErrorCode::InvalidArgument, "max_iter must be positive");
  if (!(opts.tol >= 0.0)) fail(ErrorCode::InvalidArgument, "tolerance must be nonnegative");
}

// The last two values each match the values one period earlier.
bool repeats_cycle(const std::vector<double>& trace, double tol) {
  const auto n = static_cast<int>(trace.size());
  for (int period = 2; period <= kCycleWindow; ++period) {
    if (n < period + 2) break;
    const auto t = static_cast<std::size_t>(n - 1);
    const auto p = static_cast<std::size_t>(period);
    if (std::abs(trace[t] - trace[t - p]) < tol && std::abs(trace[t - 1] - trace[t - 1 - p]) < tol)
      return true;
  }
  return false;
}

}  // namespace

FitResult run_alternating(const FeatureSet& features, const FitOptions& opts,
                          const VariantConfig& config) {
  validate_options(opts);
  const auto n = static_cast<Eigen::Index>(features.size());
  const Eigen::Index regular = opts.clusters;
  const bool noise = config.variant == Variant::Noise;
  const bool trimmed = config.variant == Variant::Trimmed;
  const Eigen::Index total = regular + (noise ? 1 : 0);
  const double m = opts.fuzziness;

  if (noise && !(config.noise.lambda > 0.0))
    fail(ErrorCode::InvalidArgument, "noise multiplier lambda must be positive");
  if (trimmed) {
    const double a = config.trim.alpha;
    if (!(a >= 0.0 && a < 1.0)) fail(ErrorCode::InvalidArgument, "alpha must lie in [0, 1)");
    if (retained_count(static_cast<std::size_t>(n), a) < static_cast<std::size_t>(regular))
      fail(ErrorCode::TooFewRetained, "trimming leaves fewer objects than clusters");
  }
  if (config.variant == Variant::Exponential && config.exponential.beta &&
      !(*config.exponential.beta > 0.0))
    fail(ErrorCode::InvalidArgument, "beta must be positive");

  FitResult res;
  res.variant = config.variant;
  res.clusters = opts.clusters;
  res.fuzziness = m;
  res.variance = opts.variance;
  res.max_lag = features.max_lag;
  res.seed = opts.seed;
  if (noise) res.lambda = config.noise.lambda;
  if (trimmed) res.alpha = config.trim.alpha;

  Eigen::MatrixXd u = init_memberships(n, total, opts.seed);
  std::vector<std::size_t> retained(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < retained.size(); ++i) retained[i] = i;

  std::optional<double> beta = config.exponential.beta;
  std::optional<double> delta2;
  double previous = std::numeric_limits<double>::quiet_NaN();
  double best = std::numeric_limits<double>::infinity();
  int stale = 0;
  std::optional<RankTable> ranks;

  for (int it = 1; it <= opts.max_iter; ++it) {
    Eigen::MatrixXd weights = u.leftCols(regular).array().pow(m).matrix();
    if (trimmed && retained.size() < static_cast<std::size_t>(n)) {
      Eigen::MatrixXd masked = Eigen::MatrixXd::Zero(n, regular);
      for (std::size_t i : retained) masked.row(static_cast<Eigen::Index>(i)) =
          weights.row(static_cast<Eigen::Index>(i));
      weights = std::move(masked);
    }
    ClusterSubspaces subspaces = subspaces_from_weights(
        features, weights, opts.variance, opts.subspace_rule, ranks ? &*ranks : nullptr);
    if (opts.subspace_rule == SubspaceRule::Descent && !ranks) ranks = subspace_ranks(subspaces);
    Eigen::MatrixXd errors = reconstruction_errors(features, subspaces);

    double objective = 0.0;
    switch (config.variant) {
      case Variant::Fcpca:
        u = update_memberships_fcpca(errors, m);
        objective = objective_fcpca(errors, u, m);
        break;
      case Variant::Exponential:
        if (!beta) beta = estimate_beta(errors);
        u = update_memberships_exponential(errors, m, *beta);
        objective = objective_exponential(errors, u, m, *beta);
        break;
      case Variant::Noise:
        if (!delta2 || config.noise.schedule == NoiseSchedule::EveryIteration)
          delta2 = update_noise_distance(errors, config.noise.lambda);
        u = update_memberships_noise(errors, m, *delta2);
        objective = objective_noise(errors, u, m, *delta2);
        break;
      case Variant::Trimmed: {
        u = update_memberships_fcpca(errors, m);
        const auto losses = trimming_losses(errors, u, m, config.trim.loss);
        retained = select_trim_set(losses, config.trim.alpha,
                                   static_cast<std::size_t>(regular))
                       .retained;
        objective = objective_trimmed(errors, u, m, retained);
        break;
      }
    }

    res.objective_trace.push_back(objective);
    res.iterations = it;
    res.subspaces = std::move(subspaces);
    res.errors = std::move(errors);

    if (!std::isfinite(objective)) fail(ErrorCode::NonFiniteInput, "objective became non-finite");
    if (it > 1 && std::abs(objective - previous) < opts.tol) {
      res.converged = true;
      res.stop = StopReason::Tolerance;
      break;
    }
    if (config.variant == Variant::Exponential) {
      if (objective < best) {
        best = objective;
        stale = 0;
      } else if (++stale >= config.exponential.patience) {
        res.converged = true;
        res.stop = StopReason::Patience;
        break;
      }
    }
    if (repeats_cycle(res.objective_trace, opts.tol)) {
      res.stop = StopReason::Cycle;
      break;
    }
    previous = objective;
  }

  res.memberships = std::move(u);
  res.beta = beta;
  res.delta2 = delta2;
  if (trimmed) res.retained = std::move(retained);
  return res;
}

}  // namespace detail

FitResult fit_fcpca(const FeatureSet& features, const FitOptions& opts) {
  return detail::run_alternating(features, opts, {});
}

FitResult fit_fcpca(const MtsDataset& data, const FitOptions& opts, int max_lag) {
  return fit_fcpca(build_features(data, max_lag), opts);
}

}  // namespace rfcpca
