#include "rfcpca/covariance.hpp"

#include "rfcpca/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

namespace rfcpca {
namespace {

void check_series(const Eigen::MatrixXd& x, int lag) {
  if (lag < 0) fail(ErrorCode::InvalidArgument, "negative lag");
  if (x.rows() <= lag)
    fail(ErrorCode::LagTooLarge, "lag " + std::to_string(lag) +
                                     " needs more than " + std::to_string(x.rows()) +
                                     " time points");
  if (!x.allFinite()) fail(ErrorCode::NonFiniteInput, "series has NaN/Inf entries");
}

Eigen::MatrixXd centered(const Eigen::MatrixXd& x) {
  const Eigen::RowVectorXd mu = x.colwise().mean();
  return x.rowwise() - mu;
}

// Cross-product of the centered series at one lag, divided by T.
Eigen::MatrixXd cross_from_centered(const Eigen::MatrixXd& c, int lag) {
  const Eigen::Index n = c.rows() - lag;
  Eigen::MatrixXd g = c.topRows(n).transpose() * c.bottomRows(n);
  g /= static_cast<double>(c.rows());
  if (lag == 0) {
    // Mirror so the result is bitwise symmetric.
    for (Eigen::Index a = 0; a < g.rows(); ++a)
      for (Eigen::Index b = a + 1; b < g.cols(); ++b) g(b, a) = g(a, b);
  }
  return g;
}

Eigen::MatrixXd assemble_block(const Eigen::MatrixXd& g0, const Eigen::MatrixXd& gl) {
  const Eigen::Index p = g0.rows();
  Eigen::MatrixXd out(2 * p, 2 * p);
  out.topLeftCorner(p, p) = g0;
  out.bottomRightCorner(p, p) = g0;
  out.topRightCorner(p, p) = gl;
  out.bottomLeftCorner(p, p) = gl.transpose();
  return out;
}

Eigen::MatrixXd embed_from_centered(const Eigen::MatrixXd& c, int lag) {
  const Eigen::Index n = c.rows() - lag;
  const Eigen::Index p = c.cols();
  Eigen::MatrixXd e(n, 2 * p);
  e.leftCols(p) = c.topRows(n);
  e.rightCols(p) = c.bottomRows(n);
  return e;
}

}  // namespace

void validate_dataset(const MtsDataset& data, int max_lag) {
  if (data.series.empty()) fail(ErrorCode::InvalidShape, "empty dataset");
  const Eigen::Index p = data.channels();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& x = data.series[i];
    if (x.cols() != p)
      fail(ErrorCode::InvalidShape, "series " + std::to_string(i) + " has " +
                                        std::to_string(x.cols()) + " channels, expected " +
                                        std::to_string(p));
    check_series(x, max_lag);
  }
}

Eigen::MatrixXd lagged_cross_covariance(const Eigen::MatrixXd& x, int lag) {
  check_series(x, lag);
  return cross_from_centered(centered(x), lag);
}

Eigen::MatrixXd block_covariance(const Eigen::MatrixXd& x, int lag) {
  if (lag < 1) fail(ErrorCode::InvalidArgument, "block lag must be >= 1");
  check_series(x, lag);
  const Eigen::MatrixXd c = centered(x);
  return assemble_block(cross_from_centered(c, 0), cross_from_centered(c, lag));
}

Eigen::MatrixXd lagged_embedding(const Eigen::MatrixXd& x, int lag) {
  check_series(x, lag);
  return embed_from_centered(centered(x), lag);
}

LaggedBlocks lagged_blocks(const Eigen::MatrixXd& x, int max_lag) {
  if (max_lag < 1) fail(ErrorCode::InvalidArgument, "max lag must be >= 1");
  check_series(x, max_lag);
  const Eigen::MatrixXd c = centered(x);
  const Eigen::MatrixXd g0 = cross_from_centered(c, 0);
  LaggedBlocks out;
  out.channels = x.cols();
  for (int l = 1; l <= max_lag; ++l)
    out.blocks.push_back(assemble_block(g0, cross_from_centered(c, l)));
  return out;
}

LaggedEmbedding lagged_embeddings(const Eigen::MatrixXd& x, int max_lag) {
  if (max_lag < 1) fail(ErrorCode::InvalidArgument, "max lag must be >= 1");
  check_series(x, max_lag);
  const Eigen::MatrixXd c = centered(x);
  LaggedEmbedding out;
  for (int l = 1; l <= max_lag; ++l) out.lags.push_back(embed_from_centered(c, l));
  return out;
}

Eigen::MatrixXd weighted_block_average(std::span<const LaggedBlocks> blocks, int lag,
                                       const Eigen::VectorXd& weights) {
  if (blocks.empty()) fail(ErrorCode::InvalidShape, "no blocks to average");
  if (weights.size() != static_cast<Eigen::Index>(blocks.size()))
    fail(ErrorCode::DimensionMismatch, "weight vector length differs from block count");
  const auto idx = static_cast<std::size_t>(lag - 1);
  const Eigen::Index d = blocks.front().blocks.at(idx).rows();

  double total = 0.0;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const double w = weights[static_cast<Eigen::Index>(i)];
    if (w == 0.0) continue;
    const auto& b = blocks[i].blocks.at(idx);
    if (b.rows() != d) fail(ErrorCode::DimensionMismatch, "block sizes differ");
    acc.noalias() += w * b;
    total += w;
  }
  if (total < 1e-12) fail(ErrorCode::DegenerateWeights, "sum of weights is zero");
  acc /= total;
  return acc;
}

Eigen::MatrixXd weighted_common_covariance(std::span<const LaggedBlocks> blocks, int lag,
                                           const Eigen::VectorXd& u, double m) {
  if (!(m > 1.0)) fail(ErrorCode::InvalidArgument, "fuzziness m must exceed 1");
  const Eigen::VectorXd w = u.array().pow(m).matrix();
  return weighted_block_average(blocks, lag, w);
}

SubspaceAxes common_axes(const Eigen::MatrixXd& sigma, double variance_fraction) {
  if (!(variance_fraction > 0.0 && variance_fraction <= 1.0))
    fail(ErrorCode::InvalidArgument, "variance fraction must lie in (0, 1]");
  if (sigma.rows() != sigma.cols() || sigma.rows() == 0)
    fail(ErrorCode::DimensionMismatch, "sigma must be square and nonempty");
  const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale)
    fail(ErrorCode::InvalidArgument, "sigma is not symmetric");
  if (!sigma.allFinite()) fail(ErrorCode::NonFiniteInput, "sigma has NaN/Inf entries");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sigma);
  if (solver.info() != Eigen::Success) fail(ErrorCode::EigFailure, "eigensolver did not converge");

  const Eigen::Index d = sigma.rows();
  // Eigen returns ascending order.
  Eigen::VectorXd values = solver.eigenvalues().reverse();
  Eigen::MatrixXd vectors = solver.eigenvectors().rowwise().reverse();

  for (Eigen::Index j = 0; j < d; ++j) {
    Eigen::Index arg = 0;
    vectors.col(j).cwiseAbs().maxCoeff(&arg);
    if (vectors(arg, j) < 0.0) vectors.col(j) = -vectors.col(j);
  }

  const double top = std::max(values[0], 0.0);
  const double floor_value = 1e-10 * top;
  Eigen::VectorXd clamped = values;
  for (Eigen::Index j = 0; j < d; ++j)
    if (!(clamped[j] > floor_value)) clamped[j] = 0.0;
  const double total = clamped.sum();

  Eigen::Index k = 1;
  double explained = 1.0;
  if (total > 0.0) {
    const double target = variance_fraction * total * (1.0 - 1e-12);
    double running = 0.0;
    for (k = 0; k < d;) {
      running += clamped[k];
      ++k;
      if (running >= target) break;
    }
    explained = running / total;
  }

  SubspaceAxes out;
  out.axes = vectors.leftCols(k);
  out.complement = vectors.rightCols(d - k);
  out.eigenvalues = values;
  out.explained = std::min(explained, 1.0);
  return out;
}

SubspaceAxes truncate_axes(const SubspaceAxes& sub, Eigen::Index k) {
  const Eigen::Index d = sub.dim();
  if (k < 1 || k > d) fail(ErrorCode::InvalidArgument, "rank must lie in [1, dim]");
  Eigen::MatrixXd basis(d, d);
  basis << sub.axes, sub.complement;
  SubspaceAxes out;
  out.axes = basis.leftCols(k);
  out.complement = basis.rightCols(d - k);
  out.eigenvalues = sub.eigenvalues;
  const double floor_value = 1e-10 * std::max(sub.eigenvalues[0], 0.0);
  const Eigen::VectorXd clamped =
      (sub.eigenvalues.array() > floor_value).select(sub.eigenvalues, 0.0);
  const double total = clamped.sum();
  out.explained = total > 0.0 ? std::min(clamped.head(k).sum() / total, 1.0) : 1.0;
  return out;
}

double reconstruction_error(const LaggedEmbedding& emb,
                            std::span<const Eigen::MatrixXd> axes) {
  if (static_cast<std::size_t>(emb.max_lag()) != axes.size())
    fail(ErrorCode::DimensionMismatch, "embedding and axes cover different lag counts");
  double total = 0.0;
  for (std::size_t l = 0; l < axes.size(); ++l) {
    const auto& e = emb.lags[l];
    const auto& c = axes[l];
    if (e.cols() != c.rows())
      fail(ErrorCode::DimensionMismatch, "axes row count differs from embedding width");
    const Eigen::MatrixXd residual = e - (e * c) * c.transpose();
    total += residual.squaredNorm();
  }
  return total;
}

double projection_residual(const Eigen::MatrixXd& gram, const SubspaceAxes& sub) {
  if (gram.rows() != sub.dim())
    fail(ErrorCode::DimensionMismatch, "gram size differs from subspace dimension");
  if (sub.complement.cols() <= sub.axes.cols()) {
    if (sub.complement.cols() == 0) return 0.0;
    const Eigen::MatrixXd gq = gram * sub.complement;
    return std::max(0.0, gq.cwiseProduct(sub.complement).sum());
  }
  const Eigen::MatrixXd gc = gram * sub.axes;
  return std::max(0.0, gram.trace() - gc.cwiseProduct(sub.axes).sum());
}

FeatureSet build_features(const MtsDataset& data, int max_lag) {
  validate_dataset(data, max_lag);
  FeatureSet out;
  out.channels = data.channels();
  out.max_lag = max_lag;
  out.blocks.reserve(data.size());
  out.grams.reserve(data.size());
  for (const auto& x : data.series) {
    const Eigen::MatrixXd c = centered(x);
    const Eigen::MatrixXd g0 = cross_from_centered(c, 0);
    LaggedBlocks blocks;
    blocks.channels = x.cols();
    std::vector<Eigen::MatrixXd> grams;
    for (int l = 1; l <= max_lag; ++l) {
      blocks.blocks.push_back(assemble_block(g0, cross_from_centered(c, l)));
      const Eigen::MatrixXd e = embed_from_centered(c, l);
      Eigen::MatrixXd g(e.cols(), e.cols());
      g.setZero();
      g.selfadjointView<Eigen::Lower>().rankUpdate(e.transpose());
      g = g.selfadjointView<Eigen::Lower>();
      grams.push_back(std::move(g));
    }
    out.blocks.push_back(std::move(blocks));
    out.grams.push_back(std::move(grams));
    out.lengths.push_back(x.rows());
  }
  return out;
}

Eigen::MatrixXd reconstruction_errors(const FeatureSet& features,
                                      const ClusterSubspaces& subspaces) {
  const auto n = static_cast<Eigen::Index>(features.size());
  const auto s_count = static_cast<Eigen::Index>(subspaces.size());
  if (subspaces.max_lag() != features.max_lag)
    fail(ErrorCode::DimensionMismatch, "subspaces and features cover different lags");
  Eigen::MatrixXd r(n, s_count);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index s = 0; s < s_count; ++s) {
      double total = 0.0;
      for (int l = 1; l <= features.max_lag; ++l)
        total += projection_residual(features.grams[static_cast<std::size_t>(i)]
                                                   [static_cast<std::size_t>(l - 1)],
                                     subspaces.at(static_cast<std::size_t>(s), l));
      r(i, s) = total;
    }
  }
  return r;
}

}  // namespace rfcpca
