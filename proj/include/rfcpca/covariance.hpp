#pragma once

#include "rfcpca/dataset.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace rfcpca {

/// Lag-l cross-covariance (1/T) sum_t (x_t - mu)(x_{t+l} - mu)^T with the
/// column means taken over the whole series.
Eigen::MatrixXd lagged_cross_covariance(const Eigen::MatrixXd& x, int lag);

/// [[G(0), G(l)], [G(l)^T, G(0)]], exactly symmetric.
Eigen::MatrixXd block_covariance(const Eigen::MatrixXd& x, int lag);

/// (T - l) x 2p matrix whose row t is [x_t, x_{t+l}], centered with the
/// full-series means.
Eigen::MatrixXd lagged_embedding(const Eigen::MatrixXd& x, int lag);

/// Block covariances for lags 1..L of one series; blocks[l - 1] is lag l.
struct LaggedBlocks {
  Eigen::Index channels = 0;
  std::vector<Eigen::MatrixXd> blocks;

  int max_lag() const noexcept { return static_cast<int>(blocks.size()); }
};

/// Lagged embeddings for lags 1..L; lags[l - 1] is lag l.
struct LaggedEmbedding {
  std::vector<Eigen::MatrixXd> lags;

  int max_lag() const noexcept { return static_cast<int>(lags.size()); }
};

LaggedBlocks lagged_blocks(const Eigen::MatrixXd& x, int max_lag);
LaggedEmbedding lagged_embeddings(const Eigen::MatrixXd& x, int max_lag);

/// sum_i u_i^m G_i(l) / sum_i u_i^m over the blocks at one lag.
/// Throws DegenerateWeights when sum_i u_i^m < 1e-12.
Eigen::MatrixXd weighted_common_covariance(std::span<const LaggedBlocks> blocks,
                                           int lag, const Eigen::VectorXd& u,
                                           double m);

/// Same average with precomputed nonnegative weights (u^m, possibly masked).
Eigen::MatrixXd weighted_block_average(std::span<const LaggedBlocks> blocks,
                                       int lag, const Eigen::VectorXd& weights);

/// Leading eigenvectors of a symmetric matrix.
///
/// `axes` holds the k leading unit eigenvectors, where k is the smallest count
/// whose eigenvalues reach the requested fraction of the (nonnegative part of
/// the) spectrum; `complement` holds the remaining eigenvectors so that
/// [axes, complement] is a full orthonormal basis. Eigenvalues below
/// 1e-10 * lambda_max are treated as zero. Each eigenvector is signed so its
/// largest-magnitude entry is positive.
struct SubspaceAxes {
  Eigen::MatrixXd axes;
  Eigen::MatrixXd complement;
  Eigen::VectorXd eigenvalues;  // descending, full spectrum
  double explained = 1.0;       // variance fraction actually captured

  Eigen::Index rank() const noexcept { return axes.cols(); }
  Eigen::Index dim() const noexcept { return axes.rows(); }
  Eigen::MatrixXd projector() const { return axes * axes.transpose(); }
};

SubspaceAxes common_axes(const Eigen::MatrixXd& sigma, double variance_fraction);

/// The same basis split after the k leading eigenvectors instead.
SubspaceAxes truncate_axes(const SubspaceAxes& sub, Eigen::Index k);

/// Per-cluster, per-lag subspaces: lags[s][l - 1].
struct ClusterSubspaces {
  std::vector<std::vector<SubspaceAxes>> clusters;

  std::size_t size() const noexcept { return clusters.size(); }
  int max_lag() const noexcept {
    return clusters.empty() ? 0 : static_cast<int>(clusters.front().size());
  }
  const SubspaceAxes& at(std::size_t s, int lag) const {
    return clusters.at(s).at(static_cast<std::size_t>(lag - 1));
  }
};

/// sum_l || E(l) - E(l) C(l) C(l)^T ||_F^2, evaluated on the embedding itself.
double reconstruction_error(const LaggedEmbedding& emb,
                            std::span<const Eigen::MatrixXd> axes);

/// The same residual evaluated from the Gram matrix E^T E of one lag. Uses the
/// complement basis when it is the smaller side, so exact containment gives
/// exactly zero and no cancellation occurs in that regime.
double projection_residual(const Eigen::MatrixXd& gram, const SubspaceAxes& sub);

/// Everything the optimizers need from a dataset, computed once.
struct FeatureSet {
  Eigen::Index channels = 0;
  int max_lag = 0;
  std::vector<LaggedBlocks> blocks;
  std::vector<std::vector<Eigen::MatrixXd>> grams;  // grams[i][l - 1] = E^T E
  std::vector<Eigen::Index> lengths;

  std::size_t size() const noexcept { return blocks.size(); }
};

FeatureSet build_features(const MtsDataset& data, int max_lag = 2);

/// N x S matrix of r^2_{is} against the given subspaces.
Eigen::MatrixXd reconstruction_errors(const FeatureSet& features,
                                      const ClusterSubspaces& subspaces);

}  // namespace rfcpca
