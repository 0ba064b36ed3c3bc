#pragma once

#include "rfcpca/covariance.hpp"
#include "rfcpca/fcpca.hpp"

#include <Eigen/Dense>

#include <vector>

namespace rfcpca {

/// Principal angles between span(a) and span(b), ascending, in [0, pi/2].
/// Both bases must be orthonormal within 1e-8, else NotOrthonormal.
Eigen::VectorXd principal_angles(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Squared row norms of a 2p x k axis matrix (one entry per embedding row).
Eigen::VectorXd row_contributions(const Eigen::MatrixXd& axes);

/// Per-channel contribution: rows j and j + p of the axes aggregated.
/// Sums to k for orthonormal axes. DimensionMismatch if rows != 2p.
Eigen::VectorXd channel_contributions(const Eigen::MatrixXd& axes, Eigen::Index channels);

/// Subspace fitted to a noise-variant fit's outlier mass: the block average
/// weighted by u_iS^m, one SubspaceAxes per lag.
std::vector<SubspaceAxes> noise_subspace(const FeatureSet& features, const FitResult& fit,
                                         double variance);

}  // namespace rfcpca
