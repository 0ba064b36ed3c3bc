#pragma once

#include "rfcpca/dataset.hpp"
#include "rfcpca/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

namespace testing {

inline Eigen::MatrixXd random_matrix(rfcpca::Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

inline Eigen::MatrixXd random_orthonormal(rfcpca::Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_matrix(rng, rows, rows));
  return qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
}

/// Each series lives in its group's random `rank`-dimensional channel subspace
/// plus a little isotropic noise.
inline rfcpca::MtsDataset planted_dataset(std::uint64_t seed, std::size_t per_group,
                                          Eigen::Index channels, Eigen::Index length,
                                          Eigen::Index rank = 1, double noise = 0.05) {
  rfcpca::Rng rng(seed);
  rfcpca::MtsDataset data;
  const Eigen::MatrixXd basis[2] = {random_orthonormal(rng, channels, rank),
                                    random_orthonormal(rng, channels, rank)};
  for (int g = 0; g < 2; ++g)
    for (std::size_t i = 0; i < per_group; ++i) {
      Eigen::MatrixXd latent = random_matrix(rng, length, rank);
      // Smooth the latents a little so lagged blocks carry structure.
      for (Eigen::Index t = 1; t < length; ++t) latent.row(t) += 0.6 * latent.row(t - 1);
      Eigen::MatrixXd x = latent * basis[g].transpose() + noise * random_matrix(rng, length, channels);
      data.series.push_back(std::move(x));
      data.labels.push_back(g + 1);
      data.names.push_back("s" + std::to_string(data.series.size()));
    }
  return data;
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

inline double rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

}  // namespace testing
