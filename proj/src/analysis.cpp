#include "rfcpca/analysis.hpp"

#include "rfcpca/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rfcpca {
namespace {

void check_orthonormal(const Eigen::MatrixXd& b, const char* which) {
  const Eigen::MatrixXd gram = b.transpose() * b;
  const double dev = (gram - Eigen::MatrixXd::Identity(b.cols(), b.cols())).cwiseAbs().maxCoeff();
  if (b.cols() > 0 && !(dev <= 1e-8))
    fail(ErrorCode::NotOrthonormal, std::string(which) + " has non-orthonormal columns");
}

}  // namespace

Eigen::VectorXd principal_angles(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows()) fail(ErrorCode::DimensionMismatch, "bases live in different spaces");
  check_orthonormal(a, "first basis");
  check_orthonormal(b, "second basis");
  const Eigen::Index k = std::min(a.cols(), b.cols());
  if (k == 0) return {};
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a.transpose() * b);
  Eigen::VectorXd angles(k);
  for (Eigen::Index i = 0; i < k; ++i)
    angles(i) = std::acos(std::clamp(svd.singularValues()(i), 0.0, 1.0));
  std::sort(angles.data(), angles.data() + k);
  return angles;
}

Eigen::VectorXd row_contributions(const Eigen::MatrixXd& axes) {
  return axes.rowwise().squaredNorm();
}

Eigen::VectorXd channel_contributions(const Eigen::MatrixXd& axes, Eigen::Index channels) {
  if (channels < 1 || axes.rows() != 2 * channels)
    fail(ErrorCode::DimensionMismatch, "axes need 2p rows");
  const Eigen::VectorXd rows = row_contributions(axes);
  return rows.head(channels) + rows.tail(channels);
}

std::vector<SubspaceAxes> noise_subspace(const FeatureSet& features, const FitResult& fit,
                                         double variance) {
  if (fit.variant != Variant::Noise)
    fail(ErrorCode::InvalidArgument, "noise subspace needs a noise-variant fit");
  if (fit.size() != features.size())
    fail(ErrorCode::DimensionMismatch, "fit and features differ in object count");
  const Eigen::VectorXd w =
      fit.memberships.col(fit.memberships.cols() - 1).array().pow(fit.fuzziness).matrix();
  std::vector<SubspaceAxes> out;
  for (int l = 1; l <= features.max_lag; ++l)
    out.push_back(common_axes(weighted_block_average(features.blocks, l, w), variance));
  return out;
}

}  // namespace rfcpca
