#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace rfcpca {

/// N multivariate series sharing a channel count; lengths may differ.
/// Rows are time points, columns are channels.
struct MtsDataset {
  std::vector<Eigen::MatrixXd> series;
  std::vector<std::string> names;
  std::vector<std::string> channel_names;
  /// Ground-truth group labels, empty when unknown.
  std::vector<int> labels;
  /// Ground-truth contaminated indices (0-based), empty when unknown.
  std::vector<std::size_t> outliers;

  std::size_t size() const noexcept { return series.size(); }
  Eigen::Index channels() const noexcept {
    return series.empty() ? 0 : series.front().cols();
  }
};

/// Throws InvalidShape on inconsistent channel counts, LagTooLarge when any
/// series has T <= max_lag, NonFiniteInput on NaN/Inf entries.
void validate_dataset(const MtsDataset& data, int max_lag);

}  // namespace rfcpca
