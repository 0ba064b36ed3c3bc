#pragma once

#include "rfcpca/fcpca.hpp"
#include "rfcpca/robust.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rfcpca {

/// min over distinct cluster pairs of sum_l ||P_s(l) - P_s'(l)||_F^2.
/// Throws SingleCluster with fewer than two subspaces.
double prototype_separation(const ClusterSubspaces& subspaces);

/// The fitted variant's own objective, recomputed from memberships and errors
/// (squared, exponential, noise-augmented, or retained-set sum).
double variant_objective(const FitResult& fit);

/// Generalized Xie-Beni index J / (N d_min); lower is better. The noise
/// cluster has no prototype, so d_min ranges over the regular clusters.
/// Throws DegenerateSeparation when d_min < 1e-12.
double cvi(const FitResult& fit);

struct SearchGrid {
  Variant variant = Variant::Fcpca;
  std::vector<int> clusters{2, 3, 4, 5, 6};
  std::vector<double> fuzziness{1.1, 1.2, 1.4, 1.6, 1.8, 2.0, 2.2, 2.5};
  std::vector<double> alphas{0.1, 0.2, 0.3, 0.4, 0.5};  // trimmed variant only

  static SearchGrid defaults(Variant variant);
};

struct SearchOptions {
  double variance = 0.95;
  int max_iter = 1000;
  double tol = 1e-3;
  SubspaceRule subspace_rule = SubspaceRule::Adaptive;
  int restarts = 3;
  ExponentialOptions exponential;
  NoiseOptions noise;  // lambda held fixed across the grid
  TrimLoss trim_loss = TrimLoss::WeightedObjective;
};

struct Candidate {
  int clusters = 0;
  double fuzziness = 0.0;
  std::optional<double> alpha;
  std::uint64_t seed = 0;  // seed of the best restart
  std::optional<double> cvi;
  std::optional<double> objective;
  bool converged = false;
  int iterations = 0;
  std::string error;  // machine-readable error name, empty on success

  bool valid() const noexcept { return error.empty() && converged && cvi.has_value(); }
};

struct SelectionReport {
  Variant variant = Variant::Fcpca;
  int restarts = 0;
  std::vector<Candidate> candidates;  // grid order
  std::size_t winner = 0;
};

struct Selection {
  FitResult fit;
  SelectionReport report;
};

/// Seed used for tuple `tuple_index`, restart `restart`.
std::uint64_t candidate_seed(std::uint64_t seed, std::size_t tuple_index, int restart);

/// Fits every (S, m[, alpha]) tuple `restarts` times, keeps the lowest final
/// objective per tuple and returns the valid tuple with minimal CVI (first in
/// grid order on ties). Throws AllCandidatesFailed if none is valid.
Selection grid_search(const FeatureSet& features, const SearchGrid& grid,
                      const SearchOptions& opts, std::uint64_t seed);

/// Single fit dispatch for any variant.
FitResult fit_variant(const FeatureSet& features, Variant variant, const FitOptions& fit,
                      const SearchOptions& opts, std::optional<double> alpha = std::nullopt);

}  // namespace rfcpca
