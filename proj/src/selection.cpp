#include "rfcpca/selection.hpp"

#include "rfcpca/errors.hpp"
#include "rfcpca/rng.hpp"

#include <limits>

namespace rfcpca {

double prototype_separation(const ClusterSubspaces& subspaces) {
  const std::size_t s_count = subspaces.size();
  if (s_count < 2) fail(ErrorCode::SingleCluster, "separation needs two or more clusters");
  const int lags = subspaces.max_lag();
  std::vector<std::vector<Eigen::MatrixXd>> projectors(s_count);
  for (std::size_t s = 0; s < s_count; ++s)
    for (int l = 1; l <= lags; ++l) projectors[s].push_back(subspaces.at(s, l).projector());

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < s_count; ++a) {
    for (std::size_t b = a + 1; b < s_count; ++b) {
      double d = 0.0;
      for (std::size_t l = 0; l < projectors[a].size(); ++l)
        d += (projectors[a][l] - projectors[b][l]).squaredNorm();
      best = std::min(best, d);
    }
  }
  return best;
}

double variant_objective(const FitResult& fit) {
  const double m = fit.fuzziness;
  switch (fit.variant) {
    case Variant::Fcpca: return objective_fcpca(fit.errors, fit.memberships, m);
    case Variant::Exponential:
      if (!fit.beta) fail(ErrorCode::InvalidArgument, "exponential fit lacks beta");
      return objective_exponential(fit.errors, fit.memberships, m, *fit.beta);
    case Variant::Noise:
      if (!fit.delta2) fail(ErrorCode::InvalidArgument, "noise fit lacks delta");
      return objective_noise(fit.errors, fit.memberships, m, *fit.delta2);
    case Variant::Trimmed: return objective_trimmed(fit.errors, fit.memberships, m, fit.retained);
  }
  return 0.0;
}

double cvi(const FitResult& fit) {
  const double separation = prototype_separation(fit.subspaces);
  if (separation < 1e-12)
    fail(ErrorCode::DegenerateSeparation, "cluster prototypes coincide");
  return variant_objective(fit) / (static_cast<double>(fit.size()) * separation);
}

SearchGrid SearchGrid::defaults(Variant variant) {
  SearchGrid g;
  g.variant = variant;
  if (variant != Variant::Trimmed) g.alphas.clear();
  return g;
}

std::uint64_t candidate_seed(std::uint64_t seed, std::size_t tuple_index, int restart) {
  return derive_seed(seed, static_cast<std::uint64_t>(tuple_index) + 1,
                     static_cast<std::uint64_t>(restart) + 1);
}

FitResult fit_variant(const FeatureSet& features, Variant variant, const FitOptions& fit,
                      const SearchOptions& opts, std::optional<double> alpha) {
  switch (variant) {
    case Variant::Fcpca: return fit_fcpca(features, fit);
    case Variant::Exponential: return fit_rfcpca_e(features, fit, opts.exponential);
    case Variant::Noise: return fit_rfcpca_n(features, fit, opts.noise);
    case Variant::Trimmed:
      return fit_rfcpca_t(features, fit, TrimOptions{alpha.value_or(0.0), opts.trim_loss});
  }
  fail(ErrorCode::InvalidArgument, "unknown variant");
}

Selection grid_search(const FeatureSet& features, const SearchGrid& grid,
                      const SearchOptions& opts, std::uint64_t seed) {
  if (grid.clusters.empty() || grid.fuzziness.empty())
    fail(ErrorCode::InvalidArgument, "search grid has an empty axis");
  if (grid.variant == Variant::Trimmed && grid.alphas.empty())
    fail(ErrorCode::InvalidArgument, "trimmed search needs alpha values");
  if (opts.restarts < 1) fail(ErrorCode::InvalidArgument, "restarts must be positive");

  std::vector<std::optional<double>> alphas;
  if (grid.variant == Variant::Trimmed)
    for (double a : grid.alphas) alphas.emplace_back(a);
  else
    alphas.emplace_back(std::nullopt);

  Selection out;
  out.report.variant = grid.variant;
  out.report.restarts = opts.restarts;
  std::optional<FitResult> winner;
  double winner_cvi = std::numeric_limits<double>::infinity();

  std::size_t tuple = 0;
  for (int s : grid.clusters) {
    for (double m : grid.fuzziness) {
      for (const auto& alpha : alphas) {
        Candidate cand;
        cand.clusters = s;
        cand.fuzziness = m;
        cand.alpha = alpha;
        std::optional<FitResult> best;
        std::string last_error;
        for (int r = 0; r < opts.restarts; ++r) {
          FitOptions fo;
          fo.clusters = s;
          fo.fuzziness = m;
          fo.variance = opts.variance;
          fo.max_iter = opts.max_iter;
          fo.tol = opts.tol;
          fo.subspace_rule = opts.subspace_rule;
          fo.seed = candidate_seed(seed, tuple, r);
          try {
            FitResult fit = fit_variant(features, grid.variant, fo, opts, alpha);
            if (!best || fit.objective() < best->objective()) best = std::move(fit);
          } catch (const Error& e) {
            last_error = std::string(e.name());
          }
        }
        if (best) {
          cand.seed = best->seed;
          cand.objective = best->objective();
          cand.converged = best->converged;
          cand.iterations = best->iterations;
          try {
            cand.cvi = cvi(*best);
          } catch (const Error& e) {
            cand.error = std::string(e.name());
          }
        } else {
          cand.error = last_error;
        }
        if (cand.valid() && *cand.cvi < winner_cvi) {
          winner_cvi = *cand.cvi;
          winner = std::move(best);
          out.report.winner = out.report.candidates.size();
        }
        out.report.candidates.push_back(std::move(cand));
        ++tuple;
      }
    }
  }
  if (!winner) fail(ErrorCode::AllCandidatesFailed, "no grid candidate produced a valid fit");
  out.fit = std::move(*winner);
  return out;
}

}  // namespace rfcpca
