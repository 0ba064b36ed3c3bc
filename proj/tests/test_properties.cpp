// Property checks over hand-rolled random generators, 200+ cases each.

#include "helpers.hpp"

#include "rfcpca/analysis.hpp"
#include "rfcpca/errors.hpp"
#include "rfcpca/robust.hpp"
#include "rfcpca/selection.hpp"
#include "rfcpca/simgen.hpp"

#include <doctest.h>

#include <numeric>

using namespace rfcpca;

namespace {

constexpr int kCases = 200;

// Nonnegative error matrix; roughly one entry in ten is an exact zero.
Eigen::MatrixXd random_errors(Rng& rng, Eigen::Index n, Eigen::Index s) {
  Eigen::MatrixXd e(n, s);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < s; ++j)
      e(i, j) = rng.uniform() < 0.1 ? 0.0 : std::exp(rng.uniform(-6.0, 6.0));
  return e;
}

Eigen::MatrixXd random_spd(Rng& rng, Eigen::Index d) {
  const Eigen::MatrixXd a = testing::random_matrix(rng, d, d + static_cast<Eigen::Index>(rng.below(3)));
  return a * a.transpose();
}

// Small planted dataset with random shape, rank and noise.
MtsDataset random_dataset(Rng& rng) {
  const auto per_group = static_cast<std::size_t>(2 + rng.below(3));
  const auto channels = static_cast<Eigen::Index>(2 + rng.below(4));
  const auto length = static_cast<Eigen::Index>(20 + rng.below(40));
  const auto rank = static_cast<Eigen::Index>(1 + rng.below(static_cast<std::uint64_t>(channels - 1)));
  return testing::planted_dataset(rng.next(), per_group, channels, length, rank,
                                  rng.uniform(0.01, 0.5));
}

bool row_stochastic(const Eigen::MatrixXd& u) {
  return u.minCoeff() >= 0.0 && u.maxCoeff() <= 1.0 &&
         (u.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12;
}

}  // namespace

TEST_CASE("memberships are row stochastic") {
  Rng rng(1);
  for (int c = 0; c < kCases; ++c) {
    const auto n = static_cast<Eigen::Index>(1 + rng.below(12));
    const auto s = static_cast<Eigen::Index>(1 + rng.below(5));
    const Eigen::MatrixXd e = random_errors(rng, n, s);
    const double m = rng.uniform(1.05, 3.0);
    CHECK(row_stochastic(update_memberships_fcpca(e, m)));
    CHECK(row_stochastic(update_memberships_exponential(e, m, std::exp(rng.uniform(-5, 5)))));
    CHECK(row_stochastic(update_memberships_noise(e, m, std::exp(rng.uniform(-5, 5)))));
    if (s <= n) CHECK(row_stochastic(init_memberships(n, s, rng.next())));
  }
}

TEST_CASE("fitted memberships are row stochastic") {
  Rng rng(2);
  int fitted = 0;
  for (int c = 0; c < kCases; ++c) {
    const FeatureSet f = build_features(random_dataset(rng), 2);
    FitOptions opts;
    opts.seed = rng.next();
    opts.fuzziness = rng.uniform(1.2, 2.5);
    opts.max_iter = 50;
    const auto variant = static_cast<Variant>(c % 4);
    try {
      const FitResult fit = fit_variant(f, variant, opts, {}, 0.2);
      CHECK(row_stochastic(fit.memberships));
      ++fitted;
    } catch (const Error& e) {
      // On tiny data clusters can empty out, or every series can be
      // reconstructed exactly, which leaves E and N without a scale.
      CHECK((e.code() == ErrorCode::EmptyClusterError || e.code() == ErrorCode::DegenerateScale));
    }
  }
  CHECK(fitted >= kCases * 8 / 10);
}

TEST_CASE("objective never increases under the descent rule") {
  // The default adaptive rule re-applies the variance cutoff to the weighted
  // block average on every pass and is not a descent method; the descent rule
  // is, so monotonicity is checked there.
  Rng rng(3);
  int fitted = 0;
  for (int c = 0; c < kCases; ++c) {
    const FeatureSet f = build_features(random_dataset(rng), 2);
    FitOptions opts;
    opts.seed = rng.next();
    opts.fuzziness = rng.uniform(1.2, 2.5);
    opts.subspace_rule = SubspaceRule::Descent;
    opts.tol = 1e-9;
    opts.max_iter = 200;
    try {
      const FitResult fit = fit_fcpca(f, opts);
      for (std::size_t t = 1; t < fit.objective_trace.size(); ++t)
        CHECK(fit.objective_trace[t] <= fit.objective_trace[t - 1] * (1 + 1e-9) + 1e-12);
      ++fitted;
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::EmptyClusterError);
    }
  }
  CHECK(fitted >= kCases * 9 / 10);
}

TEST_CASE("projectors are symmetric and idempotent") {
  Rng rng(4);
  for (int c = 0; c < kCases; ++c) {
    const auto d = static_cast<Eigen::Index>(2 + rng.below(9));
    const SubspaceAxes a = common_axes(random_spd(rng, d), rng.uniform(0.3, 0.999));
    const Eigen::MatrixXd p = a.projector();
    CHECK((p - p.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((p * p - p).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(p.trace() == doctest::Approx(static_cast<double>(a.rank())).epsilon(1e-10));
  }
}

TEST_CASE("exponential loss is bounded by one") {
  Rng rng(5);
  for (int c = 0; c < kCases; ++c) {
    const double r = rng.uniform() < 0.1 ? 0.0 : std::exp(rng.uniform(-30, 30));
    const double beta = std::exp(rng.uniform(-10, 10));
    const double loss = exponential_loss(r, beta);
    CHECK(loss >= 0.0);
    CHECK(loss <= 1.0);

    const Eigen::MatrixXd e = random_errors(rng, 6, 3) * std::exp(rng.uniform(-5, 5));
    const Eigen::MatrixXd u = init_memberships(6, 3, rng.next());
    const double m = rng.uniform(1.1, 3.0);
    CHECK(objective_exponential(e, u, m, beta) <= u.array().pow(m).sum() * (1 + 1e-12));
  }
}

TEST_CASE("zero trimming is bit-identical to FCPCA") {
  Rng rng(6);
  for (int c = 0; c < kCases; ++c) {
    const FeatureSet f = build_features(random_dataset(rng), 2);
    FitOptions opts;
    opts.seed = rng.next();
    opts.fuzziness = rng.uniform(1.2, 2.5);
    opts.max_iter = 50;
    std::optional<FitResult> a, b;
    std::string ea, eb;
    try {
      a = fit_fcpca(f, opts);
    } catch (const Error& e) {
      ea = e.name();
    }
    try {
      b = fit_rfcpca_t(f, opts, TrimOptions{0.0});
    } catch (const Error& e) {
      eb = e.name();
    }
    REQUIRE(ea == eb);
    if (!a) continue;
    CHECK(a->memberships == b->memberships);
    CHECK(a->errors == b->errors);
    CHECK(a->objective_trace == b->objective_trace);
  }
}

TEST_CASE("cluster relabeling is equivariant") {
  Rng rng(7);
  for (int c = 0; c < kCases; ++c) {
    const auto n = static_cast<Eigen::Index>(3 + rng.below(8));
    const auto s = static_cast<Eigen::Index>(2 + rng.below(3));
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(s));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    for (std::size_t i = perm.size() - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    auto permute = [&](const Eigen::MatrixXd& m) {
      Eigen::MatrixXd out = m;
      for (Eigen::Index j = 0; j < s; ++j) out.col(j) = m.col(perm[static_cast<std::size_t>(j)]);
      return out;
    };
    const Eigen::MatrixXd e = random_errors(rng, n, s);
    const double m = rng.uniform(1.1, 3.0);
    // Equal up to the order of the row sums.
    CHECK(testing::rel_diff(update_memberships_fcpca(permute(e), m),
                            permute(update_memberships_fcpca(e, m))) < 1e-12);
    const double beta = rng.uniform(0.1, 2.0);
    CHECK(testing::rel_diff(update_memberships_exponential(permute(e), m, beta),
                            permute(update_memberships_exponential(e, m, beta))) < 1e-12);

    // Subspaces follow their membership columns.
    if (c % 4 == 0) {
      const FeatureSet f = build_features(random_dataset(rng), 2);
      const Eigen::MatrixXd u = init_memberships(static_cast<Eigen::Index>(f.size()), 2, rng.next());
      Eigen::MatrixXd swapped = u;
      swapped.col(0).swap(swapped.col(1));
      const double fuzz = rng.uniform(1.2, 2.5);
      const ClusterSubspaces a = update_subspaces(f, u, fuzz, 0.9);
      const ClusterSubspaces b = update_subspaces(f, swapped, fuzz, 0.9);
      CHECK(testing::rel_diff(a.at(0, 1).projector(), b.at(1, 1).projector()) < 1e-10);
      CHECK(testing::rel_diff(a.at(1, 2).projector(), b.at(0, 2).projector()) < 1e-10);
    }
  }
}

TEST_CASE("simulation is deterministic and replayable") {
  Rng rng(8);
  for (int c = 0; c < kCases; ++c) {
    CleanConfig clean;
    clean.per_group = 1 + rng.below(3);
    clean.channels = static_cast<Eigen::Index>(2 + rng.below(6));
    clean.length = static_cast<Eigen::Index>(80 + rng.below(60));
    if (rng.uniform() < 0.3)
      clean.length_range = std::pair<Eigen::Index, Eigen::Index>{80, 160};
    clean.seed = rng.next();
    clean.burn_in = 50;
    const SimulatedData base = generate_clean_dataset(clean);
    SimulatedData dirty;
    if (c % 2 == 0) {
      BurstConfig b;
      b.seed = rng.next();
      b.rate = rng.uniform(0.0, 1.0);
      dirty = inject_bursts(base, b);
      const SimulatedData again = inject_bursts(generate_clean_dataset(clean), b);
      for (std::size_t i = 0; i < dirty.data.size(); ++i)
        CHECK(dirty.data.series[i] == again.data.series[i]);
      CHECK(dirty.manifest.contaminated == again.manifest.contaminated);
    } else {
      BlinkConfig b;
      b.seed = rng.next();
      b.rate = rng.uniform(0.0, 1.0);
      dirty = inject_eyeblinks(base, b);
      const SimulatedData again = inject_eyeblinks(generate_clean_dataset(clean), b);
      for (std::size_t i = 0; i < dirty.data.size(); ++i)
        CHECK(dirty.data.series[i] == again.data.series[i]);
    }
    const MtsDataset replay = apply_artifacts(base.data, dirty.manifest);
    for (std::size_t i = 0; i < dirty.data.size(); ++i) {
      CHECK(replay.series[i] == dirty.data.series[i]);
      const bool hit = std::find(dirty.manifest.contaminated.begin(), dirty.manifest.contaminated.end(),
                                 i) != dirty.manifest.contaminated.end();
      if (!hit) CHECK(dirty.data.series[i] == base.data.series[i]);
    }
    for (const ArtifactEvent& e : dirty.manifest.events)
      CHECK(e.start + e.duration <= static_cast<std::size_t>(dirty.data.series[e.trial].rows()));
  }
}

TEST_CASE("principal angles are symmetric and rotation invariant") {
  Rng rng(9);
  for (int c = 0; c < kCases; ++c) {
    const auto d = static_cast<Eigen::Index>(3 + rng.below(6));
    const auto ka = static_cast<Eigen::Index>(1 + rng.below(static_cast<std::uint64_t>(d - 1)));
    const auto kb = static_cast<Eigen::Index>(1 + rng.below(static_cast<std::uint64_t>(d - 1)));
    const Eigen::MatrixXd a = testing::random_orthonormal(rng, d, ka);
    const Eigen::MatrixXd b = testing::random_orthonormal(rng, d, kb);
    const Eigen::VectorXd ab = principal_angles(a, b);
    CHECK((ab - principal_angles(b, a)).cwiseAbs().maxCoeff() < 1e-7);
    const Eigen::MatrixXd qa = testing::random_orthonormal(rng, ka, ka);
    const Eigen::MatrixXd qb = testing::random_orthonormal(rng, kb, kb);
    // Cosines are compared: arccos is ill-conditioned near zero angles.
    const Eigen::VectorXd rotated = principal_angles(a * qa, b * qb);
    CHECK((ab.array().cos() - rotated.array().cos()).abs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("channel contributions sum to the rank") {
  Rng rng(10);
  for (int c = 0; c < kCases; ++c) {
    const auto p = static_cast<Eigen::Index>(1 + rng.below(8));
    const auto k = static_cast<Eigen::Index>(1 + rng.below(static_cast<std::uint64_t>(2 * p)));
    const Eigen::MatrixXd axes = testing::random_orthonormal(rng, 2 * p, k);
    const Eigen::VectorXd contrib = channel_contributions(axes, p);
    CHECK(contrib.sum() == doctest::Approx(static_cast<double>(k)).epsilon(1e-10));
    CHECK(contrib.minCoeff() >= 0.0);
    const Eigen::MatrixXd q = testing::random_orthonormal(rng, k, k);
    CHECK((channel_contributions(axes * q, p) - contrib).cwiseAbs().maxCoeff() < 1e-10);
  }
}
