#include "helpers.hpp"

#include "rfcpca/errors.hpp"
#include "rfcpca/selection.hpp"

#include <doctest.h>

#include <set>

using namespace rfcpca;

namespace {

SubspaceAxes line(Eigen::Index dim, Eigen::Index k) {
  SubspaceAxes a;
  a.axes = Eigen::VectorXd::Unit(dim, k);
  return a;
}

SubspaceAxes random_axes(Rng& rng, Eigen::Index dim, Eigen::Index k) {
  SubspaceAxes a;
  a.axes = testing::random_orthonormal(rng, dim, k);
  return a;
}

// Crisp two-cluster FCPCA fit on ten objects with one lag of lines e1, e2.
FitResult toy_fit() {
  FitResult fit;
  fit.variant = Variant::Fcpca;
  fit.clusters = 2;
  fit.fuzziness = 2.0;
  fit.memberships = Eigen::MatrixXd::Zero(10, 2);
  fit.errors = Eigen::MatrixXd::Constant(10, 2, 3.0);
  for (Eigen::Index i = 0; i < 10; ++i) {
    fit.memberships(i, i % 2) = 1.0;
    fit.errors(i, i % 2) = 0.5;
  }
  fit.subspaces.clusters = {{line(2, 0)}, {line(2, 1)}};
  fit.converged = true;
  return fit;
}

}  // namespace

TEST_CASE("prototype separation") {
  ClusterSubspaces same;
  same.clusters = {{line(3, 0)}, {line(3, 0)}};
  CHECK(prototype_separation(same) == 0.0);

  ClusterSubspaces lines;
  lines.clusters = {{line(2, 0)}, {line(2, 1)}};
  CHECK(prototype_separation(lines) == doctest::Approx(2.0));

  // Lags add up.
  lines.clusters = {{line(2, 0), line(2, 0)}, {line(2, 1), line(2, 0)}};
  CHECK(prototype_separation(lines) == doctest::Approx(2.0));

  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    ClusterSubspaces three;
    for (int s = 0; s < 3; ++s)
      three.clusters.push_back({random_axes(rng, 5, 1 + s % 2), random_axes(rng, 5, 2)});
    double brute = 1e300;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        if (a == b) continue;
        double d = 0.0;
        for (int l = 0; l < 2; ++l) {
          const Eigen::MatrixXd pa = three.clusters[a][l].axes * three.clusters[a][l].axes.transpose();
          const Eigen::MatrixXd pb = three.clusters[b][l].axes * three.clusters[b][l].axes.transpose();
          d += (pa - pb).squaredNorm();
        }
        brute = std::min(brute, d);
      }
    CHECK(std::abs(prototype_separation(three) - brute) <= 1e-12 * std::max(1.0, brute));
  }

  ClusterSubspaces one;
  one.clusters = {{line(2, 0)}};
  try {
    prototype_separation(one);
    FAIL("expected SingleCluster");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingleCluster);
  }
}

TEST_CASE("cvi arithmetic") {
  FitResult fit = toy_fit();
  CHECK(variant_objective(fit) == doctest::Approx(5.0));
  CHECK(cvi(fit) == doctest::Approx(0.25));

  fit.errors.setZero();
  CHECK(cvi(fit) == 0.0);

  fit = toy_fit();
  fit.subspaces.clusters[1] = fit.subspaces.clusters[0];
  try {
    cvi(fit);
    FAIL("expected DegenerateSeparation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateSeparation);
  }
}

TEST_CASE("cvi ignores cluster order") {
  FitResult fit = toy_fit();
  Rng rng(2);
  fit.memberships = init_memberships(10, 3, 4);
  fit.errors = testing::random_matrix(rng, 10, 3).cwiseAbs();
  fit.clusters = 3;
  fit.subspaces.clusters = {{random_axes(rng, 4, 2)}, {random_axes(rng, 4, 1)},
                            {random_axes(rng, 4, 2)}};
  const double base = cvi(fit);
  const int perm[3] = {2, 0, 1};
  FitResult moved = fit;
  for (int s = 0; s < 3; ++s) {
    moved.memberships.col(s) = fit.memberships.col(perm[s]);
    moved.errors.col(s) = fit.errors.col(perm[s]);
    moved.subspaces.clusters[s] = fit.subspaces.clusters[perm[s]];
  }
  CHECK(cvi(moved) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("noise variant separation uses regular clusters only") {
  FitResult fit = toy_fit();
  fit.variant = Variant::Noise;
  fit.delta2 = 2.0;
  fit.lambda = 1.0;
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(10, 3);
  u.leftCols(2) = 0.8 * fit.memberships;
  u.col(2).setConstant(0.2);
  fit.memberships = u;
  // J = sum u^2 r^2 over regular columns + sum u_noise^2 delta^2.
  const double j = 10 * (0.64 * 0.5) + 10 * (0.04 * 2.0);
  CHECK(variant_objective(fit) == doctest::Approx(j));
  CHECK(cvi(fit) == doctest::Approx(j / (10 * 2.0)));
}

TEST_CASE("trimmed variant keeps N in the denominator") {
  FitResult fit = toy_fit();
  fit.variant = Variant::Trimmed;
  fit.alpha = 0.2;
  fit.retained = {0, 1, 2, 3, 4, 5, 6, 7};
  CHECK(variant_objective(fit) == doctest::Approx(4.0));
  CHECK(cvi(fit) == doctest::Approx(4.0 / 20.0));
}

TEST_CASE("candidate seeds are distinct") {
  std::set<std::uint64_t> seen;
  for (std::size_t t = 0; t < 20; ++t)
    for (int r = 0; r < 3; ++r) seen.insert(candidate_seed(7, t, r));
  CHECK(seen.size() == 60);
  CHECK(candidate_seed(7, 3, 1) == candidate_seed(7, 3, 1));
  CHECK(candidate_seed(7, 3, 1) != candidate_seed(8, 3, 1));
}

TEST_CASE("default grids") {
  const SearchGrid g = SearchGrid::defaults(Variant::Trimmed);
  CHECK(g.clusters == std::vector<int>{2, 3, 4, 5, 6});
  CHECK(g.fuzziness == std::vector<double>{1.1, 1.2, 1.4, 1.6, 1.8, 2.0, 2.2, 2.5});
  CHECK(g.alphas.size() == 5);
  CHECK(SearchGrid::defaults(Variant::Noise).variant == Variant::Noise);
}

TEST_CASE("single tuple grid returns that fit") {
  const FeatureSet f = build_features(testing::planted_dataset(3, 4, 6, 60, 2), 2);
  SearchGrid grid;
  grid.clusters = {2};
  grid.fuzziness = {1.6};
  SearchOptions opts;
  opts.restarts = 1;
  const Selection sel = grid_search(f, grid, opts, 11);
  FitOptions fo;
  fo.clusters = 2;
  fo.fuzziness = 1.6;
  fo.seed = candidate_seed(11, 0, 0);
  const FitResult direct = fit_variant(f, Variant::Fcpca, fo, opts);
  CHECK(sel.fit.memberships == direct.memberships);
  CHECK(sel.fit.objective_trace == direct.objective_trace);
  REQUIRE(sel.report.candidates.size() == 1);
  CHECK(sel.report.winner == 0);
  CHECK(sel.report.candidates[0].seed == fo.seed);
}

TEST_CASE("grid search is reproducible and scale free") {
  const MtsDataset data = testing::planted_dataset(8, 4, 6, 60, 2);
  MtsDataset scaled = data;
  for (auto& x : scaled.series) x *= 3.0;
  SearchGrid grid;
  grid.clusters = {2, 3};
  grid.fuzziness = {1.4, 2.0};
  SearchOptions opts;
  opts.restarts = 2;
  const FeatureSet f = build_features(data, 2);
  const Selection a = grid_search(f, grid, opts, 5);
  const Selection b = grid_search(f, grid, opts, 5);
  const Selection c = grid_search(build_features(scaled, 2), grid, opts, 5);
  CHECK(a.report.winner == b.report.winner);
  CHECK(a.fit.memberships == b.fit.memberships);
  CHECK(a.report.winner == c.report.winner);
  const auto& wa = a.report.candidates[a.report.winner];
  const auto& wc = c.report.candidates[c.report.winner];
  REQUIRE(wa.cvi.has_value());
  REQUIRE(wc.cvi.has_value());
  CHECK(*wc.cvi == doctest::Approx(9.0 * *wa.cvi).epsilon(1e-6));
}

TEST_CASE("planted two-group data selects two clusters") {
  SearchGrid grid;
  grid.clusters = {2, 3};
  SearchOptions opts;
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const FeatureSet f = build_features(testing::planted_dataset(100 + seed, 5, 6, 60, 2), 2);
    const Selection sel = grid_search(f, grid, opts, seed);
    hits += sel.fit.clusters == 2;
  }
  CHECK(hits >= 9);
}

TEST_CASE("trimmed grid searches alpha") {
  const FeatureSet f = build_features(testing::planted_dataset(4, 5, 6, 60, 2), 2);
  SearchGrid grid = SearchGrid::defaults(Variant::Trimmed);
  grid.clusters = {2};
  grid.fuzziness = {2.0};
  grid.alphas = {0.1, 0.2};
  SearchOptions opts;
  opts.restarts = 1;
  const Selection sel = grid_search(f, grid, opts, 1);
  CHECK(sel.report.candidates.size() == 2);
  CHECK(sel.fit.alpha.has_value());
  for (const auto& c : sel.report.candidates) CHECK(c.alpha.has_value());
}

TEST_CASE("every candidate failing is reported") {
  const FeatureSet f = build_features(testing::planted_dataset(4, 2, 3, 30), 2);
  SearchGrid grid;
  grid.clusters = {6};
  grid.fuzziness = {2.0};
  try {
    grid_search(f, grid, {}, 0);
    FAIL("expected AllCandidatesFailed");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AllCandidatesFailed);
  }
}
