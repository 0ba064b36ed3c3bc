#include "helpers.hpp"

#include "rfcpca/errors.hpp"
#include "rfcpca/evaluation.hpp"
#include "rfcpca/fcpca.hpp"

#include <doctest.h>

using namespace rfcpca;

namespace {

std::vector<int> argmax_labels(const Eigen::MatrixXd& u) {
  std::vector<int> out;
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    Eigen::Index arg = 0;
    u.row(i).maxCoeff(&arg);
    out.push_back(static_cast<int>(arg));
  }
  return out;
}

}  // namespace

TEST_CASE("init memberships") {
  CHECK(init_memberships(5, 1, 3) == Eigen::MatrixXd::Ones(5, 1));
  const Eigen::MatrixXd u = init_memberships(50, 4, 3);
  for (Eigen::Index i = 0; i < 50; ++i) CHECK(std::abs(u.row(i).sum() - 1.0) < 1e-12);
  CHECK(u == init_memberships(50, 4, 3));
  CHECK(u != init_memberships(50, 4, 4));
  CHECK_THROWS_AS(init_memberships(3, 4, 0), Error);
  CHECK_THROWS_AS(init_memberships(3, 0, 0), Error);
}

TEST_CASE("fuzzy membership update") {
  Eigen::MatrixXd e(4, 2);
  e << 1, 1, 1, 4, 0, 7, 0, 0;
  const Eigen::MatrixXd u = update_memberships_fcpca(e, 2.0);
  CHECK(u(0, 0) == doctest::Approx(0.5));
  CHECK(u(1, 0) == doctest::Approx(0.8));
  CHECK(u(1, 1) == doctest::Approx(0.2));
  CHECK(u(2, 0) == 1.0);
  CHECK(u(2, 1) == 0.0);
  CHECK(u(3, 0) == 0.5);
  CHECK(is_row_stochastic(u));
  CHECK_THROWS_AS(update_memberships_fcpca(e, 1.0), Error);
}

TEST_CASE("membership update is scale free") {
  Rng rng(12);
  const Eigen::MatrixXd e = testing::random_matrix(rng, 10, 3).cwiseAbs();
  const Eigen::MatrixXd a = update_memberships_fcpca(e, 1.7);
  const Eigen::MatrixXd b = update_memberships_fcpca(9.0 * e, 1.7);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("objective") {
  Eigen::MatrixXd e(2, 2), u(2, 2);
  e << 1, 2, 3, 4;
  u << 0.5, 0.5, 0.5, 0.5;
  CHECK(objective_fcpca(e, u, 2.0) == doctest::Approx(2.5));
  CHECK(objective_fcpca(Eigen::MatrixXd::Zero(2, 2), u, 2.0) == 0.0);
  u << 1, 0, 0, 1;
  CHECK(objective_fcpca(e, u, 1.3) == doctest::Approx(5.0));
}

TEST_CASE("subspace update") {
  const MtsDataset data = testing::planted_dataset(21, 3, 3, 40);
  const FeatureSet f = build_features(data, 2);

  SUBCASE("single cluster uses the plain block average") {
    const ClusterSubspaces c = update_subspaces(f, Eigen::MatrixXd::Ones(6, 1), 2.0, 0.95);
    for (int l = 1; l <= 2; ++l) {
      Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(6, 6);
      for (const auto& b : f.blocks) mean += b.blocks[l - 1];
      const SubspaceAxes want = common_axes(mean / 6.0, 0.95);
      CHECK(testing::rel_diff(c.at(0, l).projector(), want.projector()) < 1e-10);
    }
  }
  SUBCASE("crisp partition only sees its members") {
    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(6, 2);
    u.block(0, 0, 3, 1).setOnes();
    u.block(3, 1, 3, 1).setOnes();
    const ClusterSubspaces c = update_subspaces(f, u, 2.0, 0.95);
    FeatureSet first = f;
    first.blocks.resize(3);
    first.grams.resize(3);
    const ClusterSubspaces solo = update_subspaces(first, Eigen::MatrixXd::Ones(3, 1), 2.0, 0.95);
    CHECK(testing::rel_diff(c.at(0, 1).projector(), solo.at(0, 1).projector()) < 1e-10);
  }
  SUBCASE("empty cluster is named") {
    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(6, 2);
    u.col(0).setOnes();
    try {
      update_subspaces(f, u, 2.0, 0.95);
      FAIL("expected EmptyClusterError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::EmptyClusterError);
      CHECK(std::string(e.what()).find("cluster 2") != std::string::npos);
    }
  }
  SUBCASE("descent rule honours fixed ranks") {
    const Eigen::MatrixXd u = init_memberships(6, 2, 1).array().square();
    const RankTable ranks = {{1, 2}, {3, 1}};
    const ClusterSubspaces c = subspaces_from_weights(f, u, 0.95, SubspaceRule::Descent, &ranks);
    CHECK(subspace_ranks(c) == ranks);
  }
}

TEST_CASE("planted orthogonal planes are recovered crisply") {
  // White latents or one-dimensional lines are not enough: with a flat
  // spectrum and near-uniform initial weights the variance rule keeps both
  // groups' directions in both clusters.
  Rng rng(31);
  const Eigen::MatrixXd q = testing::random_orthonormal(rng, 6, 4);
  const Eigen::MatrixXd basis[2] = {q.leftCols(2), q.rightCols(2)};
  MtsDataset data;
  for (int g = 0; g < 2; ++g)
    for (int i = 0; i < 4; ++i) {
      Eigen::MatrixXd z = testing::random_matrix(rng, 50, 2);
      for (Eigen::Index t = 1; t < 50; ++t) z.row(t) += 0.6 * z.row(t - 1);
      data.series.push_back(z * basis[g].transpose() + 0.01 * testing::random_matrix(rng, 50, 6));
      data.labels.push_back(g);
    }
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    FitOptions opts;
    opts.seed = seed;
    const FitResult fit = fit_fcpca(data, opts);
    CHECK(fit.converged);
    CHECK(rand_index(argmax_labels(fit.memberships), data.labels) == 1.0);
    CHECK(fit.memberships.rowwise().maxCoeff().minCoeff() > 0.9);
  }
}

TEST_CASE("single cluster converges immediately") {
  const MtsDataset data = testing::planted_dataset(2, 3, 3, 30);
  FitOptions opts;
  opts.clusters = 1;
  const FitResult fit = fit_fcpca(data, opts);
  CHECK(fit.iterations <= 2);
  CHECK(fit.memberships == Eigen::MatrixXd::Ones(6, 1));
}

TEST_CASE("fits are deterministic") {
  const MtsDataset data = testing::planted_dataset(3, 4, 6, 60, 2);
  FitOptions opts;
  opts.seed = 17;
  const FitResult a = fit_fcpca(data, opts);
  const FitResult b = fit_fcpca(data, opts);
  CHECK(a.memberships == b.memberships);
  CHECK(a.objective_trace == b.objective_trace);
  CHECK(a.errors == b.errors);
}

TEST_CASE("descent rule never increases the objective") {
  const MtsDataset data = testing::planted_dataset(8, 5, 4, 60, 2, 0.3);
  FitOptions opts;
  opts.seed = 4;
  opts.subspace_rule = SubspaceRule::Descent;
  opts.fuzziness = 1.6;
  const FitResult fit = fit_fcpca(data, opts);
  for (std::size_t t = 1; t < fit.objective_trace.size(); ++t)
    CHECK(fit.objective_trace[t] <= fit.objective_trace[t - 1] * (1 + 1e-8) + 1e-8);
  const RankTable first = subspace_ranks(fit.subspaces);
  CHECK(first.size() == 2);
}

TEST_CASE("option validation") {
  const MtsDataset data = testing::planted_dataset(3, 2, 2, 20);
  FitOptions opts;
  opts.fuzziness = 1.0;
  CHECK_THROWS_AS(fit_fcpca(data, opts), Error);
  opts = {};
  opts.variance = 1.5;
  CHECK_THROWS_AS(fit_fcpca(data, opts), Error);
  opts = {};
  opts.clusters = 5;
  CHECK_THROWS_AS(fit_fcpca(data, opts), Error);
}

TEST_CASE("names round trip") {
  for (Variant v : {Variant::Fcpca, Variant::Exponential, Variant::Noise, Variant::Trimmed})
    CHECK(parse_variant(variant_name(v)) == v);
  CHECK(parse_variant("t") == Variant::Trimmed);
  CHECK(!parse_variant("x"));
  CHECK(parse_subspace_rule(subspace_rule_name(SubspaceRule::Descent)) == SubspaceRule::Descent);
  CHECK(stop_reason_name(StopReason::Cycle) == "cycle");
}
