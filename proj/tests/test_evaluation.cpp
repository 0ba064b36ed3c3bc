#include "rfcpca/errors.hpp"
#include "rfcpca/evaluation.hpp"
#include "rfcpca/rng.hpp"

#include <doctest.h>

#include <array>

using namespace rfcpca;

namespace {

FitResult fit_with(Variant v, Eigen::MatrixXd u, int clusters) {
  FitResult fit;
  fit.variant = v;
  fit.clusters = clusters;
  fit.memberships = std::move(u);
  fit.errors = Eigen::MatrixXd::Ones(fit.memberships.rows(), clusters);
  return fit;
}

}  // namespace

TEST_CASE("harden") {
  CHECK(harden(std::array{0.9, 0.1}) == 0);
  CHECK(!harden(std::array{0.6, 0.4}));
  CHECK(harden(std::array{0.5, 0.5}, 0.5) == 0);
  CHECK(harden(std::array{0.3, 0.7}) == 1);
  // Just above 1/S every non-uniform row is assigned.
  CHECK(harden(std::array{0.5 + 1e-9, 0.5 - 1e-9}, 0.5 + 1e-12) == 0);
  CHECK(!harden(std::array{0.5, 0.5}, 0.5 + 1e-12));
}

TEST_CASE("harden a noise fit renormalizes the regular clusters") {
  Eigen::MatrixXd u(2, 3);
  u << 0.6, 0.1, 0.3, 0.4, 0.3, 0.3;
  const auto h = harden_fit(fit_with(Variant::Noise, u, 2));
  CHECK(h[0] == 0);  // 0.6 / 0.7
  CHECK(!h[1]);      // 0.4 / 0.7
}

TEST_CASE("outlier rules") {
  Eigen::MatrixXd u(3, 2);
  u << 0.65, 0.35, 0.9, 0.1, 0.3, 0.7;
  CHECK(flag_outliers(fit_with(Variant::Exponential, u, 2)) == std::vector<std::size_t>{0});
  CHECK(flag_outliers(fit_with(Variant::Fcpca, u, 2)) == std::vector<std::size_t>{0});

  Eigen::MatrixXd n(2, 3);
  n << 0.3, 0.2, 0.5, 0.5, 0.1, 0.4;
  CHECK(flag_outliers(fit_with(Variant::Noise, n, 2)) == std::vector<std::size_t>{0});

  FitResult t = fit_with(Variant::Trimmed, Eigen::MatrixXd::Constant(5, 2, 0.5), 2);
  t.retained = {0, 1, 2};
  const auto flagged = flag_outliers(t);
  CHECK(flagged == std::vector<std::size_t>{3, 4});
  for (std::size_t i : flagged)
    CHECK(std::find(t.retained.begin(), t.retained.end(), i) == t.retained.end());

  for (Variant v : {Variant::Fcpca, Variant::Exponential, Variant::Noise, Variant::Trimmed})
    CHECK(!outlier_rule(v).empty());
}

TEST_CASE("rand indices") {
  const std::vector<int> a{1, 1, 2, 2};
  CHECK(rand_index(a, a) == 1.0);
  CHECK(adjusted_rand_index(a, a) == doctest::Approx(1.0));
  const std::vector<int> swapped{2, 2, 1, 1};
  CHECK(rand_index(a, swapped) == 1.0);
  CHECK(adjusted_rand_index(a, swapped) == doctest::Approx(1.0));

  const std::vector<int> cross{1, 2, 1, 2};
  CHECK(rand_index(a, cross) == doctest::Approx(1.0 / 3.0));
  CHECK(adjusted_rand_index(a, cross) < 0.01);
  const PairCounts c = pair_counts(a, cross);
  CHECK(c.same_same == 0);
  CHECK(c.same_diff == 2);
  CHECK(c.diff_same == 2);
  CHECK(c.diff_diff == 2);
  CHECK(c.total() == 6);

  CHECK(rand_index(std::vector<int>{3}, std::vector<int>{1}) == 1.0);
  CHECK_THROWS_AS(rand_index(std::vector<int>{}, std::vector<int>{}), Error);
  CHECK_THROWS_AS(rand_index(a, std::vector<int>{1, 2}), Error);
}

TEST_CASE("indices ignore label names") {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> a(12), b(12), renamed(12);
    for (std::size_t i = 0; i < 12; ++i) {
      a[i] = static_cast<int>(rng.below(3));
      b[i] = static_cast<int>(rng.below(4));
      renamed[i] = 10 - 3 * b[i];
    }
    CHECK(rand_index(a, b) == doctest::Approx(rand_index(a, renamed)));
    CHECK(adjusted_rand_index(a, b) == doctest::Approx(adjusted_rand_index(renamed, a)));
    CHECK(rand_index(a, b) >= 0.0);
    CHECK(rand_index(a, b) <= 1.0);
  }
}

TEST_CASE("random labelings have ARI near zero") {
  std::vector<int> truth(20);
  for (std::size_t i = 0; i < 20; ++i) truth[i] = i < 10 ? 1 : 2;
  Rng rng(99);
  double sum = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<int> shuffled = truth;
    for (std::size_t i = shuffled.size() - 1; i > 0; --i)
      std::swap(shuffled[i], shuffled[rng.below(i + 1)]);
    sum += adjusted_rand_index(truth, shuffled);
  }
  CHECK(std::abs(sum / 1000.0) < 0.05);
}

TEST_CASE("outlier recall") {
  const std::vector<std::size_t> truth{1, 2, 3, 4};
  CHECK(outlier_recall(truth, truth) == 1.0);
  CHECK(outlier_recall(std::vector<std::size_t>{}, truth) == 0.0);
  CHECK(outlier_recall(std::vector<std::size_t>{2, 3, 9}, truth) == 0.5);
  CHECK(!outlier_recall(truth, std::vector<std::size_t>{}));
}

TEST_CASE("evaluate a fit") {
  SUBCASE("perfect clean fit") {
    Eigen::MatrixXd u(4, 2);
    u << 1, 0, 1, 0, 0, 1, 0, 1;
    const EvalReport r = evaluate_fit(fit_with(Variant::Fcpca, u, 2), std::vector<int>{1, 1, 2, 2}, {});
    CHECK(r.acc_rand == 1.0);
    CHECK(r.acc_adjusted_rand == doctest::Approx(1.0));
    CHECK(!r.outlier_recall);
    CHECK(r.flagged.empty());
    CHECK(r.scored.size() == 4);
  }
  SUBCASE("flagged objects leave the scoring") {
    Eigen::MatrixXd u(5, 2);
    u << 1, 0, 1, 0, 0, 1, 0, 1, 0.5, 0.5;
    const std::vector<std::size_t> truth{4, 1};
    const EvalReport r = evaluate_fit(fit_with(Variant::Exponential, u, 2),
                                      std::vector<int>{1, 1, 2, 2, 1}, truth);
    CHECK(r.flagged == std::vector<std::size_t>{4});
    CHECK(r.scored == std::vector<std::size_t>{0, 1, 2, 3});
    CHECK(r.acc_rand == 1.0);
    CHECK(r.outlier_recall == 0.5);
    CHECK(r.false_positives == 0);
  }
  SUBCASE("unassigned noise-fit rows count as misclassified") {
    Eigen::MatrixXd u(4, 3);
    u << 0.9, 0.1, 0.0, 0.9, 0.1, 0.0, 0.1, 0.9, 0.0, 0.3, 0.3, 0.4;
    const EvalReport r = evaluate_fit(fit_with(Variant::Noise, u, 2), std::vector<int>{1, 1, 2, 2}, {});
    CHECK(r.flagged.empty());
    CHECK(r.unassigned == std::vector<std::size_t>{3});
    // Object 3 becomes a singleton: pairs (2,3) now disagree.
    CHECK(r.acc_rand == doctest::Approx(5.0 / 6.0));
  }
  SUBCASE("too few scored objects") {
    Eigen::MatrixXd u(2, 2);
    u << 1, 0, 0.5, 0.5;
    const EvalReport r = evaluate_fit(fit_with(Variant::Fcpca, u, 2), std::vector<int>{1, 2}, {});
    CHECK(!r.acc_rand);
  }
  SUBCASE("false positives are counted") {
    FitResult t = fit_with(Variant::Trimmed, Eigen::MatrixXd::Identity(4, 2), 2);
    t.memberships << 1, 0, 1, 0, 0, 1, 0, 1;
    t.retained = {0, 2};
    const EvalReport r = evaluate_fit(t, std::vector<int>{1, 1, 2, 2}, std::vector<std::size_t>{1});
    CHECK(r.flagged == std::vector<std::size_t>{1, 3});
    CHECK(r.false_positives == 1);
    CHECK(r.outlier_recall == 1.0);
  }
}
