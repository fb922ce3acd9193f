#include <doctest.h>

#include <algorithm>
#include <random>

#include "hybridrisk/qp.hpp"
#include "test_util.hpp"

using namespace hybridrisk;

namespace {

void check_kkt(const HybridMatrix& m, const SolveReport& r, const Eigen::VectorXd* mu = nullptr,
               double mu0 = 0.0) {
  const KktResiduals res = kkt_residuals(m, r, mu, mu0);
  CHECK(res.stationarity <= 1e-7);
  CHECK(res.complementarity <= 1e-9);
  CHECK(res.dual >= -1e-9);
}

}  // namespace

TEST_CASE("closed form on the identity gives equal weights") {
  const HybridMatrix m{1.0, Eigen::MatrixXd::Identity(4, 4)};
  const SolveReport r = solve_closed_form(m);
  for (int i = 0; i < 4; ++i) CHECK(r.weights(i) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(r.objective == doctest::Approx(0.25).epsilon(1e-14));
  check_kkt(m, r);
}

TEST_CASE("closed form reproduces the three-asset minimum-variance example") {
  const RiskModel model = testutil::minvar_example_model();
  const SolveReport r = solve_closed_form(hybrid_matrix(model, 1.0));
  CHECK(std::abs(r.weights(0) - 0.4110) < 1e-3);
  CHECK(std::abs(r.weights(1) - 0.7271) < 1e-3);
  CHECK(std::abs(r.weights(2) - (-0.1381)) < 1e-3);
  CHECK(std::abs(r.objective - 0.03354) < 5e-4);
  CHECK(r.weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("closed form on diag(1,2)") {
  Eigen::MatrixXd d = Eigen::Vector2d(1.0, 2.0).asDiagonal();
  const SolveReport r = solve_closed_form(HybridMatrix{1.0, d});
  CHECK(r.weights(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(r.weights(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("closed form rejects indefinite and singular matrices") {
  CHECK_THROWS_AS(solve_closed_form(HybridMatrix{1.0, -Eigen::MatrixXd::Identity(3, 3)}),
                  computation_error);
  CHECK_THROWS_AS(solve_closed_form(HybridMatrix{1.0, Eigen::MatrixXd::Zero(3, 3)}),
                  computation_error);
}

TEST_CASE("long-only solve reproduces the three-asset example with the third asset pinned") {
  const RiskModel model = testutil::minvar_example_model();
  const HybridMatrix m = hybrid_matrix(model, 1.0);
  const SolveReport r = solve_long_only(m);
  CHECK(std::abs(r.weights(0) - 0.4005) < 1e-3);
  CHECK(std::abs(r.weights(1) - 0.5995) < 1e-3);
  CHECK(r.weights(2) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::abs(r.objective - 0.03731) < 5e-4);
  REQUIRE(r.active_set.size() == 1);
  CHECK(r.active_set[0] == 2);
  check_kkt(m, r);
}

TEST_CASE("long-only solve equals the closed form when the interior solution is feasible") {
  const HybridMatrix m{1.0, Eigen::MatrixXd::Identity(4, 4)};
  const SolveReport interior = solve_closed_form(m);
  const SolveReport r = solve_long_only(m);
  CHECK((r.weights - interior.weights).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK(r.active_set.empty());
}

TEST_CASE("long-only objective matches a dense simplex grid search") {
  const double step = 0.005;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(seed);
    const Eigen::MatrixXd m = testutil::random_pd(3, rng);
    const HybridMatrix hm{1.0, m};
    const SolveReport r = solve_long_only(hm);
    const double grid = testutil::simplex_grid_min(m, step);
    CHECK(r.objective <= grid + 1e-12);
    CHECK(r.objective >= grid - 2.0 * step * step * m.norm());
    check_kkt(hm, r);
  }
}

TEST_CASE("long-only handles a singular matrix via ridge and reports it") {
  // rank-1 PSD matrix: the QP is degenerate but bounded on the simplex
  Eigen::Vector3d v(1.0, 2.0, 3.0);
  const Eigen::MatrixXd m = v * v.transpose();
  const SolveReport r = solve_long_only(HybridMatrix{0.0, m});
  CHECK(r.regularized);
  CHECK(r.weights.sum() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(r.weights.minCoeff() >= -1e-10);
}

TEST_CASE("return target inactive when mu0 is below the unconstrained return") {
  const RiskModel model = testutil::random_model(4, 5);
  const SolveReport base = solve_closed_form(hybrid_matrix(model, 0.7));
  const SolveReport r = solve_with_return_target(model, 0.7, -10.0, /*long_only=*/false);
  CHECK((r.weights - base.weights).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK(r.theta == 0.0);
}

TEST_CASE("long-only return target at the maximum mean forces the argmax vertex") {
  const RiskModel model = testutil::cross_example_model();  // mu = (0.08, 0.06, 0.10)
  const SolveReport r = solve_with_return_target(model, 0.5, 0.10, /*long_only=*/true);
  CHECK(r.weights(0) == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(r.weights(1) == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(r.weights(2) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("return target above the attainable maximum is rejected (long-only)") {
  const RiskModel model = testutil::cross_example_model();
  CHECK_THROWS_AS(solve_with_return_target(model, 0.5, 0.2, /*long_only=*/true),
                  computation_error);
}

TEST_CASE("hybrid optimum at lambda=0.4 in the three-asset cross example") {
  const RiskModel model = testutil::cross_example_model();
  const SolveReport r = solve_with_return_target(model, 0.4, -1.0, /*long_only=*/false);
  CHECK(std::abs(r.weights(0) - 0.3378) < 1e-3);
  CHECK(std::abs(r.weights(1) - 0.3804) < 1e-3);
  CHECK(std::abs(r.weights(2) - 0.2818) < 1e-3);
}

TEST_CASE("binding return target raises the objective and is met with equality") {
  const RiskModel model = testutil::cross_example_model();
  const SolveReport base = solve_long_only(hybrid_matrix(model, 0.6));
  const double r_base = base.weights.dot(model.mu());
  const double mu0 = r_base + 0.4 * (model.mu().maxCoeff() - r_base);
  const SolveReport r = solve_with_return_target(model, 0.6, mu0, /*long_only=*/true);
  CHECK(r.theta > 0.0);
  CHECK(r.weights.dot(model.mu()) == doctest::Approx(mu0).epsilon(1e-8));
  CHECK(r.objective >= base.objective - 1e-12);
  const Eigen::VectorXd mu = model.mu();
  check_kkt(hybrid_matrix(model, 0.6), r, &mu, mu0);
}

TEST_CASE("binding return target matches the restricted simplex grid search") {
  const double step = 0.004;
  std::mt19937_64 rng(99);
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::MatrixXd sigma = testutil::random_pd(3, rng);
    const Eigen::MatrixXd conn = testutil::random_pd(3, rng);
    const Eigen::VectorXd mu = testutil::random_mu(3, rng);
    const RiskModel model(sigma, conn, mu);
    const double mu0 = 0.5 * (mu.minCoeff() + mu.maxCoeff());
    const SolveReport r = solve_with_return_target(model, 0.5, mu0, /*long_only=*/true);
    const Eigen::MatrixXd m = hybrid_matrix(model, 0.5).matrix;
    const double grid = testutil::simplex_grid_min(m, step, &mu, mu0);
    CHECK(r.objective <= grid + 1e-12);
    // With the return constraint binding, the nearest feasible grid point can
    // sit O(step) away along the constraint plane, so the gap is linear in step.
    CHECK(r.objective >= grid - step * m.norm());
  }
}

TEST_CASE("KKT certificates hold on random long-only instances") {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 30; ++rep) {
    const int n = 3 + static_cast<int>(rng() % 8);
    const Eigen::MatrixXd m = testutil::random_pd(n, rng);
    const HybridMatrix hm{1.0, m};
    const SolveReport r = solve_long_only(hm);
    check_kkt(hm, r);
    CHECK(r.weights.minCoeff() >= -1e-12);
    CHECK(r.weights.sum() == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("optimal weights are invariant under asset permutation") {
  const RiskModel model = testutil::random_model(5, 13);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(5);
  perm.setIdentity();
  std::mt19937_64 rng(17);
  std::shuffle(perm.indices().data(), perm.indices().data() + 5, rng);
  const Eigen::MatrixXd p = perm;
  const RiskModel permuted(p * model.sigma() * p.transpose(), p * model.conn() * p.transpose(),
                           p * model.mu());
  for (double lambda : {0.2, 0.8}) {
    const SolveReport a = solve_long_only(hybrid_matrix(model, lambda));
    const SolveReport b = solve_long_only(hybrid_matrix(permuted, lambda));
    CHECK((p * a.weights - b.weights).lpNorm<Eigen::Infinity>() < 1e-9);
  }
}

TEST_CASE("solution path is continuous in lambda") {
  const RiskModel model = testutil::random_model(5, 41);
  const auto path_jump = [&](double h) {
    double worst = 0.0;
    Eigen::VectorXd prev;
    for (double lambda = 0.1; lambda <= 0.9 + 1e-12; lambda += h) {
      const Eigen::VectorXd w = solve_long_only(hybrid_matrix(model, lambda)).weights;
      if (prev.size() > 0) worst = std::max(worst, (w - prev).lpNorm<Eigen::Infinity>());
      prev = w;
    }
    return worst;
  };
  const double coarse = path_jump(0.02);
  const double fine = path_jump(0.01);
  CHECK(fine <= 0.75 * coarse + 1e-12);  // jumps shrink roughly linearly with the step
}

TEST_CASE("proportional C collapses every hybrid solve to minimum variance") {
  std::mt19937_64 rng(53);
  const Eigen::MatrixXd sigma = testutil::random_pd(4, rng);
  for (double c : {0.5, 1.0, 2.0}) {
    const RiskModel model(sigma, c * sigma, Eigen::VectorXd::Zero(4));
    const Eigen::VectorXd mv = solve_closed_form(hybrid_matrix(model, 1.0)).weights;
    for (double lambda : {0.0, 0.3, 0.7}) {
      const SolveReport r = solve_closed_form(hybrid_matrix(model, lambda));
      CHECK((r.weights - mv).lpNorm<Eigen::Infinity>() < 1e-9);
    }
  }
}
