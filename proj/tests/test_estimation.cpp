#include <doctest.h>

#include <random>

#include "hybridrisk/estimation.hpp"
#include "hybridrisk/synth.hpp"
#include "test_util.hpp"

using namespace hybridrisk;

namespace {

// Valid panel skeleton (dates, labels) with caller-supplied return data.
ReturnPanel panel_with_returns(const Eigen::MatrixXd& returns, std::uint64_t seed = 1) {
  ReturnPanel panel = generate_panel(seed, static_cast<int>(returns.cols()),
                                     static_cast<int>(returns.rows()), SynthRegime::iid);
  panel.returns = returns;
  return panel;
}

Eigen::MatrixXd sample_cov(const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  return centered.transpose() * centered / (x.rows() - 1.0);
}

}  // namespace

TEST_CASE("zero shrinkage returns the sample covariance exactly") {
  const ReturnPanel panel = generate_panel(3, 4, 300, SynthRegime::iid);
  EstimationConfig config;
  config.shrinkage = 0.0;
  CHECK((shrink_covariance(panel, config) - sample_cov(panel.returns)).norm() == 0.0);
}

TEST_CASE("full shrinkage returns the scaled identity exactly") {
  const ReturnPanel panel = generate_panel(3, 4, 300, SynthRegime::iid);
  EstimationConfig config;
  config.shrinkage = 1.0;
  const Eigen::MatrixXd s = sample_cov(panel.returns);
  const Eigen::MatrixXd target = (s.trace() / 4.0) * Eigen::MatrixXd::Identity(4, 4);
  CHECK((shrink_covariance(panel, config) - target).norm() == 0.0);
}

TEST_CASE("sample covariance converges to the generating diagonal matrix") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  const Eigen::Vector3d sd(1.0, 0.7, 0.5);
  Eigen::MatrixXd x(5000, 3);
  for (int t = 0; t < 5000; ++t)
    for (int j = 0; j < 3; ++j) x(t, j) = sd(j) * normal(rng);
  EstimationConfig config;
  config.shrinkage = 0.0;
  const Eigen::MatrixXd s = shrink_covariance(panel_with_returns(x), config);
  const Eigen::Matrix3d truth = sd.array().square().matrix().asDiagonal();
  CHECK((s - truth).lpNorm<Eigen::Infinity>() < 0.05);
}

TEST_CASE("automatic shrinkage intensity stays in [0,1] and preserves the trace") {
  const ReturnPanel panel = generate_panel(5, 5, 400, SynthRegime::factor);
  EstimationConfig config;  // auto intensity
  const Eigen::MatrixXd shrunk = shrink_covariance(panel, config);
  const Eigen::MatrixXd s = sample_cov(panel.returns);
  CHECK(shrunk.trace() == doctest::Approx(s.trace()).epsilon(1e-10));
  // shrunk off-diagonals are the sample ones scaled by (1 - delta), delta in [0,1]
  const double ratio = shrunk(0, 1) / s(0, 1);
  CHECK(ratio >= -1e-12);
  CHECK(ratio <= 1.0 + 1e-12);
}

TEST_CASE("VAR(1) coefficients vanish on white noise") {
  const ReturnPanel panel = generate_panel(21, 4, 5000, SynthRegime::iid);
  const Var1Fit fit = fit_var1(panel);
  CHECK(fit.coef.lpNorm<Eigen::Infinity>() < 0.1);
}

TEST_CASE("VAR(1) fit recovers the generating coefficients") {
  const ReturnPanel panel = generate_panel(7, 4, 5000, SynthRegime::var1);
  const Var1Fit fit = fit_var1(panel);
  CHECK((fit.coef - synth_var1_coefficients(4)).lpNorm<Eigen::Infinity>() < 0.05);
}

TEST_CASE("scalar AR(1) recovery") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd x(10000, 1);
  x(0, 0) = 0.0;
  for (int t = 1; t < 10000; ++t) x(t, 0) = 0.8 * x(t - 1, 0) + normal(rng);
  const Var1Fit fit = fit_var1(panel_with_returns(x));
  CHECK(std::abs(fit.coef(0, 0) - 0.8) < 0.03);
}

TEST_CASE("FEVD is the identity for static orthogonal shocks") {
  const Eigen::MatrixXd d =
      generalized_fevd(Eigen::MatrixXd::Zero(3, 3), Eigen::MatrixXd::Identity(3, 3), 10);
  CHECK((d - Eigen::MatrixXd::Identity(3, 3)).lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("FEVD splits evenly under perfectly correlated shocks") {
  Eigen::MatrixXd omega(2, 2);
  omega << 1.0, 1.0, 1.0, 1.0;
  const Eigen::MatrixXd d = generalized_fevd(Eigen::MatrixXd::Zero(2, 2), omega, 1);
  CHECK(d(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(d(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(d(1, 0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("FEVD rows always sum to one") {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 5; ++rep) {
    const Eigen::MatrixXd omega = testutil::random_pd(4, rng);
    const Eigen::MatrixXd coef = 0.1 * testutil::random_pd(4, rng);
    const Eigen::MatrixXd d = generalized_fevd(coef, omega, 10);
    for (int i = 0; i < 4; ++i) CHECK(d.row(i).sum() == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("FEVD is equivariant under simultaneous permutation") {
  std::mt19937_64 rng(43);
  const Eigen::MatrixXd omega = testutil::random_pd(4, rng);
  const Eigen::MatrixXd coef = 0.2 * testutil::random_pd(4, rng);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(4);
  perm.setIdentity();
  std::shuffle(perm.indices().data(), perm.indices().data() + 4, rng);
  const Eigen::MatrixXd p = perm;
  const Eigen::MatrixXd d = generalized_fevd(coef, omega, 10);
  const Eigen::MatrixXd dp =
      generalized_fevd(p * coef * p.transpose(), p * omega * p.transpose(), 10);
  CHECK((p * d * p.transpose() - dp).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("FEVD rejects unstable dynamics") {
  CHECK_THROWS_AS(
      generalized_fevd(1.5 * Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2), 10),
      computation_error);
}

TEST_CASE("connectedness of the identity FEVD is zero") {
  const Connectedness c = connectedness_matrix(Eigen::MatrixXd::Identity(3, 3));
  CHECK(c.matrix.norm() == 0.0);
  CHECK(c.tci == 0.0);
}

TEST_CASE("two-asset half-half FEVD projects onto the nearest PSD matrix") {
  Eigen::MatrixXd d(2, 2);
  d << 0.5, 0.5, 0.5, 0.5;
  const Connectedness c = connectedness_matrix(d);
  // symmetrized off-diagonal matrix [[0,0.5],[0.5,0]] has eigenvalue -0.5,
  // clipped to the all-0.25 rank-one matrix
  Eigen::MatrixXd expected(2, 2);
  expected << 0.25, 0.25, 0.25, 0.25;
  CHECK((c.matrix - expected).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK(c.tci == doctest::Approx(100.0 * (0.5 + 0.5) / 2.0).epsilon(1e-12));
}

TEST_CASE("connectedness output is always symmetric PSD") {
  Eigen::MatrixXd d(3, 3);
  d << 0.8, 0.1, 0.1, 0.05, 0.9, 0.05, 0.2, 0.1, 0.7;
  const Connectedness c = connectedness_matrix(d);
  CHECK((c.matrix - c.matrix.transpose()).norm() == 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c.matrix);
  CHECK(es.eigenvalues().minCoeff() >= -1e-12);
  // TCI counts the raw off-diagonal spillovers before projection
  CHECK(c.tci == doctest::Approx(100.0 * (0.1 + 0.1 + 0.05 + 0.05 + 0.2 + 0.1) / 3.0).epsilon(1e-12));
}

TEST_CASE("estimated TCI is small for independent returns") {
  const ReturnPanel panel = generate_panel(42, 5, 2000, SynthRegime::iid);
  const EstimatedModel est = estimate_model(panel, panel.dates.back(), EstimationConfig{});
  CHECK(est.tci < 15.0);
}

TEST_CASE("estimated TCI is large under a single common factor") {
  const ReturnPanel panel = generate_panel(42, 5, 2000, SynthRegime::factor);
  const EstimatedModel est = estimate_model(panel, panel.dates.back(), EstimationConfig{});
  CHECK(est.tci > 60.0);
  CHECK(est.window_end == panel.dates.back());
}

TEST_CASE("estimation rejects windows that are too short") {
  const ReturnPanel panel = generate_panel(1, 5, 100, SynthRegime::iid);
  EstimationConfig config;
  config.window = 252;
  CHECK_THROWS_AS(estimate_model(panel, panel.dates.back(), config), computation_error);
  config.window = 5;  // shorter than N + 2
  CHECK_THROWS_AS(estimate_model(panel, panel.dates.back(), config), computation_error);
}

TEST_CASE("estimation rejects an unknown window-end date") {
  const ReturnPanel panel = generate_panel(1, 3, 300, SynthRegime::iid);
  CHECK_THROWS_AS(estimate_model(panel, "1999-01-01", EstimationConfig{}), input_error);
}

TEST_CASE("panel validation") {
  ReturnPanel panel = generate_panel(1, 3, 10, SynthRegime::iid);
  CHECK_NOTHROW(validate_panel(panel));
  std::swap(panel.dates[3], panel.dates[4]);
  CHECK_THROWS_AS(validate_panel(panel), input_error);
}

TEST_CASE("synthetic panels are deterministic in the seed") {
  const ReturnPanel a = generate_panel(42, 5, 600, SynthRegime::factor);
  const ReturnPanel b = generate_panel(42, 5, 600, SynthRegime::factor);
  CHECK(a.dates == b.dates);
  CHECK((a.returns - b.returns).norm() == 0.0);
  const ReturnPanel c = generate_panel(43, 5, 600, SynthRegime::factor);
  CHECK((a.returns - c.returns).norm() != 0.0);
}

TEST_CASE("synthetic regimes parse by name") {
  CHECK(parse_regime("iid") == SynthRegime::iid);
  CHECK(parse_regime("factor") == SynthRegime::factor);
  CHECK(parse_regime("var1") == SynthRegime::var1);
  CHECK_THROWS_AS(parse_regime("garch"), input_error);
}

TEST_CASE("synthetic VAR(1) coefficients are the documented stable matrix") {
  const Eigen::MatrixXd a = synth_var1_coefficients(3);
  CHECK(a(0, 0) == 0.4);
  CHECK(a(0, 1) == 0.05);
  CHECK(a(1, 0) == 0.0);
  CHECK(a(2, 2) == 0.4);
}
