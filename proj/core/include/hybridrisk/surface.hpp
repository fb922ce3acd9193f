#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hybridrisk/qp.hpp"
#include "hybridrisk/risk_model.hpp"

namespace hybridrisk {

struct SurfacePoint {
  double lambda = 0.0;
  std::optional<double> mu0;  // absent on the pure risk-risk frontier
  double expected_return = 0.0;
  double variance = 0.0;
  double connectedness = 0.0;
  Eigen::VectorXd weights;
  bool long_only = false;
  bool binding_return = false;
  bool feasible = true;
};

/// Row-major grid over (mu0 index) x (lambda index). n_mu0 == 1 with no mu0
/// grid (risk-risk frontier).
struct Surface {
  std::vector<SurfacePoint> points;
  int n_mu0 = 0;
  int n_lambda = 0;
  std::uint64_t model_fingerprint = 0;
};

/// FNV-1a over the model's raw coefficient bytes and labels.
std::uint64_t model_fingerprint(const RiskModel& model);

/// One solve per lambda, no return target. lambda = 1 is minimum variance,
/// lambda = 0 minimum connectedness.
Surface risk_risk_frontier(const RiskModel& model, const std::vector<double>& lambda_grid,
                           bool long_only);

/// Full (mu0, lambda) sweep; infeasible cells are retained with feasible=false.
Surface full_surface(const RiskModel& model, const std::vector<double>& mu0_grid,
                     const std::vector<double>& lambda_grid, bool long_only);

/// Default mu0 grid: `points` values spanning [min, max] long-only attainable return.
std::vector<double> default_mu0_grid(const RiskModel& model, int points = 21);

struct TradeoffCheck {
  double dsigma2 = 0.0;           // central difference of sigma^2(lambda)
  double dkappa = 0.0;            // central difference of kappa(lambda)
  double identity_residual = 0.0; // lambda*dsigma2 + (1-lambda)*dkappa
  double slope = 0.0;             // dsigma2/dkappa, expected -(1-lambda)/lambda
};

/// Finite-difference check of the trade-off identity at an interior lambda.
/// Short-sale regime (closed form); h must leave [lambda-h, lambda+h] inside (0,1).
TradeoffCheck tradeoff_check(const RiskModel& model, double lambda, double h = 1e-5);

struct EigenbasisResult {
  Eigen::VectorXd weights;
  double sigma2 = 0.0;
  double kappa = 0.0;
};

/// Closed-form optimum through the common eigenbasis of commuting Sigma, C:
/// x_i = eta_i / (Z * D_i(lambda)) with D_i = lambda*sigma_i^2 + (1-lambda)*c_i.
EigenbasisResult eigenbasis_weights(const RiskModel& model, double lambda);

struct RiskCurvePoint {
  double lambda = 0.0;
  double sigma2 = 0.0;
  double kappa = 0.0;
  double dsigma2 = 0.0;
  double dkappa = 0.0;
};

/// Analytic sigma^2(lambda), kappa(lambda) and their derivatives in the common
/// eigenbasis. Satisfies lambda*dsigma2 + (1-lambda)*dkappa = 0.
std::vector<RiskCurvePoint> analytic_risk_curves(const RiskModel& model,
                                                 const std::vector<double>& lambda_grid);

}  // namespace hybridrisk
