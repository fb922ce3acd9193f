#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hybridrisk/risk_model.hpp"

namespace hybridrisk {

/// Solution of one hybrid-risk QP together with its KKT certificate data.
struct SolveReport {
  Eigen::VectorXd weights;
  bool long_only = false;
  double nu = 0.0;             // budget multiplier
  Eigen::VectorXd gamma;       // nonnegativity multipliers, zero on free assets
  double theta = 0.0;          // return-target multiplier
  std::vector<int> active_set; // indices pinned at zero
  int iterations = 0;
  double objective = 0.0;
  bool regularized = false;    // true when a ridge was added to a singular matrix

  Portfolio portfolio(Tolerances tol = {}) const { return Portfolio(weights, long_only, tol); }
};

struct KktResiduals {
  double stationarity = 0.0;     // ||2Mw - nu*1 - theta*mu - gamma||_inf
  double complementarity = 0.0;  // max_i gamma_i * w_i, and theta*(w'mu - mu0)
  double dual = 0.0;             // min(min_i gamma_i, theta)
};

/// Residuals of the KKT system for a reported solution. Pass mu/mu0 only when
/// the solve carried a return target.
KktResiduals kkt_residuals(const HybridMatrix& m, const SolveReport& r,
                           const Eigen::VectorXd* mu = nullptr, double mu0 = 0.0);

/// Budget-only minimizer w = M^{-1} 1 / (1' M^{-1} 1). Requires M positive definite.
SolveReport solve_closed_form(const HybridMatrix& m);

/// Long-only minimizer via the active-set method: start at w = 1/N, solve the
/// equality-constrained subproblem on the free set, release the most negative
/// multiplier, clip steps at the boundary. Singular M gets a small ridge and
/// the report is flagged regularized.
SolveReport solve_long_only(const HybridMatrix& m, double tol = 1e-9);

/// Minimize w'Mw s.t. 1'w = 1, w'mu >= mu0, and w >= 0 when long_only.
/// Two-phase: solve without the target first; re-solve with w'mu = mu0 as a
/// second equality only if violated.
SolveReport solve_with_return_target(const RiskModel& model, double lambda, double mu0,
                                     bool long_only, double tol = 1e-9);

}  // namespace hybridrisk
