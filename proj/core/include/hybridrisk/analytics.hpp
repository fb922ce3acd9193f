#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hybridrisk/qp.hpp"
#include "hybridrisk/risk_model.hpp"

namespace hybridrisk {

/// Connectedness betas beta_i = 2 [C w]_i. Satisfies sum_i w_i beta_i = 2 kappa_p.
Eigen::VectorXd connectedness_betas(const RiskModel& model, const Portfolio& p);

struct CornerFunds {
  Eigen::VectorXd mv;     // minimum variance (lambda = 1)
  Eigen::VectorXd mc;     // minimum connectedness (lambda = 0)
  Eigen::VectorXd max_mu; // unit vector on argmax mu (lowest index on ties)
  bool long_only = false;
};

CornerFunds corner_funds(const RiskModel& model, bool long_only);

struct FundDecomposition {
  Eigen::Vector3d alphas{0.0, 0.0, 0.0};  // coefficients on (MV, MC, max-mu)
  bool convex = false;                    // all alphas >= -1e-9
  double residual = 0.0;                  // ||target - W alpha||_inf
  bool representable = true;              // residual <= 1e-6 (target in the affine span)
};

/// Least-squares solve of the stacked system [W; 1 1 1] alpha = [target; 1].
/// Throws on affinely dependent corner funds.
FundDecomposition three_fund_decompose(const CornerFunds& funds, const Eigen::VectorXd& target);

struct SeparationScan {
  std::vector<double> lambdas;
  std::vector<FundDecomposition> decompositions;
  bool all_convex = true;
};

/// Decompose the short-sale optimum w*(lambda) over the lambda grid and report
/// whether the convex-hull containment held everywhere.
SeparationScan separation_scan(const RiskModel& model, const std::vector<double>& lambda_grid);

}  // namespace hybridrisk
