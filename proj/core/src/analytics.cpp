#include "hybridrisk/analytics.hpp"

namespace hybridrisk {

Eigen::VectorXd connectedness_betas(const RiskModel& model, const Portfolio& p) {
  if (model.n() != p.n()) throw input_error("connectedness_betas: dimension mismatch");
  return 2.0 * (model.conn() * p.weights());
}

CornerFunds corner_funds(const RiskModel& model, bool long_only) {
  CornerFunds funds;
  funds.long_only = long_only;

  auto solve_at = [&](double lambda) {
    const HybridMatrix m = hybrid_matrix(model, lambda);
    return long_only ? solve_long_only(m).weights : solve_closed_form(m).weights;
  };
  funds.mv = solve_at(1.0);
  funds.mc = solve_at(0.0);

  // The unconstrained max-return program is unbounded, so the max-mu fund is
  // the long-only vertex in both regimes.
  int jmax = 0;
  model.mu().maxCoeff(&jmax);
  funds.max_mu = Eigen::VectorXd::Zero(model.n());
  funds.max_mu(jmax) = 1.0;
  return funds;
}

FundDecomposition three_fund_decompose(const CornerFunds& funds, const Eigen::VectorXd& target) {
  const int n = static_cast<int>(target.size());
  if (funds.mv.size() != n || funds.mc.size() != n || funds.max_mu.size() != n) {
    throw input_error("three_fund_decompose: dimension mismatch");
  }

  Eigen::MatrixXd stacked(n + 1, 3);
  stacked.col(0).head(n) = funds.mv;
  stacked.col(1).head(n) = funds.mc;
  stacked.col(2).head(n) = funds.max_mu;
  stacked.row(n).setOnes();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(stacked);
  qr.setThreshold(1e-10);
  if (qr.rank() < 3) {
    throw computation_error("three_fund_decompose: corner funds are affinely dependent");
  }

  Eigen::VectorXd rhs(n + 1);
  rhs.head(n) = target;
  rhs(n) = 1.0;

  FundDecomposition out;
  out.alphas = qr.solve(rhs);
  Eigen::MatrixXd w(n, 3);
  w.col(0) = funds.mv;
  w.col(1) = funds.mc;
  w.col(2) = funds.max_mu;
  out.residual = (target - w * out.alphas).lpNorm<Eigen::Infinity>();
  out.convex = out.alphas.minCoeff() >= -1e-9;
  out.representable = out.residual <= 1e-6;
  return out;
}

SeparationScan separation_scan(const RiskModel& model, const std::vector<double>& lambda_grid) {
  const CornerFunds funds = corner_funds(model, /*long_only=*/false);
  SeparationScan scan;
  scan.lambdas = lambda_grid;
  scan.decompositions.reserve(lambda_grid.size());
  for (double lambda : lambda_grid) {
    const SolveReport report = solve_closed_form(hybrid_matrix(model, lambda));
    FundDecomposition dec = three_fund_decompose(funds, report.weights);
    scan.all_convex = scan.all_convex && dec.convex;
    scan.decompositions.push_back(std::move(dec));
  }
  return scan;
}

}  // namespace hybridrisk
