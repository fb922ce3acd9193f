#include "hybridrisk/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hybridrisk {

namespace {

Eigen::MatrixXd demean(const Eigen::MatrixXd& x) {
  return x.rowwise() - x.colwise().mean();
}

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd centered = demean(x);
  return centered.transpose() * centered / (static_cast<double>(x.rows()) - 1.0);
}

double ledoit_wolf_intensity(const Eigen::MatrixXd& x, const Eigen::MatrixXd& s) {
  const int t = static_cast<int>(x.rows());
  const int n = static_cast<int>(x.cols());
  const double m = s.trace() / n;
  Eigen::MatrixXd target = m * Eigen::MatrixXd::Identity(n, n);
  const double d2 = (s - target).squaredNorm() / n;
  if (d2 <= 0.0) return 0.0;

  const Eigen::MatrixXd centered = demean(x);
  double b2_bar = 0.0;
  for (int row = 0; row < t; ++row) {
    const Eigen::VectorXd xt = centered.row(row).transpose();
    b2_bar += (xt * xt.transpose() - s).squaredNorm() / n;
  }
  b2_bar /= static_cast<double>(t) * t;
  const double b2 = std::min(b2_bar, d2);
  return std::clamp(b2 / d2, 0.0, 1.0);
}

}  // namespace

void validate_panel(const ReturnPanel& panel) {
  const int t = panel.rows();
  const int n = panel.cols();
  if (t == 0 || n == 0) throw input_error("panel: empty");
  if (static_cast<int>(panel.dates.size()) != t) throw input_error("panel: date count mismatch");
  if (static_cast<int>(panel.labels.size()) != n) throw input_error("panel: label count mismatch");
  for (int i = 1; i < t; ++i) {
    if (!(panel.dates[i - 1] < panel.dates[i])) {
      throw input_error("panel: dates not strictly increasing at row " + std::to_string(i + 1));
    }
  }
}

Eigen::MatrixXd shrink_covariance(const ReturnPanel& window, const EstimationConfig& config) {
  validate_panel(window);
  const int t = window.rows();
  const int n = window.cols();
  if (t < n + 2) {
    throw computation_error("shrink_covariance: insufficient rows (need T >= N + 2)");
  }
  const Eigen::MatrixXd centered = demean(window.returns);
  for (int j = 0; j < n; ++j) {
    if (centered.col(j).cwiseAbs().maxCoeff() == 0.0) {
      throw computation_error("shrink_covariance: zero-variance column " + window.labels[j]);
    }
  }

  const Eigen::MatrixXd s = sample_covariance(window.returns);
  double delta;
  if (config.shrinkage.has_value()) {
    delta = *config.shrinkage;
    if (delta < 0.0 || delta > 1.0) {
      throw input_error("shrink_covariance: shrinkage intensity outside [0,1]");
    }
  } else {
    delta = ledoit_wolf_intensity(window.returns, s);
  }
  const double m = s.trace() / n;
  return (1.0 - delta) * s + delta * m * Eigen::MatrixXd::Identity(n, n);
}

Var1Fit fit_var1(const ReturnPanel& window) {
  validate_panel(window);
  const int t = window.rows();
  const int n = window.cols();
  if (t < n + 2) throw computation_error("fit_var1: insufficient rows (need T >= N + 2)");

  const int rows = t - 1;
  Eigen::MatrixXd x(rows, n + 1);  // [1 | r_{t-1}]
  x.col(0).setOnes();
  x.rightCols(n) = window.returns.topRows(rows);
  const Eigen::MatrixXd y = window.returns.bottomRows(rows);

  const Eigen::MatrixXd xtx = x.transpose() * x;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(xtx);
  if (!lu.isInvertible()) {
    throw computation_error("fit_var1: singular regressor cross-product (collinear assets?)");
  }
  const Eigen::MatrixXd b = lu.solve(x.transpose() * y);  // (n+1) x n, row 0 = intercept

  Var1Fit fit;
  fit.coef = b.bottomRows(n).transpose();
  const Eigen::MatrixXd resid = y - x * b;
  const int dof = rows - (n + 1);
  fit.resid_cov = resid.transpose() * resid / std::max(dof, 1);
  return fit;
}

Eigen::MatrixXd generalized_fevd(const Eigen::MatrixXd& coef, const Eigen::MatrixXd& resid_cov,
                                 int horizon) {
  const int n = static_cast<int>(coef.rows());
  if (coef.cols() != n || resid_cov.rows() != n || resid_cov.cols() != n) {
    throw input_error("generalized_fevd: dimension mismatch");
  }
  if (horizon < 1) throw input_error("generalized_fevd: horizon must be >= 1");

  const Eigen::VectorXcd eigs = Eigen::EigenSolver<Eigen::MatrixXd>(coef, false).eigenvalues();
  if (eigs.cwiseAbs().maxCoeff() >= 1.0 - 1e-12) {
    throw computation_error("generalized_fevd: VAR coefficient matrix is not stationary");
  }
  for (int j = 0; j < n; ++j) {
    if (resid_cov(j, j) <= 0.0) {
      throw computation_error("generalized_fevd: nonpositive residual variance on the diagonal");
    }
  }

  // theta_ij = (1/Omega_jj) sum_h (e_i' Phi_h Omega e_j)^2 / sum_h (e_i' Phi_h Omega Phi_h' e_i)
  Eigen::MatrixXd numer = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd denom = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(n, n);
  for (int h = 0; h < horizon; ++h) {
    const Eigen::MatrixXd phi_omega = phi * resid_cov;
    numer += phi_omega.cwiseProduct(phi_omega);
    denom += (phi_omega * phi.transpose()).diagonal();
    phi = coef * phi;
  }
  Eigen::MatrixXd theta(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) theta(i, j) = numer(i, j) / (resid_cov(j, j) * denom(i));

  // Row-normalize; generalized shocks are not orthogonal so raw rows exceed one.
  const Eigen::VectorXd row_sums = theta.rowwise().sum();
  return theta.array().colwise() / row_sums.array();
}

Connectedness connectedness_matrix(const Eigen::MatrixXd& fevd) {
  const int n = static_cast<int>(fevd.rows());
  if (fevd.cols() != n) throw input_error("connectedness_matrix: matrix must be square");
  if (fevd.minCoeff() < -1e-12) throw input_error("connectedness_matrix: negative FEVD share");

  Eigen::MatrixXd off = fevd;
  off.diagonal().setZero();

  Connectedness out;
  out.tci = 100.0 * off.sum() / n;
  Eigen::MatrixXd sym = 0.5 * (off + off.transpose());
  out.matrix = project_psd(sym);
  return out;
}

EstimatedModel estimate_model(const ReturnPanel& panel, const std::string& at,
                              const EstimationConfig& config) {
  validate_panel(panel);
  const int n = panel.cols();
  if (config.window < n + 2) {
    throw computation_error("estimate_model: window shorter than N + 2");
  }

  const auto it = std::find(panel.dates.begin(), panel.dates.end(), at);
  if (it == panel.dates.end()) {
    throw input_error("estimate_model: date " + at + " not present in panel");
  }
  const int end = static_cast<int>(it - panel.dates.begin()) + 1;
  if (end < config.window) {
    throw computation_error("estimate_model: insufficient observations before " + at +
                      " (need " + std::to_string(config.window) + ", have " +
                      std::to_string(end) + ")");
  }

  ReturnPanel window;
  window.labels = panel.labels;
  window.dates.assign(panel.dates.begin() + (end - config.window), panel.dates.begin() + end);
  window.returns = panel.returns.middleRows(end - config.window, config.window);

  const Eigen::MatrixXd sigma = shrink_covariance(window, config);
  const Var1Fit var = fit_var1(window);
  const Eigen::MatrixXd fevd = generalized_fevd(var.coef, var.resid_cov, config.fevd_horizon);
  const Connectedness conn = connectedness_matrix(fevd);
  const Eigen::VectorXd mu = window.returns.colwise().mean().transpose();

  return EstimatedModel{RiskModel(sigma, conn.matrix, mu, panel.labels), conn.tci, at};
}

}  // namespace hybridrisk
