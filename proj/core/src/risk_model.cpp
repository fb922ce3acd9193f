#include "hybridrisk/risk_model.hpp"

#include <cmath>
#include <iostream>
#include <sstream>

namespace hybridrisk {

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& a, double warn_tol, const std::string& name) {
  if (a.rows() != a.cols()) {
    throw input_error(name + ": matrix is not square");
  }
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > warn_tol) {
    std::cerr << "hybridrisk: warning: " << name << " asymmetry " << asym
              << " exceeds " << warn_tol << "; symmetrizing\n";
  }
  return 0.5 * (a + a.transpose());
}

Eigen::MatrixXd project_psd(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success) {
    throw computation_error("project_psd: eigendecomposition failed");
  }
  Eigen::VectorXd vals = es.eigenvalues().cwiseMax(0.0);
  Eigen::MatrixXd out = es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

RiskModel::RiskModel(Eigen::MatrixXd sigma, Eigen::MatrixXd conn, Eigen::VectorXd mu,
                     std::vector<std::string> labels, Tolerances tol)
    : tol_(tol) {
  n_ = static_cast<int>(mu.size());
  if (n_ <= 0) throw input_error("RiskModel: empty return vector");
  if (sigma.rows() != n_ || sigma.cols() != n_ || conn.rows() != n_ || conn.cols() != n_) {
    throw input_error("RiskModel: matrix dimensions do not match asset count");
  }

  sigma_ = symmetrize(sigma, tol.symmetry_warn, "sigma");
  conn_ = symmetrize(conn, tol.symmetry_warn, "conn");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_sigma(sigma_);
  if (es_sigma.info() != Eigen::Success || es_sigma.eigenvalues().minCoeff() <= 0.0) {
    throw input_error("RiskModel: sigma is not positive definite");
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_conn(conn_);
  const double min_eig = es_conn.eigenvalues().minCoeff();
  if (min_eig < -tol.psd_clip) {
    std::ostringstream msg;
    msg << "RiskModel: conn has eigenvalue " << min_eig << " below -" << tol.psd_clip;
    throw input_error(msg.str());
  }
  if (min_eig < 0.0) {
    Eigen::VectorXd vals = es_conn.eigenvalues().cwiseMax(0.0);
    conn_ = es_conn.eigenvectors() * vals.asDiagonal() * es_conn.eigenvectors().transpose();
    conn_ = 0.5 * (conn_ + conn_.transpose());
  }

  if (labels.empty()) {
    labels.reserve(n_);
    for (int i = 0; i < n_; ++i) labels.push_back("asset_" + std::to_string(i + 1));
  }
  if (static_cast<int>(labels.size()) != n_) {
    throw input_error("RiskModel: label count does not match asset count");
  }
  labels_ = std::move(labels);
  mu_ = std::move(mu);
}

Portfolio::Portfolio(Eigen::VectorXd weights, bool long_only, Tolerances tol)
    : weights_(std::move(weights)), long_only_(long_only) {
  if (weights_.size() == 0) throw input_error("Portfolio: empty weight vector");
  const double budget = weights_.sum();
  if (std::abs(budget - 1.0) > tol.budget) {
    throw input_error("Portfolio: budget violation, 1'w = " + std::to_string(budget));
  }
  if (long_only_ && weights_.minCoeff() < -tol.nonneg) {
    throw input_error("Portfolio: negative weight under long-only flag");
  }
}

HybridMatrix hybrid_matrix(const RiskModel& model, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw input_error("hybrid_matrix: lambda must lie in [0,1]");
  }
  return HybridMatrix{lambda, lambda * model.sigma() + (1.0 - lambda) * model.conn()};
}

double evaluate_loss(const HybridMatrix& m, const Portfolio& p) {
  if (m.matrix.rows() != p.n()) {
    throw input_error("evaluate_loss: dimension mismatch");
  }
  return p.weights().dot(m.matrix * p.weights());
}

PortfolioRisks portfolio_risks(const RiskModel& model, const Portfolio& p) {
  if (model.n() != p.n()) {
    throw input_error("portfolio_risks: dimension mismatch");
  }
  const Eigen::VectorXd& w = p.weights();
  return PortfolioRisks{w.dot(model.mu()), w.dot(model.sigma() * w), w.dot(model.conn() * w)};
}

std::optional<double> detect_degenerate(const RiskModel& model, double rel_tol) {
  const Eigen::MatrixXd& s = model.sigma();
  const Eigen::MatrixXd& c = model.conn();
  const double norm_c = c.norm();
  if (norm_c == 0.0) return std::nullopt;
  const double fit = (c.cwiseProduct(s)).sum() / (s.cwiseProduct(s)).sum();
  const double residual = (c - fit * s).norm() / norm_c;
  if (residual <= rel_tol) return fit;
  return std::nullopt;
}

}  // namespace hybridrisk
