#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "hybridrisk/common.hpp"

namespace hybridrisk {

struct Tolerances {
  double symmetry_warn = 1e-8;  // asymmetry above this triggers a warning before symmetrization
  double psd_clip = 1e-10;      // eigenvalues in [-psd_clip, 0) are clipped to 0; below is an error
  double budget = 1e-8;         // |1'w - 1| bound
  double nonneg = 1e-10;        // long-only slack
};

/// Symmetrize (A + A')/2. Warns on stderr when the asymmetry exceeds warn_tol.
Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& a, double warn_tol, const std::string& name);

/// Nearest-PSD projection: clip every negative eigenvalue to zero and re-symmetrize.
Eigen::MatrixXd project_psd(const Eigen::MatrixXd& a);

/// Paired risk matrices (covariance Sigma, connectedness C) plus expected returns.
/// Immutable after construction; safe to share read-only across threads.
class RiskModel {
 public:
  RiskModel(Eigen::MatrixXd sigma, Eigen::MatrixXd conn, Eigen::VectorXd mu,
            std::vector<std::string> labels = {}, Tolerances tol = {});

  int n() const { return n_; }
  const Eigen::MatrixXd& sigma() const { return sigma_; }
  const Eigen::MatrixXd& conn() const { return conn_; }
  const Eigen::VectorXd& mu() const { return mu_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const Tolerances& tol() const { return tol_; }

 private:
  int n_ = 0;
  Eigen::MatrixXd sigma_;
  Eigen::MatrixXd conn_;
  Eigen::VectorXd mu_;
  std::vector<std::string> labels_;
  Tolerances tol_;
};

/// Weight vector on the budget hyperplane 1'w = 1.
class Portfolio {
 public:
  explicit Portfolio(Eigen::VectorXd weights, bool long_only = false, Tolerances tol = {});

  const Eigen::VectorXd& weights() const { return weights_; }
  bool long_only() const { return long_only_; }
  int n() const { return static_cast<int>(weights_.size()); }

 private:
  Eigen::VectorXd weights_;
  bool long_only_ = false;
};

/// Convex combination M = lambda*Sigma + (1-lambda)*C.
struct HybridMatrix {
  double lambda = 0.0;
  Eigen::MatrixXd matrix;
};

HybridMatrix hybrid_matrix(const RiskModel& model, double lambda);

/// Quadratic loss w' M w.
double evaluate_loss(const HybridMatrix& m, const Portfolio& p);

struct PortfolioRisks {
  double expected_return = 0.0;
  double variance = 0.0;
  double connectedness = 0.0;
};

/// (w'mu, w'Sigma w, w'C w).
PortfolioRisks portfolio_risks(const RiskModel& model, const Portfolio& p);

/// Least-squares proportionality fit c = tr(C Sigma)/tr(Sigma Sigma).
/// Returns c when ||C - c Sigma||_F / ||C||_F <= rel_tol, absent otherwise.
std::optional<double> detect_degenerate(const RiskModel& model, double rel_tol = 1e-6);

}  // namespace hybridrisk
