#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "hybridrisk/risk_model.hpp"

namespace hybridrisk {

/// Complete panel of simple returns: T rows (strictly increasing ISO dates), N columns.
struct ReturnPanel {
  std::vector<std::string> dates;
  Eigen::MatrixXd returns;  // T x N
  std::vector<std::string> labels;

  int rows() const { return static_cast<int>(returns.rows()); }
  int cols() const { return static_cast<int>(returns.cols()); }
};

/// Throws input_error unless dates are strictly increasing and sizes agree.
void validate_panel(const ReturnPanel& panel);

struct EstimationConfig {
  int window = 252;
  int fevd_horizon = 10;
  std::optional<double> shrinkage;  // absent = Ledoit-Wolf auto intensity
};

/// Shrinkage covariance (1-delta)*S + delta*(tr(S)/N)*I on the given window.
/// With no fixed intensity, delta is the Ledoit-Wolf estimate: the ratio of
/// the average squared deviation of per-period outer products x_t x_t' around
/// S to the squared distance of S from the scaled-identity target, clamped to [0,1].
Eigen::MatrixXd shrink_covariance(const ReturnPanel& window, const EstimationConfig& config);

struct Var1Fit {
  Eigen::MatrixXd coef;       // A in r_t = a0 + A r_{t-1} + eps_t
  Eigen::MatrixXd resid_cov;  // Omega
};

/// Column-wise least squares VAR(1) with intercept (estimated, then discarded).
Var1Fit fit_var1(const ReturnPanel& window);

/// Generalized (Pesaran-Shin) H-step forecast-error variance decomposition of a
/// VAR(1), row-normalized so each row sums to one.
Eigen::MatrixXd generalized_fevd(const Eigen::MatrixXd& coef, const Eigen::MatrixXd& resid_cov,
                                 int horizon);

struct Connectedness {
  Eigen::MatrixXd matrix;  // symmetric PSD spillover matrix, zero diagonal input
  double tci = 0.0;        // total connectedness index, percent
};

/// Zero the FEVD diagonal, symmetrize, and project to the nearest PSD matrix.
Connectedness connectedness_matrix(const Eigen::MatrixXd& fevd);

struct EstimatedModel {
  RiskModel model;
  double tci = 0.0;
  std::string window_end;
};

/// Full pipeline on the window ending at date `at`: shrinkage covariance,
/// VAR(1), FEVD, connectedness matrix, sample-mean mu.
EstimatedModel estimate_model(const ReturnPanel& panel, const std::string& at,
                              const EstimationConfig& config);

}  // namespace hybridrisk
