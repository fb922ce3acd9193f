#include "hybridrisk/surface.hpp"

#include <cmath>
#include <cstring>
#include <limits>

namespace hybridrisk {

namespace {

void check_lambda_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw input_error("lambda grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 0.0 || grid[i] > 1.0) throw input_error("lambda grid value outside [0,1]");
    if (i > 0 && !(grid[i - 1] < grid[i])) {
      throw input_error("lambda grid must be strictly increasing");
    }
  }
}

SurfacePoint make_point(const RiskModel& model, const SolveReport& report, double lambda,
                        std::optional<double> mu0, bool long_only) {
  SurfacePoint pt;
  pt.lambda = lambda;
  pt.mu0 = mu0;
  pt.weights = report.weights;
  pt.long_only = long_only;
  const Eigen::VectorXd& w = report.weights;
  pt.expected_return = w.dot(model.mu());
  pt.variance = w.dot(model.sigma() * w);
  pt.connectedness = w.dot(model.conn() * w);
  pt.binding_return = mu0.has_value() && report.theta > 1e-9;
  return pt;
}

struct CommonEigenbasis {
  Eigen::MatrixXd basis;     // orthonormal columns
  Eigen::VectorXd sigma_eig; // sigma_i^2
  Eigen::VectorXd conn_eig;  // c_i
};

CommonEigenbasis common_eigenbasis(const RiskModel& model) {
  const Eigen::MatrixXd& s = model.sigma();
  const Eigen::MatrixXd& c = model.conn();
  const double commutator = (s * c - c * s).norm();
  if (commutator > 1e-8 * s.norm() * c.norm()) {
    throw computation_error("eigenbasis: sigma and conn do not commute");
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  Eigen::MatrixXd u = es.eigenvectors();
  const Eigen::VectorXd vals = es.eigenvalues();
  const int n = model.n();

  // Within each repeated sigma-eigenspace, rotate so C is diagonal there too.
  const double cluster_tol = 1e-10 * std::max(1.0, vals.cwiseAbs().maxCoeff());
  int start = 0;
  while (start < n) {
    int stop = start + 1;
    while (stop < n && vals(stop) - vals(start) <= cluster_tol) ++stop;
    const int len = stop - start;
    if (len > 1) {
      const Eigen::MatrixXd block =
          u.middleCols(start, len).transpose() * c * u.middleCols(start, len);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_block(block);
      u.middleCols(start, len) = u.middleCols(start, len) * es_block.eigenvectors();
    }
    start = stop;
  }

  CommonEigenbasis out;
  out.basis = u;
  out.sigma_eig = (u.transpose() * s * u).diagonal();
  out.conn_eig = (u.transpose() * c * u).diagonal();

  const Eigen::MatrixXd c_rot = u.transpose() * c * u;
  Eigen::MatrixXd offdiag = c_rot;
  offdiag.diagonal().setZero();
  if (offdiag.cwiseAbs().maxCoeff() > 1e-7 * std::max(1.0, c.norm())) {
    throw computation_error("eigenbasis: failed to diagonalize conn in the sigma basis");
  }
  if (out.sigma_eig.minCoeff() <= 0.0 || out.conn_eig.minCoeff() <= 0.0) {
    throw computation_error("eigenbasis: nonpositive eigenvalue");
  }
  return out;
}

}  // namespace

std::uint64_t model_fingerprint(const RiskModel& model) {
  std::uint64_t hash = 1469598103934665603ull;
  auto mix = [&hash](const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      hash ^= bytes[i];
      hash *= 1099511628211ull;
    }
  };
  mix(model.sigma().data(), sizeof(double) * model.sigma().size());
  mix(model.conn().data(), sizeof(double) * model.conn().size());
  mix(model.mu().data(), sizeof(double) * model.mu().size());
  for (const auto& label : model.labels()) mix(label.data(), label.size());
  return hash;
}

Surface risk_risk_frontier(const RiskModel& model, const std::vector<double>& lambda_grid,
                           bool long_only) {
  check_lambda_grid(lambda_grid);
  Surface surface;
  surface.n_mu0 = 1;
  surface.n_lambda = static_cast<int>(lambda_grid.size());
  surface.model_fingerprint = model_fingerprint(model);
  surface.points.reserve(lambda_grid.size());
  for (double lambda : lambda_grid) {
    try {
      const HybridMatrix m = hybrid_matrix(model, lambda);
      const SolveReport report = long_only ? solve_long_only(m) : solve_closed_form(m);
      surface.points.push_back(make_point(model, report, lambda, std::nullopt, long_only));
    } catch (const computation_error& e) {
      throw computation_error("risk_risk_frontier at lambda=" + std::to_string(lambda) + ": " +
                              e.what());
    }
  }
  return surface;
}

Surface full_surface(const RiskModel& model, const std::vector<double>& mu0_grid,
                     const std::vector<double>& lambda_grid, bool long_only) {
  check_lambda_grid(lambda_grid);
  if (mu0_grid.empty()) throw input_error("mu0 grid is empty");

  const Eigen::VectorXd& mu = model.mu();
  const double spread = mu.maxCoeff() - mu.minCoeff();
  const double max_return = (long_only || spread <= 1e-14)
                                ? mu.maxCoeff()
                                : std::numeric_limits<double>::infinity();

  Surface surface;
  surface.n_mu0 = static_cast<int>(mu0_grid.size());
  surface.n_lambda = static_cast<int>(lambda_grid.size());
  surface.model_fingerprint = model_fingerprint(model);
  surface.points.reserve(mu0_grid.size() * lambda_grid.size());

  for (double mu0 : mu0_grid) {
    for (double lambda : lambda_grid) {
      if (mu0 > max_return + 1e-12) {
        SurfacePoint pt;
        pt.lambda = lambda;
        pt.mu0 = mu0;
        pt.long_only = long_only;
        pt.feasible = false;
        pt.expected_return = std::numeric_limits<double>::quiet_NaN();
        pt.variance = std::numeric_limits<double>::quiet_NaN();
        pt.connectedness = std::numeric_limits<double>::quiet_NaN();
        pt.weights = Eigen::VectorXd::Constant(model.n(),
                                               std::numeric_limits<double>::quiet_NaN());
        surface.points.push_back(std::move(pt));
        continue;
      }
      try {
        const SolveReport report = solve_with_return_target(model, lambda, mu0, long_only);
        surface.points.push_back(make_point(model, report, lambda, mu0, long_only));
      } catch (const computation_error& e) {
        throw computation_error("full_surface at (mu0=" + std::to_string(mu0) + ", lambda=" +
                                std::to_string(lambda) + "): " + e.what());
      }
    }
  }
  return surface;
}

std::vector<double> default_mu0_grid(const RiskModel& model, int points) {
  if (points < 2) throw input_error("default_mu0_grid: need at least 2 points");
  const double lo = model.mu().minCoeff();
  const double hi = model.mu().maxCoeff();
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i) {
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / (points - 1);
  }
  return grid;
}

TradeoffCheck tradeoff_check(const RiskModel& model, double lambda, double h) {
  if (!(h > 0.0)) throw input_error("tradeoff_check: h must be positive");
  if (lambda - h <= 0.0 || lambda + h >= 1.0) {
    throw input_error("tradeoff_check: lambda too close to {0,1} for the stencil");
  }

  auto risks_at = [&model](double lam) {
    const SolveReport report = solve_closed_form(hybrid_matrix(model, lam));
    const Eigen::VectorXd& w = report.weights;
    return std::pair<double, double>{w.dot(model.sigma() * w), w.dot(model.conn() * w)};
  };
  const auto [s_plus, k_plus] = risks_at(lambda + h);
  const auto [s_minus, k_minus] = risks_at(lambda - h);

  TradeoffCheck out;
  out.dsigma2 = (s_plus - s_minus) / (2.0 * h);
  out.dkappa = (k_plus - k_minus) / (2.0 * h);
  out.identity_residual = lambda * out.dsigma2 + (1.0 - lambda) * out.dkappa;
  out.slope = out.dsigma2 / out.dkappa;
  return out;
}

EigenbasisResult eigenbasis_weights(const RiskModel& model, double lambda) {
  if (lambda < 0.0 || lambda > 1.0) throw input_error("eigenbasis_weights: lambda outside [0,1]");
  const CommonEigenbasis eb = common_eigenbasis(model);
  const int n = model.n();

  const Eigen::VectorXd eta = eb.basis.transpose() * Eigen::VectorXd::Ones(n);
  const Eigen::VectorXd d = lambda * eb.sigma_eig + (1.0 - lambda) * eb.conn_eig;
  const double z = (eta.array().square() / d.array()).sum();

  Eigen::VectorXd x = eta.array() / (z * d.array());
  EigenbasisResult out;
  out.weights = eb.basis * x;
  out.sigma2 = (eta.array().square() * eb.sigma_eig.array() / d.array().square()).sum() / (z * z);
  out.kappa = (eta.array().square() * eb.conn_eig.array() / d.array().square()).sum() / (z * z);
  return out;
}

std::vector<RiskCurvePoint> analytic_risk_curves(const RiskModel& model,
                                                 const std::vector<double>& lambda_grid) {
  check_lambda_grid(lambda_grid);
  const CommonEigenbasis eb = common_eigenbasis(model);
  const int n = model.n();
  const Eigen::VectorXd eta = eb.basis.transpose() * Eigen::VectorXd::Ones(n);
  const Eigen::ArrayXd eta2 = eta.array().square();
  const Eigen::ArrayXd sig = eb.sigma_eig.array();
  const Eigen::ArrayXd con = eb.conn_eig.array();
  const Eigen::ArrayXd diff = sig - con;  // D_i'(lambda)

  std::vector<RiskCurvePoint> out;
  out.reserve(lambda_grid.size());
  for (double lambda : lambda_grid) {
    const Eigen::ArrayXd d = lambda * sig + (1.0 - lambda) * con;
    const double z = (eta2 / d).sum();
    const double dz = -(eta2 * diff / d.square()).sum();
    const double sa = (eta2 * sig / d.square()).sum();
    const double sc = (eta2 * con / d.square()).sum();
    const double dsa = -2.0 * (eta2 * sig * diff / d.cube()).sum();
    const double dsc = -2.0 * (eta2 * con * diff / d.cube()).sum();

    RiskCurvePoint pt;
    pt.lambda = lambda;
    pt.sigma2 = sa / (z * z);
    pt.kappa = sc / (z * z);
    pt.dsigma2 = dsa / (z * z) - 2.0 * sa * dz / (z * z * z);
    pt.dkappa = dsc / (z * z) - 2.0 * sc * dz / (z * z * z);
    out.push_back(pt);
  }
  return out;
}

}  // namespace hybridrisk
