#include "hybridrisk/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hybridrisk {

namespace {

constexpr double kZeroWeight = 1e-14;

// Ridge policy for singular hybrid matrices (lambda = 0 with rank-deficient C):
// eps = 1e-12 * tr(M)/N, report flagged regularized.
std::pair<Eigen::MatrixXd, bool> prepare_matrix(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() == Eigen::Success) return {m, false};
  const int n = static_cast<int>(m.rows());
  const double ridge = 1e-12 * m.trace() / n;
  Eigen::MatrixXd fixed = m + ridge * Eigen::MatrixXd::Identity(n, n);
  Eigen::LLT<Eigen::MatrixXd> llt2(fixed);
  if (llt2.info() != Eigen::Success) {
    throw computation_error("solve_long_only: matrix remains indefinite after ridge");
  }
  return {fixed, true};
}

// Active-set loop shared by the budget-only and budget+return-target solves.
// E (k x N) holds the equality-constraint rows, rhs their right-hand sides.
// w0 must satisfy E w0 = rhs and w0 >= 0.
SolveReport active_set_solve(const Eigen::MatrixXd& m, const Eigen::MatrixXd& e,
                             const Eigen::VectorXd& rhs, Eigen::VectorXd w, double tol) {
  const int n = static_cast<int>(m.rows());
  const int k = static_cast<int>(e.rows());
  const int cap = 10 * n;

  std::vector<bool> active(n, false);
  for (int i = 0; i < n; ++i) active[i] = (w(i) <= kZeroWeight);

  Eigen::VectorXd mult = Eigen::VectorXd::Zero(k);
  int iter = 0;
  for (iter = 1; iter <= cap; ++iter) {
    std::vector<int> free_idx;
    free_idx.reserve(n);
    for (int i = 0; i < n; ++i)
      if (!active[i]) free_idx.push_back(i);
    const int f = static_cast<int>(free_idx.size());
    if (f == 0) throw computation_error("active_set_solve: empty free set");

    Eigen::MatrixXd e_free(k, f);
    for (int j = 0; j < f; ++j) e_free.col(j) = e.col(free_idx[j]);

    // Bordered KKT system on the free set: [[2 M_FF, E_F'],[E_F, 0]].
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(f + k, f + k);
    for (int a = 0; a < f; ++a)
      for (int b = 0; b < f; ++b) kkt(a, b) = 2.0 * m(free_idx[a], free_idx[b]);
    kkt.topRightCorner(f, k) = e_free.transpose();
    kkt.bottomLeftCorner(k, f) = e_free;
    Eigen::VectorXd kkt_rhs = Eigen::VectorXd::Zero(f + k);
    kkt_rhs.tail(k) = rhs;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
    if (lu.isInvertible()) {
      Eigen::VectorXd sol = lu.solve(kkt_rhs);
      for (int j = 0; j < f; ++j) p(free_idx[j]) = sol(j) - w(free_idx[j]);
      // The bordered system solves 2 M_FF x + E_F' y = 0, so the Lagrange
      // multipliers in the 2Mw - E'mult - gamma = 0 convention are -y.
      mult = -sol.tail(k);
    } else {
      // Degenerate face (e.g. constraint rows dependent on F): stay put and
      // recover multipliers from stationarity on the free set.
      Eigen::VectorXd g = 2.0 * (m * w);
      Eigen::VectorXd g_free(f);
      for (int j = 0; j < f; ++j) g_free(j) = g(free_idx[j]);
      mult = e_free.transpose().colPivHouseholderQr().solve(g_free);
    }

    if (p.lpNorm<Eigen::Infinity>() <= tol) {
      // Candidate KKT point: check the inequality multipliers on the active set.
      Eigen::VectorXd resid = 2.0 * (m * w) - e.transpose() * mult;
      int release = -1;
      double worst = -tol;
      for (int i = 0; i < n; ++i) {
        if (active[i] && resid(i) < worst) {
          worst = resid(i);
          release = i;
        }
      }
      if (release < 0) {
        SolveReport report;
        report.weights = std::move(w);
        report.long_only = true;
        report.nu = mult(0);
        report.theta = (k > 1) ? mult(1) : 0.0;
        report.gamma = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < n; ++i)
          if (active[i]) {
            report.gamma(i) = resid(i);
            report.active_set.push_back(i);
          }
        report.iterations = iter;
        report.objective = report.weights.dot(m * report.weights);
        return report;
      }
      active[release] = false;
      continue;
    }

    // Clip the step at the nonnegativity boundary.
    double alpha = 1.0;
    for (int i : free_idx) {
      if (p(i) < 0.0) {
        const double beta = w(i) / (-p(i));
        if (beta < alpha) alpha = beta;
      }
    }
    if (alpha <= kZeroWeight) {
      // Blocking constraint at the current point: activate it without a step.
      int blocker = -1;
      for (int i : free_idx) {
        if (p(i) < 0.0 && w(i) <= kZeroWeight) {
          blocker = i;
          break;
        }
      }
      if (blocker < 0) throw computation_error("active_set_solve: zero step without blocker");
      active[blocker] = true;
      continue;
    }
    w += alpha * p;
    for (int i : free_idx) {
      if (w(i) <= kZeroWeight) {
        w(i) = 0.0;
        active[i] = true;
      }
    }
  }
  throw computation_error("active_set_solve: iteration cap exceeded (degenerate cycling?)");
}

}  // namespace

KktResiduals kkt_residuals(const HybridMatrix& m, const SolveReport& r,
                           const Eigen::VectorXd* mu, double mu0) {
  const Eigen::VectorXd& w = r.weights;
  Eigen::VectorXd g = 2.0 * (m.matrix * w);
  g.array() -= r.nu;
  if (r.gamma.size() == w.size()) g -= r.gamma;
  if (mu != nullptr) g -= r.theta * (*mu);

  KktResiduals out;
  out.stationarity = g.lpNorm<Eigen::Infinity>();
  out.complementarity = 0.0;
  if (r.gamma.size() == w.size()) {
    out.complementarity = (r.gamma.cwiseProduct(w)).cwiseAbs().maxCoeff();
  }
  out.dual = (r.gamma.size() == w.size() && r.gamma.size() > 0) ? r.gamma.minCoeff() : 0.0;
  if (mu != nullptr) {
    out.complementarity = std::max(out.complementarity, std::abs(r.theta * (w.dot(*mu) - mu0)));
    out.dual = std::min(out.dual, r.theta);
  }
  return out;
}

SolveReport solve_closed_form(const HybridMatrix& m) {
  const int n = static_cast<int>(m.matrix.rows());
  if (n == 0 || m.matrix.rows() != m.matrix.cols()) {
    throw input_error("solve_closed_form: matrix must be square and nonempty");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(m.matrix);
  if (llt.info() != Eigen::Success) {
    throw computation_error("solve_closed_form: matrix is not positive definite");
  }
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd raw = llt.solve(ones);
  const double scale = std::max(1.0, m.matrix.cwiseAbs().maxCoeff());
  if ((m.matrix * raw - ones).lpNorm<Eigen::Infinity>() > 1e-8 * scale * raw.norm()) {
    throw computation_error("solve_closed_form: matrix is numerically singular");
  }
  const double denom = raw.sum();
  if (!(denom > 0.0) || !std::isfinite(denom)) {
    throw computation_error("solve_closed_form: 1' M^{-1} 1 is not positive");
  }

  SolveReport report;
  report.weights = raw / denom;
  report.long_only = false;
  report.objective = 1.0 / denom;
  report.nu = 2.0 * report.objective;
  report.gamma = Eigen::VectorXd::Zero(n);
  report.theta = 0.0;
  report.iterations = 0;
  return report;
}

SolveReport solve_long_only(const HybridMatrix& m, double tol) {
  if (!(tol > 0.0)) throw input_error("solve_long_only: tol must be positive");
  const int n = static_cast<int>(m.matrix.rows());
  auto [mat, regularized] = prepare_matrix(m.matrix);

  Eigen::MatrixXd e = Eigen::MatrixXd::Ones(1, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Ones(1);
  Eigen::VectorXd w0 = Eigen::VectorXd::Constant(n, 1.0 / n);

  SolveReport report = active_set_solve(mat, e, rhs, w0, tol);
  report.regularized = regularized;
  return report;
}

SolveReport solve_with_return_target(const RiskModel& model, double lambda, double mu0,
                                     bool long_only, double tol) {
  const HybridMatrix m = hybrid_matrix(model, lambda);
  const int n = model.n();
  const Eigen::VectorXd& mu = model.mu();

  SolveReport base = long_only ? solve_long_only(m, tol) : solve_closed_form(m);
  if (base.weights.dot(mu) >= mu0 - 1e-12) {
    base.theta = 0.0;
    return base;
  }

  if (long_only) {
    if (mu0 > mu.maxCoeff() + 1e-12) {
      throw computation_error("solve_with_return_target: target exceeds max attainable return");
    }
  } else if (mu.maxCoeff() - mu.minCoeff() <= 1e-14) {
    // w'mu is constant on the budget hyperplane; the target cannot be met.
    throw computation_error("solve_with_return_target: mu is constant and below target");
  }

  if (!long_only) {
    // Two-equality KKT system: [[2M, 1, mu],[1',0,0],[mu',0,0]].
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + 2, n + 2);
    kkt.topLeftCorner(n, n) = 2.0 * m.matrix;
    kkt.block(0, n, n, 1) = Eigen::VectorXd::Ones(n);
    kkt.block(0, n + 1, n, 1) = mu;
    kkt.block(n, 0, 1, n) = Eigen::RowVectorXd::Ones(n);
    kkt.block(n + 1, 0, 1, n) = mu.transpose();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 2);
    rhs(n) = 1.0;
    rhs(n + 1) = mu0;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    if (!lu.isInvertible()) {
      throw computation_error("solve_with_return_target: singular KKT system");
    }
    Eigen::VectorXd sol = lu.solve(rhs);

    SolveReport report;
    report.weights = sol.head(n);
    report.long_only = false;
    // Same sign convention as the active-set path: the assembled system has
    // +E' columns, so the reported multipliers are the negated tail.
    report.nu = -sol(n);
    report.theta = -sol(n + 1);
    report.gamma = Eigen::VectorXd::Zero(n);
    report.iterations = 1;
    report.objective = report.weights.dot(m.matrix * report.weights);
    return report;
  }

  auto [mat, regularized] = prepare_matrix(m.matrix);

  int jmax = 0;
  const double rmax = mu.maxCoeff(&jmax);

  if (rmax - mu0 <= 1e-12) {
    // Target at the attainable maximum: the feasible set collapses to the
    // simplex over the argmax-mean assets, where the return row is implied by
    // the budget row and the active-set loop would stall on dependent
    // constraints. Solve the reduced budget-only problem instead.
    std::vector<int> top;
    for (int i = 0; i < n; ++i)
      if (mu(i) >= rmax - 1e-12) top.push_back(i);
    const int t = static_cast<int>(top.size());
    Eigen::MatrixXd msub(t, t);
    for (int a = 0; a < t; ++a)
      for (int b = 0; b < t; ++b) msub(a, b) = mat(top[a], top[b]);
    const SolveReport sub = solve_long_only(HybridMatrix{lambda, msub}, tol);

    SolveReport report;
    report.weights = Eigen::VectorXd::Zero(n);
    for (int a = 0; a < t; ++a) report.weights(top[a]) = sub.weights(a);
    report.long_only = true;
    report.objective = report.weights.dot(mat * report.weights);
    report.iterations = sub.iterations;
    report.regularized = regularized || sub.regularized;
    // Split the reduced-problem multiplier nu_sub = nu + theta * rmax so that
    // every off-target gamma_i = grad_i - nu - theta * mu_i is nonnegative.
    const Eigen::VectorXd grad = 2.0 * (mat * report.weights);
    double theta = 0.0;
    for (int i = 0; i < n; ++i) {
      if (mu(i) < rmax - 1e-12) theta = std::max(theta, (sub.nu - grad(i)) / (rmax - mu(i)));
    }
    report.theta = theta;
    report.nu = sub.nu - theta * rmax;
    report.gamma = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
      if (report.weights(i) <= kZeroWeight) {
        report.gamma(i) = grad(i) - report.nu - report.theta * mu(i);
        report.active_set.push_back(i);
      }
    }
    return report;
  }

  // Feasible start on both equalities: blend the phase-1 solution toward the
  // max-return vertex until the target binds.
  const double rbase = base.weights.dot(mu);
  double t = (mu0 - rbase) / (rmax - rbase);
  t = std::clamp(t, 0.0, 1.0);
  Eigen::VectorXd w0 = (1.0 - t) * base.weights;
  w0(jmax) += t;

  Eigen::MatrixXd e(2, n);
  e.row(0) = Eigen::RowVectorXd::Ones(n);
  e.row(1) = mu.transpose();
  Eigen::VectorXd rhs(2);
  rhs << 1.0, mu0;

  SolveReport report = active_set_solve(mat, e, rhs, w0, tol);
  report.regularized = regularized;
  return report;
}

}  // namespace hybridrisk
