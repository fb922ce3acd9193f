// Command-line front end for hybrid-risk portfolio analysis: estimation from
// return panels, QP solves, surface sweeps, connectedness analytics, and
// deterministic synthetic fixtures.
//
// Exit codes: 0 success, 2 input error, 3 computation error, 4 invariant violation.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hybridrisk/analytics.hpp"
#include "hybridrisk/estimation.hpp"
#include "hybridrisk/io.hpp"
#include "hybridrisk/qp.hpp"
#include "hybridrisk/surface.hpp"
#include "hybridrisk/synth.hpp"

namespace {

using namespace hybridrisk;

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> grid;
  const auto c1 = spec.find(':');
  if (c1 == std::string::npos) {
    grid.push_back(std::stod(spec));
    return grid;
  }
  const auto c2 = spec.find(':', c1 + 1);
  if (c2 == std::string::npos) throw input_error("grid spec must be 'a:b:step' or a single value");
  const double a = std::stod(spec.substr(0, c1));
  const double b = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
  const double step = std::stod(spec.substr(c2 + 1));
  if (!(step > 0.0) || b < a) throw input_error("grid spec requires a <= b and step > 0");
  const int count = static_cast<int>(std::floor((b - a) / step + 1e-9)) + 1;
  grid.reserve(count);
  for (int i = 0; i < count; ++i) grid.push_back(a + i * step);
  return grid;
}

std::optional<double> parse_shrinkage(const std::string& spec) {
  if (spec == "auto") return std::nullopt;
  const double v = std::stod(spec);
  if (v < 0.0 || v > 1.0) throw input_error("--shrinkage must lie in [0,1] or be 'auto'");
  return v;
}

void emit(const std::string& path, const std::string& contents) {
  if (path.empty()) {
    std::cout << contents;
  } else {
    write_file(path, contents);
  }
}

std::string fmt10(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

nlohmann::json report_json(const RiskModel& model, const SolveReport& r,
                           std::optional<double> mu0) {
  nlohmann::json j;
  j["weights"] = std::vector<double>(r.weights.data(), r.weights.data() + r.weights.size());
  j["long_only"] = r.long_only;
  j["nu"] = r.nu;
  j["theta"] = r.theta;
  j["gamma"] = std::vector<double>(r.gamma.data(), r.gamma.data() + r.gamma.size());
  j["active_set"] = r.active_set;
  j["iterations"] = r.iterations;
  j["objective"] = r.objective;
  j["regularized"] = r.regularized;
  if (mu0.has_value()) j["mu0"] = *mu0;
  const PortfolioRisks risks = portfolio_risks(model, Portfolio(r.weights, false));
  j["expected_return"] = risks.expected_return;
  j["variance"] = risks.variance;
  j["connectedness"] = risks.connectedness;
  return j;
}

int run(int argc, char** argv) {
  CLI::App app{"hybrid-risk portfolio optimization: variance/connectedness efficient surfaces"};
  app.require_subcommand(1);

  std::string input, output;
  std::string lambda_grid_spec = "0:1:0.05";
  std::string mu0_grid_spec;
  std::string shrinkage_spec = "auto";
  std::string at_date, regime = "iid";
  bool long_only = false;
  double lambda = 0.5, mu0_value = 0.0, tol = 1e-9;
  bool has_mu0 = false;
  int window = 252, horizon = 10, top_k = 0, synth_n = 5, synth_t = 2000;
  double check_tol = 1e-4;
  std::uint64_t seed = 0;

  auto add_io = [&](CLI::App* cmd, bool need_input) {
    auto* in = cmd->add_option("--input", input, "input file");
    if (need_input) in->required();
    cmd->add_option("--output", output, "output file (default stdout)");
  };

  auto* cmd_estimate = app.add_subcommand("estimate", "estimate a risk model from a return CSV");
  add_io(cmd_estimate, true);
  cmd_estimate->add_option("--window", window, "rolling window length");
  cmd_estimate->add_option("--horizon", horizon, "FEVD horizon");
  cmd_estimate->add_option("--shrinkage", shrinkage_spec, "intensity in [0,1] or 'auto'");
  cmd_estimate->add_option("--at", at_date, "window end date (default: last row)");

  auto* cmd_solve = app.add_subcommand("solve", "solve one hybrid-risk QP");
  add_io(cmd_solve, true);
  cmd_solve->add_option("--lambda", lambda, "trade-off parameter")->required();
  cmd_solve->add_option("--mu0", mu0_value, "return target")->each([&](const std::string&) {
    has_mu0 = true;
  });
  cmd_solve->add_flag("--long-only", long_only, "enforce nonnegative weights");
  cmd_solve->add_option("--tol", tol, "active-set tolerance");

  auto* cmd_frontier = app.add_subcommand("frontier", "risk-risk frontier over a lambda grid");
  add_io(cmd_frontier, true);
  cmd_frontier->add_option("--lambda-grid", lambda_grid_spec, "a:b:step or single value");
  cmd_frontier->add_flag("--long-only", long_only, "enforce nonnegative weights");

  auto* cmd_surface = app.add_subcommand("surface", "sweep the (mu0, lambda) efficient surface");
  cmd_surface->add_option("--input", input, "model JSON")->required();
  cmd_surface->add_option("--output", output, "output base path (.csv/.json appended)")->required();
  cmd_surface->add_option("--lambda-grid", lambda_grid_spec, "a:b:step or single value");
  cmd_surface->add_option("--mu0-grid", mu0_grid_spec, "a:b:step | auto (omit for no target)");
  cmd_surface->add_flag("--long-only", long_only, "enforce nonnegative weights");

  auto* cmd_betas = app.add_subcommand("betas", "connectedness betas of the optimum at lambda");
  add_io(cmd_betas, true);
  cmd_betas->add_option("--lambda", lambda, "trade-off parameter");
  cmd_betas->add_flag("--long-only", long_only, "enforce nonnegative weights");
  cmd_betas->add_option("--top", top_k, "keep only the top-k betas");

  auto* cmd_decompose = app.add_subcommand("decompose", "three-fund decomposition at one lambda");
  add_io(cmd_decompose, true);
  cmd_decompose->add_option("--lambda", lambda, "trade-off parameter");

  auto* cmd_scan = app.add_subcommand("scan", "three-fund separation scan over a lambda grid");
  add_io(cmd_scan, true);
  cmd_scan->add_option("--lambda-grid", lambda_grid_spec, "a:b:step or single value");

  auto* cmd_check = app.add_subcommand("check", "verify trade-off identities on a model");
  add_io(cmd_check, true);
  cmd_check->add_option("--lambda-grid", lambda_grid_spec, "interior lambda grid");
  cmd_check->add_option("--tol", check_tol, "identity tolerance (relative)");

  auto* cmd_synth = app.add_subcommand("synth", "deterministic synthetic return panel");
  cmd_synth->add_option("--output", output, "output CSV (default stdout)");
  cmd_synth->add_option("--seed", seed, "PRNG seed")->required();
  cmd_synth->add_option("--n", synth_n, "asset count");
  cmd_synth->add_option("--t", synth_t, "period count");
  cmd_synth->add_option("--regime", regime, "iid | factor | var1");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (cmd_estimate->parsed()) {
    const ReturnPanel panel = load_panel_csv(input);
    EstimationConfig config;
    config.window = window;
    config.fevd_horizon = horizon;
    config.shrinkage = parse_shrinkage(shrinkage_spec);
    const std::string at = at_date.empty() ? panel.dates.back() : at_date;
    const EstimatedModel doc = estimate_model(panel, at, config);
    emit(output, model_to_json(doc));
    return 0;
  }

  if (cmd_solve->parsed()) {
    const EstimatedModel doc = load_model_json(input);
    SolveReport report;
    if (has_mu0) {
      report = solve_with_return_target(doc.model, lambda, mu0_value, long_only, tol);
    } else {
      const HybridMatrix m = hybrid_matrix(doc.model, lambda);
      report = long_only ? solve_long_only(m, tol) : solve_closed_form(m);
    }
    emit(output, report_json(doc.model, report,
                             has_mu0 ? std::optional<double>(mu0_value) : std::nullopt)
                     .dump(2) +
                     "\n");
    return 0;
  }

  if (cmd_frontier->parsed()) {
    const EstimatedModel doc = load_model_json(input);
    const Surface surface = risk_risk_frontier(doc.model, parse_grid(lambda_grid_spec), long_only);
    std::ostringstream ss;
    write_surface_csv(ss, surface);
    emit(output, ss.str());
    return 0;
  }

  if (cmd_surface->parsed()) {
    const EstimatedModel doc = load_model_json(input);
    const std::vector<double> lambdas = parse_grid(lambda_grid_spec);
    Surface surface;
    if (mu0_grid_spec.empty()) {
      surface = risk_risk_frontier(doc.model, lambdas, long_only);
    } else {
      const std::vector<double> mu0s = (mu0_grid_spec == "auto")
                                           ? default_mu0_grid(doc.model)
                                           : parse_grid(mu0_grid_spec);
      surface = full_surface(doc.model, mu0s, lambdas, long_only);
    }
    save_surface_csv(output + ".csv", surface);
    save_surface_json(output + ".json", surface);

    int infeasible = 0;
    for (const SurfacePoint& pt : surface.points) infeasible += pt.feasible ? 0 : 1;
    std::cout << "surface: " << surface.n_mu0 << " x " << surface.n_lambda << " grid, "
              << infeasible << " infeasible cells\n";
    const SurfacePoint& first = surface.points.front();
    const SurfacePoint& last = surface.points.back();
    std::cout << "lambda=" << fmt10(first.lambda) << ": sigma2=" << fmt10(first.variance)
              << " kappa=" << fmt10(first.connectedness) << "\n";
    std::cout << "lambda=" << fmt10(last.lambda) << ": sigma2=" << fmt10(last.variance)
              << " kappa=" << fmt10(last.connectedness) << "\n";
    if (const auto c = detect_degenerate(doc.model)) {
      std::cout << "note: conn = " << fmt10(*c)
                << " * sigma (degenerate); weights are constant across lambda\n";
    }
    return 0;
  }

  if (cmd_betas->parsed()) {
    const EstimatedModel doc = load_model_json(input);
    const HybridMatrix m = hybrid_matrix(doc.model, lambda);
    const SolveReport report = long_only ? solve_long_only(m, tol) : solve_closed_form(m);
    const Eigen::VectorXd betas =
        connectedness_betas(doc.model, Portfolio(report.weights, long_only));
    std::ostringstream ss;
    write_betas_csv(ss, doc.model.labels(), betas, top_k);
    emit(output, ss.str());
    return 0;
  }

  if (cmd_decompose->parsed()) {
    const EstimatedModel doc = load_model_json(input);
    const CornerFunds funds = corner_funds(doc.model, /*long_only=*/false);
    const SolveReport report = solve_closed_form(hybrid_matrix(doc.model, lambda));
    const FundDecomposition dec = three_fund_decompose(funds, report.weights);
    SeparationScan one;
    one.lambdas = {lambda};
    one.decompositions = {dec};
    std::ostringstream ss;
    write_scan_csv(ss, one);
    emit(output, ss.str());
    return 0;
  }

  if (cmd_scan->parsed()) {
    const EstimatedModel doc = load_model_json(input);
    const SeparationScan scan = separation_scan(doc.model, parse_grid(lambda_grid_spec));
    std::ostringstream ss;
    write_scan_csv(ss, scan);
    emit(output, ss.str());
    std::cerr << (scan.all_convex ? "scan: all decompositions convex\n"
                                  : "scan: negative barycentric coefficient found\n");
    return 0;
  }

  if (cmd_check->parsed()) {
    const EstimatedModel doc = load_model_json(input);
    const double rel_tol = check_tol;
    bool violated = false;

    std::cout << "lambda,dsigma2,dkappa,identity_residual,slope,slope_expected\n";
    for (double lam : parse_grid(lambda_grid_spec)) {
      if (lam <= 1e-4 || lam >= 1.0 - 1e-4) continue;
      const TradeoffCheck chk = tradeoff_check(doc.model, lam);
      const double scale = std::abs(chk.dsigma2) + std::abs(chk.dkappa);
      const double expected = -(1.0 - lam) / lam;
      std::cout << fmt10(lam) << ',' << fmt10(chk.dsigma2) << ',' << fmt10(chk.dkappa) << ','
                << fmt10(chk.identity_residual) << ',' << fmt10(chk.slope) << ','
                << fmt10(expected) << '\n';
      if (std::abs(chk.identity_residual) > rel_tol * std::max(scale, 1e-30)) violated = true;
      // Slope is 0/0 in the degenerate proportional case; skip it there.
      if (scale > 1e-12 && std::abs(chk.slope - expected) > 1e-3 * std::abs(expected)) {
        violated = true;
      }
    }

    try {
      const auto curves = analytic_risk_curves(doc.model, parse_grid(lambda_grid_spec));
      double worst = 0.0;
      for (const RiskCurvePoint& pt : curves) {
        worst = std::max(worst, std::abs(pt.lambda * pt.dsigma2 + (1.0 - pt.lambda) * pt.dkappa));
      }
      std::cout << "analytic: max |lambda*dsigma2 + (1-lambda)*dkappa| = " << fmt10(worst) << '\n';
      if (worst > 1e-9) violated = true;
    } catch (const computation_error&) {
      std::cout << "analytic: skipped (matrices do not commute)\n";
    }

    try {
      const SeparationScan scan = separation_scan(doc.model, parse_grid(lambda_grid_spec));
      std::cout << "separation: "
                << (scan.all_convex ? "all convex" : "negative alpha (affine, not convex)")
                << '\n';
    } catch (const computation_error& e) {
      std::cout << "separation: skipped (" << e.what() << ")\n";
    }

    if (violated) {
      std::cerr << "check: trade-off identity violated\n";
      return 4;
    }
    return 0;
  }

  if (cmd_synth->parsed()) {
    const ReturnPanel panel = generate_panel(seed, synth_n, synth_t, parse_regime(regime));
    std::ostringstream ss;
    write_panel_csv(ss, panel);
    emit(output, ss.str());
    return 0;
  }

  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const hybridrisk::input_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const hybridrisk::computation_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const hybridrisk::invariant_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
