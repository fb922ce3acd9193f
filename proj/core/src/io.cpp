#include "hybridrisk/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace hybridrisk {

namespace {

using nlohmann::json;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool is_iso_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (int i : {0, 1, 2, 3, 5, 6, 8, 9}) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  return true;
}

std::string fmt10(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) rows.push_back(m(i, j));
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& arr, int n, const std::string& name) {
  if (!arr.is_array() || static_cast<int>(arr.size()) != n * n) {
    throw input_error("model json: field '" + name + "' must hold " + std::to_string(n * n) +
                      " numbers");
  }
  Eigen::MatrixXd m(n, n);
  int idx = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = arr[idx++].get<double>();
  return m;
}

double json_number_or_nan(const json& v) {
  return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
}

}  // namespace

ReturnPanel read_panel_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw input_error(source + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "date") {
    throw input_error(source + ": header must be 'date,<label1>,...'");
  }

  ReturnPanel panel;
  panel.labels.assign(header.begin() + 1, header.end());
  const int n = panel.cols() == 0 ? static_cast<int>(panel.labels.size()) : panel.cols();

  std::vector<Eigen::VectorXd> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (static_cast<int>(cells.size()) != n + 1) {
      throw input_error(source + ": row " + std::to_string(lineno) + " has " +
                        std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(n + 1));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (cells[c].empty()) {
        throw input_error(source + ": row " + std::to_string(lineno) + " column " +
                          std::to_string(c + 1) + " is empty");
      }
    }
    if (!is_iso_date(cells[0])) {
      throw input_error(source + ": row " + std::to_string(lineno) +
                        " date is not ISO-8601: " + cells[0]);
    }
    Eigen::VectorXd row(n);
    for (int j = 0; j < n; ++j) {
      std::size_t pos = 0;
      double v = 0.0;
      try {
        v = std::stod(cells[j + 1], &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos != cells[j + 1].size()) {
        throw input_error(source + ": row " + std::to_string(lineno) + " column " +
                          std::to_string(j + 2) + " is not a number: " + cells[j + 1]);
      }
      row(j) = v;
    }
    panel.dates.push_back(cells[0]);
    rows.push_back(std::move(row));
  }

  panel.returns.resize(static_cast<Eigen::Index>(rows.size()), n);
  for (std::size_t i = 0; i < rows.size(); ++i) panel.returns.row(static_cast<int>(i)) = rows[i];
  validate_panel(panel);
  return panel;
}

ReturnPanel load_panel_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open " + path);
  return read_panel_csv(in, path);
}

void write_panel_csv(std::ostream& out, const ReturnPanel& panel) {
  out << "date";
  for (const auto& label : panel.labels) out << ',' << label;
  out << '\n';
  for (int i = 0; i < panel.rows(); ++i) {
    out << panel.dates[i];
    for (int j = 0; j < panel.cols(); ++j) out << ',' << fmt10(panel.returns(i, j));
    out << '\n';
  }
}

void save_panel_csv(const std::string& path, const ReturnPanel& panel) {
  std::ostringstream ss;
  write_panel_csv(ss, panel);
  write_file(path, ss.str());
}

std::string model_to_json(const EstimatedModel& doc) {
  json j;
  j["schema"] = 1;
  j["n"] = doc.model.n();
  j["labels"] = doc.model.labels();
  j["mu"] = json::array();
  for (int i = 0; i < doc.model.n(); ++i) j["mu"].push_back(doc.model.mu()(i));
  j["sigma"] = matrix_to_json(doc.model.sigma());
  j["conn"] = matrix_to_json(doc.model.conn());
  j["tci"] = doc.tci;
  j["window_end"] = doc.window_end;
  return j.dump(2) + "\n";
}

EstimatedModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw input_error(std::string("model json: parse failure: ") + e.what());
  }
  try {
    if (j.value("schema", 0) != 1) throw input_error("model json: unsupported schema version");
    const int n = j.at("n").get<int>();
    if (n <= 0) throw input_error("model json: n must be positive");
    std::vector<std::string> labels = j.value("labels", std::vector<std::string>{});
    Eigen::VectorXd mu(n);
    const json& jmu = j.at("mu");
    if (!jmu.is_array() || static_cast<int>(jmu.size()) != n) {
      throw input_error("model json: field 'mu' must hold n numbers");
    }
    for (int i = 0; i < n; ++i) mu(i) = jmu[i].get<double>();
    Eigen::MatrixXd sigma = matrix_from_json(j.at("sigma"), n, "sigma");
    Eigen::MatrixXd conn = matrix_from_json(j.at("conn"), n, "conn");
    // Serialized models must already be symmetric; asymmetry means corruption,
    // not noise worth silently repairing.
    const auto check_symmetric = [](const Eigen::MatrixXd& mtx, const char* name) {
      const double scale = std::max(1.0, mtx.cwiseAbs().maxCoeff());
      if ((mtx - mtx.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale) {
        throw input_error(std::string("model json: '") + name + "' is not symmetric");
      }
    };
    check_symmetric(sigma, "sigma");
    check_symmetric(conn, "conn");
    return EstimatedModel{RiskModel(std::move(sigma), std::move(conn), std::move(mu), labels),
                          j.value("tci", 0.0), j.value("window_end", std::string{})};
  } catch (const json::exception& e) {
    throw input_error(std::string("model json: ") + e.what());
  }
}

EstimatedModel load_model_json(const std::string& path) { return model_from_json(read_file(path)); }

void save_model_json(const std::string& path, const EstimatedModel& doc) {
  write_file(path, model_to_json(doc));
}

void write_surface_csv(std::ostream& out, const Surface& surface) {
  const int n = surface.points.empty() ? 0 : static_cast<int>(surface.points.front().weights.size());
  out << "mu0,lambda,exp_return,variance,connectedness,binding";
  for (int j = 0; j < n; ++j) out << ",w_" << (j + 1);
  out << ",status\n";
  for (const SurfacePoint& pt : surface.points) {
    if (pt.mu0.has_value()) out << fmt10(*pt.mu0);
    out << ',' << fmt10(pt.lambda);
    out << ',' << fmt10(pt.expected_return) << ',' << fmt10(pt.variance) << ','
        << fmt10(pt.connectedness) << ',' << (pt.binding_return ? 1 : 0);
    for (int j = 0; j < n; ++j) out << ',' << fmt10(pt.weights(j));
    out << ',' << (pt.feasible ? "ok" : "infeasible") << '\n';
  }
}

void save_surface_csv(const std::string& path, const Surface& surface) {
  std::ostringstream ss;
  write_surface_csv(ss, surface);
  write_file(path, ss.str());
}

std::string surface_to_json(const Surface& surface) {
  json j;
  j["schema"] = 1;
  j["model_fingerprint"] = std::to_string(surface.model_fingerprint);
  j["n_mu0"] = surface.n_mu0;
  j["n_lambda"] = surface.n_lambda;
  json points = json::array();
  for (const SurfacePoint& pt : surface.points) {
    json p;
    p["lambda"] = pt.lambda;
    p["mu0"] = pt.mu0.has_value() ? json(*pt.mu0) : json(nullptr);
    // NaN risk scalars (infeasible cells) serialize as null.
    p["exp_return"] = std::isfinite(pt.expected_return) ? json(pt.expected_return) : json(nullptr);
    p["variance"] = std::isfinite(pt.variance) ? json(pt.variance) : json(nullptr);
    p["connectedness"] =
        std::isfinite(pt.connectedness) ? json(pt.connectedness) : json(nullptr);
    p["long_only"] = pt.long_only;
    p["binding"] = pt.binding_return;
    p["status"] = pt.feasible ? "ok" : "infeasible";
    json w = json::array();
    for (Eigen::Index i = 0; i < pt.weights.size(); ++i) {
      // NaN (infeasible cells) serializes as null.
      w.push_back(std::isfinite(pt.weights(i)) ? json(pt.weights(i)) : json(nullptr));
    }
    p["weights"] = std::move(w);
    points.push_back(std::move(p));
  }
  j["points"] = std::move(points);
  return j.dump(2) + "\n";
}

Surface surface_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw input_error(std::string("surface json: parse failure: ") + e.what());
  }
  try {
    if (j.value("schema", 0) != 1) throw input_error("surface json: unsupported schema version");
    Surface surface;
    surface.model_fingerprint = std::stoull(j.at("model_fingerprint").get<std::string>());
    surface.n_mu0 = j.at("n_mu0").get<int>();
    surface.n_lambda = j.at("n_lambda").get<int>();
    for (const json& p : j.at("points")) {
      SurfacePoint pt;
      pt.lambda = p.at("lambda").get<double>();
      if (!p.at("mu0").is_null()) pt.mu0 = p.at("mu0").get<double>();
      pt.expected_return = json_number_or_nan(p.at("exp_return"));
      pt.variance = json_number_or_nan(p.at("variance"));
      pt.connectedness = json_number_or_nan(p.at("connectedness"));
      pt.long_only = p.at("long_only").get<bool>();
      pt.binding_return = p.at("binding").get<bool>();
      pt.feasible = p.at("status").get<std::string>() == "ok";
      const json& w = p.at("weights");
      pt.weights.resize(static_cast<Eigen::Index>(w.size()));
      for (std::size_t i = 0; i < w.size(); ++i) {
        pt.weights(static_cast<Eigen::Index>(i)) = json_number_or_nan(w[i]);
      }
      surface.points.push_back(std::move(pt));
    }
    return surface;
  } catch (const json::exception& e) {
    throw input_error(std::string("surface json: ") + e.what());
  }
}

void save_surface_json(const std::string& path, const Surface& surface) {
  write_file(path, surface_to_json(surface));
}

Surface load_surface_json(const std::string& path) { return surface_from_json(read_file(path)); }

void write_betas_csv(std::ostream& out, const std::vector<std::string>& labels,
                     const Eigen::VectorXd& betas, int top_k) {
  if (static_cast<Eigen::Index>(labels.size()) != betas.size()) {
    throw input_error("write_betas_csv: label/beta size mismatch");
  }
  std::vector<int> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&betas](int a, int b) { return betas(a) > betas(b); });
  if (top_k > 0 && top_k < static_cast<int>(order.size())) order.resize(top_k);

  out << "label,beta\n";
  for (int i : order) out << labels[i] << ',' << fmt10(betas(i)) << '\n';
}

void write_scan_csv(std::ostream& out, const SeparationScan& scan) {
  out << "lambda,alpha_mv,alpha_mc,alpha_max,convex,residual\n";
  for (std::size_t i = 0; i < scan.lambdas.size(); ++i) {
    const FundDecomposition& d = scan.decompositions[i];
    out << fmt10(scan.lambdas[i]) << ',' << fmt10(d.alphas(0)) << ',' << fmt10(d.alphas(1)) << ','
        << fmt10(d.alphas(2)) << ',' << (d.convex ? 1 : 0) << ',' << fmt10(d.residual) << '\n';
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot open " + path + " for writing");
  out << contents;
  if (!out) throw input_error("write failure on " + path);
}

}  // namespace hybridrisk
