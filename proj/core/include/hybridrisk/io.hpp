#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hybridrisk/analytics.hpp"
#include "hybridrisk/estimation.hpp"
#include "hybridrisk/surface.hpp"

namespace hybridrisk {

// Panel CSV: header `date,<label1>,...,<labelN>`, ISO-8601 dates, decimal
// returns. Rows with empty cells are rejected with a row-numbered error.
ReturnPanel read_panel_csv(std::istream& in, const std::string& source = "<stream>");
ReturnPanel load_panel_csv(const std::string& path);
void write_panel_csv(std::ostream& out, const ReturnPanel& panel);
void save_panel_csv(const std::string& path, const ReturnPanel& panel);

// Model JSON, schema version 1:
// {schema, n, labels, mu, sigma (row-major), conn (row-major), tci, window_end}
std::string model_to_json(const EstimatedModel& doc);
EstimatedModel model_from_json(const std::string& text);
EstimatedModel load_model_json(const std::string& path);
void save_model_json(const std::string& path, const EstimatedModel& doc);

// Surface CSV: mu0,lambda,exp_return,variance,connectedness,binding,w_1..w_N,status
void write_surface_csv(std::ostream& out, const Surface& surface);
void save_surface_csv(const std::string& path, const Surface& surface);

// Surface JSON (nested grid); bit-exact round trip.
std::string surface_to_json(const Surface& surface);
Surface surface_from_json(const std::string& text);
void save_surface_json(const std::string& path, const Surface& surface);
Surface load_surface_json(const std::string& path);

// Betas CSV `label,beta`, sorted descending by beta; top_k <= 0 keeps all rows.
void write_betas_csv(std::ostream& out, const std::vector<std::string>& labels,
                     const Eigen::VectorXd& betas, int top_k = 0);

// Separation-scan CSV `lambda,alpha_mv,alpha_mc,alpha_max,convex,residual`.
void write_scan_csv(std::ostream& out, const SeparationScan& scan);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace hybridrisk
