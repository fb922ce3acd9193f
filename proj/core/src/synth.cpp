#include "hybridrisk/synth.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

namespace hybridrisk {

namespace {

// Portable standard normals: 53-bit uniforms from mt19937_64, then Box-Muller.
class GaussianRng {
 public:
  explicit GaussianRng(std::uint64_t seed) : engine_(seed) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform_open() {
    double u = uniform();
    while (u == 0.0) u = uniform();
    return u;
  }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

std::string iso_date(int serial) {
  using namespace std::chrono;
  const year_month_day ymd{sys_days{year{2000} / 1 / 3} + days{serial}};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

}  // namespace

SynthRegime parse_regime(const std::string& name) {
  if (name == "iid") return SynthRegime::iid;
  if (name == "factor") return SynthRegime::factor;
  if (name == "var1") return SynthRegime::var1;
  throw input_error("unknown synth regime: " + name + " (expected iid|factor|var1)");
}

Eigen::MatrixXd synth_var1_coefficients(int n) {
  Eigen::MatrixXd a = 0.4 * Eigen::MatrixXd::Identity(n, n);
  for (int i = 0; i + 1 < n; ++i) a(i, i + 1) = 0.05;
  return a;
}

ReturnPanel generate_panel(std::uint64_t seed, int n, int t, SynthRegime regime) {
  if (n <= 0 || t <= 0) throw input_error("generate_panel: n and t must be positive");
  GaussianRng gauss(seed);

  ReturnPanel panel;
  panel.returns.resize(t, n);
  panel.dates.reserve(t);
  panel.labels.reserve(n);
  for (int j = 0; j < n; ++j) panel.labels.push_back("asset_" + std::to_string(j + 1));
  for (int i = 0; i < t; ++i) panel.dates.push_back(iso_date(i));

  switch (regime) {
    case SynthRegime::iid:
      for (int i = 0; i < t; ++i)
        for (int j = 0; j < n; ++j) panel.returns(i, j) = 0.01 * gauss();
      break;
    case SynthRegime::factor:
      for (int i = 0; i < t; ++i) {
        const double factor = 0.01 * gauss();
        for (int j = 0; j < n; ++j) panel.returns(i, j) = factor + 0.002 * gauss();
      }
      break;
    case SynthRegime::var1: {
      const Eigen::MatrixXd a = synth_var1_coefficients(n);
      Eigen::VectorXd prev = Eigen::VectorXd::Zero(n);
      for (int i = 0; i < t; ++i) {
        Eigen::VectorXd shock(n);
        for (int j = 0; j < n; ++j) shock(j) = 0.01 * gauss();
        prev = a * prev + shock;
        panel.returns.row(i) = prev.transpose();
      }
      break;
    }
  }
  return panel;
}

}  // namespace hybridrisk
