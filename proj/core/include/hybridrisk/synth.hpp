#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "hybridrisk/estimation.hpp"

namespace hybridrisk {

enum class SynthRegime { iid, factor, var1 };

SynthRegime parse_regime(const std::string& name);

/// Stable VAR(1) coefficient matrix used by the var1 regime: 0.4 on the
/// diagonal, 0.05 on the superdiagonal (spectral radius 0.4).
Eigen::MatrixXd synth_var1_coefficients(int n);

/// Deterministic synthetic return panel. The generator is mt19937_64 seeded
/// directly with `seed`; standard normals come from Box-Muller on 53-bit
/// uniforms, so output is reproducible across platforms and languages.
ReturnPanel generate_panel(std::uint64_t seed, int n, int t, SynthRegime regime);

}  // namespace hybridrisk
