#pragma once

#include <stdexcept>
#include <string>

namespace hybridrisk {

// Error families map onto the CLI exit-code contract:
// input_error -> 2, computation_error -> 3, invariant_error -> 4.

struct input_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct computation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct invariant_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace hybridrisk
