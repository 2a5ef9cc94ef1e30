#pragma once

#include <stdexcept>

namespace cogload {

// Error categories map to CLI exit codes: validation=2, data=3, numeric=4.
struct validation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct data_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace cogload
