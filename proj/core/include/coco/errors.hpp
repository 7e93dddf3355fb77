#pragma once

#include <stdexcept>

namespace coco {

/// Invalid experiment configuration (unknown key, bad value, kind mismatch).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Problem with external data (missing or malformed dataset, unwritable output).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace coco
