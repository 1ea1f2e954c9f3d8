#pragma once

#include <stdexcept>

namespace shuffleguard {

// Error taxonomy mirrored by the CLI exit codes: config=2, dataset=3,
// checkpoint=4. Everything else (std::invalid_argument from op-level
// precondition failures included) maps to config.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct dataset_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct checkpoint_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace shuffleguard
