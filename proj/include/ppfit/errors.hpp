#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace ppfit {

// Error taxonomy mirrored by the C API status codes and the CLI exit codes:
// input/parse problems, numerical failures, configuration conflicts.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct input_error : error {
  using error::error;
};

struct numeric_error : error {
  using error::error;
};

struct config_error : error {
  using error::error;
};

// Non-fatal diagnostics (dropped columns, clamped exponents, ...) go through
// a process-wide handler so tests can capture them. Default prints to stderr.
using warning_handler = std::function<void(const std::string&)>;

void set_warning_handler(warning_handler h);
void warn(const std::string& message);

const char* version();

}  // namespace ppfit
