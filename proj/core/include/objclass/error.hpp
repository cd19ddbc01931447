#pragma once

#include <stdexcept>
#include <string>

namespace objclass {

// File-system or payload problems (missing file, size mismatch, bad bytes).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed configuration or command-line usage. The CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace objclass
