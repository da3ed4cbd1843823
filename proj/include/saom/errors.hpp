#ifndef SAOM_ERRORS_HPP
#define SAOM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace saom {

// Bad input data (files that do not parse, malformed matrices, unknown ids).
struct IngestError : std::runtime_error {
  explicit IngestError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad model configuration (unknown effect names, missing covariates,
// unidentifiable specifications).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace saom

#endif
