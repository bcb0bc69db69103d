#pragma once
#include <stdexcept>
#include <string>

namespace distfor {

// Error taxonomy mirrored by the CLI exit codes: config -> 2, data -> 3, fit -> 4.
enum class ErrorKind { config, data, fit, internal };

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(ErrorKind::config, msg) {}
};

struct DataError : Error {
    explicit DataError(const std::string& msg) : Error(ErrorKind::data, msg) {}
};

// Fit errors: degenerate samples, non-convergence, invalid parameters.
struct FitError : Error {
    explicit FitError(const std::string& msg) : Error(ErrorKind::fit, msg) {}
};

struct DegenerateSampleError : FitError {
    explicit DegenerateSampleError(const std::string& msg) : FitError(msg) {}
};

struct NonConvergenceError : FitError {
    explicit NonConvergenceError(const std::string& msg) : FitError(msg) {}
};

struct InvalidParameterError : FitError {
    explicit InvalidParameterError(const std::string& msg) : FitError(msg) {}
};

struct SchemaMismatchError : DataError {
    explicit SchemaMismatchError(const std::string& msg) : DataError(msg) {}
};

}  // namespace distfor
