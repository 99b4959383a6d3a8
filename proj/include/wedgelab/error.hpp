#pragma once

#include <stdexcept>
#include <string>

namespace wedgelab {

// Exit-code classes used by the command-line driver.
enum class ErrorKind { config = 2, numeric = 3, verification = 4 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

struct NumericError : Error {
    explicit NumericError(const std::string& what) : Error(ErrorKind::numeric, what) {}
};

struct GridError : NumericError {
    using NumericError::NumericError;
};

struct NonFiniteError : NumericError {
    using NumericError::NumericError;
};

struct ParityError : NumericError {
    using NumericError::NumericError;
};

// Raised when a closed-form evaluation is requested at or too close to the blow-up time.
struct BlowupError : NumericError {
    using NumericError::NumericError;
};

struct SolverError : NumericError {
    using NumericError::NumericError;
};

struct VerificationError : Error {
    explicit VerificationError(const std::string& what) : Error(ErrorKind::verification, what) {}
};

} // namespace wedgelab
