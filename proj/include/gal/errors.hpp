#pragma once
#include <stdexcept>
#include <string>

namespace gal {

// Error categories map one-to-one onto CLI exit codes (see README).
enum class ErrorCategory : int {
    usage = 2,      // bad command line / config
    input = 3,      // inconsistent or invalid input values
    format = 4,     // malformed file contents
    dimension = 5,  // shape mismatch between numeric objects
    state = 6,      // operation called in an invalid order
    numeric = 7,    // non-finite values where finite ones are required
};

class Error : public std::runtime_error {
public:
    Error(ErrorCategory cat, const std::string& msg) : std::runtime_error(msg), cat_(cat) {}
    ErrorCategory category() const { return cat_; }
    int exit_code() const { return static_cast<int>(cat_); }

private:
    ErrorCategory cat_;
};

struct UsageError : Error {
    explicit UsageError(const std::string& m) : Error(ErrorCategory::usage, m) {}
};
struct InputError : Error {
    explicit InputError(const std::string& m) : Error(ErrorCategory::input, m) {}
};
struct FormatError : Error {
    explicit FormatError(const std::string& m) : Error(ErrorCategory::format, m) {}
};
struct DimensionError : Error {
    explicit DimensionError(const std::string& m) : Error(ErrorCategory::dimension, m) {}
};
struct StateError : Error {
    explicit StateError(const std::string& m) : Error(ErrorCategory::state, m) {}
};
struct NumericError : Error {
    explicit NumericError(const std::string& m) : Error(ErrorCategory::numeric, m) {}
};

} // namespace gal
