#pragma once

#include <stdexcept>
#include <string>

namespace lcvx {

// Error taxonomy mirrored by the C API status codes and CLI exit codes.
enum class ErrorCode {
    InvalidArgument,  // bad dimensions, non-finite data, malformed input
    Scenario,         // scenario parse/validation failure
    Solver,           // cone solver did not reach the requested status
    Assumption,       // a problem assumption failed at runtime (e.g. no normal switch time)
    Io,               // file system failure
};

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const { return code_; }

  private:
    ErrorCode code_;
};

inline Error invalid_argument_error(const std::string& what) {
    return Error(ErrorCode::InvalidArgument, what);
}
inline Error scenario_error(const std::string& what) { return Error(ErrorCode::Scenario, what); }
inline Error solver_error(const std::string& what) { return Error(ErrorCode::Solver, what); }
inline Error assumption_error(const std::string& what) { return Error(ErrorCode::Assumption, what); }
inline Error io_error(const std::string& what) { return Error(ErrorCode::Io, what); }

}  // namespace lcvx
