#pragma once

#include <stdexcept>
#include <string>

namespace intent {

/// Coarse failure class. Maps one-to-one onto C API status codes and CLI
/// exit codes.
enum class ErrorKind {
  kConfig,      // bad parameters or configuration
  kData,        // malformed or insufficient input data
  kNumeric,     // divergence, non-finite values, rank deficiency
  kIo,          // file could not be opened/written
  kFormat,      // file exists but is not a valid model/report
  kVersion,     // model file written by an unsupported format version
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

const char* to_string(ErrorKind kind) noexcept;

}  // namespace intent
