#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hrqsum {

enum class ErrorKind {
  kParse,
  kFormat,
  kTruncated,
  kInvalidArgument,
  kNotFound,
  kIo,
};

std::string_view error_kind_name(ErrorKind kind);

/// Every failure raised by the library carries a kind so the CLI can report
/// a machine-parsable error line.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace hrqsum
