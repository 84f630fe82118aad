#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mdemap {

enum class ErrorKind {
  kOutOfArea,
  kInvalidScale,
  kInvalidAngle,
  kUndefinedDirection,
  kEmptyHistogram,
  kEmptyField,
  kParse,
  kIo,
  kConfig,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so callers (the CLI in
/// particular) can map it to an exit status without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mdemap
