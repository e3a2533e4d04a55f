#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace treatsim {

enum class ErrorKind {
  InvalidInput,
  Fit,
  Config,
  Capacity,
  HorizonReached,
  Parse,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a category so the CLI can map
/// it to an exit code and a prefix without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace treatsim
