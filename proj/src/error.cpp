#include "treatsim/error.hpp"

namespace treatsim {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::Fit: return "fit";
    case ErrorKind::Config: return "config";
    case ErrorKind::Capacity: return "capacity";
    case ErrorKind::HorizonReached: return "horizon-reached";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace treatsim
