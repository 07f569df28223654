#include "vulnidx/error.hpp"

namespace vulnidx {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::malformed_input: return "malformed_input";
    case Errc::duplicate_key: return "duplicate_key";
    case Errc::unknown_key: return "unknown_key";
    case Errc::invalid_geometry: return "invalid_geometry";
    case Errc::degenerate: return "degenerate";
    case Errc::unresolvable: return "unresolvable";
    case Errc::precondition: return "precondition";
    case Errc::no_convergence: return "no_convergence";
    case Errc::missing_intermediate: return "missing_intermediate";
    case Errc::io: return "io";
  }
  return "unknown";
}

}  // namespace vulnidx
