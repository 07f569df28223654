#pragma once

#include <stdexcept>
#include <string>

namespace vulnidx {

enum class Errc {
  malformed_input,     // row/column count, unparsable cell, bad header
  duplicate_key,       // region_id / short_form / feature id repeated
  unknown_key,         // reference to a region or variable that does not exist
  invalid_geometry,    // unclosed ring, missing region_id
  degenerate,          // zero variance, empty input
  unresolvable,        // imputation impossible (variable entirely missing)
  precondition,        // argument outside the operation's domain
  no_convergence,      // eigensolver exceeded its sweep budget
  missing_intermediate,
  io,
};

const char* to_string(Errc code) noexcept;

/// Single exception type for the library; `code()` classifies the failure.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace vulnidx
