#pragma once

#include <stdexcept>
#include <string>

namespace matmech {

enum class ErrorKind {
  invalid_input,
  dimension,
  unsupported_force,
  unimplemented_order,
  no_closed_form,
  structure_violation,
  not_an_emission,
  underdetermined,
  inconsistency,
  numeric,
  order,
  misuse,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid-input";
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::unsupported_force: return "unsupported-force";
    case ErrorKind::unimplemented_order: return "unimplemented-order";
    case ErrorKind::no_closed_form: return "no-closed-form";
    case ErrorKind::structure_violation: return "structure-violation";
    case ErrorKind::not_an_emission: return "not-an-emission";
    case ErrorKind::underdetermined: return "underdetermined";
    case ErrorKind::inconsistency: return "inconsistency";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::order: return "order";
    case ErrorKind::misuse: return "misuse";
  }
  return "unknown";
}

/// Single exception type for the library; the kind tells callers what went wrong.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace matmech
