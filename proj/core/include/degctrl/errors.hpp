#pragma once

#include <stdexcept>
#include <string>

namespace degctrl {

/// Failure categories; the CLI maps each kind to a distinct exit code.
enum class ErrorKind {
  invalid_degeneracy,   // exponent outside [0,2) or inconsistent side
  divergent_integral,   // singular quadrature did not converge
  degenerate_field,     // field violates its H_a^1 boundary condition or has zero energy
  weight_admissibility, // (gamma, d) outside the admissible window
  empty_window,         // gamma window empty (L <= ln 3 in fixed-point mode)
  configuration,        // bc/degeneracy mismatch, bad config values
  convergence,          // CG or Picard did not converge
  kernel_inadmissible,  // memory kernel fails the decay hypothesis
  radius,               // Picard iterate left the invariant ball
  geometry,             // no room for the nested gluing intervals
  io,                   // file read/write problems
  internal,
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

} // namespace degctrl
