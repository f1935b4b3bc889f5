// Error taxonomy. Validation errors signal rejected inputs or violated
// preconditions (CLI exit code 2); numerical errors signal failures of the
// numerics themselves: brackets, divergence, resolution, blow-up (exit 3).
#pragma once

#include <stdexcept>
#include <string>

namespace srlab {

class error : public std::runtime_error {
 public:
  explicit error(const std::string& what) : std::runtime_error(what) {}
  virtual int exit_code() const noexcept = 0;
};

class validation_error : public error {
 public:
  using error::error;
  int exit_code() const noexcept override { return 2; }
};

class numerical_error : public error {
 public:
  using error::error;
  int exit_code() const noexcept override { return 3; }
};

// -- validation family --------------------------------------------------

// Operation requires a structure kind that was not supplied (e.g. the
// polynomial family for P/Q evaluations).
class unsupported_structure_error : public validation_error {
 public:
  using validation_error::validation_error;
};

// phi vanishes along a curve: the planar controls are not recoverable.
class degenerate_structure_error : public validation_error {
 public:
  using validation_error::validation_error;
};

// Query point sits on the curve: winding number undefined.
class ill_posed_query_error : public validation_error {
 public:
  using validation_error::validation_error;
};

// Generic violated precondition (non-closed input, endpoint mismatch, ...).
class domain_error : public validation_error {
 public:
  using validation_error::validation_error;
};

// -- numerical family ----------------------------------------------------

// Curve assembly produced mismatched junctions.
class construction_error : public numerical_error {
 public:
  using numerical_error::numerical_error;
};

// Grid too coarse: connected components unstable under refinement.
class resolution_error : public numerical_error {
 public:
  using numerical_error::numerical_error;
};

// Root finder has no sign change in its bracket.
class bracket_error : public numerical_error {
 public:
  using numerical_error::numerical_error;
};

// Optimizer failed to make progress for many consecutive iterations.
class divergence_error : public numerical_error {
 public:
  using numerical_error::numerical_error;
};

// Integrated state left the representable range.
class blow_up_error : public numerical_error {
 public:
  using numerical_error::numerical_error;
};

// Zero-length polyline edge: length gradient undefined.
class gradient_undefined_error : public numerical_error {
 public:
  using numerical_error::numerical_error;
};

}  // namespace srlab
