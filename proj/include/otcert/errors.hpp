#pragma once

#include <stdexcept>
#include <string>

namespace otcert {

/// Errors caused by bad inputs or bad usage. The CLI maps these to exit code 2.
struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct input_error : usage_error {
  using usage_error::usage_error;
};

/// Evaluation requested outside the model's working box.
struct domain_error : usage_error {
  using usage_error::usage_error;
};

/// Operation not available for this model/configuration (e.g. analytic
/// Hessian requested but not provided).
struct unsupported_error : usage_error {
  using usage_error::usage_error;
};

/// Too little data for the check to be meaningful (e.g. < 2 support pairs).
struct degenerate_input_error : usage_error {
  using usage_error::usage_error;
};

/// Errors meaning a verification or computation failed on valid input.
/// The CLI maps these to exit code 1.
struct verification_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The LP engine gave up (cycling guard, infeasible basis).
struct solver_failure : verification_error {
  using verification_error::verification_error;
};

/// No dual potentials certify the plan as optimal within tolerance.
struct certification_failure : verification_error {
  using verification_error::verification_error;
};

/// Singular mixed Hessian where a nonsingular one is required.
struct degeneracy_error : verification_error {
  using verification_error::verification_error;
};

/// Every candidate base point is degenerate; no local certificate exists.
struct no_certificate_error : verification_error {
  using verification_error::verification_error;
};

/// Data contradicts an assumed invariant (e.g. duplicate u with distinct v).
struct consistency_error : verification_error {
  using verification_error::verification_error;
};

}  // namespace otcert
