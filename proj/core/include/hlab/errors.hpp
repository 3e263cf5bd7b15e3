#pragma once

#include <stdexcept>
#include <string>

namespace hlab {

// Exponents outside the regime an operation is defined for (e.g. a singular-only
// formula queried with q >= 2, or q outside an admissible interval).
struct RegimeError : std::domain_error {
  using std::domain_error::domain_error;
};

// |phi_r| below the machine threshold in the singular regime, where the
// classical formula would blow up; critical points are handled by the
// viscosity definition, not by this evaluator.
struct DegenerateGradientError : std::domain_error {
  using std::domain_error::domain_error;
};

// Sobolev check requested with q >= d.
struct ExponentError : std::domain_error {
  using std::domain_error::domain_error;
};

// Solver produced a value above the blow-up guard (instability signal).
struct BlowUpError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Adaptive time step underflowed; the run cannot make progress.
struct NonConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A query cylinder exits the trajectory's space-time domain.
struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Query base point has no usable positive value (below the positivity floor).
struct DeadPointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A chain step would exit the domain; message reports the violated side.
struct RoomError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// No admissible point/candidate could be selected for a construction.
struct SelectionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Least-squares fit attempted on degenerate data (e.g. all-zero oscillations).
struct DegenerateFitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Norm stayed above the extinction floor for the whole time budget.
struct NoExtinctionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Test function leaks outside the window the weak form is integrated over.
struct SupportViolationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid experiment configuration (unknown keys, bad values, IO trouble).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace hlab
