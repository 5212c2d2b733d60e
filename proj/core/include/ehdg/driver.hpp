#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ehdg/basis.hpp"
#include "ehdg/mesh.hpp"
#include "ehdg/shallow.hpp"
#include "ehdg/trace.hpp"
#include "ehdg/transport.hpp"

namespace ehdg {

enum class StoppingMode {
  /// | ||u^k - u_e|| - ||u^{k-1} - u_e|| | < tol for k >= 2; needs the exact
  /// solution. Iteration 1 stops only when u^1 = u^0 exactly.
  error_difference,
  /// ||u^k - u^{k-1}||_L2 < tol.
  successive_difference,
  /// Skeleton L2 norm of trace^k - trace^{k-1} < tol.
  trace_residual,
};

std::string to_string(StoppingMode mode);
StoppingMode parse_stopping_mode(const std::string& name);

struct IterationConfig {
  double tolerance = 1e-10;
  StoppingMode stopping = StoppingMode::error_difference;
  /// 0 selects 10 * number of elements.
  std::size_t max_iterations = 0;
  bool record_history = true;

  std::size_t resolved_max_iterations(std::size_t num_elements) const {
    return max_iterations > 0 ? max_iterations : 10 * num_elements;
  }
};

struct IterationRecord {
  std::size_t iteration = 0;
  /// NaN when no exact solution is available.
  double error_vs_exact = 0.0;
  double successive_diff = 0.0;
  double skeleton_norm = 0.0;
  double trace_diff = 0.0;
};

struct ConvergenceLog {
  std::vector<IterationRecord> history;
  std::size_t iterations = 0;
  bool converged = false;
  /// Exponential rate fitted to the error history (successive differences
  /// when no exact solution is known).
  std::optional<double> rate;

  /// Columns: iteration,error_vs_exact,successive_diff,skeleton_norm
  void write_csv(std::ostream& out) const;
};

/// Raised when the iteration hits its limit; carries the log so far.
class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, ConvergenceLog log)
      : std::runtime_error(what), log_(std::move(log)) {}
  const ConvergenceLog& log() const { return log_; }

 private:
  ConvergenceLog log_;
};

// ---- norms ---------------------------------------------------------------

/// sqrt(sum_K int_K (u_h - u_e)^2) with the basis quadrature.
double l2_volume_error(const ElementField& u, const ScalarField& exact, const StructuredMesh& mesh,
                       const TensorBasis& basis);
double l2_volume_norm(const ElementField& u, const StructuredMesh& mesh, const TensorBasis& basis);

/// Face weights at face quadrature points, one vector per mesh face; an empty
/// list means the unit weight.
using FaceWeights = std::vector<Vector>;

/// sqrt(sum_K int_dK w u^2) for a discontinuous element field.
double skeleton_weighted_norm(const ElementField& u, const FaceWeights& weights, const StructuredMesh& mesh,
                              const TensorBasis& basis);
/// sqrt(sum_e int_e w u^2) for a trace field.
double skeleton_weighted_norm(const TraceField& trace, const FaceWeights& weights, const StructuredMesh& mesh,
                              const TensorBasis& basis);

// ---- rate fitting ----------------------------------------------------------

struct RateFit {
  /// Least-squares slope of ln(norm) against the iteration index.
  std::optional<double> rate;
  /// Last index of the pre-floor window.
  std::size_t floor_index = 0;
  std::size_t window = 0;
  double r_squared = 0.0;
};

/// Fits ln(norm_k) ~ a + rate k on the pre-floor window. The floor starts at
/// the first k whose ratio norm_k / norm_{k-1} exceeds 0.99; at least five
/// window points are required for a defined rate.
RateFit fit_exponential_rate(std::span<const double> norms);

// ---- steady transport ------------------------------------------------------

struct SteadySolution {
  ElementField solution;
  /// The trace the final local solves used, so (solution, trace) is a
  /// consistent pair for conservation checks.
  TraceField trace;
  ConvergenceLog log;
};

/// Runs the fixed-point iteration: local solves with the current trace, then a
/// trace update from the new element solutions, until the stopping rule holds.
/// `exact` is required for error-difference stopping. Throws NonConvergenceError.
SteadySolution ehdg_solve_steady(const TransportDiscretization& disc, const IterationConfig& config,
                                 const ScalarField& exact = {}, const ElementField* initial = nullptr);

// ---- transient problems ----------------------------------------------------

struct StepReport {
  std::size_t iterations = 0;
  ConvergenceLog log;
};

/// One backward Euler step of transient transport, warm-started from `state`
/// at time `time`. On return `state` and `time` hold the new level.
StepReport ehdg_step_transient(TransportDiscretization& disc, const IterationConfig& config,
                               ElementField& state, double& time, const SpaceTimeField& exact = {});

/// Exact (phi, u, v) at (x, t).
using ShallowExact = std::function<std::array<double, 3>(const Point&, double)>;

/// One backward Euler step of the shallow-water system, warm-started from `state`.
StepReport ehdg_step_shallow(ShallowDiscretization& disc, const IterationConfig& config, ShallowState& state,
                             double& time, const ShallowExact& exact = {});

/// sqrt(||phi - phi_e||^2 + Phi ||theta - theta_e||^2).
double shallow_l2_error(const ShallowState& s, const ShallowExact& exact, double t, double Phi,
                        const StructuredMesh& mesh, const TensorBasis& basis);

/// Per-element L2 projection of a scalar field onto the nodal basis.
ElementField project_field(const ScalarField& f, const StructuredMesh& mesh, const TensorBasis& basis);
/// Projection of an exact shallow-water state at time t.
ShallowState project_shallow(const ShallowExact& exact, double t, const StructuredMesh& mesh,
                             const TensorBasis& basis);

}  // namespace ehdg
