#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ehdg/driver.hpp"
#include "ehdg/mesh.hpp"
#include "ehdg/shallow.hpp"
#include "ehdg/transport.hpp"

namespace ehdg {

enum class CaseKind { steady_transport, transient_transport, shallow_water };

/// One of the five benchmark problems, fully populated.
struct ProblemCase {
  std::string id;
  CaseKind kind = CaseKind::steady_transport;
  int dim = 2;
  std::array<Interval, 3> bounds{};
  /// Transport data (both transport kinds).
  TransportProblem transport;
  /// Exact transport solution u_e(x, t); empty when unknown.
  SpaceTimeField exact;
  /// Shallow-water data and exact fields.
  ShallowProblem shallow;
  ShallowExact shallow_exact;
  /// Stopping rule prescribed for this case.
  StoppingMode stopping = StoppingMode::error_difference;
  /// Default time step and step count for time-dependent cases.
  double dt = 0.0;
  std::size_t steps = 0;

  bool has_exact() const { return static_cast<bool>(exact) || static_cast<bool>(shallow_exact); }
  std::span<const Interval> domain() const { return {bounds.data(), static_cast<std::size_t>(dim)}; }
};

/// Identifiers accepted by catalog().
const std::vector<std::string>& catalog_ids();

/// Looks up a case by identifier. Throws LookupError for unknown identifiers.
ProblemCase catalog(const std::string& id);

/// Returns a copy of a time-dependent case with a different time step.
ProblemCase with_time_step(ProblemCase c, double dt);

/// Uniform mesh with `nel` elements per axis over the case domain.
StructuredMesh case_mesh(const ProblemCase& c, std::size_t nel);

struct StudyRow {
  std::size_t nel = 0;
  int p = 0;
  double l2_error = 0.0;
  /// Observed order against the previous mesh at the same p; NaN on the first.
  double order = 0.0;
  /// Iterations to converge (steady) or the largest per-step count (time dependent).
  std::size_t iterations = 0;
};

/// h-convergence study over a mesh sequence and a list of orders. Time
/// dependent cases run `steps` steps of the case time step (0 keeps the
/// case default) from the projected exact initial state. Non-convergence
/// reports propagate.
std::vector<StudyRow> convergence_study(const ProblemCase& c, std::span<const std::size_t> nels,
                                        std::span<const int> orders, const IterationConfig& config,
                                        std::size_t steps = 0);

struct TransientRun {
  /// Iterations used by each step.
  std::vector<std::size_t> step_iterations;
  /// Log of the last step.
  ConvergenceLog last_log;
  double final_time = 0.0;
  /// L2 error at the final time (combined norm for shallow water).
  double l2_error = 0.0;
  /// Final state: `solution` for transport, `shallow_state` for shallow water.
  ElementField solution;
  ShallowState shallow_state;
};

/// Runs `steps` backward Euler steps of a time-dependent case from the
/// projected exact initial state. Non-convergence reports propagate.
TransientRun run_transient_case(const ProblemCase& c, const StructuredMesh& mesh, const TensorBasis& basis,
                                const IterationConfig& config, std::size_t steps);

/// Most frequent value; ties go to the larger value. 0 for an empty list.
std::size_t typical_count(std::span<const std::size_t> counts);

/// log(e_coarse / e_fine) / log(h_coarse / h_fine).
double observed_order(double e_coarse, double e_fine, double h_coarse, double h_fine);

}  // namespace ehdg
