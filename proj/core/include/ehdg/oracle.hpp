#pragma once

#include <cstddef>
#include <vector>

#include "ehdg/basis.hpp"
#include "ehdg/mesh.hpp"
#include "ehdg/shallow.hpp"
#include "ehdg/trace.hpp"
#include "ehdg/transport.hpp"

namespace ehdg {

/// Largest trace system the oracle will assemble densely.
inline constexpr std::size_t kOracleMaxUnknowns = 20000;

/// Statically condensed HDG system in the interior-face trace coefficients.
///
/// Boundary traces are eliminated with the boundary rules: inflow data is
/// moved to the right-hand side, outflow and wall traces are folded into the
/// element operators. Rows whose conservation condition is void (beta.n = 0
/// along a whole face) are replaced by identity rows.
struct GlobalTraceSystem {
  Matrix matrix;
  Vector rhs;
  /// First unknown of each face, or -1 for boundary faces.
  std::vector<long> face_offset;
  std::size_t face_size = 0;

  std::size_t num_unknowns() const { return static_cast<std::size_t>(rhs.size()); }
};

struct TransportOracleResult {
  ElementField solution;
  TraceField trace;
  GlobalTraceSystem system;
};

/// Assembles the trace system of the steady problem, or of one backward Euler
/// step from `previous` to `time` when the problem is transient. The element
/// matrices are built here by direct quadrature loops, independently of the
/// iteration's operators. Throws SizeGuardError above kOracleMaxUnknowns.
GlobalTraceSystem assemble_global_trace_system(const TransportProblem& problem, const StructuredMesh& mesh,
                                               const TensorBasis& basis, double time = 0.0,
                                               const ElementField* previous = nullptr);

/// Direct solve of the trace system followed by element recovery.
TransportOracleResult solve_oracle(const TransportProblem& problem, const StructuredMesh& mesh,
                                   const TensorBasis& basis, double time = 0.0,
                                   const ElementField* previous = nullptr);

/// sqrt(sum over interior faces of int_e [[beta.n u + |beta.n| (u - u_hat)]]^2).
double flux_jump_residual(const TransportProblem& problem, const ElementField& u, const TraceField& trace,
                          const StructuredMesh& mesh, const TensorBasis& basis);

struct ShallowOracleResult {
  ShallowState state;
  TraceField trace;
  GlobalTraceSystem system;
};

/// One backward Euler step of the shallow-water system solved directly
/// through the condensed system in phi_hat.
ShallowOracleResult solve_shallow_oracle(const ShallowProblem& problem, const StructuredMesh& mesh,
                                         const TensorBasis& basis, const ShallowState& previous, double time);

/// Continuity-flux jump sqrt(sum_e int_e [[Phi theta.n + sqrt(Phi)(phi - phi_hat)]]^2).
double shallow_flux_jump_residual(const ShallowProblem& problem, const ShallowState& s, const TraceField& trace,
                                  const StructuredMesh& mesh, const TensorBasis& basis);

}  // namespace ehdg
