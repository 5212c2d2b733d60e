#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "ehdg/basis.hpp"
#include "ehdg/mesh.hpp"
#include "ehdg/trace.hpp"
#include "ehdg/types.hpp"

namespace ehdg {

/// Linearized shallow-water system in (phi, u, v) with backward Euler steps.
struct ShallowProblem {
  /// Mean geopotential height.
  double Phi = 1.0;
  /// Bottom friction.
  double gamma = 0.0;
  /// Coriolis parameter f = f0 + beta (y - y_mid).
  double f0 = 0.0;
  double beta = 0.0;
  double y_mid = 0.0;
  double rho = 1.0;
  double dt = 0.0;
  /// (tau_x, tau_y)(x, t); empty means no wind stress.
  std::function<std::array<double, 2>(const Point&, double)> wind_stress;

  double coriolis(const Point& x) const { return f0 + beta * (x[1] - y_mid); }
};

struct ShallowState {
  ElementField phi;
  ElementField u;
  ElementField v;
};

struct ContractionReport {
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;
  /// B > 0 and C < 1.
  bool valid = false;
};

/// Contraction factor C = A / B of the shallow-water iteration for mesh size
/// h, time step dt, order p, geopotential Phi and friction gamma.
ContractionReport contraction_constants(double h, double dt, int p, double Phi, double gamma);

/// 3 n_p x 3 n_p element matrix, unknowns ordered (phi, u, v).
Matrix assemble_shallow_matrix(const ElementGeom& el, const ShallowProblem& problem, const TensorBasis& basis);

struct ElementOperatorShallow {
  std::size_t element = 0;
  Eigen::PartialPivLU<Matrix> lu;
  double detj = 0.0;
};

ElementOperatorShallow assemble_local_shallow(const ElementGeom& el, const ShallowProblem& problem,
                                              const TensorBasis& basis);

/// phi_hat = {phi} + sqrt(Phi) {theta.n}, each side using its own outward normal.
inline double shallow_trace_value(double phi_minus, double phi_plus, double vn_minus, double vn_plus,
                                  double Phi) {
  return 0.5 * (phi_minus + phi_plus) + 0.5 * std::sqrt(Phi) * (vn_minus + vn_plus);
}

/// Wall trace from the reflection ghost phi+ = phi-, theta+.n+ = theta-.n-.
inline double shallow_wall_value(double phi_minus, double vn_minus, double Phi) {
  return phi_minus + std::sqrt(Phi) * vn_minus;
}

/// Element operators and data for the shallow-water iteration on wall-bounded 2D boxes.
class ShallowDiscretization {
 public:
  ShallowDiscretization(const StructuredMesh& mesh, const TensorBasis& basis, ShallowProblem problem);

  const StructuredMesh& mesh() const { return *mesh_; }
  const TensorBasis& basis() const { return *basis_; }
  const ShallowProblem& problem() const { return problem_; }

  /// Re-evaluates wind-stress loads at time t.
  void set_time(double t);
  double time() const { return time_; }

  const ElementOperatorShallow& op(std::size_t e) const { return ops_[e]; }

  ShallowState zero_state() const;
  TraceField zero_trace() const;

  /// Solves every element with trace phi_hat and previous time level `previous`.
  /// A null `previous` means the homogeneous (zero) previous state.
  void local_solve(const TraceField& trace, const ShallowState* previous, ShallowState& out) const;
  void update_trace(const ShallowState& state, TraceField& out) const;

  /// Element right-hand side for one element (exposed for the oracle and tests).
  Vector element_rhs(std::size_t e, const TraceField& trace, const ShallowState* previous) const;

 private:
  const StructuredMesh* mesh_;
  const TensorBasis* basis_;
  ShallowProblem problem_;
  double time_ = 0.0;
  std::vector<ElementOperatorShallow> ops_;
  std::vector<Vector> stress_loads_;
};

/// Squared norm ||phi||^2 + Phi ||theta||^2 over the element volumes.
double shallow_volume_norm2(const ShallowState& s, double Phi, const StructuredMesh& mesh,
                            const TensorBasis& basis);
/// Squared norm ||phi||^2 + Phi ||theta||^2 over all element boundaries.
double shallow_skeleton_norm2(const ShallowState& s, double Phi, const StructuredMesh& mesh,
                              const TensorBasis& basis);

/// Sum over elements of the integral of phi.
double total_mass(const ElementField& phi, const StructuredMesh& mesh, const TensorBasis& basis);

}  // namespace ehdg
