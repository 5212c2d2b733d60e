#pragma once

#include <array>
#include <memory>
#include <vector>

#include "ehdg/basis.hpp"
#include "ehdg/mesh.hpp"
#include "ehdg/trace.hpp"
#include "ehdg/types.hpp"

namespace ehdg {

/// beta . grad(u) = f in the domain, u = g on the inflow boundary; with the
/// transient flag set, backward Euler in time with step dt.
struct TransportProblem {
  int dim = 2;
  VectorField velocity;
  /// div(beta); empty means divergence free.
  ScalarField velocity_divergence;
  /// f(x, t); empty means zero.
  SpaceTimeField forcing;
  /// g(x, t) on inflow faces; empty means zero.
  SpaceTimeField inflow;
  bool transient = false;
  double dt = 0.0;
};

enum class BoundaryClass { inflow, outflow, characteristic };

/// Classifies a boundary face by the sign of beta.n at its quadrature points.
/// Throws UnsupportedFaceError when the sign changes across the face.
BoundaryClass classify_boundary_face(const StructuredMesh& mesh, const TensorBasis& basis,
                                     const FaceInfo& face, const VectorField& velocity);

/// Factorized element matrix of the local upwind HDG transport equation.
struct ElementOperatorTransport {
  std::size_t element = 0;
  Eigen::PartialPivLU<Matrix> lu;
  /// Per local face: face-node block of <|beta.n| u_hat, v>.
  std::array<Matrix, 6> lift;
  /// det(J) / dt for transient problems, 0 otherwise.
  double mass_scale = 0.0;
  std::shared_ptr<const Matrix> reference_mass;
};

/// Raw element matrix
///   -(u, div(beta v))_K + <(beta.n + |beta.n|) u, v>_dK  [+ (u/dt, v)_K]
/// with rows indexed by test functions.
Matrix assemble_transport_matrix(const ElementGeom& el, const TransportProblem& problem,
                                 const TensorBasis& basis);

/// Assembles and factorizes the element operator. Throws AssemblyError if singular.
ElementOperatorTransport assemble_local_transport(const ElementGeom& el, const TransportProblem& problem,
                                                  const TensorBasis& basis);

/// (f(., t), v)_K for all basis functions v.
Vector transport_load(const ElementGeom& el, const TransportProblem& problem, const TensorBasis& basis,
                      double time);

/// Solves A_K u = load + <|beta.n| u_hat, v>_dK [+ (u_prev/dt, v)_K].
///
/// `faces` lists the trace face index of each local face of the element.
/// Throws ContractViolation if a face trace is missing or has the wrong size.
Vector local_solve_transport(const ElementOperatorTransport& op, const TensorBasis& basis,
                             const Eigen::Ref<const Vector>& load, const TraceField& trace,
                             const std::array<std::size_t, 6>& faces, const Vector* previous = nullptr);

/// Pointwise upwind value 0.5(u- + u+) + 0.5 sign(bn-)(u- - u+), sign(0) = 0.
inline double upwind_value(double u_minus, double u_plus, double bn_minus) {
  const double s = (bn_minus > 0.0) ? 1.0 : (bn_minus < 0.0 ? -1.0 : 0.0);
  return 0.5 * (u_minus + u_plus) + 0.5 * s * (u_minus - u_plus);
}

/// Pointwise upwind trace at face quadrature points.
Vector upwind_trace(const Eigen::Ref<const Vector>& u_minus, const Eigen::Ref<const Vector>& u_plus,
                    const Eigen::Ref<const Vector>& bn_minus);

/// Boundary trace in face-nodal coefficients: projected inflow data on
/// inflow faces, the interior trace otherwise.
Vector boundary_trace(BoundaryClass kind, const Eigen::Ref<const Vector>& u_minus_face,
                      const Eigen::Ref<const Vector>& g_face);

/// L2 projection of face quadrature values onto the face polynomial space.
inline Vector project_to_face(const TensorBasis& basis, const Eigen::Ref<const Vector>& values) {
  return basis.face_projection() * values;
}

/// Element operators, loads, and face data for one transport problem on one mesh.
///
/// Immutable between set_time() calls; local_solve() and update_trace() are
/// safe to call concurrently on distinct outputs.
class TransportDiscretization {
 public:
  TransportDiscretization(const StructuredMesh& mesh, const TensorBasis& basis, TransportProblem problem);

  const StructuredMesh& mesh() const { return *mesh_; }
  const TensorBasis& basis() const { return *basis_; }
  const TransportProblem& problem() const { return problem_; }

  /// Re-evaluates forcing and inflow data at time t.
  void set_time(double t);
  double time() const { return time_; }

  const ElementOperatorTransport& op(std::size_t e) const { return ops_[e]; }
  const Vector& load(std::size_t e) const { return loads_[e]; }
  BoundaryClass boundary_class(std::size_t face) const { return classes_[face]; }
  /// beta . n- at the quadrature points of a face.
  const Vector& normal_velocity(std::size_t face) const { return normal_velocity_[face]; }
  /// |beta . n| at face quadrature points, for weighted skeleton norms.
  std::vector<Vector> face_weights() const;

  ElementField zero_field() const;
  TraceField zero_trace() const;

  /// Phase 1: independent element solves with a fixed trace.
  void local_solve(const TraceField& trace, const ElementField* previous, ElementField& out) const;
  /// Phase 2: independent per-face trace updates from element solutions.
  void update_trace(const ElementField& u, TraceField& out) const;

 private:
  const StructuredMesh* mesh_;
  const TensorBasis* basis_;
  TransportProblem problem_;
  double time_ = 0.0;
  std::vector<ElementOperatorTransport> ops_;
  std::vector<Vector> loads_;
  std::vector<Vector> normal_velocity_;
  std::vector<BoundaryClass> classes_;
  TraceField inflow_;
};

}  // namespace ehdg
