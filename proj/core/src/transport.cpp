#include "ehdg/transport.hpp"

#include <cmath>
#include <string>

#include "ehdg/errors.hpp"
#include "ehdg/geometry.hpp"
#include "ehdg/parallel.hpp"

namespace ehdg {
namespace {

constexpr double kSingularRcond = 1e-14;

// Relative threshold below which beta.n counts as zero when classifying faces.
constexpr double kCharacteristicTol = 1e-13;

}  // namespace

BoundaryClass classify_boundary_face(const StructuredMesh& mesh, const TensorBasis& basis,
                                     const FaceInfo& face, const VectorField& velocity) {
  if (face.interior()) throw ContractViolation("classify_boundary_face called on an interior face");
  bool pos = false;
  bool neg = false;
  for (const Point& x : face_quadrature_points(mesh, basis, face)) {
    const Point b = velocity(x);
    const double bn = dot(b, face.normal);
    const double scale = std::sqrt(dot(b, b));
    if (bn > kCharacteristicTol * scale) pos = true;
    else if (bn < -kCharacteristicTol * scale) neg = true;
  }
  if (pos && neg) {
    throw UnsupportedFaceError("beta.n changes sign on boundary face " + std::to_string(face.index));
  }
  if (neg) return BoundaryClass::inflow;
  if (pos) return BoundaryClass::outflow;
  return BoundaryClass::characteristic;
}

Matrix assemble_transport_matrix(const ElementGeom& el, const TransportProblem& problem,
                                 const TensorBasis& basis) {
  const int dim = basis.dim();
  const auto pts = volume_quadrature_points(el, basis);
  const auto nq = static_cast<Eigen::Index>(pts.size());
  const double detj = volume_jacobian(el, dim);

  // B(q, i) = div(beta phi_i)(x_q) = beta . grad phi_i + div(beta) phi_i
  Matrix b = Matrix::Zero(nq, static_cast<Eigen::Index>(basis.num_nodes()));
  Vector wj = basis.volume_weights() * detj;
  std::array<Vector, 3> beta;
  for (int a = 0; a < dim; ++a) beta[a].resize(nq);
  Vector divb = Vector::Zero(nq);
  for (Eigen::Index q = 0; q < nq; ++q) {
    const Point v = problem.velocity(pts[q]);
    for (int a = 0; a < dim; ++a) beta[a][q] = v[a];
    if (problem.velocity_divergence) divb[q] = problem.velocity_divergence(pts[q]);
  }
  for (int a = 0; a < dim; ++a) {
    b.noalias() += (beta[a] / el.jacobian[a]).asDiagonal() * basis.volume_derivative(a);
  }
  if (problem.velocity_divergence) b.noalias() += divb.asDiagonal() * basis.volume_values();

  Matrix a_k = -(b.transpose() * wj.asDiagonal() * basis.volume_values());

  const Matrix& ef = basis.face_values();
  for (int lf = 0; lf < 2 * dim; ++lf) {
    const Point n = local_face_normal(lf);
    const auto fpts = local_face_quadrature_points(el, basis, lf);
    double measure = 1.0;
    for (int c = 0; c < dim; ++c) {
      if (c != lf / 2) measure *= el.extent[c].length();
    }
    const double jf = measure / (dim == 2 ? 2.0 : 4.0);
    Vector w(static_cast<Eigen::Index>(fpts.size()));
    for (std::size_t q = 0; q < fpts.size(); ++q) {
      const double bn = dot(problem.velocity(fpts[q]), n);
      w[q] = basis.face_weights()[q] * jf * (bn + std::abs(bn));
    }
    const Matrix block = ef.transpose() * w.asDiagonal() * ef;
    const auto& idx = basis.face_nodes(lf);
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < idx.size(); ++j) a_k(idx[i], idx[j]) += block(i, j);
  }

  if (problem.transient) {
    if (!(problem.dt > 0.0)) throw ConfigError("transient transport needs dt > 0");
    a_k += (detj / problem.dt) * basis.mass();
  }
  return a_k;
}

ElementOperatorTransport assemble_local_transport(const ElementGeom& el, const TransportProblem& problem,
                                                  const TensorBasis& basis) {
  const int dim = basis.dim();
  ElementOperatorTransport op;
  op.element = el.index;
  op.lu.compute(assemble_transport_matrix(el, problem, basis));
  if (!(op.lu.rcond() > kSingularRcond)) {
    throw AssemblyError("singular transport element matrix on element " + std::to_string(el.index));
  }
  const Matrix& ef = basis.face_values();
  for (int lf = 0; lf < 2 * dim; ++lf) {
    const Point n = local_face_normal(lf);
    const auto fpts = local_face_quadrature_points(el, basis, lf);
    double measure = 1.0;
    for (int c = 0; c < dim; ++c) {
      if (c != lf / 2) measure *= el.extent[c].length();
    }
    const double jf = measure / (dim == 2 ? 2.0 : 4.0);
    Vector w(static_cast<Eigen::Index>(fpts.size()));
    for (std::size_t q = 0; q < fpts.size(); ++q) {
      w[q] = basis.face_weights()[q] * jf * std::abs(dot(problem.velocity(fpts[q]), n));
    }
    op.lift[lf] = ef.transpose() * w.asDiagonal() * ef;
  }
  if (problem.transient) {
    op.mass_scale = volume_jacobian(el, dim) / problem.dt;
    op.reference_mass = basis.shared_mass();
  }
  return op;
}

Vector transport_load(const ElementGeom& el, const TransportProblem& problem, const TensorBasis& basis,
                      double time) {
  const auto np = static_cast<Eigen::Index>(basis.num_nodes());
  if (!problem.forcing) return Vector::Zero(np);
  const auto pts = volume_quadrature_points(el, basis);
  Vector fw(static_cast<Eigen::Index>(pts.size()));
  const double detj = volume_jacobian(el, basis.dim());
  for (std::size_t q = 0; q < pts.size(); ++q) {
    fw[q] = problem.forcing(pts[q], time) * basis.volume_weights()[q] * detj;
  }
  return basis.volume_values().transpose() * fw;
}

Vector local_solve_transport(const ElementOperatorTransport& op, const TensorBasis& basis,
                             const Eigen::Ref<const Vector>& load, const TraceField& trace,
                             const std::array<std::size_t, 6>& faces, const Vector* previous) {
  const int dim = basis.dim();
  if (trace.face_size() != basis.num_face_nodes()) {
    throw ContractViolation("trace field face size does not match the basis");
  }
  Vector rhs = load;
  for (int lf = 0; lf < 2 * dim; ++lf) {
    if (faces[lf] >= trace.num_faces()) {
      throw ContractViolation("missing trace on local face " + std::to_string(lf) + " of element " +
                              std::to_string(op.element));
    }
    const Vector contrib = op.lift[lf] * trace.face(faces[lf]);
    const auto& idx = basis.face_nodes(lf);
    for (std::size_t i = 0; i < idx.size(); ++i) rhs[idx[i]] += contrib[i];
  }
  if (previous != nullptr && op.mass_scale != 0.0) {
    rhs.noalias() += op.mass_scale * (*op.reference_mass * *previous);
  }
  return op.lu.solve(rhs);
}

Vector upwind_trace(const Eigen::Ref<const Vector>& u_minus, const Eigen::Ref<const Vector>& u_plus,
                    const Eigen::Ref<const Vector>& bn_minus) {
  Vector out(u_minus.size());
  for (Eigen::Index q = 0; q < u_minus.size(); ++q) out[q] = upwind_value(u_minus[q], u_plus[q], bn_minus[q]);
  return out;
}

Vector boundary_trace(BoundaryClass kind, const Eigen::Ref<const Vector>& u_minus_face,
                      const Eigen::Ref<const Vector>& g_face) {
  if (kind == BoundaryClass::inflow) return g_face;
  return u_minus_face;
}

TransportDiscretization::TransportDiscretization(const StructuredMesh& mesh, const TensorBasis& basis,
                                                 TransportProblem problem)
    : mesh_(&mesh), basis_(&basis), problem_(std::move(problem)) {
  if (mesh.dim() != basis.dim() || problem_.dim != mesh.dim()) {
    throw ConfigError("mesh, basis, and problem dimensions differ");
  }
  if (!problem_.velocity) throw ConfigError("transport problem has no velocity field");

  const std::size_t nf = mesh.num_faces();
  normal_velocity_.resize(nf);
  classes_.assign(nf, BoundaryClass::characteristic);
  for (std::size_t f = 0; f < nf; ++f) {
    const FaceInfo& face = mesh.face(f);
    const auto pts = face_quadrature_points(mesh, basis, face);
    Vector bn(static_cast<Eigen::Index>(pts.size()));
    for (std::size_t q = 0; q < pts.size(); ++q) bn[q] = dot(problem_.velocity(pts[q]), face.normal);
    normal_velocity_[f] = std::move(bn);
    if (!face.interior()) classes_[f] = classify_boundary_face(mesh, basis, face, problem_.velocity);
  }

  ops_.resize(mesh.num_elements());
  parallel_for(mesh.num_elements(), [&](std::size_t e) {
    ops_[e] = assemble_local_transport(mesh.element(e), problem_, basis);
  });
  loads_.resize(mesh.num_elements());
  inflow_ = zero_trace();
  set_time(0.0);
}

void TransportDiscretization::set_time(double t) {
  time_ = t;
  parallel_for(mesh_->num_elements(), [&](std::size_t e) {
    loads_[e] = transport_load(mesh_->element(e), problem_, *basis_, t);
  });
  for (std::size_t f = 0; f < mesh_->num_faces(); ++f) {
    if (classes_[f] != BoundaryClass::inflow || mesh_->face(f).interior()) continue;
    const auto pts = face_quadrature_points(*mesh_, *basis_, mesh_->face(f));
    Vector g = Vector::Zero(static_cast<Eigen::Index>(pts.size()));
    if (problem_.inflow) {
      for (std::size_t q = 0; q < pts.size(); ++q) g[q] = problem_.inflow(pts[q], t);
    }
    inflow_.face(f) = project_to_face(*basis_, g);
  }
}

std::vector<Vector> TransportDiscretization::face_weights() const {
  std::vector<Vector> w(normal_velocity_.size());
  for (std::size_t f = 0; f < w.size(); ++f) w[f] = normal_velocity_[f].cwiseAbs();
  return w;
}

ElementField TransportDiscretization::zero_field() const {
  return ElementField::Zero(static_cast<Eigen::Index>(basis_->num_nodes()),
                            static_cast<Eigen::Index>(mesh_->num_elements()));
}

TraceField TransportDiscretization::zero_trace() const {
  return TraceField(mesh_->num_faces(), basis_->num_face_nodes());
}

void TransportDiscretization::local_solve(const TraceField& trace, const ElementField* previous,
                                          ElementField& out) const {
  const bool use_prev = problem_.transient && previous != nullptr;
  parallel_for(mesh_->num_elements(), [&](std::size_t e) {
    Vector prev;
    if (use_prev) prev = previous->col(static_cast<Eigen::Index>(e));
    out.col(static_cast<Eigen::Index>(e)) = local_solve_transport(
        ops_[e], *basis_, loads_[e], trace, mesh_->element(e).faces, use_prev ? &prev : nullptr);
  });
}

void TransportDiscretization::update_trace(const ElementField& u, TraceField& out) const {
  parallel_for(mesh_->num_faces(), [&](std::size_t f) {
    const FaceInfo& face = mesh_->face(f);
    const auto minus = u.col(static_cast<Eigen::Index>(face.minus_element));
    if (face.interior()) {
      const auto plus = u.col(static_cast<Eigen::Index>(face.plus_element));
      const Vector um = basis_->restrict_to_face(minus, face.minus_local);
      const Vector up = basis_->restrict_to_face(plus, face.plus_local);
      out.face(f) = project_to_face(*basis_, upwind_trace(um, up, normal_velocity_[f]));
    } else {
      out.face(f) = boundary_trace(classes_[f], basis_->face_trace(minus, face.minus_local), inflow_.face(f));
    }
  });
}

}  // namespace ehdg
