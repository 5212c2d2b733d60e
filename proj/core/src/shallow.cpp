#include "ehdg/shallow.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ehdg/errors.hpp"
#include "ehdg/geometry.hpp"
#include "ehdg/parallel.hpp"

namespace ehdg {
namespace {

constexpr double kSingularRcond = 1e-14;

double local_face_jacobian(const ElementGeom& el, int lf) {
  // 2D only: the face spans the other axis.
  return el.jacobian[1 - lf / 2];
}

}  // namespace

ContractionReport contraction_constants(double h, double dt, int p, double Phi, double gamma) {
  ContractionReport r;
  const double s = std::sqrt(Phi);
  r.A = std::max((Phi + s) / 2.0, (1.0 + s) / 2.0);
  const double inv = h / (dt * (p + 1.0) * (p + 2.0));
  r.B = std::min(inv + (s - Phi) / 2.0, inv + (2.0 * gamma - 1.0 - s) / 2.0);
  r.C = r.A / r.B;
  r.valid = r.B > 0.0 && r.C < 1.0;
  return r;
}

Matrix assemble_shallow_matrix(const ElementGeom& el, const ShallowProblem& problem, const TensorBasis& basis) {
  if (basis.dim() != 2) throw ConfigError("the shallow-water system is two-dimensional");
  if (!(problem.dt > 0.0)) throw ConfigError("shallow water needs dt > 0");
  if (!(problem.Phi > 0.0)) throw ConfigError("shallow water needs Phi > 0");

  const auto np = static_cast<Eigen::Index>(basis.num_nodes());
  const double detj = volume_jacobian(el, 2);
  const double Phi = problem.Phi;
  const double sqrt_phi = std::sqrt(Phi);
  const auto pts = volume_quadrature_points(el, basis);
  const Vector wj = basis.volume_weights() * detj;
  const Matrix& vals = basis.volume_values();

  Vector fw(static_cast<Eigen::Index>(pts.size()));
  for (std::size_t q = 0; q < pts.size(); ++q) fw[q] = wj[q] * problem.coriolis(pts[q]);

  const Matrix mass = basis.mass() * detj;
  const Matrix coriolis_mass = vals.transpose() * fw.asDiagonal() * vals;
  // K_a(i, j) = (d phi_i / d x_a, phi_j)_K
  const Matrix kx = (basis.volume_derivative(0) / el.jacobian[0]).transpose() * wj.asDiagonal() * vals;
  const Matrix ky = (basis.volume_derivative(1) / el.jacobian[1]).transpose() * wj.asDiagonal() * vals;

  Matrix a = Matrix::Zero(3 * np, 3 * np);
  auto pp = a.block(0, 0, np, np);
  auto pu = a.block(0, np, np, np);
  auto pv = a.block(0, 2 * np, np, np);
  pp = mass / problem.dt;
  pu = -Phi * kx;
  pv = -Phi * ky;
  a.block(np, 0, np, np) = -Phi * kx;
  a.block(np, np, np, np) = (Phi / problem.dt + problem.gamma * Phi) * mass;
  a.block(np, 2 * np, np, np) = -Phi * coriolis_mass;
  a.block(2 * np, 0, np, np) = -Phi * ky;
  a.block(2 * np, np, np, np) = Phi * coriolis_mass;
  a.block(2 * np, 2 * np, np, np) = (Phi / problem.dt + problem.gamma * Phi) * mass;

  // <Phi theta.n + sqrt(Phi) phi, phi_1> on each face; the trace phi_hat goes to the right side.
  const Matrix& fm = basis.face_mass();
  for (int lf = 0; lf < 4; ++lf) {
    const Point n = local_face_normal(lf);
    const Matrix block = fm * local_face_jacobian(el, lf);
    const auto& idx = basis.face_nodes(lf);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      for (std::size_t j = 0; j < idx.size(); ++j) {
        const auto r = static_cast<Eigen::Index>(idx[i]);
        const auto c = static_cast<Eigen::Index>(idx[j]);
        a(r, c) += sqrt_phi * block(i, j);
        a(r, np + c) += Phi * n[0] * block(i, j);
        a(r, 2 * np + c) += Phi * n[1] * block(i, j);
      }
    }
  }
  return a;
}

ElementOperatorShallow assemble_local_shallow(const ElementGeom& el, const ShallowProblem& problem,
                                              const TensorBasis& basis) {
  ElementOperatorShallow op;
  op.element = el.index;
  op.detj = volume_jacobian(el, 2);
  op.lu.compute(assemble_shallow_matrix(el, problem, basis));
  if (!(op.lu.rcond() > kSingularRcond)) {
    throw AssemblyError("singular shallow-water element matrix on element " + std::to_string(el.index));
  }
  return op;
}

ShallowDiscretization::ShallowDiscretization(const StructuredMesh& mesh, const TensorBasis& basis,
                                             ShallowProblem problem)
    : mesh_(&mesh), basis_(&basis), problem_(std::move(problem)) {
  if (mesh.dim() != 2 || basis.dim() != 2) throw ConfigError("the shallow-water system is two-dimensional");
  ops_.resize(mesh.num_elements());
  parallel_for(mesh.num_elements(), [&](std::size_t e) {
    ops_[e] = assemble_local_shallow(mesh.element(e), problem_, basis);
  });
  stress_loads_.resize(mesh.num_elements());
  set_time(0.0);
}

void ShallowDiscretization::set_time(double t) {
  time_ = t;
  const auto np = static_cast<Eigen::Index>(basis_->num_nodes());
  parallel_for(mesh_->num_elements(), [&](std::size_t e) {
    Vector load = Vector::Zero(2 * np);
    if (problem_.wind_stress) {
      const ElementGeom& el = mesh_->element(e);
      const auto pts = volume_quadrature_points(el, *basis_);
      const double detj = volume_jacobian(el, 2);
      Vector tx(static_cast<Eigen::Index>(pts.size())), ty(static_cast<Eigen::Index>(pts.size()));
      for (std::size_t q = 0; q < pts.size(); ++q) {
        const auto tau = problem_.wind_stress(pts[q], t);
        const double w = basis_->volume_weights()[q] * detj / problem_.rho;
        tx[q] = tau[0] * w;
        ty[q] = tau[1] * w;
      }
      load.head(np) = basis_->volume_values().transpose() * tx;
      load.tail(np) = basis_->volume_values().transpose() * ty;
    }
    stress_loads_[e] = std::move(load);
  });
}

ShallowState ShallowDiscretization::zero_state() const {
  const auto np = static_cast<Eigen::Index>(basis_->num_nodes());
  const auto ne = static_cast<Eigen::Index>(mesh_->num_elements());
  return ShallowState{ElementField::Zero(np, ne), ElementField::Zero(np, ne), ElementField::Zero(np, ne)};
}

TraceField ShallowDiscretization::zero_trace() const {
  return TraceField(mesh_->num_faces(), basis_->num_face_nodes());
}

Vector ShallowDiscretization::element_rhs(std::size_t e, const TraceField& trace,
                                          const ShallowState* previous) const {
  const auto np = static_cast<Eigen::Index>(basis_->num_nodes());
  const auto ec = static_cast<Eigen::Index>(e);
  const ElementGeom& el = mesh_->element(e);
  const double Phi = problem_.Phi;
  const double sqrt_phi = std::sqrt(Phi);
  if (trace.face_size() != basis_->num_face_nodes()) {
    throw ContractViolation("trace field face size does not match the basis");
  }

  Vector rhs = Vector::Zero(3 * np);
  rhs.tail(2 * np) = stress_loads_[e];
  if (previous != nullptr) {
    const double s = ops_[e].detj / problem_.dt;
    const Matrix& m = basis_->mass();
    rhs.head(np).noalias() += s * (m * previous->phi.col(ec));
    rhs.segment(np, np).noalias() += s * Phi * (m * previous->u.col(ec));
    rhs.tail(np).noalias() += s * Phi * (m * previous->v.col(ec));
  }
  for (int lf = 0; lf < 4; ++lf) {
    const std::size_t f = el.faces[lf];
    if (f >= trace.num_faces()) throw ContractViolation("missing trace on element " + std::to_string(e));
    const Point n = local_face_normal(lf);
    const Vector lifted = basis_->face_mass() * trace.face(f) * local_face_jacobian(el, lf);
    const auto& idx = basis_->face_nodes(lf);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(idx[i]);
      rhs[r] += sqrt_phi * lifted[i];
      rhs[np + r] -= Phi * n[0] * lifted[i];
      rhs[2 * np + r] -= Phi * n[1] * lifted[i];
    }
  }
  return rhs;
}

void ShallowDiscretization::local_solve(const TraceField& trace, const ShallowState* previous,
                                        ShallowState& out) const {
  const auto np = static_cast<Eigen::Index>(basis_->num_nodes());
  parallel_for(mesh_->num_elements(), [&](std::size_t e) {
    const Vector x = ops_[e].lu.solve(element_rhs(e, trace, previous));
    const auto ec = static_cast<Eigen::Index>(e);
    out.phi.col(ec) = x.head(np);
    out.u.col(ec) = x.segment(np, np);
    out.v.col(ec) = x.tail(np);
  });
}

void ShallowDiscretization::update_trace(const ShallowState& s, TraceField& out) const {
  const double Phi = problem_.Phi;
  parallel_for(mesh_->num_faces(), [&](std::size_t f) {
    const FaceInfo& face = mesh_->face(f);
    const auto m = static_cast<Eigen::Index>(face.minus_element);
    const Vector phim = basis_->restrict_to_face(s.phi.col(m), face.minus_local);
    const Vector vnm = basis_->restrict_to_face(s.u.col(m), face.minus_local) * face.normal[0] +
                       basis_->restrict_to_face(s.v.col(m), face.minus_local) * face.normal[1];
    Vector values(phim.size());
    if (face.interior()) {
      const auto p = static_cast<Eigen::Index>(face.plus_element);
      const Vector phip = basis_->restrict_to_face(s.phi.col(p), face.plus_local);
      // theta+ . n+ with n+ = -n-
      const Vector vnp = -(basis_->restrict_to_face(s.u.col(p), face.plus_local) * face.normal[0] +
                           basis_->restrict_to_face(s.v.col(p), face.plus_local) * face.normal[1]);
      for (Eigen::Index q = 0; q < values.size(); ++q) {
        values[q] = shallow_trace_value(phim[q], phip[q], vnm[q], vnp[q], Phi);
      }
    } else {
      for (Eigen::Index q = 0; q < values.size(); ++q) values[q] = shallow_wall_value(phim[q], vnm[q], Phi);
    }
    out.face(f) = basis_->face_projection() * values;
  });
}

double shallow_volume_norm2(const ShallowState& s, double Phi, const StructuredMesh& mesh,
                            const TensorBasis& basis) {
  std::vector<double> part(mesh.num_elements());
  const Matrix& m = basis.mass();
  parallel_for(mesh.num_elements(), [&](std::size_t e) {
    const auto c = static_cast<Eigen::Index>(e);
    const double detj = volume_jacobian(mesh.element(e), basis.dim());
    const double a = s.phi.col(c).dot(m * s.phi.col(c));
    const double b = s.u.col(c).dot(m * s.u.col(c)) + s.v.col(c).dot(m * s.v.col(c));
    part[e] = detj * (a + Phi * b);
  });
  double sum = 0.0;
  for (double v : part) sum += v;
  return sum;
}

double shallow_skeleton_norm2(const ShallowState& s, double Phi, const StructuredMesh& mesh,
                              const TensorBasis& basis) {
  std::vector<double> part(mesh.num_elements());
  const Matrix& fm = basis.face_mass();
  parallel_for(mesh.num_elements(), [&](std::size_t e) {
    const auto c = static_cast<Eigen::Index>(e);
    const ElementGeom& el = mesh.element(e);
    double acc = 0.0;
    for (int lf = 0; lf < 4; ++lf) {
      const Vector a = basis.face_trace(s.phi.col(c), lf);
      const Vector b = basis.face_trace(s.u.col(c), lf);
      const Vector d = basis.face_trace(s.v.col(c), lf);
      acc += local_face_jacobian(el, lf) * (a.dot(fm * a) + Phi * (b.dot(fm * b) + d.dot(fm * d)));
    }
    part[e] = acc;
  });
  double sum = 0.0;
  for (double v : part) sum += v;
  return sum;
}

double total_mass(const ElementField& phi, const StructuredMesh& mesh, const TensorBasis& basis) {
  const Vector ones_weights = basis.mass() * Vector::Ones(static_cast<Eigen::Index>(basis.num_nodes()));
  double sum = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    sum += volume_jacobian(mesh.element(e), basis.dim()) *
           ones_weights.dot(phi.col(static_cast<Eigen::Index>(e)));
  }
  return sum;
}

}  // namespace ehdg
