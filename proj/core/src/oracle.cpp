#include "ehdg/oracle.hpp"

#include <cmath>
#include <string>

#include "ehdg/errors.hpp"
#include "ehdg/geometry.hpp"
#include "ehdg/parallel.hpp"

// The oracle deliberately avoids the TensorBasis operator tables and the
// production element assembly: element and face integrals are evaluated here
// point by point from the 1D Lagrange basis and a Gauss rule.

namespace ehdg {
namespace {

constexpr double kSingularRcond = 1e-14;
constexpr double kZeroRowTol = 1e-14;

struct QuadPoint {
  Point x{};
  double w = 0.0;
};

class PointEvaluator {
 public:
  PointEvaluator(const NodalBasis1D& b, int dim) : b_(b), dim_(dim), n_(b.size()) {}

  std::size_t num_nodes() const {
    std::size_t m = 1;
    for (int a = 0; a < dim_; ++a) m *= n_;
    return m;
  }
  std::size_t num_face_nodes() const { return num_nodes() / n_; }

  // Element basis values and physical gradients at physical point x.
  void eval(const ElementGeom& el, const Point& x, Vector& val, std::array<Vector, 3>* grad) const {
    std::array<Vector, 3> l, dl;
    for (int a = 0; a < dim_; ++a) {
      const double xi = reference(el, a, x);
      l[a] = b_.evaluate(xi);
      const double pts[1] = {xi};
      dl[a] = b_.derivative(pts).row(0).transpose() / el.jacobian[a];
    }
    const std::size_t m = num_nodes();
    val.resize(static_cast<Eigen::Index>(m));
    if (grad != nullptr) {
      for (int a = 0; a < dim_; ++a) (*grad)[a].resize(static_cast<Eigen::Index>(m));
    }
    for (std::size_t i = 0; i < m; ++i) {
      std::array<std::size_t, 3> idx{i % n_, (i / n_) % n_, i / (n_ * n_)};
      double v = 1.0;
      for (int a = 0; a < dim_; ++a) v *= l[a][idx[a]];
      val[i] = v;
      if (grad == nullptr) continue;
      for (int a = 0; a < dim_; ++a) {
        double g = dl[a][idx[a]];
        for (int c = 0; c < dim_; ++c) {
          if (c != a) g *= l[c][idx[c]];
        }
        (*grad)[a][i] = g;
      }
    }
  }

  // Face basis (tensor over the tangential axes in increasing order) at x.
  Vector face_eval(const ElementGeom& el, int axis, const Point& x) const {
    std::array<Vector, 2> l;
    int c = 0;
    for (int a = 0; a < dim_; ++a) {
      if (a != axis) l[c++] = b_.evaluate(reference(el, a, x));
    }
    const std::size_t m = num_face_nodes();
    Vector out(static_cast<Eigen::Index>(m));
    for (std::size_t j = 0; j < m; ++j) {
      double v = l[0][j % n_];
      if (dim_ == 3) v *= l[1][j / n_];
      out[j] = v;
    }
    return out;
  }

 private:
  static double reference(const ElementGeom& el, int a, const Point& x) {
    return (x[a] - 0.5 * (el.extent[a].lo + el.extent[a].hi)) / el.jacobian[a];
  }

  const NodalBasis1D& b_;
  int dim_;
  std::size_t n_;
};

std::vector<QuadPoint> volume_rule(const ElementGeom& el, int dim, const QuadratureRule& g) {
  std::vector<QuadPoint> out;
  const std::size_t n = g.size();
  const std::size_t n1 = dim > 1 ? n : 1;
  const std::size_t n2 = dim > 2 ? n : 1;
  for (std::size_t k = 0; k < n2; ++k)
    for (std::size_t j = 0; j < n1; ++j)
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t id[3] = {i, j, k};
        QuadPoint q;
        q.w = 1.0;
        for (int a = 0; a < dim; ++a) {
          const double mid = 0.5 * (el.extent[a].lo + el.extent[a].hi);
          q.x[a] = mid + el.jacobian[a] * g.points[id[a]];
          q.w *= g.weights[id[a]] * el.jacobian[a];
        }
        out.push_back(q);
      }
  return out;
}

std::vector<QuadPoint> face_rule(const ElementGeom& el, int dim, int local_face, const QuadratureRule& g) {
  const int axis = local_face / 2;
  std::vector<QuadPoint> out;
  const std::size_t n = g.size();
  const std::size_t n1 = dim > 2 ? n : 1;
  int t[2] = {-1, -1};
  int c = 0;
  for (int a = 0; a < dim; ++a) {
    if (a != axis) t[c++] = a;
  }
  for (std::size_t j = 0; j < n1; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      QuadPoint q;
      q.x[axis] = (local_face % 2 == 0) ? el.extent[axis].lo : el.extent[axis].hi;
      const std::size_t id[2] = {i, j};
      q.w = 1.0;
      for (int b = 0; b < dim - 1; ++b) {
        const int a = t[b];
        q.x[a] = 0.5 * (el.extent[a].lo + el.extent[a].hi) + el.jacobian[a] * g.points[id[b]];
        q.w *= g.weights[id[b]] * el.jacobian[a];
      }
      out.push_back(q);
    }
  return out;
}

// Element-local pieces of a condensed system with unknowns on interior faces.
//   A_K x = b + sum_l R_l trace_l;   residual_l += Q_l x + D_l trace_l;
// boundary faces carry trace = P_l x + c_l.
struct LocalBlocks {
  Eigen::PartialPivLU<Matrix> lu;
  Vector b;
  std::array<Matrix, 6> R, Q, D, P;
  std::array<Vector, 6> c;
};

void factorize(LocalBlocks& blk, const Matrix& a, std::size_t e) {
  blk.lu.compute(a);
  if (!(blk.lu.rcond() > kSingularRcond)) {
    throw AssemblyError("oracle: singular element matrix on element " + std::to_string(e));
  }
}

std::size_t count_unknowns(const StructuredMesh& mesh, std::size_t face_size) {
  return mesh.num_interior_faces() * face_size;
}

void guard_size(std::size_t n) {
  if (n > kOracleMaxUnknowns) {
    throw SizeGuardError("oracle refuses a dense trace system with " + std::to_string(n) + " unknowns (limit " +
                         std::to_string(kOracleMaxUnknowns) + ")");
  }
}

GlobalTraceSystem condense(const StructuredMesh& mesh, std::size_t nf, const std::vector<LocalBlocks>& blocks) {
  GlobalTraceSystem sys;
  sys.face_size = nf;
  sys.face_offset.assign(mesh.num_faces(), -1);
  long next = 0;
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    if (mesh.face(f).interior()) {
      sys.face_offset[f] = next;
      next += static_cast<long>(nf);
    }
  }
  const auto n = static_cast<Eigen::Index>(next);
  const auto nfi = static_cast<Eigen::Index>(nf);
  sys.matrix = Matrix::Zero(n, n);
  sys.rhs = Vector::Zero(n);
  const int nlf = 2 * mesh.dim();

  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const ElementGeom& el = mesh.element(e);
    const LocalBlocks& blk = blocks[e];
    const Vector x0 = blk.lu.solve(blk.b);
    for (int m = 0; m < nlf; ++m) {
      const long row = sys.face_offset[el.faces[m]];
      if (row < 0) continue;
      sys.rhs.segment(row, nfi) -= blk.Q[m] * x0;
    }
    for (int l = 0; l < nlf; ++l) {
      const long col = sys.face_offset[el.faces[l]];
      if (col < 0) continue;
      // Probe every unit trace vector of face l at once.
      const Matrix s = blk.lu.solve(blk.R[l]);
      for (int m = 0; m < nlf; ++m) {
        const long row = sys.face_offset[el.faces[m]];
        if (row < 0) continue;
        sys.matrix.block(row, col, nfi, nfi) += blk.Q[m] * s;
      }
      sys.matrix.block(col, col, nfi, nfi) += blk.D[l];
    }
  }

  const double scale = sys.matrix.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (sys.matrix.row(i).cwiseAbs().maxCoeff() <= kZeroRowTol * scale &&
        sys.matrix.col(i).cwiseAbs().maxCoeff() <= kZeroRowTol * scale) {
      sys.matrix.row(i).setZero();
      sys.matrix.col(i).setZero();
      sys.matrix(i, i) = 1.0;
      sys.rhs[i] = 0.0;
    }
  }
  return sys;
}

Vector solve_system(const GlobalTraceSystem& sys) {
  if (sys.num_unknowns() == 0) return Vector();
  Eigen::PartialPivLU<Matrix> lu(sys.matrix);
  if (!(lu.rcond() > kSingularRcond)) throw AssemblyError("oracle: singular global trace system");
  return lu.solve(sys.rhs);
}

// Element states and full trace from the interior-face solution.
void recover(const StructuredMesh& mesh, const GlobalTraceSystem& sys, const std::vector<LocalBlocks>& blocks,
             const Vector& lambda, Matrix& states, TraceField& trace) {
  const auto nfi = static_cast<Eigen::Index>(sys.face_size);
  const int nlf = 2 * mesh.dim();
  trace = TraceField(mesh.num_faces(), sys.face_size);
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    if (sys.face_offset[f] >= 0) trace.face(f) = lambda.segment(sys.face_offset[f], nfi);
  }
  states.resize(blocks.front().b.size(), static_cast<Eigen::Index>(mesh.num_elements()));
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const ElementGeom& el = mesh.element(e);
    const LocalBlocks& blk = blocks[e];
    Vector rhs = blk.b;
    for (int l = 0; l < nlf; ++l) {
      if (sys.face_offset[el.faces[l]] >= 0) rhs += blk.R[l] * trace.face(el.faces[l]);
    }
    const Vector x = blk.lu.solve(rhs);
    states.col(static_cast<Eigen::Index>(e)) = x;
    for (int l = 0; l < nlf; ++l) {
      const std::size_t f = el.faces[l];
      if (sys.face_offset[f] >= 0) continue;
      Vector t = blk.c[l];
      if (blk.P[l].size() > 0) t += blk.P[l] * x;
      trace.face(f) = t;
    }
  }
}

LocalBlocks transport_blocks(const StructuredMesh& mesh, const ElementGeom& el, const TransportProblem& pr,
                             const PointEvaluator& ev, const QuadratureRule& g, double time,
                             const ElementField* previous) {
  const int dim = mesh.dim();
  const auto np = static_cast<Eigen::Index>(ev.num_nodes());
  const auto nf = static_cast<Eigen::Index>(ev.num_face_nodes());
  Matrix a = Matrix::Zero(np, np);
  LocalBlocks blk;
  blk.b = Vector::Zero(np);
  Vector val;
  std::array<Vector, 3> grad;

  const bool transient = pr.transient && previous != nullptr;
  Vector prev;
  if (transient) prev = previous->col(static_cast<Eigen::Index>(el.index));

  for (const QuadPoint& q : volume_rule(el, dim, g)) {
    ev.eval(el, q.x, val, &grad);
    const Point beta = pr.velocity(q.x);
    const double divb = pr.velocity_divergence ? pr.velocity_divergence(q.x) : 0.0;
    Vector div_bv = divb * val;
    for (int d = 0; d < dim; ++d) div_bv += beta[d] * grad[d];
    a.noalias() -= q.w * div_bv * val.transpose();
    if (pr.forcing) blk.b += q.w * pr.forcing(q.x, time) * val;
    if (pr.transient) {
      a.noalias() += (q.w / pr.dt) * val * val.transpose();
      if (transient) blk.b += (q.w / pr.dt) * val.dot(prev) * val;
    }
  }

  for (int lf = 0; lf < 2 * dim; ++lf) {
    const int axis = lf / 2;
    const FaceInfo& face = mesh.face(el.faces[lf]);
    Point n{};
    n[axis] = (lf % 2 == 0) ? -1.0 : 1.0;
    const auto pts = face_rule(el, dim, lf, g);
    if (face.interior()) {
      blk.R[lf] = Matrix::Zero(np, nf);
      blk.Q[lf] = Matrix::Zero(nf, np);
      blk.D[lf] = Matrix::Zero(nf, nf);
      for (const QuadPoint& q : pts) {
        ev.eval(el, q.x, val, nullptr);
        const Vector psi = ev.face_eval(el, axis, q.x);
        const double bn = dot(pr.velocity(q.x), n);
        a.noalias() += q.w * (bn + std::abs(bn)) * val * val.transpose();
        blk.R[lf].noalias() += q.w * std::abs(bn) * val * psi.transpose();
        blk.Q[lf].noalias() += q.w * (bn + std::abs(bn)) * psi * val.transpose();
        blk.D[lf].noalias() -= q.w * std::abs(bn) * psi * psi.transpose();
      }
      continue;
    }
    bool inflow = false;
    for (const QuadPoint& q : pts) {
      const Point beta = pr.velocity(q.x);
      if (dot(beta, n) < -1e-13 * std::sqrt(dot(beta, beta))) inflow = true;
    }
    Matrix mf = Matrix::Zero(nf, nf);
    Matrix proj_rhs = Matrix::Zero(nf, np);
    Vector g_rhs = Vector::Zero(nf);
    for (const QuadPoint& q : pts) {
      ev.eval(el, q.x, val, nullptr);
      const Vector psi = ev.face_eval(el, axis, q.x);
      mf.noalias() += q.w * psi * psi.transpose();
      proj_rhs.noalias() += q.w * psi * val.transpose();
      if (inflow && pr.inflow) g_rhs += q.w * pr.inflow(q.x, time) * psi;
    }
    const Eigen::LDLT<Matrix> mf_ldlt(mf);
    if (inflow) {
      blk.c[lf] = mf_ldlt.solve(g_rhs);
      for (const QuadPoint& q : pts) {
        ev.eval(el, q.x, val, nullptr);
        const Vector psi = ev.face_eval(el, axis, q.x);
        const double bn = dot(pr.velocity(q.x), n);
        a.noalias() += q.w * (bn + std::abs(bn)) * val * val.transpose();
        blk.b += q.w * std::abs(bn) * psi.dot(blk.c[lf]) * val;
      }
    } else {
      // u_hat = u on outflow and characteristic faces: the stabilization drops out.
      blk.c[lf] = Vector::Zero(nf);
      blk.P[lf] = mf_ldlt.solve(proj_rhs);
      for (const QuadPoint& q : pts) {
        ev.eval(el, q.x, val, nullptr);
        a.noalias() += q.w * dot(pr.velocity(q.x), n) * val * val.transpose();
      }
    }
  }
  factorize(blk, a, el.index);
  return blk;
}

LocalBlocks shallow_blocks(const StructuredMesh& mesh, const ElementGeom& el, const ShallowProblem& pr,
                           const PointEvaluator& ev, const QuadratureRule& g, double time,
                           const ShallowState& previous) {
  const auto np = static_cast<Eigen::Index>(ev.num_nodes());
  const auto nf = static_cast<Eigen::Index>(ev.num_face_nodes());
  const double Phi = pr.Phi;
  const double s = std::sqrt(Phi);
  const double dt = pr.dt;
  const auto ec = static_cast<Eigen::Index>(el.index);
  Matrix a = Matrix::Zero(3 * np, 3 * np);
  LocalBlocks blk;
  blk.b = Vector::Zero(3 * np);
  Vector val;
  std::array<Vector, 3> grad;
  auto blkm = [&](int r, int c) { return a.block(r * np, c * np, np, np); };

  for (const QuadPoint& q : volume_rule(el, 2, g)) {
    ev.eval(el, q.x, val, &grad);
    const double f = pr.coriolis(q.x);
    const Matrix vv = q.w * val * val.transpose();
    blkm(0, 0) += vv / dt;
    blkm(0, 1) -= Phi * q.w * grad[0] * val.transpose();
    blkm(0, 2) -= Phi * q.w * grad[1] * val.transpose();
    blkm(1, 0) -= Phi * q.w * grad[0] * val.transpose();
    blkm(1, 1) += (Phi / dt + pr.gamma * Phi) * vv;
    blkm(1, 2) -= Phi * f * vv;
    blkm(2, 0) -= Phi * q.w * grad[1] * val.transpose();
    blkm(2, 1) += Phi * f * vv;
    blkm(2, 2) += (Phi / dt + pr.gamma * Phi) * vv;
    blk.b.segment(0, np) += (q.w / dt) * val.dot(previous.phi.col(ec)) * val;
    blk.b.segment(np, np) += (Phi * q.w / dt) * val.dot(previous.u.col(ec)) * val;
    blk.b.segment(2 * np, np) += (Phi * q.w / dt) * val.dot(previous.v.col(ec)) * val;
    if (pr.wind_stress) {
      const auto tau = pr.wind_stress(q.x, time);
      blk.b.segment(np, np) += (q.w * tau[0] / pr.rho) * val;
      blk.b.segment(2 * np, np) += (q.w * tau[1] / pr.rho) * val;
    }
  }

  for (int lf = 0; lf < 4; ++lf) {
    const int axis = lf / 2;
    const FaceInfo& face = mesh.face(el.faces[lf]);
    Point n{};
    n[axis] = (lf % 2 == 0) ? -1.0 : 1.0;
    const auto pts = face_rule(el, 2, lf, g);
    if (face.interior()) {
      blk.R[lf] = Matrix::Zero(3 * np, nf);
      blk.Q[lf] = Matrix::Zero(nf, 3 * np);
      blk.D[lf] = Matrix::Zero(nf, nf);
      for (const QuadPoint& q : pts) {
        ev.eval(el, q.x, val, nullptr);
        const Vector psi = ev.face_eval(el, axis, q.x);
        const Matrix vv = q.w * val * val.transpose();
        const Matrix vp = q.w * val * psi.transpose();
        const Matrix pv = vp.transpose();
        blkm(0, 0) += s * vv;
        blkm(0, 1) += Phi * n[0] * vv;
        blkm(0, 2) += Phi * n[1] * vv;
        blk.R[lf].block(0, 0, np, nf) += s * vp;
        blk.R[lf].block(np, 0, np, nf) -= Phi * n[0] * vp;
        blk.R[lf].block(2 * np, 0, np, nf) -= Phi * n[1] * vp;
        blk.Q[lf].block(0, 0, nf, np) += s * pv;
        blk.Q[lf].block(0, np, nf, np) += Phi * n[0] * pv;
        blk.Q[lf].block(0, 2 * np, nf, np) += Phi * n[1] * pv;
        blk.D[lf].noalias() -= s * q.w * psi * psi.transpose();
      }
      continue;
    }
    // Wall: phi_hat = phi + sqrt(Phi) theta.n, so the continuity flux vanishes
    // and the momentum boundary term moves to the left side.
    Matrix mf = Matrix::Zero(nf, nf);
    Matrix proj_rhs = Matrix::Zero(nf, 3 * np);
    for (const QuadPoint& q : pts) {
      ev.eval(el, q.x, val, nullptr);
      const Vector psi = ev.face_eval(el, axis, q.x);
      const Matrix vv = q.w * val * val.transpose();
      for (int r = 0; r < 2; ++r) {
        blkm(1 + r, 0) += Phi * n[r] * vv;
        blkm(1 + r, 1) += Phi * s * n[r] * n[0] * vv;
        blkm(1 + r, 2) += Phi * s * n[r] * n[1] * vv;
      }
      mf.noalias() += q.w * psi * psi.transpose();
      const Matrix pv = q.w * psi * val.transpose();
      proj_rhs.block(0, 0, nf, np) += pv;
      proj_rhs.block(0, np, nf, np) += s * n[0] * pv;
      proj_rhs.block(0, 2 * np, nf, np) += s * n[1] * pv;
    }
    blk.P[lf] = mf.ldlt().solve(proj_rhs);
    blk.c[lf] = Vector::Zero(nf);
  }
  factorize(blk, a, el.index);
  return blk;
}

std::vector<LocalBlocks> transport_all_blocks(const TransportProblem& problem, const StructuredMesh& mesh,
                                              const TensorBasis& basis, double time,
                                              const ElementField* previous) {
  if (mesh.dim() != basis.dim() || problem.dim != mesh.dim()) {
    throw ConfigError("oracle: mesh, basis, and problem dimensions differ");
  }
  if (problem.transient && !(problem.dt > 0.0)) throw ConfigError("oracle: transient problem needs dt > 0");
  guard_size(count_unknowns(mesh, basis.num_face_nodes()));
  const PointEvaluator ev(basis.basis1d(), mesh.dim());
  const QuadratureRule g = gauss_quadrature(basis.order() + 2);
  std::vector<LocalBlocks> blocks(mesh.num_elements());
  parallel_for(mesh.num_elements(), [&](std::size_t e) {
    blocks[e] = transport_blocks(mesh, mesh.element(e), problem, ev, g, time, previous);
  });
  return blocks;
}

}  // namespace

GlobalTraceSystem assemble_global_trace_system(const TransportProblem& problem, const StructuredMesh& mesh,
                                               const TensorBasis& basis, double time,
                                               const ElementField* previous) {
  const auto blocks = transport_all_blocks(problem, mesh, basis, time, previous);
  return condense(mesh, basis.num_face_nodes(), blocks);
}

TransportOracleResult solve_oracle(const TransportProblem& problem, const StructuredMesh& mesh,
                                   const TensorBasis& basis, double time, const ElementField* previous) {
  const auto blocks = transport_all_blocks(problem, mesh, basis, time, previous);
  TransportOracleResult out;
  out.system = condense(mesh, basis.num_face_nodes(), blocks);
  recover(mesh, out.system, blocks, solve_system(out.system), out.solution, out.trace);
  return out;
}

double flux_jump_residual(const TransportProblem& problem, const ElementField& u, const TraceField& trace,
                          const StructuredMesh& mesh, const TensorBasis& basis) {
  std::vector<double> part(mesh.num_faces(), 0.0);
  parallel_for(mesh.num_faces(), [&](std::size_t f) {
    const FaceInfo& face = mesh.face(f);
    if (!face.interior()) return;
    const auto pts = face_quadrature_points(mesh, basis, face);
    const Vector um = basis.restrict_to_face(u.col(static_cast<Eigen::Index>(face.minus_element)), face.minus_local);
    const Vector up = basis.restrict_to_face(u.col(static_cast<Eigen::Index>(face.plus_element)), face.plus_local);
    const Vector hat = basis.face_values() * trace.face(f);
    const double jf = face_jacobian(face, mesh.dim());
    double acc = 0.0;
    for (std::size_t q = 0; q < pts.size(); ++q) {
      const double bn = dot(problem.velocity(pts[q]), face.normal);
      const double fm = bn * um[q] + std::abs(bn) * (um[q] - hat[q]);
      const double fp = -bn * up[q] + std::abs(bn) * (up[q] - hat[q]);
      acc += basis.face_weights()[q] * jf * (fm + fp) * (fm + fp);
    }
    part[f] = acc;
  });
  double s = 0.0;
  for (double v : part) s += v;
  return std::sqrt(s);
}

ShallowOracleResult solve_shallow_oracle(const ShallowProblem& problem, const StructuredMesh& mesh,
                                         const TensorBasis& basis, const ShallowState& previous, double time) {
  if (mesh.dim() != 2 || basis.dim() != 2) throw ConfigError("oracle: the shallow-water system is two-dimensional");
  if (!(problem.dt > 0.0) || !(problem.Phi > 0.0)) throw ConfigError("oracle: shallow water needs dt > 0 and Phi > 0");
  guard_size(count_unknowns(mesh, basis.num_face_nodes()));
  const PointEvaluator ev(basis.basis1d(), 2);
  const QuadratureRule g = gauss_quadrature(basis.order() + 2);
  std::vector<LocalBlocks> blocks(mesh.num_elements());
  parallel_for(mesh.num_elements(), [&](std::size_t e) {
    blocks[e] = shallow_blocks(mesh, mesh.element(e), problem, ev, g, time, previous);
  });
  ShallowOracleResult out;
  out.system = condense(mesh, basis.num_face_nodes(), blocks);
  Matrix states;
  recover(mesh, out.system, blocks, solve_system(out.system), states, out.trace);
  const auto np = static_cast<Eigen::Index>(basis.num_nodes());
  out.state.phi = states.topRows(np);
  out.state.u = states.middleRows(np, np);
  out.state.v = states.bottomRows(np);
  return out;
}

double shallow_flux_jump_residual(const ShallowProblem& problem, const ShallowState& s, const TraceField& trace,
                                  const StructuredMesh& mesh, const TensorBasis& basis) {
  const double Phi = problem.Phi;
  const double sq = std::sqrt(Phi);
  std::vector<double> part(mesh.num_faces(), 0.0);
  parallel_for(mesh.num_faces(), [&](std::size_t f) {
    const FaceInfo& face = mesh.face(f);
    if (!face.interior()) return;
    const auto m = static_cast<Eigen::Index>(face.minus_element);
    const auto p = static_cast<Eigen::Index>(face.plus_element);
    const int lm = face.minus_local;
    const int lp = face.plus_local;
    const Point& n = face.normal;
    const Vector phim = basis.restrict_to_face(s.phi.col(m), lm);
    const Vector phip = basis.restrict_to_face(s.phi.col(p), lp);
    const Vector vnm = basis.restrict_to_face(s.u.col(m), lm) * n[0] + basis.restrict_to_face(s.v.col(m), lm) * n[1];
    const Vector vnp = -(basis.restrict_to_face(s.u.col(p), lp) * n[0] + basis.restrict_to_face(s.v.col(p), lp) * n[1]);
    const Vector hat = basis.face_values() * trace.face(f);
    const double jf = face_jacobian(face, 2);
    double acc = 0.0;
    for (Eigen::Index q = 0; q < hat.size(); ++q) {
      const double jump = Phi * (vnm[q] + vnp[q]) + sq * (phim[q] + phip[q] - 2.0 * hat[q]);
      acc += basis.face_weights()[q] * jf * jump * jump;
    }
    part[f] = acc;
  });
  double sum = 0.0;
  for (double v : part) sum += v;
  return std::sqrt(sum);
}

}  // namespace ehdg
