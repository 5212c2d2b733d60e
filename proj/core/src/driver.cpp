#include "ehdg/driver.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <utility>

#include "ehdg/errors.hpp"
#include "ehdg/geometry.hpp"
#include "ehdg/parallel.hpp"

namespace ehdg {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// w_q det(J_e) for every volume quadrature point q and element e.
Matrix volume_weights(const StructuredMesh& mesh, const TensorBasis& basis) {
  Matrix wj(static_cast<Eigen::Index>(basis.num_volume_points()), static_cast<Eigen::Index>(mesh.num_elements()));
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    wj.col(static_cast<Eigen::Index>(e)) = basis.volume_weights() * volume_jacobian(mesh.element(e), basis.dim());
  }
  return wj;
}

Matrix sample_at_quadrature(const ScalarField& f, const StructuredMesh& mesh, const TensorBasis& basis) {
  Matrix out(static_cast<Eigen::Index>(basis.num_volume_points()), static_cast<Eigen::Index>(mesh.num_elements()));
  parallel_for(mesh.num_elements(), [&](std::size_t e) {
    const auto pts = volume_quadrature_points(mesh.element(e), basis);
    for (std::size_t q = 0; q < pts.size(); ++q) out(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(e)) = f(pts[q]);
  });
  return out;
}

// Sum over elements, in element order, of sum_q wj(q,e) d(q,e)^2.
double weighted_square_sum(const Matrix& d, const Matrix& wj) {
  const Vector per_element = (d.array().square() * wj.array()).colwise().sum().transpose();
  double s = 0.0;
  for (Eigen::Index e = 0; e < per_element.size(); ++e) s += per_element[e];
  return s;
}

double mass_norm2(const ElementField& d, const StructuredMesh& mesh, const TensorBasis& basis) {
  const Matrix md = basis.mass() * d;
  double s = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto c = static_cast<Eigen::Index>(e);
    s += volume_jacobian(mesh.element(e), basis.dim()) * d.col(c).dot(md.col(c));
  }
  return s;
}

double trace_norm2(const Matrix& d, const StructuredMesh& mesh, const TensorBasis& basis) {
  const Matrix md = basis.face_mass() * d;
  double s = 0.0;
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    const auto c = static_cast<Eigen::Index>(f);
    s += face_jacobian(mesh.face(f), basis.dim()) * d.col(c).dot(md.col(c));
  }
  return s;
}

void check_weights(const FaceWeights& w, std::size_t num_faces) {
  if (w.empty()) return;
  if (w.size() != num_faces) throw ContractViolation("face weight list does not cover every face");
  for (const Vector& v : w) {
    if ((v.array() < 0.0).any()) throw ContractViolation("negative skeleton weight");
  }
}

bool stop_now(const IterationConfig& cfg, const IterationRecord& rec, double prev_error) {
  switch (cfg.stopping) {
    case StoppingMode::error_difference:
      // Needs two eHDG iterates; the first iteration stops only if nothing moved.
      if (rec.iteration == 1) return rec.successive_diff == 0.0;
      return std::abs(rec.error_vs_exact - prev_error) < cfg.tolerance;
    case StoppingMode::successive_difference:
      return rec.successive_diff < cfg.tolerance;
    case StoppingMode::trace_residual:
      return rec.trace_diff < cfg.tolerance;
  }
  return false;
}

// Generic two-phase fixed-point loop. `ops` supplies solve/update and the norms.
template <class State, class Ops>
ConvergenceLog iterate(Ops& ops, State& state, TraceField& trace, const IterationConfig& cfg,
                       std::size_t max_iterations, TraceField* used_trace = nullptr) {
  if (!(cfg.tolerance > 0.0)) throw ConfigError("tolerance must be positive");
  if (cfg.stopping == StoppingMode::error_difference && !ops.has_exact()) {
    throw ConfigError("error-difference stopping needs an exact solution");
  }
  ConvergenceLog log;
  State next = state;
  TraceField next_trace = trace;
  double prev_error = ops.has_exact() ? ops.error(state) : kNaN;
  for (std::size_t k = 1; k <= max_iterations; ++k) {
    ops.solve(trace, next);
    ops.update(next, next_trace);
    IterationRecord rec;
    rec.iteration = k;
    rec.error_vs_exact = ops.has_exact() ? ops.error(next) : kNaN;
    rec.successive_diff = ops.difference(next, state);
    rec.trace_diff = std::sqrt(trace_norm2(next_trace.data() - trace.data(), ops.mesh(), ops.basis()));
    rec.skeleton_norm = ops.skeleton_norm(next);
    if (cfg.record_history) log.history.push_back(rec);
    std::swap(state, next);
    std::swap(trace, next_trace);
    log.iterations = k;
    if (stop_now(cfg, rec, prev_error)) {
      log.converged = true;
      break;
    }
    prev_error = rec.error_vs_exact;
  }
  if (cfg.record_history) {
    std::vector<double> norms;
    for (const auto& r : log.history) norms.push_back(ops.has_exact() ? r.error_vs_exact : r.successive_diff);
    log.rate = fit_exponential_rate(norms).rate;
  }
  // After the final swap next_trace holds the trace the last local solve used.
  if (used_trace != nullptr) *used_trace = std::move(next_trace);
  if (!log.converged) {
    throw NonConvergenceError("eHDG iteration did not converge in " + std::to_string(max_iterations) +
                                  " iterations",
                              std::move(log));
  }
  return log;
}

class TransportOps {
 public:
  TransportOps(const TransportDiscretization& disc, const ElementField* previous, const ScalarField& exact)
      : disc_(disc), previous_(previous), weights_(disc.face_weights()),
        wj_(volume_weights(disc.mesh(), disc.basis())) {
    if (exact) exact_q_ = sample_at_quadrature(exact, disc.mesh(), disc.basis());
  }

  const StructuredMesh& mesh() const { return disc_.mesh(); }
  const TensorBasis& basis() const { return disc_.basis(); }
  bool has_exact() const { return exact_q_.size() > 0; }
  void solve(const TraceField& t, ElementField& out) const { disc_.local_solve(t, previous_, out); }
  void update(const ElementField& u, TraceField& out) const { disc_.update_trace(u, out); }
  double error(const ElementField& u) const {
    return std::sqrt(weighted_square_sum(basis().volume_values() * u - exact_q_, wj_));
  }
  double difference(const ElementField& a, const ElementField& b) const {
    return std::sqrt(mass_norm2(a - b, mesh(), basis()));
  }
  double skeleton_norm(const ElementField& u) const {
    return skeleton_weighted_norm(u, weights_, mesh(), basis());
  }

 private:
  const TransportDiscretization& disc_;
  const ElementField* previous_;
  FaceWeights weights_;
  Matrix wj_;
  Matrix exact_q_;
};

class ShallowOps {
 public:
  ShallowOps(const ShallowDiscretization& disc, const ShallowState* previous, const ShallowExact& exact, double t)
      : disc_(disc), previous_(previous), wj_(volume_weights(disc.mesh(), disc.basis())) {
    if (exact) {
      for (int c = 0; c < 3; ++c) {
        exact_q_[c] = sample_at_quadrature([&](const Point& x) { return exact(x, t)[c]; }, disc.mesh(),
                                           disc.basis());
      }
    }
  }

  const StructuredMesh& mesh() const { return disc_.mesh(); }
  const TensorBasis& basis() const { return disc_.basis(); }
  bool has_exact() const { return exact_q_[0].size() > 0; }
  void solve(const TraceField& t, ShallowState& out) const { disc_.local_solve(t, previous_, out); }
  void update(const ShallowState& s, TraceField& out) const { disc_.update_trace(s, out); }
  double error(const ShallowState& s) const {
    const Matrix& v = basis().volume_values();
    const double Phi = disc_.problem().Phi;
    return std::sqrt(weighted_square_sum(v * s.phi - exact_q_[0], wj_) +
                     Phi * (weighted_square_sum(v * s.u - exact_q_[1], wj_) +
                            weighted_square_sum(v * s.v - exact_q_[2], wj_)));
  }
  double difference(const ShallowState& a, const ShallowState& b) const {
    const double Phi = disc_.problem().Phi;
    return std::sqrt(mass_norm2(a.phi - b.phi, mesh(), basis()) +
                     Phi * (mass_norm2(a.u - b.u, mesh(), basis()) + mass_norm2(a.v - b.v, mesh(), basis())));
  }
  double skeleton_norm(const ShallowState& s) const {
    return std::sqrt(shallow_skeleton_norm2(s, disc_.problem().Phi, mesh(), basis()));
  }

 private:
  const ShallowDiscretization& disc_;
  const ShallowState* previous_;
  Matrix wj_;
  std::array<Matrix, 3> exact_q_;
};

}  // namespace

std::string to_string(StoppingMode mode) {
  switch (mode) {
    case StoppingMode::error_difference: return "error-difference";
    case StoppingMode::successive_difference: return "successive-difference";
    case StoppingMode::trace_residual: return "trace-residual";
  }
  return "unknown";
}

StoppingMode parse_stopping_mode(const std::string& name) {
  if (name == "error-difference") return StoppingMode::error_difference;
  if (name == "successive-difference") return StoppingMode::successive_difference;
  if (name == "trace-residual") return StoppingMode::trace_residual;
  throw ConfigError("unknown stopping mode '" + name + "'");
}

void ConvergenceLog::write_csv(std::ostream& out) const {
  const auto old_precision = out.precision(17);
  out << "iteration,error_vs_exact,successive_diff,skeleton_norm\n";
  for (const auto& r : history) {
    out << r.iteration << ',' << r.error_vs_exact << ',' << r.successive_diff << ',' << r.skeleton_norm << '\n';
  }
  out.precision(old_precision);
}

double l2_volume_error(const ElementField& u, const ScalarField& exact, const StructuredMesh& mesh,
                       const TensorBasis& basis) {
  const Matrix ex = sample_at_quadrature(exact, mesh, basis);
  return std::sqrt(weighted_square_sum(basis.volume_values() * u - ex, volume_weights(mesh, basis)));
}

double l2_volume_norm(const ElementField& u, const StructuredMesh& mesh, const TensorBasis& basis) {
  return std::sqrt(mass_norm2(u, mesh, basis));
}

double skeleton_weighted_norm(const ElementField& u, const FaceWeights& weights, const StructuredMesh& mesh,
                              const TensorBasis& basis) {
  check_weights(weights, mesh.num_faces());
  const int dim = basis.dim();
  std::vector<double> part(mesh.num_elements(), 0.0);
  parallel_for(mesh.num_elements(), [&](std::size_t e) {
    const ElementGeom& el = mesh.element(e);
    const auto col = u.col(static_cast<Eigen::Index>(e));
    double acc = 0.0;
    for (int lf = 0; lf < 2 * dim; ++lf) {
      const std::size_t f = el.faces[lf];
      const Vector vals = basis.restrict_to_face(col, lf);
      const double jf = face_jacobian(mesh.face(f), dim);
      for (Eigen::Index q = 0; q < vals.size(); ++q) {
        const double w = weights.empty() ? 1.0 : weights[f][q];
        acc += basis.face_weights()[q] * jf * w * vals[q] * vals[q];
      }
    }
    part[e] = acc;
  });
  double s = 0.0;
  for (double v : part) s += v;
  return std::sqrt(s);
}

double skeleton_weighted_norm(const TraceField& trace, const FaceWeights& weights, const StructuredMesh& mesh,
                              const TensorBasis& basis) {
  check_weights(weights, mesh.num_faces());
  double s = 0.0;
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    const Vector vals = basis.face_values() * trace.face(f);
    const double jf = face_jacobian(mesh.face(f), basis.dim());
    for (Eigen::Index q = 0; q < vals.size(); ++q) {
      const double w = weights.empty() ? 1.0 : weights[f][q];
      s += basis.face_weights()[q] * jf * w * vals[q] * vals[q];
    }
  }
  return std::sqrt(s);
}

RateFit fit_exponential_rate(std::span<const double> norms) {
  RateFit fit;
  if (norms.empty()) return fit;
  std::size_t floor = norms.size() - 1;
  for (std::size_t k = 0; k < norms.size(); ++k) {
    const bool bad = !(norms[k] > 0.0) || !std::isfinite(norms[k]);
    if (bad || (k > 0 && norms[k] / norms[k - 1] > 0.99)) {
      floor = k == 0 ? 0 : k - 1;
      if (bad && k == 0) {
        fit.floor_index = 0;
        return fit;
      }
      break;
    }
  }
  fit.floor_index = floor;
  fit.window = floor + 1;
  if (fit.window < 5) return fit;

  const auto n = static_cast<double>(fit.window);
  double sx = 0.0, sy = 0.0;
  for (std::size_t k = 0; k < fit.window; ++k) {
    sx += static_cast<double>(k);
    sy += std::log(norms[k]);
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < fit.window; ++k) {
    const double dx = static_cast<double>(k) - mx;
    const double dy = std::log(norms[k]) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  fit.rate = sxy / sxx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

SteadySolution ehdg_solve_steady(const TransportDiscretization& disc, const IterationConfig& config,
                                 const ScalarField& exact, const ElementField* initial) {
  SteadySolution out;
  out.solution = initial != nullptr ? *initial : disc.zero_field();
  out.trace = disc.zero_trace();
  disc.update_trace(out.solution, out.trace);
  TransportOps ops(disc, nullptr, exact);
  TraceField updated = out.trace;
  out.log = iterate(ops, out.solution, updated, config,
                    config.resolved_max_iterations(disc.mesh().num_elements()), &out.trace);
  return out;
}

StepReport ehdg_step_transient(TransportDiscretization& disc, const IterationConfig& config, ElementField& state,
                               double& time, const SpaceTimeField& exact) {
  if (!disc.problem().transient) throw ConfigError("ehdg_step_transient needs a transient problem");
  const double t_new = time + disc.problem().dt;
  disc.set_time(t_new);
  const ElementField previous = state;
  TraceField trace = disc.zero_trace();
  disc.update_trace(state, trace);
  ScalarField exact_now;
  if (exact) exact_now = [&exact, t_new](const Point& x) { return exact(x, t_new); };
  TransportOps ops(disc, &previous, exact_now);
  StepReport report;
  report.log = iterate(ops, state, trace, config, config.resolved_max_iterations(disc.mesh().num_elements()));
  report.iterations = report.log.iterations;
  time = t_new;
  return report;
}

StepReport ehdg_step_shallow(ShallowDiscretization& disc, const IterationConfig& config, ShallowState& state,
                             double& time, const ShallowExact& exact) {
  const double t_new = time + disc.problem().dt;
  disc.set_time(t_new);
  const ShallowState previous = state;
  TraceField trace = disc.zero_trace();
  disc.update_trace(state, trace);
  ShallowOps ops(disc, &previous, exact, t_new);
  StepReport report;
  report.log = iterate(ops, state, trace, config, config.resolved_max_iterations(disc.mesh().num_elements()));
  report.iterations = report.log.iterations;
  time = t_new;
  return report;
}

double shallow_l2_error(const ShallowState& s, const ShallowExact& exact, double t, double Phi,
                        const StructuredMesh& mesh, const TensorBasis& basis) {
  double sum = 0.0;
  const ElementField* fields[3] = {&s.phi, &s.u, &s.v};
  for (int c = 0; c < 3; ++c) {
    const double e = l2_volume_error(*fields[c], [&](const Point& x) { return exact(x, t)[c]; }, mesh, basis);
    sum += (c == 0 ? 1.0 : Phi) * e * e;
  }
  return std::sqrt(sum);
}

ElementField project_field(const ScalarField& f, const StructuredMesh& mesh, const TensorBasis& basis) {
  const Matrix samples = sample_at_quadrature(f, mesh, basis);
  const Matrix rhs = basis.volume_values().transpose() * basis.volume_weights().asDiagonal() * samples;
  return basis.mass().ldlt().solve(rhs);
}

ShallowState project_shallow(const ShallowExact& exact, double t, const StructuredMesh& mesh,
                             const TensorBasis& basis) {
  ShallowState s;
  s.phi = project_field([&](const Point& x) { return exact(x, t)[0]; }, mesh, basis);
  s.u = project_field([&](const Point& x) { return exact(x, t)[1]; }, mesh, basis);
  s.v = project_field([&](const Point& x) { return exact(x, t)[2]; }, mesh, basis);
  return s;
}

}  // namespace ehdg
