#include "ehdg/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ehdg/errors.hpp"

namespace ehdg {
namespace {

constexpr double kPi = std::numbers::pi;

ProblemCase transport2d_smooth() {
  ProblemCase c;
  c.id = "transport2d-smooth";
  c.kind = CaseKind::steady_transport;
  c.dim = 2;
  c.bounds = {Interval{0.0, 1.0}, Interval{0.0, 1.0}, Interval{0.0, 0.0}};
  c.exact = [](const Point& x, double) { return std::sin(kPi * x[0]) * std::cos(kPi * x[1]) / kPi; };
  c.transport.dim = 2;
  c.transport.velocity = [](const Point& x) { return Point{x[1], x[0], 0.0}; };
  c.transport.forcing = [](const Point& x, double) {
    return x[1] * std::cos(kPi * x[0]) * std::cos(kPi * x[1]) - x[0] * std::sin(kPi * x[0]) * std::sin(kPi * x[1]);
  };
  c.transport.inflow = c.exact;
  return c;
}

ProblemCase transport2d_discontinuous() {
  ProblemCase c;
  c.id = "transport2d-discontinuous";
  c.kind = CaseKind::steady_transport;
  c.dim = 2;
  c.bounds = {Interval{0.0, 2.0}, Interval{0.0, 2.0}, Interval{0.0, 0.0}};
  c.stopping = StoppingMode::successive_difference;
  c.transport.dim = 2;
  c.transport.velocity = [](const Point& x) { return Point{1.0 + std::sin(kPi * x[1] / 2.0), 2.0, 0.0}; };
  // Inflow faces are x = 0 and y = 0; face quadrature points never hit the corner.
  c.transport.inflow = [](const Point& x, double) {
    if (x[0] <= 0.0) return 1.0;
    if (x[0] <= 1.0) return std::pow(std::sin(kPi * x[0]), 6);
    return 0.0;
  };
  return c;
}

ProblemCase transport3d_steady() {
  ProblemCase c;
  c.id = "transport3d-steady";
  c.kind = CaseKind::steady_transport;
  c.dim = 3;
  c.bounds = {Interval{0.0, 1.0}, Interval{0.0, 1.0}, Interval{0.0, 1.0}};
  c.exact = [](const Point& x, double) {
    return std::sin(kPi * x[0]) * std::cos(kPi * x[1]) * std::sin(kPi * x[2]) / kPi;
  };
  c.transport.dim = 3;
  c.transport.velocity = [](const Point& x) { return Point{x[2], x[0], x[1]}; };
  c.transport.forcing = [](const Point& x, double) {
    const double sx = std::sin(kPi * x[0]), cx = std::cos(kPi * x[0]);
    const double sy = std::sin(kPi * x[1]), cy = std::cos(kPi * x[1]);
    const double sz = std::sin(kPi * x[2]), cz = std::cos(kPi * x[2]);
    return x[2] * cx * cy * sz - x[0] * sx * sy * sz + x[1] * sx * cy * cz;
  };
  c.transport.inflow = c.exact;
  return c;
}

ProblemCase shallow_standing_wave() {
  ProblemCase c;
  c.id = "shallow-standing-wave";
  c.kind = CaseKind::shallow_water;
  c.dim = 2;
  c.bounds = {Interval{0.0, 1.0}, Interval{0.0, 1.0}, Interval{0.0, 0.0}};
  c.dt = 1e-6;
  c.steps = 100;
  c.shallow.Phi = 1.0;
  c.shallow.gamma = 0.0;
  c.shallow.dt = c.dt;
  c.shallow_exact = [](const Point& x, double t) {
    const double w = std::sqrt(2.0) * kPi * t;
    const double r = 1.0 / std::sqrt(2.0);
    return std::array<double, 3>{std::cos(kPi * x[0]) * std::cos(kPi * x[1]) * std::cos(w),
                                 r * std::sin(kPi * x[0]) * std::cos(kPi * x[1]) * std::sin(w),
                                 r * std::cos(kPi * x[0]) * std::sin(kPi * x[1]) * std::sin(w)};
  };
  return c;
}

ProblemCase transport3d_gaussian() {
  ProblemCase c;
  c.id = "transport3d-gaussian";
  c.kind = CaseKind::transient_transport;
  c.dim = 3;
  c.bounds = {Interval{0.0, 1.0}, Interval{0.0, 1.0}, Interval{0.0, 1.0}};
  c.dt = 0.01;
  c.steps = 240;
  c.exact = [](const Point& x, double t) {
    const double a = x[0] - 0.2 * t, b = x[1] - 0.2 * t, d = x[2] - 0.2 * t;
    return std::exp(-5.0 * (a * a + b * b + d * d));
  };
  // The velocity matches the drift of the Gaussian center, so the forcing is zero.
  c.transport.dim = 3;
  c.transport.velocity = [](const Point&) { return Point{0.2, 0.2, 0.2}; };
  c.transport.inflow = c.exact;
  c.transport.transient = true;
  c.transport.dt = c.dt;
  return c;
}

double l2_error_now(const ProblemCase& c, const ElementField& u, double t, const StructuredMesh& mesh,
                    const TensorBasis& basis) {
  return l2_volume_error(u, [&](const Point& x) { return c.exact(x, t); }, mesh, basis);
}

}  // namespace

const std::vector<std::string>& catalog_ids() {
  static const std::vector<std::string> ids = {"transport2d-smooth", "transport2d-discontinuous",
                                               "transport3d-steady", "shallow-standing-wave",
                                               "transport3d-gaussian"};
  return ids;
}

ProblemCase catalog(const std::string& id) {
  if (id == "transport2d-smooth") return transport2d_smooth();
  if (id == "transport2d-discontinuous") return transport2d_discontinuous();
  if (id == "transport3d-steady") return transport3d_steady();
  if (id == "shallow-standing-wave") return shallow_standing_wave();
  if (id == "transport3d-gaussian") return transport3d_gaussian();
  throw LookupError("unknown case '" + id + "'");
}

ProblemCase with_time_step(ProblemCase c, double dt) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  c.dt = dt;
  c.shallow.dt = dt;
  c.transport.dt = dt;
  return c;
}

StructuredMesh case_mesh(const ProblemCase& c, std::size_t nel) {
  return build_uniform_mesh(c.dim, nel, c.domain());
}

TransientRun run_transient_case(const ProblemCase& c, const StructuredMesh& mesh, const TensorBasis& basis,
                                const IterationConfig& config, std::size_t steps) {
  TransientRun run;
  double t = 0.0;
  if (c.kind == CaseKind::transient_transport) {
    TransportDiscretization disc(mesh, basis, c.transport);
    run.solution = project_field([&](const Point& x) { return c.exact(x, 0.0); }, mesh, basis);
    for (std::size_t s = 0; s < steps; ++s) {
      StepReport r = ehdg_step_transient(disc, config, run.solution, t, c.exact);
      run.step_iterations.push_back(r.iterations);
      run.last_log = std::move(r.log);
    }
    run.l2_error = l2_error_now(c, run.solution, t, mesh, basis);
  } else if (c.kind == CaseKind::shallow_water) {
    ShallowDiscretization disc(mesh, basis, c.shallow);
    run.shallow_state = project_shallow(c.shallow_exact, 0.0, mesh, basis);
    for (std::size_t s = 0; s < steps; ++s) {
      StepReport r = ehdg_step_shallow(disc, config, run.shallow_state, t, c.shallow_exact);
      run.step_iterations.push_back(r.iterations);
      run.last_log = std::move(r.log);
    }
    run.l2_error = shallow_l2_error(run.shallow_state, c.shallow_exact, t, c.shallow.Phi, mesh, basis);
  } else {
    throw ConfigError("case '" + c.id + "' is not time dependent");
  }
  run.final_time = t;
  return run;
}

std::size_t typical_count(std::span<const std::size_t> counts) {
  std::size_t best = 0;
  std::size_t best_n = 0;
  for (std::size_t v : counts) {
    const auto n = static_cast<std::size_t>(std::count(counts.begin(), counts.end(), v));
    if (n > best_n || (n == best_n && v > best)) {
      best = v;
      best_n = n;
    }
  }
  return best;
}

double observed_order(double e_coarse, double e_fine, double h_coarse, double h_fine) {
  return std::log(e_coarse / e_fine) / std::log(h_coarse / h_fine);
}

std::vector<StudyRow> convergence_study(const ProblemCase& c, std::span<const std::size_t> nels,
                                        std::span<const int> orders, const IterationConfig& config,
                                        std::size_t steps) {
  if (!c.has_exact()) throw ConfigError("case '" + c.id + "' has no exact solution for a convergence study");
  const std::size_t nsteps = steps > 0 ? steps : c.steps;
  std::vector<StudyRow> rows;
  for (int p : orders) {
    const TensorBasis basis(c.dim, p);
    double prev_error = 0.0;
    double prev_h = 0.0;
    for (std::size_t k = 0; k < nels.size(); ++k) {
      const StructuredMesh mesh = case_mesh(c, nels[k]);
      StudyRow row;
      row.nel = nels[k];
      row.p = p;
      switch (c.kind) {
        case CaseKind::steady_transport: {
          const TransportDiscretization disc(mesh, basis, c.transport);
          const auto sol = ehdg_solve_steady(disc, config, [&](const Point& x) { return c.exact(x, 0.0); });
          row.l2_error = l2_error_now(c, sol.solution, 0.0, mesh, basis);
          row.iterations = sol.log.iterations;
          break;
        }
        case CaseKind::transient_transport:
        case CaseKind::shallow_water: {
          const TransientRun run = run_transient_case(c, mesh, basis, config, nsteps);
          row.l2_error = run.l2_error;
          for (std::size_t n : run.step_iterations) row.iterations = std::max(row.iterations, n);
          break;
        }
      }
      row.order = k == 0 ? std::numeric_limits<double>::quiet_NaN()
                         : observed_order(prev_error, row.l2_error, prev_h, mesh.h());
      prev_error = row.l2_error;
      prev_h = mesh.h();
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace ehdg
