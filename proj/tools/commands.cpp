#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "cli.hpp"
#include "ehdg/errors.hpp"
#include "ehdg/oracle.hpp"
#include "ehdg/parallel.hpp"
#include "ehdg/problems.hpp"

namespace ehdg::cli {
namespace {

namespace fs = std::filesystem;

// Verification thresholds for the direct-solve cross-checks.
constexpr double kEquivalenceTol = 1e-8;
constexpr double kOracleJumpTol = 1e-10;
constexpr double kIterationJumpTol = 1e-9;
constexpr double kMassTol = 1e-11;

ProblemCase resolved_case(const RunConfig& rc, const std::string& id) {
  ProblemCase c = catalog(id);
  if (rc.dt && c.kind != CaseKind::steady_transport) c = with_time_step(c, *rc.dt);
  return c;
}

IterationConfig iteration_config(const RunConfig& rc, const ProblemCase& c) {
  IterationConfig ic;
  ic.tolerance = rc.tol;
  ic.stopping = rc.stopping.value_or(c.stopping);
  ic.max_iterations = rc.max_iter;
  return ic;
}

fs::path output_file(const RunConfig& rc, const std::string& name) {
  fs::create_directories(rc.out);
  return fs::path(rc.out) / name;
}

std::ofstream open_csv(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << std::setprecision(17);
  return f;
}

void write_log(const RunConfig& rc, const ConvergenceLog& log) {
  std::ofstream f = open_csv(output_file(rc, "convergence_log.csv"));
  log.write_csv(f);
}

std::string csv_real(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

/// Plain-text field dump: a header block, then one row per element.
void write_field(const RunConfig& rc, const ProblemCase& c, const StructuredMesh& mesh, const TensorBasis& basis,
                 double time, const std::vector<std::pair<std::string, const ElementField*>>& fields) {
  std::ofstream f = open_csv(output_file(rc, "field.txt"));
  f << "# ehdg field dump\n";
  f << "case " << c.id << "\n";
  f << "dim " << mesh.dim() << "\n";
  f << "nel";
  for (int a = 0; a < mesh.dim(); ++a) f << ' ' << mesh.nel(a);
  f << "\n";
  f << "p " << basis.order() << "\n";
  f << "time " << time << "\n";
  f << "nodes " << basis.num_nodes()
    << " gauss-lobatto-legendre tensor product, lexicographic with axis 0 fastest, mapped affinely from [-1,1]^d"
       " onto the element box\n";
  f << "fields";
  for (const auto& [name, field] : fields) f << ' ' << name;
  f << "\n";
  f << "columns element";
  for (int a = 0; a < mesh.dim(); ++a) f << " lo" << a << " hi" << a;
  f << " then " << basis.num_nodes() << " nodal values per field in field order\n";
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const ElementGeom& el = mesh.element(e);
    f << e;
    for (int a = 0; a < mesh.dim(); ++a) f << ' ' << el.extent[a].lo << ' ' << el.extent[a].hi;
    for (const auto& [name, field] : fields) {
      for (Eigen::Index i = 0; i < field->rows(); ++i) f << ' ' << (*field)(i, static_cast<Eigen::Index>(e));
    }
    f << "\n";
  }
}

ScalarField exact_at(const ProblemCase& c, double t) {
  if (!c.exact) return {};
  return [&c, t](const Point& x) { return c.exact(x, t); };
}

int run_solve(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  const ProblemCase c = resolved_case(rc, rc.case_id);
  const StructuredMesh mesh = case_mesh(c, rc.nel);
  const TensorBasis basis(c.dim, rc.p);
  const IterationConfig ic = iteration_config(rc, c);

  if (c.kind == CaseKind::steady_transport) {
    const TransportDiscretization disc(mesh, basis, c.transport);
    SteadySolution sol;
    try {
      sol = ehdg_solve_steady(disc, ic, exact_at(c, 0.0));
    } catch (const NonConvergenceError& e) {
      write_log(rc, e.log());
      err << "ehdg: " << e.what() << "\n";
      return kExitNonConvergence;
    }
    write_log(rc, sol.log);
    write_field(rc, c, mesh, basis, 0.0, {{"u", &sol.solution}});
    out << "case " << c.id << " nel " << rc.nel << " p " << rc.p << ": " << sol.log.iterations << " iterations";
    if (c.exact) out << ", L2 error " << std::setprecision(6) << l2_volume_error(sol.solution, exact_at(c, 0.0), mesh, basis);
    out << "\n";
    return kExitOk;
  }

  // Time-dependent cases: one log per step; the last one goes to convergence_log.csv.
  const std::size_t steps = rc.steps.value_or(c.steps);
  std::ofstream steps_csv = open_csv(output_file(rc, "steps.csv"));
  steps_csv << "step,time,iterations,l2_error\n";
  double t = 0.0;
  ConvergenceLog last;
  auto report = [&](std::size_t step, const StepReport& r, double error) {
    steps_csv << step << ',' << t << ',' << r.iterations << ',' << csv_real(error) << '\n';
    last = r.log;
  };
  try {
    if (c.kind == CaseKind::transient_transport) {
      TransportDiscretization disc(mesh, basis, c.transport);
      ElementField u = project_field(exact_at(c, 0.0), mesh, basis);
      for (std::size_t s = 1; s <= steps; ++s) {
        const StepReport r = ehdg_step_transient(disc, ic, u, t, c.exact);
        report(s, r, l2_volume_error(u, exact_at(c, t), mesh, basis));
      }
      write_field(rc, c, mesh, basis, t, {{"u", &u}});
    } else {
      ShallowDiscretization disc(mesh, basis, c.shallow);
      ShallowState st = project_shallow(c.shallow_exact, 0.0, mesh, basis);
      for (std::size_t s = 1; s <= steps; ++s) {
        const StepReport r = ehdg_step_shallow(disc, ic, st, t, c.shallow_exact);
        report(s, r, shallow_l2_error(st, c.shallow_exact, t, c.shallow.Phi, mesh, basis));
      }
      write_field(rc, c, mesh, basis, t, {{"phi", &st.phi}, {"u", &st.u}, {"v", &st.v}});
    }
  } catch (const NonConvergenceError& e) {
    write_log(rc, e.log());
    err << "ehdg: " << e.what() << " at t = " << t << "\n";
    return kExitNonConvergence;
  }
  write_log(rc, last);
  out << "case " << c.id << " nel " << rc.nel << " p " << rc.p << ": " << steps << " steps to t = " << t << "\n";
  return kExitOk;
}

std::vector<std::size_t> default_study_nels(const ProblemCase& c) {
  if (c.kind == CaseKind::shallow_water) return {4, 8, 16};
  if (c.dim == 3) return {2, 4, 8};
  return {4, 8, 16, 32};
}

std::vector<int> default_orders(const ProblemCase& c) {
  if (c.kind == CaseKind::shallow_water) return {1, 2, 3};
  return {1, 2, 3, 4};
}

int run_study(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  const ProblemCase c = resolved_case(rc, rc.case_id);
  const auto nels = rc.nels.empty() ? default_study_nels(c) : rc.nels;
  const auto orders = rc.orders.empty() ? default_orders(c) : rc.orders;
  std::vector<StudyRow> rows;
  try {
    IterationConfig ic = iteration_config(rc, c);
    // Steady studies iterate to the discrete fixed point so the stopping rule
    // does not leak into the observed orders.
    if (c.kind == CaseKind::steady_transport) {
      if (!rc.is_set("stopping")) ic.stopping = StoppingMode::trace_residual;
      if (!rc.is_set("tol")) ic.tolerance = 1e-12;
    }
    rows = convergence_study(c, nels, orders, ic, rc.steps.value_or(0));
  } catch (const NonConvergenceError& e) {
    err << "ehdg: " << e.what() << "\n";
    return kExitNonConvergence;
  }
  std::ofstream f = open_csv(output_file(rc, "rate_table.csv"));
  f << "case,nel,p,l2_error,order,iterations\n";
  for (const StudyRow& r : rows) {
    f << c.id << ',' << r.nel << ',' << r.p << ',' << csv_real(r.l2_error) << ',' << csv_real(r.order) << ','
      << r.iterations << '\n';
    out << c.id << " nel " << r.nel << " p " << r.p << ": error " << std::setprecision(4) << r.l2_error
        << " order " << r.order << " iterations " << r.iterations << "\n";
  }
  return kExitOk;
}

std::size_t total_elements(const ProblemCase& c, std::size_t nel) {
  return c.dim == 3 ? nel * nel * nel : nel * nel;
}

std::vector<std::size_t> default_table_nels(const ProblemCase& c) {
  if (c.dim == 3) return {2, 4, 8, 16};
  return {4, 8, 16, 32};
}

int run_tables(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  std::vector<std::string> steady, timed;
  for (const std::string& id : catalog_ids()) {
    if (!rc.case_id.empty() && id != rc.case_id) continue;
    (catalog(id).kind == CaseKind::steady_transport ? steady : timed).push_back(id);
  }
  const std::vector<double> dts = rc.dt ? std::vector<double>{*rc.dt} : std::vector<double>{1e-3, 1e-4};
  const std::size_t steps = rc.steps.value_or(10);
  try {
    if (!steady.empty()) {
      std::ofstream f = open_csv(output_file(rc, "table1.csv"));
      f << "case,nel,p,iterations\n";
      for (const std::string& id : steady) {
        const ProblemCase c = catalog(id);
        const IterationConfig ic = iteration_config(rc, c);
        for (int p : rc.orders.empty() ? default_orders(c) : rc.orders) {
          const TensorBasis basis(c.dim, p);
          for (std::size_t nel : rc.nels.empty() ? default_table_nels(c) : rc.nels) {
            const StructuredMesh mesh = case_mesh(c, nel);
            const TransportDiscretization disc(mesh, basis, c.transport);
            const auto sol = ehdg_solve_steady(disc, ic, exact_at(c, 0.0));
            f << id << ',' << total_elements(c, nel) << ',' << p << ',' << sol.log.iterations << '\n';
            out << "table1 " << id << " nel " << total_elements(c, nel) << " p " << p << ": "
                << sol.log.iterations << "\n";
          }
        }
      }
    }
    if (!timed.empty()) {
      std::ofstream f = open_csv(output_file(rc, "table2.csv"));
      f << "case,nel,p,dt,iterations\n";
      for (const std::string& id : timed) {
        for (double dt : dts) {
          const ProblemCase c = with_time_step(catalog(id), dt);
          const IterationConfig ic = iteration_config(rc, c);
          for (int p : rc.orders.empty() ? std::vector<int>{1, 2, 3, 4} : rc.orders) {
            const TensorBasis basis(c.dim, p);
            for (std::size_t nel : rc.nels.empty() ? default_table_nels(c) : rc.nels) {
              const StructuredMesh mesh = case_mesh(c, nel);
              const TransientRun run = run_transient_case(c, mesh, basis, ic, steps);
              const std::size_t n = typical_count(run.step_iterations);
              f << id << ',' << total_elements(c, nel) << ',' << p << ',' << dt << ',' << n << '\n';
              out << "table2 " << id << " nel " << total_elements(c, nel) << " p " << p << " dt " << dt << ": "
                  << n << "\n";
            }
          }
        }
      }
    }
  } catch (const NonConvergenceError& e) {
    err << "ehdg: " << e.what() << "\n";
    return kExitNonConvergence;
  }
  return kExitOk;
}

struct Verdicts {
  std::ostream* out;
  bool all = true;

  void check(const std::string& id, const std::string& name, double value, double tol) {
    const bool ok = std::isfinite(value) && value <= tol;
    all = all && ok;
    *out << (ok ? "PASS " : "FAIL ") << id << ' ' << name << " value=" << std::setprecision(3) << std::scientific
         << value << " tol=" << tol << std::defaultfloat << "\n";
  }
};

double relative_difference(const ElementField& a, const ElementField& b, const StructuredMesh& mesh,
                           const TensorBasis& basis) {
  const ElementField d = a - b;
  const double scale = l2_volume_norm(b, mesh, basis);
  const double diff = l2_volume_norm(d, mesh, basis);
  return scale > 0.0 ? diff / scale : diff;
}

/// Tight iteration settings so the fixed point is reached to round-off.
IterationConfig verification_iteration() {
  IterationConfig ic;
  ic.stopping = StoppingMode::trace_residual;
  ic.tolerance = 1e-13;
  ic.max_iterations = 5000;
  return ic;
}

void verify_case(const ProblemCase& c, std::size_t nel, int p, Verdicts& v) {
  const StructuredMesh mesh = case_mesh(c, nel);
  const TensorBasis basis(c.dim, p);
  const IterationConfig ic = verification_iteration();

  if (c.kind == CaseKind::steady_transport) {
    const TransportDiscretization disc(mesh, basis, c.transport);
    const auto oracle = solve_oracle(c.transport, mesh, basis);
    const auto sol = ehdg_solve_steady(disc, ic);
    v.check(c.id, "oracle-equivalence", relative_difference(sol.solution, oracle.solution, mesh, basis),
            kEquivalenceTol);
    v.check(c.id, "oracle-flux-jump", flux_jump_residual(c.transport, oracle.solution, oracle.trace, mesh, basis),
            kOracleJumpTol);
    v.check(c.id, "iteration-flux-jump", flux_jump_residual(c.transport, sol.solution, sol.trace, mesh, basis),
            kIterationJumpTol);
    return;
  }

  if (c.kind == CaseKind::transient_transport) {
    TransportDiscretization disc(mesh, basis, c.transport);
    const ElementField initial = project_field(exact_at(c, 0.0), mesh, basis);
    const auto oracle = solve_oracle(c.transport, mesh, basis, c.dt, &initial);
    ElementField u = initial;
    double t = 0.0;
    ehdg_step_transient(disc, ic, u, t);
    TraceField trace = disc.zero_trace();
    disc.update_trace(u, trace);
    v.check(c.id, "oracle-equivalence", relative_difference(u, oracle.solution, mesh, basis), kEquivalenceTol);
    v.check(c.id, "oracle-flux-jump", flux_jump_residual(c.transport, oracle.solution, oracle.trace, mesh, basis),
            kOracleJumpTol);
    v.check(c.id, "iteration-flux-jump", flux_jump_residual(c.transport, u, trace, mesh, basis),
            kIterationJumpTol);
    return;
  }

  ShallowDiscretization disc(mesh, basis, c.shallow);
  const ShallowState initial = project_shallow(c.shallow_exact, 0.0, mesh, basis);
  const auto oracle = solve_shallow_oracle(c.shallow, mesh, basis, initial, c.dt);
  ShallowState s = initial;
  double t = 0.0;
  ehdg_step_shallow(disc, ic, s, t);
  TraceField trace = disc.zero_trace();
  disc.update_trace(s, trace);
  const ShallowState diff{s.phi - oracle.state.phi, s.u - oracle.state.u, s.v - oracle.state.v};
  const double phi = c.shallow.Phi;
  v.check(c.id, "oracle-equivalence",
          std::sqrt(shallow_volume_norm2(diff, phi, mesh, basis) / shallow_volume_norm2(oracle.state, phi, mesh, basis)),
          kEquivalenceTol);
  v.check(c.id, "oracle-flux-jump",
          shallow_flux_jump_residual(c.shallow, oracle.state, oracle.trace, mesh, basis), kOracleJumpTol);
  v.check(c.id, "iteration-flux-jump", shallow_flux_jump_residual(c.shallow, s, trace, mesh, basis),
          kIterationJumpTol);
  // Total mass is near zero for the standing wave; scale by sqrt(|Omega|) ||phi||, an upper bound of int |phi|.
  const double scale = std::sqrt(mesh.volume()) * l2_volume_norm(initial.phi, mesh, basis);
  v.check(c.id, "mass-conservation",
          std::abs(total_mass(s.phi, mesh, basis) - total_mass(initial.phi, mesh, basis)) / scale, kMassTol);
}

int run_verify(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  const std::size_t nel = rc.is_set("nel") ? rc.nel : 2;
  Verdicts v{&out};
  try {
    for (const std::string& id : catalog_ids()) {
      if (!rc.case_id.empty() && id != rc.case_id) continue;
      verify_case(resolved_case(rc, id), nel, rc.p, v);
    }
  } catch (const NonConvergenceError& e) {
    err << "ehdg: " << e.what() << "\n";
    return kExitVerificationFailure;
  }
  out << (v.all ? "verify: all checks passed\n" : "verify: some checks failed\n");
  return v.all ? kExitOk : kExitVerificationFailure;
}

}  // namespace

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  set_worker_count(config.workers);
  try {
    switch (config.command) {
      case Command::solve: return run_solve(config, out, err);
      case Command::study: return run_study(config, out, err);
      case Command::tables: return run_tables(config, out, err);
      case Command::verify: return run_verify(config, out, err);
    }
  } catch (const ConfigError& e) {
    err << "ehdg: " << e.what() << "\n";
    return kExitUsage;
  } catch (const SizeGuardError& e) {
    err << "ehdg: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv + 1, argv + argc);
  RunConfig config;
  try {
    config = parse_config(args, std::getenv(kWorkersEnv));
  } catch (const HelpRequested& h) {
    out << h.what();
    return kExitOk;
  } catch (const UsageError& e) {
    err << "ehdg: " << e.what() << "\n";
    return kExitUsage;
  }
  try {
    return run(config, out, err);
  } catch (const std::exception& e) {
    err << "ehdg: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace ehdg::cli
