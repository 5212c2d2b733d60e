#include <benchmark/benchmark.h>

#include "ehdg/driver.hpp"
#include "ehdg/oracle.hpp"
#include "ehdg/problems.hpp"
#include "ehdg/shallow.hpp"
#include "ehdg/transport.hpp"

namespace {

using namespace ehdg;

// Args: elements per axis, order.
void TransportArgs(benchmark::internal::Benchmark* b) {
  for (int p : {1, 2, 4}) b->Args({16, p});
  b->Args({32, 2});
}

static void BM_AssembleTransport2D(benchmark::State& state) {
  const ProblemCase c = catalog("transport2d-smooth");
  const StructuredMesh mesh = case_mesh(c, static_cast<std::size_t>(state.range(0)));
  const TensorBasis basis(2, static_cast<int>(state.range(1)));
  for (auto _ : state) {
    TransportDiscretization disc(mesh, basis, c.transport);
    benchmark::DoNotOptimize(disc.op(0));
  }
}
BENCHMARK(BM_AssembleTransport2D)->Apply(TransportArgs)->Unit(benchmark::kMillisecond);

static void BM_LocalSolve2D(benchmark::State& state) {
  const ProblemCase c = catalog("transport2d-smooth");
  const StructuredMesh mesh = case_mesh(c, static_cast<std::size_t>(state.range(0)));
  const TensorBasis basis(2, static_cast<int>(state.range(1)));
  const TransportDiscretization disc(mesh, basis, c.transport);
  TraceField trace = disc.zero_trace();
  trace.data().setConstant(0.5);
  ElementField u = disc.zero_field();
  for (auto _ : state) {
    disc.local_solve(trace, nullptr, u);
    benchmark::DoNotOptimize(u.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(mesh.num_elements()));
}
BENCHMARK(BM_LocalSolve2D)->Apply(TransportArgs)->Unit(benchmark::kMicrosecond);

// One full sweep: local solves followed by the trace update.
static void BM_Iteration2D(benchmark::State& state) {
  const ProblemCase c = catalog("transport2d-smooth");
  const StructuredMesh mesh = case_mesh(c, static_cast<std::size_t>(state.range(0)));
  const TensorBasis basis(2, static_cast<int>(state.range(1)));
  const TransportDiscretization disc(mesh, basis, c.transport);
  TraceField trace = disc.zero_trace();
  ElementField u = disc.zero_field();
  for (auto _ : state) {
    disc.local_solve(trace, nullptr, u);
    disc.update_trace(u, trace);
    benchmark::DoNotOptimize(trace.data().data());
  }
}
BENCHMARK(BM_Iteration2D)->Apply(TransportArgs)->Unit(benchmark::kMicrosecond);

static void BM_Iteration3D(benchmark::State& state) {
  const ProblemCase c = catalog("transport3d-steady");
  const StructuredMesh mesh = case_mesh(c, static_cast<std::size_t>(state.range(0)));
  const TensorBasis basis(3, static_cast<int>(state.range(1)));
  const TransportDiscretization disc(mesh, basis, c.transport);
  TraceField trace = disc.zero_trace();
  ElementField u = disc.zero_field();
  for (auto _ : state) {
    disc.local_solve(trace, nullptr, u);
    disc.update_trace(u, trace);
    benchmark::DoNotOptimize(trace.data().data());
  }
}
BENCHMARK(BM_Iteration3D)->Args({8, 2})->Args({8, 4})->Unit(benchmark::kMillisecond);

static void BM_ShallowIteration(benchmark::State& state) {
  const ProblemCase c = with_time_step(catalog("shallow-standing-wave"), 1e-3);
  const StructuredMesh mesh = case_mesh(c, static_cast<std::size_t>(state.range(0)));
  const TensorBasis basis(2, static_cast<int>(state.range(1)));
  const ShallowDiscretization disc(mesh, basis, c.shallow);
  const ShallowState previous = project_shallow(c.shallow_exact, 0.0, mesh, basis);
  ShallowState s = previous;
  TraceField trace = disc.zero_trace();
  for (auto _ : state) {
    disc.update_trace(s, trace);
    disc.local_solve(trace, &previous, s);
    benchmark::DoNotOptimize(s.phi.data());
  }
}
BENCHMARK(BM_ShallowIteration)->Apply(TransportArgs)->Unit(benchmark::kMicrosecond);

static void BM_SteadySolve2D(benchmark::State& state) {
  const ProblemCase c = catalog("transport2d-smooth");
  const StructuredMesh mesh = case_mesh(c, static_cast<std::size_t>(state.range(0)));
  const TensorBasis basis(2, static_cast<int>(state.range(1)));
  const TransportDiscretization disc(mesh, basis, c.transport);
  IterationConfig ic;
  ic.record_history = false;
  const ScalarField exact = [&](const Point& x) { return c.exact(x, 0.0); };
  for (auto _ : state) benchmark::DoNotOptimize(ehdg_solve_steady(disc, ic, exact).log.iterations);
}
BENCHMARK(BM_SteadySolve2D)->Args({16, 2})->Unit(benchmark::kMillisecond);

static void BM_OracleAssembly2D(benchmark::State& state) {
  const ProblemCase c = catalog("transport2d-smooth");
  const StructuredMesh mesh = case_mesh(c, static_cast<std::size_t>(state.range(0)));
  const TensorBasis basis(2, static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_global_trace_system(c.transport, mesh, basis).rhs.data());
}
BENCHMARK(BM_OracleAssembly2D)->Args({8, 2})->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
