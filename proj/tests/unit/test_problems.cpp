#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ehdg/errors.hpp"
#include "ehdg/problems.hpp"
#include "test_support.hpp"

namespace ehdg {
namespace {

constexpr double kFdStep = 1e-5;

// Centered difference of f along axis a (or time when a == 3).
double centered(const std::function<double(const Point&, double)>& f, Point x, double t, int a) {
  if (a == 3) return (f(x, t + kFdStep) - f(x, t - kFdStep)) / (2.0 * kFdStep);
  Point xp = x, xm = x;
  xp[a] += kFdStep;
  xm[a] -= kFdStep;
  return (f(xp, t) - f(xm, t)) / (2.0 * kFdStep);
}

Point random_interior_point(std::mt19937_64& rng, const ProblemCase& c) {
  Point x{0.0, 0.0, 0.0};
  for (int a = 0; a < c.dim; ++a) {
    const auto& iv = c.bounds[a];
    x[a] = testing::uniform(rng, iv.lo + 0.01 * iv.length(), iv.hi - 0.01 * iv.length());
  }
  return x;
}

TEST(Catalog, KnownIdentifiers) {
  const auto& ids = catalog_ids();
  ASSERT_EQ(ids.size(), 5u);
  for (const auto& id : ids) EXPECT_EQ(catalog(id).id, id);
  EXPECT_THROW(catalog("transport4d"), LookupError);
}

TEST(Catalog, SmoothCaseValueAtMidBottom) {
  const ProblemCase c = catalog("transport2d-smooth");
  EXPECT_NEAR(c.exact(Point{0.5, 0.0, 0.0}, 0.0), 1.0 / std::numbers::pi, 1e-15);
  EXPECT_EQ(c.stopping, StoppingMode::error_difference);
  EXPECT_EQ(c.dim, 2);
}

TEST(Catalog, StandingWaveStartsAtRest) {
  const ProblemCase c = catalog("shallow-standing-wave");
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    const Point x = random_interior_point(rng, c);
    const auto s = c.shallow_exact(x, 0.0);
    EXPECT_EQ(s[1], 0.0);
    EXPECT_EQ(s[2], 0.0);
  }
  EXPECT_EQ(c.shallow.Phi, 1.0);
  EXPECT_EQ(c.shallow.gamma, 0.0);
}

TEST(Catalog, DiscontinuousCaseData) {
  const ProblemCase c = catalog("transport2d-discontinuous");
  EXPECT_FALSE(c.has_exact());
  EXPECT_EQ(c.stopping, StoppingMode::successive_difference);
  EXPECT_EQ(c.bounds[0].hi, 2.0);
  EXPECT_EQ(c.transport.inflow(Point{0.0, 0.7, 0.0}, 0.0), 1.0);
  EXPECT_NEAR(c.transport.inflow(Point{0.5, 0.0, 0.0}, 0.0), 1.0, 1e-15);
  EXPECT_EQ(c.transport.inflow(Point{1.5, 0.0, 0.0}, 0.0), 0.0);
  EXPECT_FALSE(c.transport.forcing);
}

TEST(Catalog, GaussianCaseDefaults) {
  const ProblemCase c = catalog("transport3d-gaussian");
  EXPECT_EQ(c.dt, 0.01);
  EXPECT_EQ(c.steps, 240u);
  EXPECT_TRUE(c.transport.transient);
  const Point b = c.transport.velocity(Point{0.3, 0.1, 0.9});
  EXPECT_EQ(b, (Point{0.2, 0.2, 0.2}));
  EXPECT_EQ(c.exact(Point{0.2, 0.2, 0.2}, 1.0), 1.0);
}

// u_t + div(beta u) = f at 100 random interior points.
void expect_transport_residual(const ProblemCase& c, double t) {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 100; ++i) {
    const Point x = random_interior_point(rng, c);
    auto flux = [&](int a) {
      return [&, a](const Point& y, double s) { return c.transport.velocity(y)[a] * c.exact(y, s); };
    };
    double lhs = c.transport.transient ? centered(c.exact, x, t, 3) : 0.0;
    for (int a = 0; a < c.dim; ++a) lhs += centered(flux(a), x, t, a);
    const double f = c.transport.forcing ? c.transport.forcing(x, t) : 0.0;
    EXPECT_NEAR(lhs, f, 1e-7) << c.id << " at point " << i;
  }
}

TEST(Catalog, SmoothForcingSatisfiesThePde) { expect_transport_residual(catalog("transport2d-smooth"), 0.0); }
TEST(Catalog, ThreeDimensionalForcingSatisfiesThePde) { expect_transport_residual(catalog("transport3d-steady"), 0.0); }
TEST(Catalog, GaussianSatisfiesThePde) {
  expect_transport_residual(catalog("transport3d-gaussian"), 0.0);
  expect_transport_residual(catalog("transport3d-gaussian"), 1.3);
}

TEST(Catalog, InflowDataMatchesExactSolution) {
  for (const char* id : {"transport2d-smooth", "transport3d-steady", "transport3d-gaussian"}) {
    const ProblemCase c = catalog(id);
    const Point x{0.0, 0.37, 0.61};
    EXPECT_EQ(c.transport.inflow(x, 0.4), c.exact(x, 0.4)) << id;
  }
}

// phi_t + Phi div(theta) = 0 and theta_t + grad(phi) = 0.
TEST(Catalog, StandingWaveSatisfiesThePde) {
  const ProblemCase c = catalog("shallow-standing-wave");
  std::mt19937_64 rng(8);
  auto component = [&](int k) { return [&, k](const Point& x, double t) { return c.shallow_exact(x, t)[k]; }; };
  const double Phi = c.shallow.Phi;
  for (int i = 0; i < 100; ++i) {
    const Point x = random_interior_point(rng, c);
    const double t = testing::uniform(rng, 0.0, 1.0);
    EXPECT_NEAR(centered(component(0), x, t, 3) + Phi * (centered(component(1), x, t, 0) + centered(component(2), x, t, 1)),
                0.0, 1e-7);
    EXPECT_NEAR(centered(component(1), x, t, 3) + centered(component(0), x, t, 0), 0.0, 1e-7);
    EXPECT_NEAR(centered(component(2), x, t, 3) + centered(component(0), x, t, 1), 0.0, 1e-7);
  }
  // Wall condition: normal velocity vanishes on the boundary.
  for (double s : {0.1, 0.5, 0.9}) {
    EXPECT_NEAR(c.shallow_exact(Point{0.0, s, 0.0}, 0.3)[1], 0.0, 1e-15);
    EXPECT_NEAR(c.shallow_exact(Point{1.0, s, 0.0}, 0.3)[1], 0.0, 1e-15);
    EXPECT_NEAR(c.shallow_exact(Point{s, 0.0, 0.0}, 0.3)[2], 0.0, 1e-15);
    EXPECT_NEAR(c.shallow_exact(Point{s, 1.0, 0.0}, 0.3)[2], 0.0, 1e-15);
  }
}

TEST(Catalog, WithTimeStep) {
  const ProblemCase c = with_time_step(catalog("shallow-standing-wave"), 1e-3);
  EXPECT_EQ(c.dt, 1e-3);
  EXPECT_EQ(c.shallow.dt, 1e-3);
  EXPECT_THROW(with_time_step(c, 0.0), ConfigError);
}

TEST(Catalog, CaseMeshCoversTheDomain) {
  const ProblemCase c = catalog("transport2d-discontinuous");
  const StructuredMesh m = case_mesh(c, 4);
  EXPECT_EQ(m.num_elements(), 16u);
  EXPECT_NEAR(m.volume(), 4.0, 1e-14);
}

TEST(ConvergenceStudy, SmoothCaseOrders) {
  const ProblemCase c = catalog("transport2d-smooth");
  const std::vector<std::size_t> nels{4, 8};
  const std::vector<int> orders{1, 2};
  IterationConfig cfg;
  cfg.stopping = StoppingMode::trace_residual;
  cfg.tolerance = 1e-12;
  cfg.max_iterations = 5000;
  const auto rows = convergence_study(c, nels, orders, cfg);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_TRUE(std::isnan(rows[0].order));
  EXPECT_GE(rows[1].order, 1.8);
  EXPECT_GE(rows[3].order, 2.8);
  for (const auto& r : rows) EXPECT_GT(r.iterations, 0u);
}

TEST(ConvergenceStudy, PRefinementReducesError) {
  const ProblemCase c = catalog("transport2d-smooth");
  const std::vector<std::size_t> nels{4};
  const std::vector<int> orders{1, 2, 3, 4};
  IterationConfig cfg;
  cfg.stopping = StoppingMode::trace_residual;
  cfg.tolerance = 1e-12;
  cfg.max_iterations = 5000;
  const auto rows = convergence_study(c, nels, orders, cfg);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LT(rows[i].l2_error, rows[i - 1].l2_error);
}

TEST(ConvergenceStudy, RequiresExactSolution) {
  const std::vector<std::size_t> nels{2};
  const std::vector<int> orders{1};
  EXPECT_THROW(convergence_study(catalog("transport2d-discontinuous"), nels, orders, IterationConfig{}), ConfigError);
}

TEST(ConvergenceStudy, TimeDependentRowsUseSteps) {
  const ProblemCase c = catalog("shallow-standing-wave");
  const std::vector<std::size_t> nels{2, 4};
  const std::vector<int> orders{1};
  const auto rows = convergence_study(c, nels, orders, IterationConfig{}, 3);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].iterations, 2u);
  EXPECT_LT(rows[1].l2_error, rows[0].l2_error);
}

TEST(TransientRun, RecordsEveryStep) {
  const ProblemCase c = with_time_step(catalog("transport3d-gaussian"), 1e-3);
  const StructuredMesh m = case_mesh(c, 2);
  const TensorBasis basis(3, 1);
  const TransientRun run = run_transient_case(c, m, basis, IterationConfig{}, 4);
  EXPECT_EQ(run.step_iterations.size(), 4u);
  EXPECT_NEAR(run.final_time, 4e-3, 1e-17);
  EXPECT_FALSE(run.last_log.history.empty());
  EXPECT_THROW(run_transient_case(catalog("transport2d-smooth"), m, basis, IterationConfig{}, 1), ConfigError);
}

TEST(TypicalCount, ModeWithTiesToLarger) {
  const std::vector<std::size_t> a{3, 4, 4, 5, 4};
  const std::vector<std::size_t> b{2, 3, 3, 2};
  const std::vector<std::size_t> empty;
  EXPECT_EQ(typical_count(a), 4u);
  EXPECT_EQ(typical_count(b), 3u);
  EXPECT_EQ(typical_count(empty), 0u);
}

TEST(ObservedOrder, HalvingMesh) {
  EXPECT_NEAR(observed_order(16.0, 1.0, 0.2, 0.1), 4.0, 1e-14);
}

}  // namespace
}  // namespace ehdg
