#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "vfrac/error.hpp"
#include "vfrac/evolution.hpp"
#include "vfrac/io.hpp"

namespace vfrac {
namespace {

const Rect kUnit{{0.0, 0.0}, {1.0, 1.0}};

MaterialParams params_with(double delta, double eta = 1e-6) {
  MaterialParams m;
  m.delta = delta;
  m.eta_delta = eta;
  return m;
}

/// Top and bottom held at +U and -U.
LoadSpec stretch(const GridPtr& g, double U) {
  LoadSpec loads;
  loads.side(Side::Top) = BoundaryKind::Dirichlet;
  loads.side(Side::Bottom) = BoundaryKind::Dirichlet;
  loads.dirichlet = sample(g, [U](const Point& p) { return U * (2.0 * p.y - 1.0); }).values();
  return loads;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> t(n);
  for (int k = 0; k < n; ++k) t[k] = a + (b - a) * k / (n - 1);
  return t;
}

std::filesystem::path scratch(const std::string& name) {
  auto d = std::filesystem::temp_directory_path() / ("vfrac_evolution_" + name);
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

TEST(Program, Validation) {
  auto g = Grid::build(kUnit, 4, 4);
  LoadProgram empty;
  try {
    empty.validate(*g);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ProgramEmpty);
  }
  auto p = LoadProgram::sampled({0.0, 1.0}, [&](double t) { return stretch(g, t); });
  EXPECT_NO_THROW(p.validate(*g));
  p.times = {1.0, 1.0};
  EXPECT_THROW(p.validate(*g), Error);

  auto q = LoadProgram::sampled({0.0, 1.0}, [&](double t) { return stretch(g, t); });
  q.loads[1].side(Side::Left) = BoundaryKind::Dirichlet;
  try {
    q.validate(*g);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::BoundaryPartitionInvalid);
  }
}

TEST(Quasistatic, ZeroProgramStaysZero) {
  auto g = Grid::build(kUnit, 8, 8);
  auto p = LoadProgram::sampled(linspace(0, 1, 4), [&](double) { return stretch(g, 0.0); });
  auto traj = quasistatic_run(g, params_with(0.05), p);
  ASSERT_EQ(traj.steps.size(), 4u);
  for (const auto& s : traj.steps) {
    EXPECT_EQ(s.ledger.total, 0.0);
    for (double x : s.u.values()) EXPECT_EQ(x, 0.0);
    for (double x : s.v.values()) EXPECT_EQ(x, 1.0);
  }
  EXPECT_TRUE(traj.events.empty());
}

TEST(Quasistatic, HomogeneousStretchFollowsClosedForm) {
  auto g = Grid::build(kUnit, 16, 16);
  auto m = params_with(0.05);
  EvolutionSettings es;
  es.solver.altmin_tol = 1e-10;
  es.solver.cg_tol = 1e-13;
  auto p = LoadProgram::sampled(linspace(0, 1, 11), [&](double t) { return stretch(g, 0.002 * t); });
  auto traj = quasistatic_run(g, m, p, es);
  for (const auto& s : traj.steps) {
    const double U = 0.002 * s.t;
    const double e = 0.5 * m.mu() * 4 * U * U * (1 + m.eta_delta);
    const double expected = oracle::homogeneous_damage(e, m.G_c, m.delta);
    for (double x : s.v.values()) EXPECT_NEAR(x, expected, 1e-8);
  }
  EXPECT_LE(traj.max_relative_increase, 1e-8);
}

TEST(Quasistatic, DamageNeverHeals) {
  auto g = Grid::build(kUnit, 16, 16);
  // load up, then unload: v must keep its lowest value
  std::vector<double> amp = {0.0, 0.2, 0.4, 0.2, 0.0};
  auto p = LoadProgram::sampled(linspace(0, 4, 5), [&](double t) { return stretch(g, amp[std::lround(t)]); });
  auto traj = quasistatic_run(g, params_with(0.05), p);
  for (std::size_t k = 1; k < traj.steps.size(); ++k) {
    for (std::size_t n = 0; n < g->node_count(); ++n) ASSERT_LE(traj.steps[k].v[n], traj.steps[k - 1].v[n]);
  }
  EXPECT_LT(traj.steps.back().v[0], 1.0);
}

TEST(Quasistatic, ConstantLoadsAreStationary) {
  auto g = Grid::build(kUnit, 12, 12);
  auto p = LoadProgram::sampled(linspace(0, 1, 4), [&](double) { return stretch(g, 0.3); });
  EvolutionSettings es;
  es.solver.altmin_tol = 1e-9;
  auto traj = quasistatic_run(g, params_with(0.05), p, es);
  for (std::size_t k = 2; k < traj.steps.size(); ++k) {
    for (std::size_t n = 0; n < g->node_count(); ++n) {
      EXPECT_NEAR(traj.steps[k].v[n], traj.steps[1].v[n], 1e-7);
      EXPECT_NEAR(traj.steps[k].u[n], traj.steps[1].u[n], 1e-7);
    }
    EXPECT_EQ(traj.steps[k].ledger.work_cumulative, traj.steps[1].ledger.work_cumulative);
  }
}

/// Elastic run with Dirichlet data on the left and a body load, both varying
/// in time through `shape`.
Trajectory elastic_run(const GridPtr& g, int steps, const std::function<double(double)>& shape) {
  auto p = LoadProgram::sampled(linspace(0, 1, steps + 1), [&](double t) {
    LoadSpec l;
    l.side(Side::Left) = BoundaryKind::Dirichlet;
    l.dirichlet = sample(g, [&](const Point& x) { return shape(t) * x.y; }).values();
    l.body = sample(g, [&](const Point& x) { return shape(1.0 - t) * (1.0 + x.x); }).values();
    l.traction_on(Side::Right).assign(g->node_count(), shape(t) * 0.5);
    return l;
  });
  EvolutionSettings es;
  es.elastic_only = true;
  es.solver.cg_tol = 1e-14;
  return quasistatic_run(g, params_with(0.05, 0.0), p, es);
}

TEST(Quasistatic, ElasticRunBalancesAtAnyStepSize) {
  // For a quadratic energy the trapezoidal work increments are exact.
  auto g = Grid::build(kUnit, 12, 12);
  for (int n : {3, 16}) {
    auto traj = elastic_run(g, n, [](double t) { return std::sin(2.0 * t) + t * t; });
    const double t0 = traj.steps.front().ledger.total;
    for (const auto& s : traj.steps) EXPECT_NEAR(s.ledger.total, t0, 1e-12 * s.energy_scale) << n;
    EXPECT_NE(traj.steps.back().ledger.work_cumulative, 0.0);
  }
}

TEST(Tips, SharpSlitGivesSlitTip) {
  auto g = Grid::build(kUnit, 16, 16, polyline_slit({{0, 0.5}, {0.5, 0.5}}, true));
  auto tips = detect_tips(*g, nullptr);
  ASSERT_EQ(tips.size(), 1u);
  EXPECT_EQ(tips[0].frame.tip, (Point{0.5, 0.5}));
  EXPECT_EQ(tips[0].frame.angle, 0.0);
  EXPECT_TRUE(tips[0].from_slit);
}

TEST(Tips, BandEndIsATip) {
  auto g = Grid::build(kUnit, 32, 32);
  std::vector<double> v(g->node_count(), 1.0);
  for (std::size_t p = 0; p < v.size(); ++p) {
    const Point x = g->node_position(p);
    if (x.x <= 0.625 + 1e-12 && std::abs(x.y - 0.5) <= 1.0 / 32 + 1e-12) v[p] = 0.0;
  }
  PhaseField pf(g, v);
  auto tips = detect_tips(*g, &pf);
  ASSERT_EQ(tips.size(), 1u);
  EXPECT_NEAR(tips[0].frame.tip.y, 0.5, 1e-12);
  EXPECT_NEAR(tips[0].frame.tip.x, 0.625, 1.0 / 32 + 1e-12);
  EXPECT_NEAR(tips[0].frame.angle, 0.0, 1e-12);
}

TEST(Tips, DiagonalBandPointsAlongTheBand) {
  auto g = Grid::build(kUnit, 32, 32);
  std::vector<double> v(g->node_count(), 1.0);
  for (std::size_t p = 0; p < v.size(); ++p) {
    const Point x = g->node_position(p);
    if (x.x <= 0.6 && std::abs(x.y - x.x) <= 1.0 / 32 + 1e-12) v[p] = 0.0;
  }
  PhaseField pf(g, v);
  auto tips = detect_tips(*g, &pf);
  ASSERT_EQ(tips.size(), 1u);
  EXPECT_NEAR(tips[0].frame.angle, oracle::pi / 4, 0.2);
}

TEST(Audit, UndamagedStateHasNoTip) {
  auto g = Grid::build(kUnit, 16, 16);
  Snapshot s{sample(g, [](const Point& p) { return p.x * p.y; }), PhaseField::ones(g)};
  auto a = stability_audit(s, params_with(0.05), {});
  EXPECT_TRUE(a.no_tip_found);
  EXPECT_TRUE(a.reports.empty());
  ASSERT_FALSE(a.notes.empty());
}

Snapshot singular_snapshot(double K, int n = 128) {
  auto g = Grid::build({{-1, -1}, {1, 1}}, n, n, polyline_slit({{-1, 0}, {0, 0}}, true));
  return {sample_sided(g, [K](const Point& p, const Vec2& d) { return oracle::singular_mode(K, p, d); }),
          std::nullopt};
}

TEST(Audit, SubcriticalSingularSnapshotIsStable) {
  auto s = singular_snapshot(1.0);
  MaterialParams m = params_with(0.05);
  m.G_c = 2.0 * oracle::pi / 4.0;
  StabilityOptions opt;
  opt.eps_list = {0.5, 0.25};
  opt.blowup_radius = 1.0;
  auto a = stability_audit(s, m, opt);
  ASSERT_EQ(a.reports.size(), 1u);
  EXPECT_EQ(a.reports[0].verdict, Verdict::Stable);
  EXPECT_NEAR(a.reports[0].K_fit, 1.0, 1e-12);
  EXPECT_TRUE(a.reports[0].ball_bound_ok);
}

TEST(Audit, RigidShiftKeepsVerdicts) {
  auto s = singular_snapshot(1.3, 64);
  std::vector<double> shifted = s.u.values();
  for (double& x : shifted) x += 7.5;
  Snapshot t{ScalarField(s.u.grid_ptr(), shifted), std::nullopt};
  MaterialParams m = params_with(0.05);
  m.G_c = 1.0;
  StabilityOptions opt;
  opt.eps_list = {0.5, 0.25};
  auto a = stability_audit(s, m, opt), b = stability_audit(t, m, opt);
  ASSERT_EQ(a.reports.size(), 1u);
  ASSERT_EQ(b.reports.size(), 1u);
  EXPECT_EQ(a.reports[0].verdict, b.reports[0].verdict);
  EXPECT_NEAR(a.reports[0].K_fit, b.reports[0].K_fit, 1e-12);
}

TEST(Snapshot, RoundTripIsBitIdentical) {
  auto g = Grid::build(kUnit, 16, 16, polyline_slit({{0, 0.5}, {0.5, 0.5}}, true));
  auto p = LoadProgram::sampled({0.0, 1.0}, [&](double t) { return stretch(g, 0.2 * t); });
  auto traj = quasistatic_run(g, params_with(0.1), p);
  const auto dir = scratch("roundtrip");
  write_trajectory(dir, traj, Json::object());
  auto snap = import_snapshot(g, dir / "step_0001" / "u.csv", dir / "step_0001" / "v.csv");
  EXPECT_EQ(snap.u.values(), traj.steps[1].u.values());
  ASSERT_TRUE(snap.v);
  EXPECT_EQ(snap.v->values(), traj.steps[1].v.values());
}

TEST(Snapshot, AnalyticDumpReproducesSif) {
  auto s = singular_snapshot(0.8, 64);
  const auto dir = scratch("analytic");
  write_field_csv(dir / "u.csv", s.u.grid(), s.u.values());
  auto back = import_snapshot(s.u.grid_ptr(), dir / "u.csv");
  auto a = stability_audit(back, params_with(0.05), {});
  ASSERT_EQ(a.reports.size(), 1u);
  EXPECT_NEAR(a.reports[0].K_fit, 0.8, 1e-12);
}

TEST(Snapshot, TruncatedAndMismatchedFiles) {
  auto g = Grid::build(kUnit, 4, 4);
  const auto dir = scratch("bad");
  std::string text = field_csv(*g, std::vector<double>(g->node_count(), 1.0));
  {
    std::ofstream(dir / "short.csv") << text.substr(0, text.size() / 2);
  }
  try {
    import_snapshot(g, dir / "short.csv");
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::FormatError);
  }
  auto other = Grid::build(kUnit, 8, 4);
  write_field_csv(dir / "other.csv", *other, std::vector<double>(other->node_count(), 0.0));
  try {
    import_snapshot(g, dir / "other.csv");
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::GridMismatch);
  }
  write_field_csv(dir / "v.csv", *g, std::vector<double>(g->node_count(), 1.5));
  try {
    import_snapshot(g, dir / "v.csv", dir / "v.csv");
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::FormatError);
  }
}

}  // namespace
}  // namespace vfrac
