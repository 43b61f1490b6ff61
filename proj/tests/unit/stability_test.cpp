#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "vfrac/error.hpp"
#include "vfrac/stability.hpp"

namespace vfrac {
namespace {

GridPtr cracked_square(int n, double half = 1.0) {
  return Grid::build({{-half, -half}, {half, half}}, n, n, polyline_slit({{-half, 0.0}, {0.0, 0.0}}, true));
}

ScalarField oracle_singular(const GridPtr& g, double K) {
  return sample_sided(g, [K](const Point& p, const Vec2& d) { return oracle::singular_mode(K, p, d); });
}

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::IoError;
}

TEST(Singular, MatchesClosedForm) {
  auto g = cracked_square(32);
  auto a = singular_field(g, 1.7);
  auto b = oracle_singular(g, 1.7);
  for (std::size_t p = 0; p < a.size(); ++p) EXPECT_NEAR(a[p], b[p], 1e-15);
}

TEST(Singular, SlitTipFrame) {
  auto f = slit_tip_frame(polyline_slit({{0.0, -1.0}, {0.0, 0.0}}, true));
  ASSERT_TRUE(f);
  EXPECT_EQ(f->tip, (Point{0.0, 0.0}));
  EXPECT_DOUBLE_EQ(f->angle, oracle::pi / 2);
}

TEST(Sif, ExactOnSingularField) {
  auto g = cracked_square(64);
  for (double K : {1.0, 2.7, -0.4}) {
    const auto fit = extract_sif(oracle_singular(g, K), {}, 3.0 / 32, 0.5);
    EXPECT_NEAR(fit.K, K, 1e-13 * std::abs(K));
    EXPECT_LT(fit.residual, 1e-13);
    EXPECT_GT(fit.nodes, 100u);
  }
}

TEST(Sif, RotatedCrack) {
  // Crack along -y ending at the origin, growing along +y.
  auto g = Grid::build({{-1, -1}, {1, 1}}, 64, 64, polyline_slit({{0.0, -1.0}, {0.0, 0.0}}, true));
  auto u = sample_sided(g, [](const Point& p, const Vec2& d) {
    const double xi = p.y, zeta = -p.x;
    double th = std::atan2(zeta, xi);
    if (p.x == 0.0 && p.y < 0.0) th = d.x < 0.0 ? oracle::pi : -oracle::pi;
    return 1.3 * std::sqrt(std::hypot(p.x, p.y)) * std::sin(0.5 * th);
  });
  const auto fit = extract_sif(u, {{0, 0}, oracle::pi / 2}, 0.1, 0.5);
  EXPECT_NEAR(fit.K, 1.3, 1e-12);
}

TEST(Sif, SmoothPartFadesFromTheFit) {
  auto g = cracked_square(256, 0.5);
  auto us = oracle_singular(g, 2.0);
  std::vector<double> vals(us.values());
  for (std::size_t p = 0; p < vals.size(); ++p) vals[p] += g->node_position(p).x;
  const auto fit = extract_sif(ScalarField(g, vals), {}, 3.0 / 256, 0.1);
  EXPECT_NEAR(fit.K, 2.0, 0.03 * 2.0);
}

TEST(Sif, ZeroField) {
  auto g = cracked_square(32);
  const auto fit = extract_sif(ScalarField::zeros(g), {}, 0.2, 0.5);
  EXPECT_EQ(fit.K, 0.0);
  EXPECT_EQ(fit.residual, 0.0);
}

TEST(Sif, ShiftByConstantIsIgnored) {
  auto g = cracked_square(64);
  auto u = oracle_singular(g, 0.9);
  std::vector<double> vals(u.values());
  for (double& x : vals) x += 5.0;
  EXPECT_NEAR(extract_sif(ScalarField(g, vals), {}, 0.1, 0.5).K, 0.9, 1e-12);
}

TEST(Sif, Errors) {
  auto g = cracked_square(32);
  auto u = ScalarField::zeros(g);
  EXPECT_EQ(code_of([&] { extract_sif(u, {{0.01, 0.0}, 0.0}, 0.2, 0.4); }), Errc::TipOffLattice);
  EXPECT_EQ(code_of([&] { extract_sif(u, {}, 0.05, 0.4); }), Errc::InvalidArgument);
  EXPECT_EQ(code_of([&] { extract_sif(u, {}, 0.2, 0.9); }), Errc::InvalidArgument);
  auto broken = PhaseField::constant(g, 0.0);
  EXPECT_EQ(code_of([&] { extract_sif(u, {}, 0.2, 0.4, &broken); }), Errc::AnnulusEmpty);
}

TEST(Sif, InvariantUnderBlowup) {
  auto g = cracked_square(128);
  auto u = oracle_singular(g, 1.4);
  const double K = extract_sif(u, {}, 0.1, 0.5).K;
  for (double eps : {0.5, 0.25}) {
    auto bu = blowup_rescale(u, {0, 0}, eps, 1.0);
    EXPECT_NEAR(extract_sif(bu.u, {}, 0.2, 0.5).K, K, 1e-13);
  }
}

TEST(Verdict, Examples) {
  EXPECT_EQ(griffith_verdict(2.0, oracle::pi), Verdict::Marginal);
  EXPECT_EQ(griffith_verdict(1.0, 1.0), Verdict::Stable);
  EXPECT_EQ(griffith_verdict(0.0, 1.0), Verdict::Stable);
  EXPECT_EQ(griffith_verdict(2.0, 1.0), Verdict::Unstable);
  EXPECT_EQ(griffith_verdict(std::sqrt(4.0 * 1.04 / oracle::pi), 1.0), Verdict::Marginal);
  EXPECT_EQ(griffith_verdict(std::sqrt(4.0 * 0.96 / oracle::pi), 1.0), Verdict::Marginal);
  EXPECT_DOUBLE_EQ(energy_release_rate(1.0), oracle::pi / 4);
}

TEST(Blowup, SingularFieldHasZeroCauchyDistances) {
  auto g = cracked_square(128);
  auto d = blowup_diagnose(oracle_singular(g, 1.0), nullptr, {0, 0}, {0.5, 0.25, 0.125}, 1.0);
  ASSERT_EQ(d.cauchy.size(), 2u);
  for (double c : d.cauchy) EXPECT_LT(c, 1e-13);
  EXPECT_EQ(d.finest.eps, 0.125);
}

TEST(Blowup, SmoothPartDecaysAtSquareRootRate) {
  auto g = cracked_square(256);
  auto u = sample_sided(g, [](const Point& p, const Vec2& d) {
    return oracle::singular_mode(1.0, p, d) + 0.7 * p.y + 0.1 * p.x * p.x;
  });
  auto d = blowup_diagnose(u, nullptr, {0, 0}, {0.5, 0.25, 0.125, 0.0625}, 1.0);
  ASSERT_TRUE(d.rate);
  EXPECT_GE(*d.rate, 0.4);
  EXPECT_LE(*d.rate, 0.7);
  for (std::size_t k = 1; k < d.cauchy.size(); ++k) EXPECT_LT(d.cauchy[k], d.cauchy[k - 1]);
}

TEST(Blowup, LinearFieldFlattens) {
  auto g = Grid::build({{-1, -1}, {1, 1}}, 128, 128);
  auto u = sample(g, [](const Point& p) { return 3.0 * p.x - p.y; });
  auto d = blowup_diagnose(u, nullptr, {0, 0}, {1.0, 0.5, 0.25, 0.125}, 1.0);
  ASSERT_TRUE(d.rate);
  EXPECT_NEAR(*d.rate, 0.5, 0.02);  // quadrature changes with the coarse grid
  double mx = 0.0;
  for (double x : d.finest.u.values()) mx = std::max(mx, std::abs(x));
  EXPECT_NEAR(mx, std::sqrt(0.125) * 4.0, 1e-12);
}

// Smooth damaged state with a band along y = 0, as a stand-in for a solver output.
struct BandState {
  GridPtr g;
  ScalarField u;
  PhaseField v;
};

BandState band_state(double delta) {
  auto g = Grid::build({{-1, -1}, {1, 1}}, 128, 128);
  auto u = sample(g, [](const Point& p) { return std::tanh(8 * p.y) + 0.2 * p.x * p.y; });
  std::vector<double> vals(g->node_count());
  for (std::size_t p = 0; p < vals.size(); ++p) {
    const Point x = g->node_position(p);
    vals[p] = oracle::at2_profile(x.y, delta) * (0.75 + 0.25 * std::cos(x.x));
  }
  return {g, u, PhaseField(g, vals)};
}

TEST(Scaling, IdentityScaleIsExact) {
  auto s = band_state(0.05);
  MaterialParams m;
  m.delta = 0.05;
  auto chk = check_scaling_identity(s.u, &s.v, m, {0.25, 0.0}, 1.0, 0.5);
  EXPECT_EQ(chk.max_rel_diff, 0.0);
  EXPECT_EQ(chk.terms.size(), 3u);
}

TEST(Scaling, PhaseFieldIdentityHoldsToRoundoff) {
  auto s = band_state(0.05);
  MaterialParams m;
  m.delta = 0.05;
  m.eta_delta = 1e-6;
  for (double eps : {0.5, 0.25, 0.125}) {
    auto chk = check_scaling_identity(s.u, &s.v, m, {0.25, 0.0}, eps, 0.5 / eps * 0.5);
    EXPECT_LE(chk.max_rel_diff, 1e-12) << eps;
    EXPECT_DOUBLE_EQ(chk.alpha, 0.05 / eps);
    EXPECT_TRUE(chk.eta_ok);
    for (const auto& t : chk.terms) EXPECT_GT(t.lhs, 0.0) << t.name;
  }
}

TEST(Scaling, MismatchedMaskIsFlagged) {
  auto s = band_state(0.05);
  MaterialParams m;
  m.delta = 0.05;
  auto chk = check_scaling_identity(s.u, &s.v, m, {0.25, 0.0}, 0.25, 1.0, 0.3);
  EXPECT_GT(chk.max_rel_diff, 1e-3);
}

TEST(Scaling, SharpSlitTerms) {
  auto g = cracked_square(128);
  auto u = oracle_singular(g, 1.0);
  MaterialParams m;
  auto chk = check_scaling_identity(u, nullptr, m, {-0.25, 0.0}, 0.25, 1.0);
  ASSERT_EQ(chk.terms.size(), 2u);
  EXPECT_EQ(chk.terms[1].name, "slit_length");
  EXPECT_NEAR(chk.terms[1].lhs, 2.0, 1e-15);
  EXPECT_LE(chk.max_rel_diff, 1e-12);
}

TEST(Scaling, EtaMustBeSmallAgainstAlpha) {
  auto s = band_state(0.05);
  MaterialParams m;
  m.delta = 0.05;
  m.eta_delta = 0.01;
  EXPECT_FALSE(check_scaling_identity(s.u, &s.v, m, {0.0, 0.0}, 0.5, 1.0).eta_ok);
}

TEST(LoadScaling, UnitLoadOnSingularField) {
  auto g = cracked_square(128);
  auto u = oracle_singular(g, 1.0);
  auto f = ScalarField::constant(g, 1.0);
  auto one = check_load_scaling(u, f, {0, 0}, 1.0, 0.5);
  EXPECT_EQ(one.rel_diff, 0.0);
  auto a = check_load_scaling(u, f, {0, 0}, 0.25, 1.0);
  auto b = check_load_scaling(u, f, {0, 0}, 0.125, 1.0);
  EXPECT_LE(a.rel_diff, 1e-12);
  EXPECT_LE(b.rel_diff, 1e-12);
  EXPECT_DOUBLE_EQ(b.coefficient / a.coefficient, std::pow(2.0, -1.5));
}

TEST(LoadScaling, VaryingLoadOffCenter) {
  auto g = Grid::build({{-1, -1}, {1, 1}}, 128, 128);
  auto u = sample(g, [](const Point& p) { return std::sin(3 * p.x) + p.y * p.y; });
  auto f = sample(g, [](const Point& p) { return 1.0 + p.x - 2 * p.y; });
  for (double eps : {0.5, 0.25, 0.125}) {
    auto c = check_load_scaling(u, f, {0.25, -0.125}, eps, 0.5 / eps * 0.5);
    EXPECT_LE(c.rel_diff, 1e-12);
    // eps^{3/2} int f_eps u_eps = eps^{-1} int f (u - u(x0))
    EXPECT_NEAR(c.rescaled_term, c.rhs * std::pow(eps, 1.5), 1e-12 * std::abs(c.rescaled_term));
  }
}

TEST(BallBound, CriticalSingularField) {
  auto g = cracked_square(256);
  const double Gc = 1.3;
  const double K = std::sqrt(4.0 * Gc / oracle::pi);
  auto bb = check_ball_bound(oracle_singular(g, K), Gc, {0.25, 0.5, 0.75, 1.0});
  EXPECT_TRUE(bb.all_ok);
  EXPECT_NEAR(bb.slope, Gc, 0.05 * Gc);
  for (const auto& row : bb.rows) EXPECT_NEAR(row.bound, 2 * oracle::pi * Gc * row.r, 1e-14);
}

TEST(BallBound, ZeroAndNegativeControl) {
  auto g = Grid::build({{-1, -1}, {1, 1}}, 128, 128);
  EXPECT_TRUE(check_ball_bound(ScalarField::zeros(g), 1.0, {0.5, 1.0}).all_ok);
  const double M = 4.0, Gc = 1.0;  // violates for r > 4 Gc / M^2 = 0.25
  auto u = sample(g, [M](const Point& p) { return M * p.x; });
  auto bb = check_ball_bound(u, Gc, {0.125, 0.5, 1.0});
  EXPECT_TRUE(bb.rows[0].ok);
  EXPECT_FALSE(bb.rows[1].ok);
  EXPECT_FALSE(bb.all_ok);
  EXPECT_NEAR(bb.rows[2].energy, 0.5 * M * M * oracle::pi, 0.01 * 0.5 * M * M * oracle::pi);
}

TEST(Competitor, ZeroFieldPaysSurfaceOnly) {
  auto g = cracked_square(32);
  MaterialParams m;
  m.delta = 0.1;
  CompetitorFamily fam{{0.0}, {0.25, 0.5}, 2};
  auto res = competitor_test(ScalarField::zeros(g), nullptr, m, {}, fam, 1.0);
  EXPECT_NEAR(res.margin, m.G_c * 0.25, 1e-12);
  EXPECT_EQ(res.verdict, FamilyVerdict::StableWithinFamily);
  EXPECT_TRUE(res.rows[0].slit_extension);

  CompetitorFamily diag{{oracle::pi / 4}, {0.25}, 2};
  auto band = competitor_test(ScalarField::zeros(g), nullptr, m, {}, diag, 1.0);
  EXPECT_FALSE(band.rows[0].slit_extension);
  EXPECT_GT(band.margin, m.G_c * 0.25);
}

TEST(Competitor, Errors) {
  auto g = cracked_square(32);
  MaterialParams m;
  auto u = ScalarField::zeros(g);
  EXPECT_EQ(code_of([&] { competitor_test(u, nullptr, m, {}, {{}, {0.25}, 2}, 1.0); }), Errc::FamilyEmpty);
  EXPECT_EQ(code_of([&] { competitor_test(u, nullptr, m, {}, {{0.0}, {0.75}, 2}, 1.0); }), Errc::InvalidArgument);
  EXPECT_EQ(code_of([&] { competitor_test(u, nullptr, m, {}, {{oracle::pi}, {0.25}, 2}, 1.0); }),
            Errc::InvalidArgument);
}

CompetitorResult singular_competitors(double err_over_gc) {
  auto g = cracked_square(64);
  MaterialParams m;
  m.G_c = 1.0;
  m.delta = 2.0 / 64 * 2;
  const double K = std::sqrt(4.0 * err_over_gc * m.G_c / oracle::pi);
  CompetitorFamily fam{{-oracle::pi / 2, -oracle::pi / 4, 0.0, oracle::pi / 4, oracle::pi / 2}, {0.125, 0.25, 0.5}, 2};
  return competitor_test(oracle_singular(g, K), nullptr, m, {}, fam, 1.0);
}

TEST(Competitor, SupercriticalTipIsUnstable) {
  auto res = singular_competitors(1.5);
  EXPECT_EQ(res.verdict, FamilyVerdict::Unstable);
  EXPECT_LT(res.margin, 0.0);
  EXPECT_EQ(res.rows.size(), 15u);
}

TEST(Competitor, SubcriticalTipIsStableWithinFamily) {
  auto res = singular_competitors(0.5);
  EXPECT_EQ(res.verdict, FamilyVerdict::StableWithinFamily);
  for (const auto& row : res.rows) EXPECT_GT(row.margin, 0.0) << row.angle << " " << row.length;
}

TEST(Competitor, MarginDecreasesWithLoading) {
  const double a = singular_competitors(0.5).margin;
  const double b = singular_competitors(1.0).margin;
  const double c = singular_competitors(1.5).margin;
  EXPECT_GT(a, b);
  EXPECT_GT(b, c);
}

TEST(Analyze, SubcriticalSnapshot) {
  auto g = cracked_square(128);
  MaterialParams m;
  m.G_c = 1.0;
  const double K = std::sqrt(4.0 * 0.5 / oracle::pi);
  StabilityOptions opt;
  opt.eps_list = {0.5, 0.25};
  opt.blowup_radius = 1.0;
  auto rep = analyze_tip(oracle_singular(g, K), nullptr, m, {}, opt);
  EXPECT_NEAR(rep.K_fit, K, 1e-12);
  EXPECT_EQ(rep.verdict, Verdict::Stable);
  EXPECT_DOUBLE_EQ(rep.err, energy_release_rate(rep.K_fit));
  EXPECT_EQ(rep.blowup_cauchy.size(), 1u);
  EXPECT_TRUE(rep.ball_bound_ok);
  EXPECT_TRUE(rep.notes.empty());
  EXPECT_FALSE(rep.competitor_margin);
}

TEST(Analyze, RigidShiftDoesNotChangeVerdict) {
  auto g = cracked_square(64);
  MaterialParams m;
  auto u = oracle_singular(g, 1.5);
  std::vector<double> vals(u.values());
  for (double& x : vals) x -= 3.0;
  StabilityOptions opt;
  opt.eps_list = {0.5, 0.25};
  auto a = analyze_tip(u, nullptr, m, {}, opt);
  auto b = analyze_tip(ScalarField(g, vals), nullptr, m, {}, opt);
  EXPECT_EQ(a.verdict, b.verdict);
  EXPECT_NEAR(a.K_fit, b.K_fit, 1e-12);
  ASSERT_EQ(a.blowup_cauchy.size(), b.blowup_cauchy.size());
  for (std::size_t k = 0; k < a.blowup_cauchy.size(); ++k) EXPECT_NEAR(a.blowup_cauchy[k], b.blowup_cauchy[k], 1e-12);
}

}  // namespace
}  // namespace vfrac
