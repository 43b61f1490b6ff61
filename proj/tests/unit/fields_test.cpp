#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "vfrac/error.hpp"
#include "vfrac/fields.hpp"

namespace vfrac {
namespace {

GridPtr cracked_square(int n) {
  return Grid::build({{-1.0, -1.0}, {1.0, 1.0}}, n, n, polyline_slit({{-1.0, 0.0}, {0.0, 0.0}}, true));
}

ScalarField singular(const GridPtr& g, double K) {
  return sample_sided(g, [K](const Point& p, const Vec2& d) { return oracle::singular_mode(K, p, d); });
}

TEST(Gradient, LinearField) {
  auto g = Grid::build({{0, 0}, {1, 1}}, 4, 4);
  auto u = sample(g, [](const Point& p) { return p.x; });
  for (const auto& gr : gradient(u)) {
    EXPECT_DOUBLE_EQ(gr.x, 1.0);
    EXPECT_DOUBLE_EQ(gr.y, 0.0);
  }
}

TEST(Gradient, QuadraticFieldAtCellCenters) {
  auto g = Grid::build({{0, 0}, {1, 1}}, 4, 4);
  auto u = sample(g, [](const Point& p) { return p.x * p.x; });
  const auto grad = gradient(u);
  const double expected[4] = {0.25, 0.75, 1.25, 1.75};
  for (std::size_t c = 0; c < grad.size(); ++c) {
    EXPECT_NEAR(grad[c].x, expected[g->cell_index(c).first], 1e-14);
    EXPECT_DOUBLE_EQ(grad[c].y, 0.0);
  }
}

TEST(Gradient, ConstantFieldIsZero) {
  auto g = cracked_square(8);
  for (const auto& gr : gradient(ScalarField::constant(g, 4.2))) {
    EXPECT_EQ(gr.x, 0.0);
    EXPECT_EQ(gr.y, 0.0);
  }
}

TEST(Fields, PhaseFieldBoundsEnforced) {
  auto g = Grid::build({{0, 0}, {1, 1}}, 2, 2);
  EXPECT_THROW(PhaseField(g, std::vector<double>(9, 1.5)), Error);
  EXPECT_THROW(ScalarField(g, std::vector<double>(8, 0.0)), Error);
  EXPECT_THROW(ScalarField(g, std::vector<double>(9, NAN)), Error);
}

TEST(Blowup, IdentityScaleSubtractsCenterValue) {
  auto g = Grid::build({{0, 0}, {1, 1}}, 16, 16);
  auto u = sample(g, [](const Point& p) { return std::sin(3 * p.x) + p.y * p.y; });
  const Point x0{0.5, 0.5};
  auto bu = blowup_rescale(u, x0, 1.0, 0.5);
  const double u0 = std::sin(1.5) + 0.25;
  EXPECT_EQ(bu.u.grid().node_count(), g->node_count());
  for (std::size_t p = 0; p < bu.u.size(); ++p) {
    EXPECT_NEAR(bu.u[p], u[bu.source_node[p]] - u0, 1e-15);
  }
  EXPECT_DOUBLE_EQ(bu.u.grid().hx(), g->hx());
}

TEST(Blowup, SingularFieldIsSelfSimilar) {
  auto g = cracked_square(64);
  auto u = singular(g, 1.0);
  for (double eps : {1.0, 0.5, 0.25}) {
    auto bu = blowup_rescale(u, {0, 0}, eps, 1.0);
    EXPECT_DOUBLE_EQ(bu.u.grid().hx(), g->hx() / eps);
    for (std::size_t p = 0; p < bu.u.size(); ++p) {
      const Point x = bu.u.grid().node_position(p);
      const double expected = oracle::singular_mode(1.0, x, bu.u.grid().interior_direction(p));
      EXPECT_NEAR(bu.u[p], expected, 1e-14);
    }
    ASSERT_TRUE(bu.slit.has_value());
    EXPECT_NEAR(bu.slit->length_in_disk({0, 0}, 1.0), 1.0, 1e-15);
  }
}

TEST(Blowup, LinearSlopeScalesWithSqrtEps) {
  auto g = Grid::build({{-1, -1}, {1, 1}}, 64, 64);
  const double a = 3.0;
  auto u = sample(g, [a](const Point& p) { return a * p.x + 1.0; });
  auto bu = blowup_rescale(u, {0, 0}, 0.25, 1.0);
  for (std::size_t p = 0; p < bu.u.size(); ++p) {
    EXPECT_NEAR(bu.u[p], 0.5 * a * bu.u.grid().node_position(p).x, 1e-13);
  }
}

TEST(Blowup, Errors) {
  auto g = Grid::build({{-1, -1}, {1, 1}}, 32, 32);
  auto u = ScalarField::zeros(g);
  auto code = [&](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::InvalidArgument;
  };
  EXPECT_EQ(code([&] { blowup_rescale(u, {0, 0}, 0.25, 0.5); }), Errc::WindowTooCoarse);
  EXPECT_EQ(code([&] { blowup_rescale(u, {0.01, 0}, 0.5, 1.0); }), Errc::CenterOffLattice);
  EXPECT_EQ(code([&] { blowup_rescale(u, {0.5, 0.5}, 1.0, 1.0); }), Errc::WindowOutsideDomain);
  EXPECT_THROW(blowup_rescale(u, {0, 0}, 0.3, 1.0), Error);
}

TEST(Blowup, DoubleRescalingComposes) {
  auto g = Grid::build({{-1, -1}, {1, 1}}, 128, 128);
  auto u = sample(g, [](const Point& p) { return std::cos(2 * p.x) * p.y + p.x * p.x * p.x; });
  const Point x0{0.25, -0.125};
  auto first = blowup_rescale(u, x0, 0.5, 1.0);
  auto twice = blowup_rescale(first.u, {0, 0}, 0.25, 1.0);
  auto direct = blowup_rescale(u, x0, 0.125, 1.0);
  ASSERT_EQ(twice.u.size(), direct.u.size());
  for (std::size_t p = 0; p < direct.u.size(); ++p) {
    EXPECT_EQ(twice.u.grid().node_position(p), direct.u.grid().node_position(p));
    EXPECT_NEAR(twice.u[p], direct.u[p], 4e-16 * std::max(1.0, std::abs(direct.u[p])));
  }
}

TEST(Blowup, DependsOnlyOnWindowValues) {
  auto g = Grid::build({{-1, -1}, {1, 1}}, 64, 64);
  auto f = [](const Point& p) { return p.x * p.y; };
  auto u = sample(g, f);
  auto u_far = sample(g, [&](const Point& p) {
    return (std::abs(p.x) > 0.25 * std::sqrt(2.0) + 1e-12 || std::abs(p.y) > 0.25 * std::sqrt(2.0) + 1e-12) ? 7.0
                                                                                                              : f(p);
  });
  auto a = blowup_rescale(u, {0, 0}, 0.25, 1.0);
  auto b = blowup_rescale(u_far, {0, 0}, 0.25, 1.0);
  EXPECT_EQ(a.u.values(), b.u.values());
}

TEST(Dilate, SlitSegment) {
  SlitSpec k;
  k.segments = {{{-0.3, 0.0}, {0.0, 0.0}}};
  k.tip = Point{0, 0};
  auto d = dilate(k, {0, 0}, 0.5);
  EXPECT_DOUBLE_EQ(d.segments[0].a.x, -0.6);
  EXPECT_DOUBLE_EQ(d.segments[0].b.x, 0.0);
  EXPECT_DOUBLE_EQ(d.total_length(), 0.6);
}

TEST(Dilate, ConstantAndLayerWidth) {
  auto g = Grid::build({{-1, -1}, {1, 1}}, 128, 128);
  auto ones = dilate(PhaseField::ones(g), {0, 0}, 0.25, 1.0);
  for (double x : ones.values()) EXPECT_EQ(x, 1.0);

  const double delta = 0.02;
  std::vector<double> vals(g->node_count());
  for (std::size_t p = 0; p < vals.size(); ++p) vals[p] = oracle::at2_profile(g->node_position(p).y, delta);
  PhaseField v(g, vals);
  const double eps = 0.125;
  auto ve = dilate(v, {0, 0}, eps, 1.0);
  for (std::size_t p = 0; p < ve.size(); ++p) {
    const double y = ve.grid().node_position(p).y;
    EXPECT_NEAR(ve[p], oracle::at2_profile(y, delta / eps), 1e-14);
    EXPECT_GE(ve[p], 0.0);
    EXPECT_LE(ve[p], 1.0);
  }
}

TEST(L2Distance, BasicProperties) {
  auto g = Grid::build({{0, 0}, {2, 1}}, 16, 8);
  auto a = sample(g, [](const Point& p) { return p.x * p.y; });
  auto b = sample(g, [](const Point& p) { return p.x * p.y + 0.3; });
  const auto whole = BallMask::whole(*g);
  EXPECT_EQ(l2_distance_on_ball(a, a, whole), 0.0);
  EXPECT_NEAR(l2_distance_on_ball(a, b, whole), 0.3 * std::sqrt(2.0), 1e-14);
  EXPECT_DOUBLE_EQ(l2_distance_on_ball(a, b, whole), l2_distance_on_ball(b, a, whole));
  auto other = Grid::build({{0, 0}, {1, 1}}, 4, 4);
  EXPECT_THROW(l2_distance_on_ball(a, ScalarField::zeros(other), BallMask::whole(*other)), Error);
}

TEST(L2Distance, SingularFieldsOnUnitBall) {
  auto g = cracked_square(256);
  auto mask = ball_mask(*g, {0, 0}, 1.0);
  const double d = l2_distance_on_ball(singular(g, 1.0), singular(g, 2.0), mask);
  // u_S(2) - u_S(1) = u_S(1); oracle: sqrt(pi r^3 / 3).
  EXPECT_NEAR(d, std::sqrt(oracle::singular_l2_sq(1.0, 1.0)), 0.01 * std::sqrt(oracle::singular_l2_sq(1.0, 1.0)));
}

TEST(Inject, MatchesSlitFaces) {
  auto fine = cracked_square(64);
  auto coarse = cracked_square(32);
  auto u = singular(fine, 1.0);
  auto c = inject(u, coarse);
  for (std::size_t p = 0; p < c.size(); ++p) {
    const double expected = oracle::singular_mode(1.0, coarse->node_position(p), coarse->interior_direction(p));
    EXPECT_NEAR(c[p], expected, 1e-15);
  }
}

}  // namespace
}  // namespace vfrac
