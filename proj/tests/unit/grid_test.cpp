#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "vfrac/error.hpp"
#include "vfrac/fields.hpp"
#include "vfrac/grid.hpp"

namespace vfrac {
namespace {

const Rect kUnit{{0.0, 0.0}, {1.0, 1.0}};

TEST(Grid, CountsWithoutSlit) {
  auto g = Grid::build(kUnit, 4, 4);
  EXPECT_EQ(g->node_count(), 25u);
  EXPECT_EQ(g->cell_count(), 16u);
  EXPECT_EQ(g->duplicated_count(), 0u);
  EXPECT_DOUBLE_EQ(g->hx(), 0.25);
  EXPECT_EQ(g->boundary_edges().size(), 16u);
}

TEST(Grid, RejectsDegenerateResolution) {
  EXPECT_THROW(Grid::build(kUnit, 1, 1), Error);
  try {
    Grid::build(kUnit, 1, 4);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InvalidResolution);
  }
}

TEST(Grid, SlitDuplicatesEveryNonTipSlitNode) {
  // Slit (0,0.5)->(0.5,0.5) on the 4x4 lattice touches lattice nodes
  // (0,2), (1,2), (2,2). The tip (2,2) stays single; (1,2) separates cells
  // above and below; the mouth (0,2) on the boundary must carry two values.
  auto slit = polyline_slit({{0.0, 0.5}, {0.5, 0.5}}, true);
  auto g = Grid::build(kUnit, 4, 4, slit);
  EXPECT_EQ(g->node_count(), 27u);
  EXPECT_EQ(g->copies(1, 2).size(), 2u);
  EXPECT_EQ(g->copies(0, 2).size(), 2u);
  EXPECT_EQ(g->copies(2, 2).size(), 1u);

  // Cells directly above and below the slit use distinct copies.
  const auto& below = g->cell_nodes(1 * 4 + 0);  // cell (0,1), top edge on slit
  const auto& above = g->cell_nodes(2 * 4 + 0);  // cell (0,2), bottom edge on slit
  EXPECT_NE(below[2], above[0]);
  EXPECT_NE(below[3], above[1]);
  // Cells beyond the tip share the tip node.
  const auto& below_tip = g->cell_nodes(1 * 4 + 2);
  const auto& above_tip = g->cell_nodes(2 * 4 + 2);
  EXPECT_EQ(below_tip[2], above_tip[0]);
}

TEST(Grid, SlitErrors) {
  auto expect_code = [](auto&& fn, Errc code) {
    try {
      fn();
      ADD_FAILURE() << "no error thrown";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), code) << e.what();
    }
  };
  expect_code([] { Grid::build(kUnit, 4, 4, polyline_slit({{0.0, 0.5}, {0.5, 0.6}}, true)); }, Errc::SlitOffLattice);
  expect_code([] { Grid::build(kUnit, 4, 4, polyline_slit({{0.0, 0.3}, {0.5, 0.3}}, true)); }, Errc::SlitOffLattice);
  expect_code([] { Grid::build(kUnit, 4, 4, polyline_slit({{0.0, 0.5}, {0.5, 0.5}}, false)); },
              Errc::SlitTouchesBoundary);
  expect_code([] { Grid::build(kUnit, 4, 4, polyline_slit({{0.25, 0.0}, {0.75, 0.0}}, true)); },
              Errc::SlitTouchesBoundary);
  expect_code([] { Grid::build(kUnit, 4, 4, polyline_slit({{0.25, 0.5}, {0.5, 0.5}}, true)); }, Errc::InvalidSlit);
  SlitSpec broken;
  broken.segments = {{{0.0, 0.5}, {0.25, 0.5}}, {{0.5, 0.5}, {0.75, 0.5}}};
  broken.tip = Point{0.75, 0.5};
  broken.mouth_on_boundary = true;
  expect_code([&] { Grid::build(kUnit, 4, 4, broken); }, Errc::InvalidSlit);
}

TEST(Grid, InteriorSlitWithTwoFreeEnds) {
  auto g = Grid::build(kUnit, 8, 8, polyline_slit({{0.25, 0.5}, {0.75, 0.5}}, false));
  // Interior nodes strictly between the two ends are duplicated.
  EXPECT_EQ(g->duplicated_count(), 3u);
}

TEST(Grid, BentSlitDuplicatesCorner) {
  auto g = Grid::build(kUnit, 8, 8, polyline_slit({{0.0, 0.5}, {0.5, 0.5}, {0.5, 0.75}}, true));
  EXPECT_EQ(g->copies(4, 4).size(), 2u);  // corner separates one cell from three
  EXPECT_EQ(g->copies(4, 6).size(), 1u);  // tip
  // mouth + 3 along the horizontal leg + corner + 1 on the vertical leg
  EXPECT_EQ(g->duplicated_count(), 6u);
}

TEST(Grid, RefinementKeepsCoarseNodePositions) {
  auto slit = polyline_slit({{0.0, 0.5}, {0.5, 0.5}}, true);
  auto coarse = Grid::build(kUnit, 8, 8, slit);
  auto fine = Grid::build(kUnit, 16, 16, slit);
  std::set<std::pair<double, double>> fine_pos;
  for (std::size_t p = 0; p < fine->node_count(); ++p) {
    fine_pos.insert({fine->node_position(p).x, fine->node_position(p).y});
  }
  for (std::size_t p = 0; p < coarse->node_count(); ++p) {
    EXPECT_TRUE(fine_pos.count({coarse->node_position(p).x, coarse->node_position(p).y}));
  }
}

TEST(Grid, SlitDecouplesGradientStencils) {
  auto g = Grid::build(kUnit, 8, 8, polyline_slit({{0.0, 0.5}, {0.5, 0.5}}, true));
  // 3 above the slit, -2 below.
  auto u = sample_sided(g, [](const Point& x, const Vec2& d) {
    if (x.y > 0.5) return 3.0;
    if (x.y < 0.5) return -2.0;
    return d.y > 0.0 ? 3.0 : -2.0;
  });
  const auto grad = gradient(u);
  for (std::size_t c = 0; c < g->cell_count(); ++c) {
    if (g->cell_center(c).x < 0.375) {  // cells touching the single tip node excluded
      EXPECT_EQ(grad[c].x, 0.0);
      EXPECT_EQ(grad[c].y, 0.0);
    }
  }
}

TEST(BallMask, SmallBallHitsOneCell) {
  auto g = Grid::build(kUnit, 4, 4);
  auto m = ball_mask(*g, {0.375, 0.375}, 0.1);
  int nonzero = 0;
  for (double w : m.cell_weights) {
    EXPECT_LE(w, g->cell_area());
    if (w > 0.0) ++nonzero;
  }
  EXPECT_EQ(nonzero, 1);
  EXPECT_GT(m.cell_weights[1 * 4 + 1], 0.0);
  EXPECT_FALSE(m.truncated);
}

TEST(BallMask, DiskAreaAtFineResolution) {
  auto g = Grid::build(kUnit, 256, 256);
  auto m = ball_mask(*g, {0.5, 0.5}, 0.25);
  EXPECT_NEAR(m.area(), oracle::pi / 16.0, 0.01 * oracle::pi / 16.0);
}

TEST(BallMask, SaturatesOnWholeGrid) {
  auto g = Grid::build(kUnit, 8, 8);
  auto m = ball_mask(*g, {0.5, 0.5}, 5.0);
  EXPECT_DOUBLE_EQ(m.area(), 1.0);
  EXPECT_TRUE(m.truncated);
}

TEST(BallMask, AreaErrorIsFirstOrder) {
  for (int n : {32, 64, 128, 256}) {
    auto g = Grid::build(kUnit, n, n);
    const double err = std::abs(ball_mask(*g, {0.5, 0.5}, 0.3).area() - oracle::pi * 0.09);
    EXPECT_LE(err, 2.0 * 0.3 * 2.0 * oracle::pi / n);  // perimeter * h bound
  }
}

TEST(BallMask, Deterministic) {
  auto g = Grid::build(kUnit, 32, 32);
  EXPECT_EQ(ball_mask(*g, {0.41, 0.37}, 0.2).cell_weights, ball_mask(*g, {0.41, 0.37}, 0.2).cell_weights);
}

TEST(Grid, WindowInheritsCopies) {
  auto g = Grid::build({{-1, -1}, {1, 1}}, 16, 16, polyline_slit({{-1, 0}, {0, 0}}, true));
  auto w = g->window(4, 4, 12, 12, {-4, -4}, 1.0, 1.0, std::nullopt);
  // 9x9 window lattice plus copies of the 4 slit nodes left of the tip (incl. the window edge)
  EXPECT_EQ(w.grid->node_count(), 81u + 4u);
  for (std::size_t p = 0; p < w.grid->node_count(); ++p) {
    EXPECT_EQ(w.grid->node_i(p) + 4, g->node_i(w.source[p]));
  }
}

}  // namespace
}  // namespace vfrac
