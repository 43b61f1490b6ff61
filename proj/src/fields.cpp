#include "vfrac/fields.hpp"

#include <cmath>
#include <string>

#include "vfrac/error.hpp"

namespace vfrac {

ScalarField::ScalarField(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw Error(Errc::InvalidField, "field without grid");
  if (values_.size() != grid_->node_count()) {
    throw Error(Errc::InvalidField, "expected " + std::to_string(grid_->node_count()) + " values, got " +
                                        std::to_string(values_.size()));
  }
  for (double x : values_) {
    if (!std::isfinite(x)) throw Error(Errc::InvalidField, "non-finite field value");
  }
}

ScalarField ScalarField::zeros(GridPtr grid) { return constant(std::move(grid), 0.0); }

ScalarField ScalarField::constant(GridPtr grid, double value) {
  const std::size_t n = grid->node_count();
  return ScalarField(std::move(grid), std::vector<double>(n, value));
}

PhaseField::PhaseField(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw Error(Errc::InvalidField, "field without grid");
  if (values_.size() != grid_->node_count()) {
    throw Error(Errc::InvalidField, "expected " + std::to_string(grid_->node_count()) + " values, got " +
                                        std::to_string(values_.size()));
  }
  for (double x : values_) {
    if (!(x >= 0.0 && x <= 1.0)) throw Error(Errc::InvalidField, "phase field value outside [0, 1]");
  }
}

PhaseField PhaseField::constant(GridPtr grid, double value) {
  const std::size_t n = grid->node_count();
  return PhaseField(std::move(grid), std::vector<double>(n, value));
}

ScalarField sample(const GridPtr& grid, const std::function<double(const Point&)>& f) {
  std::vector<double> values(grid->node_count());
  for (std::size_t p = 0; p < values.size(); ++p) values[p] = f(grid->node_position(p));
  return ScalarField(grid, std::move(values));
}

ScalarField sample_sided(const GridPtr& grid, const std::function<double(const Point&, const Vec2&)>& f) {
  std::vector<double> values(grid->node_count());
  for (std::size_t p = 0; p < values.size(); ++p) {
    values[p] = f(grid->node_position(p), grid->interior_direction(p));
  }
  return ScalarField(grid, std::move(values));
}

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!a.same_layout(b)) throw Error(Errc::GridMismatch, what);
}

std::vector<Vec2> gradient(const ScalarField& u) {
  const Grid& g = u.grid();
  std::vector<Vec2> out(g.cell_count());
  const auto& val = u.values();
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const auto& n = g.cell_nodes(c);
    const double u00 = val[n[0]], u10 = val[n[1]], u01 = val[n[2]], u11 = val[n[3]];
    out[c] = {((u10 - u00) + (u11 - u01)) / (2.0 * g.hx()), ((u01 - u00) + (u11 - u10)) / (2.0 * g.hy())};
  }
  return out;
}

namespace {

bool is_dyadic(double eps) {
  if (!(eps > 0.0) || eps > 1.0) return false;
  int e = 0;
  return std::frexp(eps, &e) == 0.5;
}

// Liang-Barsky clip of a segment to a closed rectangle.
std::optional<Segment> clip(const Segment& s, const Rect& r) {
  double t0 = 0.0, t1 = 1.0;
  const double dx = s.b.x - s.a.x, dy = s.b.y - s.a.y;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {s.a.x - r.lo.x, r.hi.x - s.a.x, s.a.y - r.lo.y, r.hi.y - s.a.y};
  for (int k = 0; k < 4; ++k) {
    if (p[k] == 0.0) {
      if (q[k] < 0.0) return std::nullopt;
      continue;
    }
    const double t = q[k] / p[k];
    if (p[k] < 0.0) t0 = std::max(t0, t);
    else t1 = std::min(t1, t);
  }
  if (t1 <= t0) return std::nullopt;
  Segment out = s;
  if (t0 > 0.0) out.a = {s.a.x + t0 * dx, s.a.y + t0 * dy};
  if (t1 < 1.0) out.b = {s.a.x + t1 * dx, s.a.y + t1 * dy};
  return out;
}

Point dilate_point(const Point& y, const Point& x0, double eps) {
  return {(y.x - x0.x) / eps, (y.y - x0.y) / eps};
}

}  // namespace

SlitSpec dilate(const SlitSpec& slit, const Point& x0, double eps) {
  SlitSpec out;
  out.mouth_on_boundary = slit.mouth_on_boundary;
  for (const auto& s : slit.segments) out.segments.push_back({dilate_point(s.a, x0, eps), dilate_point(s.b, x0, eps)});
  if (slit.tip) out.tip = dilate_point(*slit.tip, x0, eps);
  return out;
}

BlowupWindow blowup_window(const Grid& grid, const Point& x0, double eps, double radius) {
  if (!is_dyadic(eps)) throw Error(Errc::InvalidArgument, "eps must be 2^-k with k >= 0");
  if (!(radius > 0.0)) throw Error(Errc::InvalidArgument, "window radius must be positive");
  const auto ij = grid.lattice_index(x0);
  if (!ij) throw Error(Errc::CenterOffLattice, "blow-up center is not a grid node");

  const double er = eps * radius;
  const double cx = er / grid.hx();
  const double cy = er / grid.hy();
  if (cx < 8.0 - 1e-9 || cy < 8.0 - 1e-9) {
    throw Error(Errc::WindowTooCoarse, "eps*r spans fewer than 8 source cells");
  }
  const int mx = static_cast<int>(std::ceil(cx - 1e-9));
  const int my = static_cast<int>(std::ceil(cy - 1e-9));
  const int i0 = ij->first - mx, i1 = ij->first + mx;
  const int j0 = ij->second - my, j1 = ij->second + my;
  if (i0 < 0 || j0 < 0 || i1 > grid.nx() || j1 > grid.ny()) {
    throw Error(Errc::WindowOutsideDomain, "blow-up window leaves the grid");
  }

  const Point center{grid.origin().x + ij->first * grid.hx(), grid.origin().y + ij->second * grid.hy()};
  std::optional<SlitSpec> slit;
  if (grid.slit()) {
    const Rect source_rect{{grid.origin().x + i0 * grid.hx(), grid.origin().y + j0 * grid.hy()},
                           {grid.origin().x + i1 * grid.hx(), grid.origin().y + j1 * grid.hy()}};
    SlitSpec clipped;
    for (const auto& s : grid.slit()->segments) {
      if (auto c = clip(s, source_rect)) clipped.segments.push_back(*c);
    }
    const auto& tip = grid.slit()->tip;
    if (tip && tip->x >= source_rect.lo.x && tip->x <= source_rect.hi.x && tip->y >= source_rect.lo.y &&
        tip->y <= source_rect.hi.y) {
      clipped.tip = tip;
    }
    if (!clipped.segments.empty()) {
      clipped.mouth_on_boundary = true;
      slit = dilate(clipped, center, eps);
    }
  }

  const double hx = grid.hx() / eps;
  const double hy = grid.hy() / eps;
  BlowupWindow w{grid.window(i0, j0, i1, j1, {-mx * hx, -my * hy}, hx, hy, std::move(slit)), eps, center, radius};
  return w;
}

namespace {

ScalarField rescale_values(const ScalarField& u, const BlowupWindow& w) {
  const auto& g = *w.window.grid;
  const auto ij = *u.grid().lattice_index(w.x0);
  const double u0 = u[u.grid().primary(ij.first, ij.second)];
  const double scale = 1.0 / std::sqrt(w.eps);
  std::vector<double> values(g.node_count());
  for (std::size_t p = 0; p < values.size(); ++p) values[p] = scale * (u[w.window.source[p]] - u0);
  return ScalarField(w.window.grid, std::move(values));
}

PhaseField dilate_values(const PhaseField& v, const BlowupWindow& w) {
  std::vector<double> values(w.window.grid->node_count());
  for (std::size_t p = 0; p < values.size(); ++p) values[p] = v[w.window.source[p]];
  return PhaseField(w.window.grid, std::move(values));
}

}  // namespace

RescaledPair blowup_rescale(const ScalarField& u, const Point& x0, double eps, double radius) {
  auto w = blowup_window(u.grid(), x0, eps, radius);
  RescaledPair out{eps, w.x0, radius, rescale_values(u, w), std::nullopt, w.window.grid->slit(), w.window.source};
  return out;
}

RescaledPair blowup_rescale(const ScalarField& u, const PhaseField& v, const Point& x0, double eps,
                            double radius) {
  require_same_grid(u.grid(), v.grid(), "blowup_rescale: u and v live on different grids");
  auto w = blowup_window(u.grid(), x0, eps, radius);
  RescaledPair out{eps, w.x0, radius, rescale_values(u, w), dilate_values(v, w), w.window.grid->slit(),
                   w.window.source};
  return out;
}

PhaseField dilate(const PhaseField& v, const Point& x0, double eps, double radius) {
  return dilate_values(v, blowup_window(v.grid(), x0, eps, radius));
}

ScalarField dilate(const ScalarField& f, const Point& x0, double eps, double radius) {
  const auto w = blowup_window(f.grid(), x0, eps, radius);
  std::vector<double> values(w.window.grid->node_count());
  for (std::size_t p = 0; p < values.size(); ++p) values[p] = f[w.window.source[p]];
  return ScalarField(w.window.grid, std::move(values));
}

ScalarField inject(const ScalarField& fine, const GridPtr& coarse) {
  std::vector<double> values(coarse->node_count());
  for (std::size_t p = 0; p < values.size(); ++p) {
    const auto q = fine.grid().locate(coarse->node_position(p), coarse->interior_direction(p));
    if (!q) throw Error(Errc::GridMismatch, "coarse node is not a node of the fine grid");
    values[p] = fine[*q];
  }
  return ScalarField(coarse, std::move(values));
}

double l2_distance_on_ball(const ScalarField& a, const ScalarField& b, const BallMask& mask) {
  require_same_grid(a.grid(), b.grid(), "l2_distance_on_ball: fields on different grids");
  const Grid& g = a.grid();
  if (mask.cell_weights.size() != g.cell_count()) throw Error(Errc::GridMismatch, "mask does not match grid");
  double sum = 0.0;
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const double w = mask.cell_weights[c];
    if (w == 0.0) continue;
    double cell = 0.0;
    for (auto p : g.cell_nodes(c)) {
      const double d = a[p] - b[p];
      cell += d * d;
    }
    sum += 0.25 * w * cell;
  }
  return std::sqrt(sum);
}

}  // namespace vfrac
