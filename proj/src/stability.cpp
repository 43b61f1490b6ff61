#include "vfrac/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <tuple>

#include "vfrac/error.hpp"

namespace vfrac {

namespace {

constexpr double kPi = std::numbers::pi;

/// cos and sin, exact at multiples of pi/2.
std::pair<double, double> cos_sin(double angle) {
  const double q = angle / (0.5 * kPi);
  const double k = std::round(q);
  if (std::abs(q - k) < 1e-12) {
    switch (((static_cast<long>(k) % 4) + 4) % 4) {
      case 0: return {1.0, 0.0};
      case 1: return {0.0, 1.0};
      case 2: return {-1.0, 0.0};
      default: return {0.0, -1.0};
    }
  }
  return {std::cos(angle), std::sin(angle)};
}

double boundary_distance(const Grid& g, const Point& x) {
  const Rect r = g.rect();
  return std::min({x.x - r.lo.x, r.hi.x - x.x, x.y - r.lo.y, r.hi.y - x.y});
}

double relative_difference(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale > 0.0 ? std::abs(a - b) / scale : 0.0;
}

/// Least-squares line through (x, y); returns slope and intercept.
std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sx += x[k];
    sy += y[k];
    sxx += x[k] * x[k];
    sxy += x[k] * y[k];
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) return {0.0, sy / n};
  const double slope = (n * sxy - sx * sy) / den;
  return {slope, (sy - slope * sx) / n};
}

std::size_t tip_node(const Grid& g, const Point& tip) {
  const auto ij = g.lattice_index(tip);
  if (!ij) throw Error(Errc::TipOffLattice, "crack tip is not a grid node");
  return g.primary(ij->first, ij->second);
}

double distance_to_segment(const Point& x, const Point& a, const Point& b) {
  const Vec2 d = b - a;
  const double t = std::clamp((x - a).dot(d) / d.norm2(), 0.0, 1.0);
  return distance(x, a + t * d);
}

}  // namespace

double singular_mode(double K, const Point& x, const Vec2& interior_dir, const CrackFrame& frame) {
  const auto [c, s] = cos_sin(frame.angle);
  const double dx = x.x - frame.tip.x, dy = x.y - frame.tip.y;
  const double xi = c * dx + s * dy;
  const double zeta = -s * dx + c * dy;
  const double rho = std::hypot(xi, zeta);
  if (rho == 0.0) return 0.0;
  double theta;
  if (xi < 0.0 && std::abs(zeta) <= 1e-12 * rho) {
    theta = (-s * interior_dir.x + c * interior_dir.y) > 0.0 ? kPi : -kPi;
  } else {
    theta = std::atan2(zeta, xi);
  }
  return K * std::sqrt(rho) * std::sin(0.5 * theta);
}

ScalarField singular_field(const GridPtr& grid, double K, const CrackFrame& frame) {
  return sample_sided(grid, [&](const Point& x, const Vec2& d) { return singular_mode(K, x, d, frame); });
}

std::optional<CrackFrame> slit_tip_frame(const SlitSpec& slit) {
  if (!slit.tip) return std::nullopt;
  for (const auto& s : slit.segments) {
    if (s.b == *slit.tip) return CrackFrame{*slit.tip, std::atan2(s.b.y - s.a.y, s.b.x - s.a.x)};
    if (s.a == *slit.tip) return CrackFrame{*slit.tip, std::atan2(s.a.y - s.b.y, s.a.x - s.b.x)};
  }
  return std::nullopt;
}

SifFit extract_sif(const ScalarField& u, const CrackFrame& frame, double r_in, double r_out, const PhaseField* v) {
  const Grid& g = u.grid();
  if (v) require_same_grid(g, v->grid(), "extract_sif: u and v on different grids");
  const std::size_t t = tip_node(g, frame.tip);
  const double h = std::max(g.hx(), g.hy());
  if (r_in < 3.0 * h * (1.0 - 1e-12)) throw Error(Errc::InvalidArgument, "annulus inner radius below 3h");
  if (r_out > 0.5 * boundary_distance(g, frame.tip) * (1.0 + 1e-12)) {
    throw Error(Errc::InvalidArgument, "annulus outer radius exceeds half the distance to the boundary");
  }
  const double u0 = u[t];
  double ss = 0.0, sw = 0.0, ww = 0.0;
  SifFit fit;
  for (std::size_t p = 0; p < g.node_count(); ++p) {
    const Point x = g.node_position(p);
    const double rho = distance(x, frame.tip);
    if (rho < r_in || rho > r_out) continue;
    if (v && (*v)[p] < 0.5) continue;
    const double s = singular_mode(1.0, x, g.interior_direction(p), frame);
    const double w = u[p] - u0;
    ss += s * s;
    sw += s * w;
    ww += w * w;
    ++fit.nodes;
  }
  if (fit.nodes == 0 || ss == 0.0) throw Error(Errc::AnnulusEmpty, "no usable nodes in the annulus");
  fit.K = sw / ss;
  // second pass: the expanded form ww - 2 K sw + K^2 ss cancels badly
  double misfit = 0.0;
  for (std::size_t p = 0; p < g.node_count(); ++p) {
    const Point x = g.node_position(p);
    const double rho = distance(x, frame.tip);
    if (rho < r_in || rho > r_out) continue;
    if (v && (*v)[p] < 0.5) continue;
    const double r = u[p] - u0 - fit.K * singular_mode(1.0, x, g.interior_direction(p), frame);
    misfit += r * r;
  }
  fit.residual = ww > 0.0 ? std::sqrt(misfit / ww) : 0.0;
  return fit;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Stable: return "Stable";
    case Verdict::Marginal: return "Marginal";
    case Verdict::Unstable: return "Unstable";
  }
  return "?";
}

const char* to_string(FamilyVerdict v) {
  return v == FamilyVerdict::Unstable ? "Unstable" : "StableWithinFamily";
}

Verdict griffith_verdict(double K, double G_c, double tol_band) {
  if (tol_band < 0.0) throw Error(Errc::InvalidArgument, "tolerance band must be nonnegative");
  const double err = energy_release_rate(K);
  if (err > G_c * (1.0 + tol_band)) return Verdict::Unstable;
  if (err < G_c * (1.0 - tol_band)) return Verdict::Stable;
  return Verdict::Marginal;
}

BlowupDiagnosis blowup_diagnose(const ScalarField& u, const PhaseField* v, const Point& x0,
                                const std::vector<double>& eps_list, double radius) {
  if (eps_list.empty()) throw Error(Errc::InvalidArgument, "eps list is empty");
  for (std::size_t k = 1; k < eps_list.size(); ++k) {
    if (!(eps_list[k] < eps_list[k - 1])) throw Error(Errc::InvalidArgument, "eps list must be decreasing");
  }
  const Grid& g = u.grid();
  auto rescale = [&](double eps) { return v ? blowup_rescale(u, *v, x0, eps, radius) : blowup_rescale(u, x0, eps, radius); };

  const std::size_t c0 = tip_node(g, x0);
  BlowupDiagnosis out{eps_list, {}, std::nullopt, rescale(eps_list.front())};
  for (std::size_t k = 1; k < eps_list.size(); ++k) {
    RescaledPair coarse = rescale(eps_list[k]);
    // the finer blow-up, read off at the coarse blow-up nodes
    const double ef = eps_list[k - 1];
    blowup_window(g, x0, ef, radius);  // validates the finer window
    const Grid& cg = coarse.u.grid();
    std::vector<double> fine_vals(cg.node_count());
    const double scale = 1.0 / std::sqrt(ef);
    for (std::size_t p = 0; p < fine_vals.size(); ++p) {
      const Point y = cg.node_position(p);
      const Point src{x0.x + ef * y.x, x0.y + ef * y.y};
      const auto q = g.locate(src, cg.interior_direction(p));
      if (!q) throw Error(Errc::WindowOutsideDomain, "blow-up comparison leaves the grid");
      fine_vals[p] = scale * (u[*q] - u[c0]);
    }
    const ScalarField fine(coarse.u.grid_ptr(), std::move(fine_vals));
    out.cauchy.push_back(l2_distance_on_ball(coarse.u, fine, ball_mask(cg, {0.0, 0.0}, radius)));
    out.finest = std::move(coarse);
  }
  if (out.cauchy.size() >= 2 &&
      std::all_of(out.cauchy.begin(), out.cauchy.end(), [](double d) { return d > 0.0; })) {
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < out.cauchy.size(); ++k) {
      lx.push_back(std::log(eps_list[k]));
      ly.push_back(std::log(out.cauchy[k]));
    }
    out.rate = fit_line(lx, ly).first;
  }
  return out;
}

ScalingCheck check_scaling_identity(const ScalarField& u, const PhaseField* v, const MaterialParams& params,
                                    const Point& x0, double eps, double radius, std::optional<double> rhs_radius) {
  const Grid& g = u.grid();
  const RescaledPair pair = v ? blowup_rescale(u, *v, x0, eps, radius) : blowup_rescale(u, x0, eps, radius);
  const Grid& ge = pair.u.grid();
  const BallMask lmask = ball_mask(ge, {0.0, 0.0}, radius);
  const BallMask rmask = ball_mask(g, pair.x0, rhs_radius.value_or(eps * radius));
  MaterialParams scaled = params;
  scaled.delta = params.delta / eps;

  ScalingCheck out;
  out.eps = eps;
  out.alpha = scaled.delta;
  out.eta_ok = params.eta_delta <= 1e-2 * out.alpha;
  auto add = [&out](const char* name, double lhs, double rhs) {
    out.terms.push_back({name, lhs, rhs, relative_difference(lhs, rhs)});
    out.max_rel_diff = std::max(out.max_rel_diff, out.terms.back().rel_diff);
  };
  const PhaseField* ve = pair.v ? &*pair.v : nullptr;
  // u - u(x0) on the source side, so that eps = 1 compares identical numbers
  const double u0 = u[tip_node(g, pair.x0)];
  std::vector<double> shifted(u.values());
  for (double& x : shifted) x -= u0;
  const double el = elastic_energy(pair.u, ve, scaled, lmask);
  const double er = elastic_energy(ScalarField(u.grid_ptr(), std::move(shifted)), v, params, rmask) / eps;
  add("elastic", el, er);
  if (v) {
    const double sl = surface_energy(*ve, scaled, lmask);
    const double sr = surface_energy(*v, params, rmask) / eps;
    add("surface", sl, sr);
    add("phase_field", el + sl, er + sr);
  }
  if (g.slit()) {
    const double kl = pair.slit ? pair.slit->length_in_disk({0.0, 0.0}, radius) : 0.0;
    const double kr = g.slit()->length_in_disk(pair.x0, rhs_radius.value_or(eps * radius)) / eps;
    add("slit_length", kl, kr);
  }
  return out;
}

LoadScalingCheck check_load_scaling(const ScalarField& u, const ScalarField& f, const Point& x0, double eps,
                                    double radius) {
  require_same_grid(u.grid(), f.grid(), "check_load_scaling: u and f on different grids");
  const Grid& g = u.grid();
  const RescaledPair pair = blowup_rescale(u, x0, eps, radius);
  const ScalarField fe = dilate(f, x0, eps, radius);
  const double u0 = u[tip_node(g, x0)];
  std::vector<double> shifted(u.values());
  for (double& x : shifted) x -= u0;

  LoadScalingCheck out;
  out.eps = eps;
  out.lhs = body_load_on_mask(pair.u, fe.values(), ball_mask(pair.u.grid(), {0.0, 0.0}, radius));
  const std::vector<double> shifted_copy = shifted;
  out.rhs = std::pow(eps, -2.5) *
            body_load_on_mask(ScalarField(u.grid_ptr(), std::move(shifted)), f.values(), ball_mask(g, pair.x0, eps * radius));
  // f u may integrate to nearly zero (odd fields), so compare against int |f (u - u(x0))|
  std::vector<double> abs_f(f.values()), abs_u(shifted_copy);
  for (double& x : abs_f) x = std::abs(x);
  for (double& x : abs_u) x = std::abs(x);
  const double scale = std::pow(eps, -2.5) * body_load_on_mask(ScalarField(u.grid_ptr(), std::move(abs_u)), abs_f,
                                                                ball_mask(g, pair.x0, eps * radius));
  const double big = std::max({std::abs(out.lhs), std::abs(out.rhs), scale});
  out.rel_diff = big > 0.0 ? std::abs(out.lhs - out.rhs) / big : 0.0;
  out.coefficient = std::pow(eps, 1.5);
  out.rescaled_term = out.coefficient * out.lhs;
  return out;
}

BallBound check_ball_bound(const ScalarField& u_hat, double G_c, const std::vector<double>& radii, const PhaseField* v,
                           double mu, double eta) {
  if (radii.empty()) throw Error(Errc::InvalidArgument, "no radii for the ball bound");
  MaterialParams m;
  m.G_c = G_c;
  m.mu_eq = mu;
  m.mu_neq = 0.0;
  m.eta_delta = eta;
  BallBound out;
  std::vector<double> rs, es;
  for (double r : radii) {
    BallBoundRow row;
    row.r = r;
    row.energy = elastic_energy(u_hat, v, m, ball_mask(u_hat.grid(), {0.0, 0.0}, r));
    row.bound = 2.0 * kPi * G_c * r;
    row.ok = row.energy <= row.bound;
    out.all_ok = out.all_ok && row.ok;
    rs.push_back(r);
    es.push_back(row.energy);
    out.rows.push_back(row);
  }
  if (rs.size() >= 2) {
    std::tie(out.slope, out.intercept) = fit_line(rs, es);
  } else {
    out.slope = es[0] / rs[0];
  }
  return out;
}

namespace {

struct BallProblem {
  const MaterialParams& params;
  const SolverSettings& settings;
  Point tip;
  double radius;

  std::vector<std::uint8_t> outside(const Grid& g) const {
    std::vector<std::uint8_t> pin(g.node_count(), 0);
    for (std::size_t p = 0; p < pin.size(); ++p) pin[p] = distance(g.node_position(p), tip) >= radius * (1.0 - 1e-12);
    return pin;
  }

  /// Solve with u_bc kept outside the ball and return the ball energy.
  double energy(const ScalarField& u_bc, const PhaseField& v) const {
    const GridPtr& g = u_bc.grid_ptr();
    LoadSpec loads;
    loads.pinned = outside(*g);
    loads.dirichlet = u_bc.values();
    const ScalarField w = solve_displacement(g, &v, params, loads, settings, &u_bc);
    const BallMask ball = ball_mask(*g, tip, radius);
    const double slit = g->slit() ? g->slit()->length_in_disk(tip, radius) : 0.0;
    return elastic_energy(w, &v, params, ball) + surface_energy(v, params, ball) + params.G_c * slit;
  }
};

/// Direction (di, dj) for an axis-aligned angle, or nothing.
std::optional<std::pair<int, int>> axis_direction(double angle) {
  const double q = angle / (0.5 * kPi);
  const double k = std::round(q);
  if (std::abs(q - k) > 1e-12) return std::nullopt;
  switch (((static_cast<long>(k) % 4) + 4) % 4) {
    case 0: return std::pair{1, 0};
    case 1: return std::pair{0, 1};
    case 2: return std::pair{-1, 0};
    default: return std::pair{0, -1};
  }
}

}  // namespace

CompetitorResult competitor_test(const ScalarField& u_hat, const PhaseField* v, const MaterialParams& params,
                                 const CrackFrame& frame, const CompetitorFamily& family, double radius,
                                 const SolverSettings& settings, double margin_tol) {
  const GridPtr& gp = u_hat.grid_ptr();
  const Grid& g = *gp;
  if (v) require_same_grid(g, v->grid(), "competitor_test: u and v on different grids");
  if (family.angles.empty() || family.lengths.empty()) throw Error(Errc::FamilyEmpty, "competitor family is empty");
  if (!(radius > 0.0)) throw Error(Errc::InvalidArgument, "competitor radius must be positive");
  tip_node(g, frame.tip);
  const double h = std::max(g.hx(), g.hy());
  for (double a : family.angles) {
    if (!(a > -kPi && a < kPi)) throw Error(Errc::InvalidArgument, "competitor angles must lie in (-pi, pi)");
  }
  for (double l : family.lengths) {
    if (!(l > h) || l > 0.5 * radius * (1.0 + 1e-12)) {
      throw Error(Errc::InvalidArgument, "competitor lengths must exceed h and stay within r/2");
    }
  }
  if (family.band_cells < 1) throw Error(Errc::InvalidArgument, "band width must be at least one cell");

  const BallProblem ball{params, settings, frame.tip, radius};
  const PhaseField v_inc = v ? *v : PhaseField::ones(gp);
  const double incumbent = ball.energy(u_hat, v_inc);
  const bool slit_tip = !v && g.slit() && g.slit()->tip && distance(*g.slit()->tip, frame.tip) < 1e-9 * h;
  const double half_width = 0.5 * std::max(family.band_cells * h, 0.5 * params.delta);

  CompetitorResult out;
  out.margin = std::numeric_limits<double>::infinity();
  for (double rel : family.angles) {
    const double angle = frame.angle + rel;
    const auto axis = slit_tip ? axis_direction(angle) : std::nullopt;
    for (double length : family.lengths) {
      CompetitorRow row;
      row.angle = rel;
      row.incumbent_energy = incumbent;
      if (axis) {
        const double step = axis->first != 0 ? g.hx() : g.hy();
        const int n = std::max(1, static_cast<int>(std::lround(length / step)));
        row.length = n * step;
        row.slit_extension = true;
        SlitSpec ext = *g.slit();
        const Point end{frame.tip.x + axis->first * n * g.hx(), frame.tip.y + axis->second * n * g.hy()};
        ext.segments.push_back({frame.tip, end});
        ext.tip = end;
        const GridPtr ng = Grid::build(g.rect(), g.nx(), g.ny(), ext);
        std::vector<double> vals(ng->node_count());
        for (std::size_t p = 0; p < vals.size(); ++p) {
          vals[p] = u_hat[*g.locate(ng->node_position(p), ng->interior_direction(p))];
        }
        row.competitor_energy = ball.energy(ScalarField(ng, std::move(vals)), PhaseField::ones(ng));
      } else {
        row.length = length;
        const auto [c, s] = cos_sin(angle);
        const Point end{frame.tip.x + length * c, frame.tip.y + length * s};
        std::vector<double> upper(g.node_count(), 1.0);
        for (std::size_t p = 0; p < upper.size(); ++p) {
          if (distance_to_segment(g.node_position(p), frame.tip, end) <= half_width * (1.0 + 1e-12)) upper[p] = 0.0;
        }
        const PhaseField profile =
            solve_phase(ScalarField::zeros(gp), params, PhaseField(gp, std::move(upper)), Split::Full, settings);
        std::vector<double> vc(g.node_count());
        for (std::size_t p = 0; p < vc.size(); ++p) vc[p] = std::min(v_inc[p], profile[p]);
        row.competitor_energy = ball.energy(u_hat, PhaseField(gp, std::move(vc)));
      }
      row.margin = row.competitor_energy - row.incumbent_energy;
      out.margin = std::min(out.margin, row.margin);
      out.rows.push_back(row);
    }
  }
  out.verdict = out.margin < -margin_tol ? FamilyVerdict::Unstable : FamilyVerdict::StableWithinFamily;
  return out;
}

StabilityReport analyze_tip(const ScalarField& u, const PhaseField* v, const MaterialParams& params,
                            const CrackFrame& frame, const StabilityOptions& opt, const SolverSettings& settings) {
  const Grid& g = u.grid();
  const double h = std::max(g.hx(), g.hy());
  const double dist = boundary_distance(g, frame.tip);
  StabilityReport rep;
  rep.frame = frame;

  const double r_in = opt.r_in > 0.0 ? opt.r_in : 3.0 * h;
  const double r_out = opt.r_out > 0.0 ? opt.r_out : 0.5 * dist;
  const SifFit fit = extract_sif(u, frame, r_in, r_out, v);
  rep.K_fit = fit.K;
  rep.fit_residual = fit.residual;
  rep.err = energy_release_rate(fit.K);
  rep.verdict = griffith_verdict(fit.K, params.G_c, opt.tol_band);

  std::optional<RescaledPair> finest;
  if (!opt.eps_list.empty()) {
    try {
      auto diag = blowup_diagnose(u, v, frame.tip, opt.eps_list, opt.blowup_radius);
      rep.blowup_eps = diag.eps;
      rep.blowup_cauchy = diag.cauchy;
      rep.blowup_rate = diag.rate;
      finest = std::move(diag.finest);
    } catch (const Error& e) {
      rep.notes.push_back(std::string("blow-up skipped: ") + e.what());
    }
  }
  if (finest) {
    std::vector<double> radii;
    for (double f : opt.ball_radii.empty() ? std::vector<double>{0.25, 0.5, 0.75, 1.0} : opt.ball_radii) {
      radii.push_back(f * opt.blowup_radius);
    }
    const auto bb = check_ball_bound(finest->u, params.G_c, radii, finest->v ? &*finest->v : nullptr, params.mu(),
                                     finest->v ? params.eta_delta : 0.0);
    rep.ball_rows = bb.rows;
    rep.ball_slope = bb.slope;
    rep.ball_bound_ok = bb.all_ok;
  }
  if (opt.family) {
    try {
      CompetitorResult cr;
      if (finest) {
        MaterialParams scaled = params;
        scaled.delta = params.delta / finest->eps;
        const double r = opt.competitor_radius > 0.0 ? opt.competitor_radius : opt.blowup_radius;
        cr = competitor_test(finest->u, finest->v ? &*finest->v : nullptr, scaled, {{0.0, 0.0}, frame.angle},
                             *opt.family, r, settings);
      } else {
        const double r = opt.competitor_radius > 0.0 ? opt.competitor_radius : 0.5 * dist;
        cr = competitor_test(u, v, params, frame, *opt.family, r, settings);
      }
      rep.competitor_margin = cr.margin;
      rep.competitor_verdict = cr.verdict;
      rep.competitor_rows = std::move(cr.rows);
    } catch (const Error& e) {
      rep.notes.push_back(std::string("competitor test skipped: ") + e.what());
    }
  }
  return rep;
}

}  // namespace vfrac
