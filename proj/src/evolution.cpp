#include "vfrac/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vfrac/error.hpp"
#include "vfrac/io.hpp"

namespace vfrac {

void LoadProgram::validate(const Grid& grid) const {
  if (times.empty()) throw Error(Errc::ProgramEmpty, "load program has no times");
  if (loads.size() != times.size()) {
    throw Error(Errc::InvalidArgument, "load program needs one load set per time");
  }
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!std::isfinite(times[k])) throw Error(Errc::InvalidArgument, "load program time is not finite");
    if (k > 0 && !(times[k] > times[k - 1])) {
      throw Error(Errc::InvalidArgument, "load program times must be strictly increasing");
    }
    validate_loads(grid, loads[k]);
    if (loads[k].sides != loads[0].sides || constrained_nodes(grid, loads[k]) != constrained_nodes(grid, loads[0])) {
      throw Error(Errc::BoundaryPartitionInvalid, "boundary partition changes during the load program");
    }
  }
}

LoadProgram LoadProgram::sampled(const std::vector<double>& times, const std::function<LoadSpec(double)>& at) {
  LoadProgram p;
  p.times = times;
  for (double t : times) p.loads.push_back(at(t));
  return p;
}

namespace {

/// Zhang-Suen thinning of a binary image stored row-major, w x h.
void thin(std::vector<std::uint8_t>& img, int w, int h) {
  auto at = [&](int i, int j) -> int {
    if (i < 0 || j < 0 || i >= w || j >= h) return 0;
    return img[static_cast<std::size_t>(j) * w + i];
  };
  std::vector<std::size_t> kill;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int pass = 0; pass < 2; ++pass) {
      kill.clear();
      for (int j = 0; j < h; ++j) {
        for (int i = 0; i < w; ++i) {
          if (!at(i, j)) continue;
          const int p[8] = {at(i, j + 1), at(i + 1, j + 1), at(i + 1, j),     at(i + 1, j - 1),
                            at(i, j - 1), at(i - 1, j - 1), at(i - 1, j), at(i - 1, j + 1)};
          int b = 0, a = 0;
          for (int k = 0; k < 8; ++k) {
            b += p[k];
            if (!p[k] && p[(k + 1) % 8]) ++a;
          }
          if (b < 2 || b > 6 || a != 1) continue;
          const bool ok = pass == 0 ? (p[0] * p[2] * p[4] == 0 && p[2] * p[4] * p[6] == 0)
                                    : (p[0] * p[2] * p[6] == 0 && p[0] * p[4] * p[6] == 0);
          if (ok) kill.push_back(static_cast<std::size_t>(j) * w + i);
        }
      }
      for (auto q : kill) img[q] = 0;
      changed = changed || !kill.empty();
    }
  }
}

double distance_to_slit(const SlitSpec& slit, const Point& x) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : slit.segments) {
    const Vec2 d = s.b - s.a;
    const double len2 = d.norm2();
    double t = len2 > 0.0 ? (x - s.a).dot(d) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    best = std::min(best, distance(x, s.a + t * d));
  }
  return best;
}

/// Whether the unthinned region reaches the outer boundary within `reach`
/// lattice steps of (i, j); thinning pulls skeleton ends off the boundary.
bool touches_boundary(const std::vector<std::uint8_t>& mask, int w, int h, int i, int j, int reach) {
  for (int dj = -reach; dj <= reach; ++dj) {
    for (int di = -reach; di <= reach; ++di) {
      const int a = i + di, b = j + dj;
      if (a < 0 || b < 0 || a >= w || b >= h) continue;
      if ((a == 0 || b == 0 || a == w - 1 || b == h - 1) && mask[static_cast<std::size_t>(b) * w + a]) return true;
    }
  }
  return false;
}

double min_over_copies(const Grid& g, const PhaseField& v, int i, int j) {
  double m = 1.0;
  for (auto p : g.copies(i, j)) m = std::min(m, v[p]);
  return m;
}

}  // namespace

std::vector<DetectedTip> detect_tips(const Grid& grid, const PhaseField* v, double threshold) {
  std::vector<DetectedTip> tips;
  const auto& slit = grid.slit();
  std::optional<CrackFrame> slit_frame;
  if (slit && slit->tip) slit_frame = slit_tip_frame(*slit);

  if (!v) {
    if (slit_frame) tips.push_back({*slit_frame, true});
    return tips;
  }
  require_same_grid(grid, v->grid(), "detect_tips: v on a different grid");

  const int w = grid.nx() + 1, h = grid.ny() + 1;
  std::vector<std::uint8_t> img(static_cast<std::size_t>(w) * h, 0);
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) img[static_cast<std::size_t>(j) * w + i] = min_over_copies(grid, *v, i, j) < threshold;
  }
  const auto mask = img;
  thin(img, w, h);
  auto on = [&](int i, int j) {
    return i >= 0 && j >= 0 && i < w && j < h && img[static_cast<std::size_t>(j) * w + i] != 0;
  };
  auto position = [&](int i, int j) {
    return Point{grid.origin().x + i * grid.hx(), grid.origin().y + j * grid.hy()};
  };
  const double near_slit = 2.0 * std::max(grid.hx(), grid.hy());

  for (int j = 1; j < h - 1; ++j) {
    for (int i = 1; i < w - 1; ++i) {
      if (!on(i, j)) continue;
      int count = 0;
      for (int dj = -1; dj <= 1; ++dj) {
        for (int di = -1; di <= 1; ++di) count += (di || dj) && on(i + di, j + dj);
      }
      if (count != 1) continue;
      if (slit && distance_to_slit(*slit, position(i, j)) <= near_slit) continue;
      if (touches_boundary(mask, w, h, i, j, 3)) continue;

      // walk back along the skeleton to get the growth direction
      int ci = i, cj = j, pi = -1, pj = -1;
      for (int step = 0; step < 6; ++step) {
        int ni = -1, nj = -1;
        for (int dj = -1; dj <= 1 && ni < 0; ++dj) {
          for (int di = -1; di <= 1; ++di) {
            if ((di || dj) && on(ci + di, cj + dj) && !(ci + di == pi && cj + dj == pj) &&
                !(ci + di == i && cj + dj == j)) {
              ni = ci + di;
              nj = cj + dj;
              break;
            }
          }
        }
        if (ni < 0) break;
        pi = ci;
        pj = cj;
        ci = ni;
        cj = nj;
      }
      const Vec2 d{static_cast<double>(i - ci), static_cast<double>(j - cj)};
      const double len = d.norm();
      if (len == 0.0) continue;
      // thinning shortens the ends; extend to the last node of the region
      int ti = i, tj = j;
      for (int k = 1;; ++k) {
        const int a = i + static_cast<int>(std::lround(k * d.x / len));
        const int b = j + static_cast<int>(std::lround(k * d.y / len));
        if (a < 0 || b < 0 || a >= w || b >= h || !mask[static_cast<std::size_t>(b) * w + a]) break;
        ti = a;
        tj = b;
      }
      const Vec2 dx = position(i, j) - position(ci, cj);
      tips.push_back({{position(ti, tj), std::atan2(dx.y, dx.x)}, false});
    }
  }

  if (slit_frame) {
    const auto ij = grid.lattice_index(slit_frame->tip);
    if (ij && min_over_copies(grid, *v, ij->first, ij->second) >= threshold) tips.push_back({*slit_frame, true});
  }
  return tips;
}

Audit stability_audit(const Snapshot& state, const MaterialParams& params, const StabilityOptions& options,
                      const std::optional<std::vector<CrackFrame>>& tips, const SolverSettings& settings,
                      double tip_threshold) {
  Audit audit;
  const PhaseField* v = state.v ? &*state.v : nullptr;
  if (tips) {
    for (const auto& f : *tips) audit.tips.push_back({f, false});
  } else {
    audit.tips = detect_tips(state.u.grid(), v, tip_threshold);
  }
  if (audit.tips.empty()) {
    audit.no_tip_found = true;
    audit.notes.push_back(std::string(to_string(Errc::NoTipFound)) + ": no crack tip in the state");
    return audit;
  }
  for (const auto& t : audit.tips) {
    try {
      audit.reports.push_back(analyze_tip(state.u, v, params, t.frame, options, settings));
    } catch (const Error& e) {
      audit.notes.push_back("tip (" + std::to_string(t.frame.tip.x) + ", " + std::to_string(t.frame.tip.y) +
                            "): " + e.what());
    }
  }
  return audit;
}

Trajectory quasistatic_run(const GridPtr& grid, const MaterialParams& params, const LoadProgram& program,
                           const EvolutionSettings& settings) {
  params.validate();
  settings.solver.validate();
  program.validate(*grid);
  const BallMask whole = BallMask::whole(*grid);
  const auto fixed = constrained_nodes(*grid, program.loads.front());
  const std::size_t n = grid->node_count();

  PhaseField v_prev = PhaseField::ones(grid);
  if (settings.v_initial && !settings.elastic_only) {
    require_same_grid(*grid, settings.v_initial->grid(), "quasistatic_run: initial v on a different grid");
    v_prev = *settings.v_initial;
  }
  std::optional<ScalarField> u_prev;
  std::vector<double> R_prev, F_prev, g_prev;
  double work = 0.0;

  Trajectory traj;
  for (std::size_t k = 0; k < program.times.size(); ++k) {
    const LoadSpec& loads = program.loads[k];
    StepRecord rec{program.times[k], u_prev ? *u_prev : dirichlet_lift(grid, loads), v_prev, {}, 0.0, 0, false,
                   std::nullopt, std::nullopt};
    try {
      if (settings.elastic_only) {
        rec.u = solve_displacement(grid, &rec.v, params, loads, settings.solver, u_prev ? &*u_prev : nullptr);
        rec.iterations = 1;
        rec.converged = true;
      } else {
        auto res = alternate_minimize(grid, params, loads, v_prev, settings.solver, settings.split,
                                      u_prev ? &*u_prev : nullptr);
        rec.u = std::move(res.u);
        rec.v = std::move(res.v);
        rec.iterations = res.iterations;
        rec.converged = res.converged;
      }
    } catch (const Error& e) {
      rec.error = e.what();
    }

    const auto F = load_vector(*grid, loads);
    const auto R = reaction_forces(rec.u, &rec.v, params, loads);
    std::vector<double> g(n, 0.0);
    if (!loads.dirichlet.empty()) {
      for (std::size_t p = 0; p < n; ++p) g[p] = fixed[p] ? loads.dirichlet[p] : 0.0;
    }
    if (k > 0) {
      double dw = 0.0;
      for (std::size_t p = 0; p < n; ++p) {
        if (fixed[p]) dw += 0.5 * (R_prev[p] + R[p]) * (g[p] - g_prev[p]);
        dw -= 0.5 * ((*u_prev)[p] + rec.u[p]) * (F[p] - F_prev[p]);
      }
      work += dw;
    }
    rec.ledger = total_phase_energy(rec.u, &rec.v, params, &loads, whole);
    rec.ledger.work_cumulative = work;
    rec.ledger.total = rec.ledger.merged_objective - work;
    rec.energy_scale = rec.ledger.elastic + rec.ledger.surface +
                       std::abs(rec.ledger.body_load_potential + rec.ledger.boundary_load_potential) +
                       std::abs(work);

    if (k > 0) {
      const auto& prev = traj.steps.back();
      const double inc = rec.ledger.total - prev.ledger.total;
      const double scale = std::max({rec.energy_scale, prev.energy_scale, 1e-300});
      traj.max_relative_increase = std::max(traj.max_relative_increase, inc / scale);
      if (inc > settings.energy_tol * scale) traj.events.push_back({k, inc, scale});
    }
    if (settings.audit) {
      rec.audit = stability_audit({rec.u, rec.v}, params, settings.stability, std::nullopt, settings.solver,
                                  settings.tip_threshold);
    }

    u_prev = rec.u;
    v_prev = rec.v;
    R_prev = R;
    F_prev = F;
    g_prev = std::move(g);
    traj.steps.push_back(std::move(rec));
  }
  return traj;
}

Snapshot import_snapshot(const GridPtr& grid, const std::filesystem::path& u_path,
                         const std::optional<std::filesystem::path>& v_path) {
  Snapshot s{ScalarField(grid, read_field_csv(u_path, *grid)), std::nullopt};
  if (v_path) {
    try {
      s.v = PhaseField(grid, read_field_csv(*v_path, *grid));
    } catch (const Error& e) {
      if (e.code() != Errc::InvalidField) throw;
      throw Error(Errc::FormatError, std::string("damage file: ") + e.what());
    }
  }
  return s;
}

}  // namespace vfrac
