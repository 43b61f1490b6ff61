#include "vfrac/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "vfrac/error.hpp"
#include "vfrac/evolution.hpp"
#include "vfrac/stability.hpp"

#ifndef VFRAC_VERSION
#define VFRAC_VERSION "dev"
#endif

namespace vfrac {

namespace fs = std::filesystem;

namespace {

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

fs::path resolve(const RunConfig& cfg, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || cfg.base_dir.empty() ? path : cfg.base_dir / path;
}

Snapshot obtain_state(const RunConfig& cfg, const GridPtr& grid, Json& result) {
  if (!cfg.input.u.empty()) {
    std::optional<fs::path> vp;
    if (!cfg.input.v.empty()) vp = resolve(cfg, cfg.input.v);
    result["state"] = "imported";
    return import_snapshot(grid, resolve(cfg, cfg.input.u), vp);
  }
  const LoadSpec loads = loads_at(cfg, grid, cfg.loads.t_end);
  if (cfg.elastic_only) {
    result["state"] = "sharp elastic solve";
    return {solve_displacement(grid, nullptr, cfg.material, loads, cfg.solver), std::nullopt};
  }
  auto res = alternate_minimize(grid, cfg.material, loads, PhaseField::ones(grid), cfg.solver, cfg.split);
  result["state"] = "staggered solve";
  result["state_converged"] = res.converged;
  return {std::move(res.u), std::move(res.v)};
}

std::vector<CrackFrame> configured_tips(const RunConfig& cfg, const Grid& grid, const PhaseField* v) {
  std::vector<CrackFrame> frames;
  if (!cfg.stability.tips.empty()) {
    std::optional<CrackFrame> slit_frame;
    if (grid.slit()) slit_frame = slit_tip_frame(*grid.slit());
    for (const auto& p : cfg.stability.tips) {
      frames.push_back(slit_frame && slit_frame->tip == p ? *slit_frame : CrackFrame{p, 0.0});
    }
    return frames;
  }
  for (const auto& t : detect_tips(grid, v, cfg.stability.tip_threshold)) frames.push_back(t.frame);
  return frames;
}

Point blowup_center(const RunConfig& cfg, const Grid& grid, const PhaseField* v) {
  if (cfg.stability.center) return *cfg.stability.center;
  const auto tips = configured_tips(cfg, grid, v);
  if (tips.empty()) throw Error(Errc::ConfigError, "stability.center: required when no crack tip is found");
  return tips.front().tip;
}

void write_fields(const fs::path& dir, const std::string& stem, const Snapshot& s, const OutputFormats& formats) {
  if (formats.csv) {
    write_field_csv(dir / (stem + "u.csv"), s.u.grid(), s.u.values());
    if (s.v) write_field_csv(dir / (stem + "v.csv"), s.v->grid(), s.v->values());
  }
  if (formats.vtk) {
    std::vector<std::pair<std::string, std::vector<double>>> arrays = {{"u", s.u.values()}};
    if (s.v) arrays.emplace_back("v", s.v->values());
    write_field_vtk(dir / (stem + "fields.vtk"), s.u.grid(), arrays);
  }
}

Json cmd_static(const RunConfig& cfg, const GridPtr& grid, const fs::path& dir, std::ostream& out,
                const OutputFormats& formats) {
  Json r;
  const LoadSpec loads = loads_at(cfg, grid, cfg.loads.t_end);
  Snapshot s{ScalarField::zeros(grid), std::nullopt};
  EnergyLedger ledger;
  int iterations = 1;
  bool converged = true;
  std::string history = "half_step,merged_objective\n";
  if (cfg.elastic_only) {
    s.u = solve_displacement(grid, nullptr, cfg.material, loads, cfg.solver);
    ledger = total_phase_energy(s.u, nullptr, cfg.material, &loads, BallMask::whole(*grid));
  } else {
    auto res = alternate_minimize(grid, cfg.material, loads, PhaseField::ones(grid), cfg.solver, cfg.split);
    for (std::size_t k = 0; k < res.objective_history.size(); ++k) {
      history += std::to_string(k) + "," + num(res.objective_history[k]) + "\n";
    }
    s = {std::move(res.u), std::move(res.v)};
    ledger = res.ledger;
    iterations = res.iterations;
    converged = res.converged;
  }
  write_fields(dir, "", s, formats);
  write_text_atomic(dir / "energies.csv",
                    energies_csv_header() + energies_csv_row(0, cfg.loads.t_end, ledger, iterations, converged));
  if (!cfg.elastic_only) write_text_atomic(dir / "history.csv", history);
  r["ledger"] = to_json(ledger);
  r["iterations"] = iterations;
  r["converged"] = converged;
  out << "static: iterations " << iterations << (converged ? ", converged" : ", NOT converged") << ", total "
      << num(ledger.total) << "\n";
  if (!converged) throw Error(Errc::NoConvergence, "staggered solve did not converge");
  return r;
}

Json cmd_quasistatic(const RunConfig& cfg, const GridPtr& grid, const fs::path& dir, std::ostream& out,
                     const OutputFormats& formats, const Json& manifest) {
  const auto traj = quasistatic_run(grid, cfg.material, load_program(cfg, grid), evolution_settings(cfg));
  write_trajectory(dir, traj, manifest, formats);
  Json r;
  r["steps"] = traj.steps.size();
  r["energy_events"] = traj.events.size();
  r["max_relative_increase"] = traj.max_relative_increase;
  std::size_t failed = 0, unconverged = 0;
  for (const auto& s : traj.steps) {
    failed += s.error.has_value();
    unconverged += !s.converged;
  }
  r["failed_steps"] = failed;
  r["unconverged_steps"] = unconverged;
  out << "quasistatic: " << traj.steps.size() << " steps, " << traj.events.size() << " energy events, "
      << failed << " failed\n";
  return r;
}

Json cmd_blowup(const RunConfig& cfg, const GridPtr& grid, const fs::path& dir, std::ostream& out,
                const OutputFormats& formats) {
  Json r;
  const Snapshot s = obtain_state(cfg, grid, r);
  const PhaseField* v = s.v ? &*s.v : nullptr;
  if (cfg.stability.eps_list.empty()) throw Error(Errc::ConfigError, "stability.eps_list: required for blowup");
  const Point x0 = blowup_center(cfg, *grid, v);
  const auto diag = blowup_diagnose(s.u, v, x0, cfg.stability.eps_list, cfg.stability.radius);
  for (std::size_t k = 0; k < cfg.stability.eps_list.size(); ++k) {
    const double eps = cfg.stability.eps_list[k];
    const auto pair = v ? blowup_rescale(s.u, *v, x0, eps, cfg.stability.radius)
                        : blowup_rescale(s.u, x0, eps, cfg.stability.radius);
    write_fields(dir, "blowup_" + std::to_string(k) + "_", {pair.u, pair.v}, formats);
  }
  std::string csv = "eps_coarse,eps_fine,distance\n";
  for (std::size_t k = 0; k < diag.cauchy.size(); ++k) {
    csv += num(diag.eps[k]) + "," + num(diag.eps[k + 1]) + "," + num(diag.cauchy[k]) + "\n";
  }
  write_text_atomic(dir / "cauchy.csv", csv);
  r["center"] = {x0.x, x0.y};
  r["cauchy"] = diag.cauchy;
  r["rate"] = diag.rate ? Json(*diag.rate) : Json(nullptr);
  out << "blowup: " << diag.cauchy.size() << " distances";
  if (diag.rate) out << ", rate " << num(*diag.rate);
  out << "\n";
  return r;
}

Json cmd_sif(const RunConfig& cfg, const GridPtr& grid, const fs::path& dir, std::ostream& out) {
  Json r;
  const Snapshot s = obtain_state(cfg, grid, r);
  const PhaseField* v = s.v ? &*s.v : nullptr;
  const auto tips = configured_tips(cfg, *grid, v);
  if (tips.empty()) throw Error(Errc::NoTipFound, "no crack tip to fit");
  const double h = std::max(grid->hx(), grid->hy());
  Json arr = Json::array();
  for (const auto& f : tips) {
    const Rect rc = grid->rect();
    const double dist = std::min({f.tip.x - rc.lo.x, rc.hi.x - f.tip.x, f.tip.y - rc.lo.y, rc.hi.y - f.tip.y});
    const double r_in = cfg.stability.r_in > 0 ? cfg.stability.r_in : 3.0 * h;
    const double r_out = cfg.stability.r_out > 0 ? cfg.stability.r_out : 0.5 * dist;
    const auto fit = extract_sif(s.u, f, r_in, r_out, v);
    const double err = energy_release_rate(fit.K);
    const Verdict verdict = griffith_verdict(fit.K, cfg.material.G_c, cfg.stability.tol_band);
    arr.push_back({{"tip", {f.tip.x, f.tip.y}},
                   {"angle", f.angle},
                   {"K_fit", fit.K},
                   {"fit_residual", fit.residual},
                   {"nodes", fit.nodes},
                   {"err", err},
                   {"G_c", cfg.material.G_c},
                   {"verdict", to_string(verdict)}});
    out << "sif: tip (" << num(f.tip.x) << ", " << num(f.tip.y) << ") K_fit " << num(fit.K) << " err " << num(err)
        << " verdict " << to_string(verdict) << "\n";
  }
  write_text_atomic(dir / "sif.json", arr.dump(2) + "\n");
  r["tips"] = arr;
  return r;
}

Json cmd_stability(const RunConfig& cfg, const GridPtr& grid, const fs::path& dir, std::ostream& out) {
  Json r;
  const Snapshot s = obtain_state(cfg, grid, r);
  std::optional<std::vector<CrackFrame>> tips;
  if (!cfg.stability.tips.empty()) tips = configured_tips(cfg, *grid, s.v ? &*s.v : nullptr);
  const auto audit = stability_audit(s, cfg.material, stability_options(cfg), tips, cfg.solver,
                                     cfg.stability.tip_threshold);
  write_text_atomic(dir / "audit.json", to_json(audit).dump(2) + "\n");
  for (std::size_t k = 0; k < audit.reports.size(); ++k) {
    const auto& rep = audit.reports[k];
    if (!rep.competitor_rows.empty()) {
      write_text_atomic(dir / ("competitors_" + std::to_string(k) + ".csv"), competitor_csv(rep.competitor_rows));
    }
    out << "stability: tip (" << num(rep.frame.tip.x) << ", " << num(rep.frame.tip.y) << ") err " << num(rep.err)
        << " verdict " << to_string(rep.verdict);
    if (rep.competitor_verdict) out << " family " << to_string(*rep.competitor_verdict);
    out << "\n";
  }
  if (audit.no_tip_found) out << "stability: no crack tip found\n";
  r["audit"] = to_json(audit);
  return r;
}

Json cmd_identity(const RunConfig& cfg, const GridPtr& grid, const fs::path& dir, std::ostream& out) {
  Json r;
  const Snapshot s = obtain_state(cfg, grid, r);
  const PhaseField* v = s.v ? &*s.v : nullptr;
  if (cfg.stability.eps_list.empty()) {
    throw Error(Errc::ConfigError, "stability.eps_list: required for identity-check");
  }
  const Point x0 = blowup_center(cfg, *grid, v);
  // load identity uses the configured body load, or f = 1 without one
  const ScalarField f = cfg.loads.body ? sample(grid, [&](const Point& p) {
    return (*cfg.loads.body)(p.x, p.y, cfg.loads.t_end);
  })
                                       : ScalarField::constant(grid, 1.0);
  std::string csv = "eps,term,lhs,rhs,rel_diff\n";
  double worst = 0.0;
  for (double eps : cfg.stability.eps_list) {
    const auto sc = check_scaling_identity(s.u, v, cfg.material, x0, eps, cfg.stability.radius);
    for (const auto& t : sc.terms) {
      csv += num(eps) + "," + t.name + "," + num(t.lhs) + "," + num(t.rhs) + "," + num(t.rel_diff) + "\n";
      worst = std::max(worst, t.rel_diff);
    }
    const auto ls = check_load_scaling(s.u, f, x0, eps, cfg.stability.radius);
    csv += num(eps) + ",load," + num(ls.lhs) + "," + num(ls.rhs) + "," + num(ls.rel_diff) + "\n";
    worst = std::max(worst, ls.rel_diff);
  }
  write_text_atomic(dir / "identity.csv", csv);
  r["center"] = {x0.x, x0.y};
  r["max_rel_diff"] = worst;
  out << "identity-check: max rel_diff " << num(worst) << "\n";
  return r;
}

Json cmd_demo(const RunConfig& cfg, const fs::path& dir, std::ostream& out) {
  const auto table = demo_load_collapse(cfg);
  std::string csv = "amplitude,energy,elastic,surface,load\n";
  for (const auto& row : table.rows) {
    csv += num(row.amplitude) + "," + num(row.energy) + "," + num(row.elastic) + "," + num(row.surface) + "," +
           num(row.load) + "\n";
  }
  write_text_atomic(dir / "load_collapse.csv", csv);
  out << "demo-load-collapse: slope " << num(table.slope) << " expected " << num(table.expected_slope)
      << (table.strictly_decreasing ? ", strictly decreasing" : ", NOT decreasing") << "\n";
  return {{"slope", table.slope},
          {"expected_slope", table.expected_slope},
          {"strictly_decreasing", table.strictly_decreasing}};
}

Json run_impl(const std::string& command, const RunConfig& cfg, std::ostream& out, const std::string& parent);

Json cmd_sweep(const RunConfig& cfg, const fs::path& dir, std::ostream& out) {
  if (cfg.sweep.command == "sweep" ||
      std::find(cli_commands().begin(), cli_commands().end(), cfg.sweep.command) == cli_commands().end()) {
    throw Error(Errc::ConfigError, "sweep.command: '" + cfg.sweep.command + "' cannot be swept");
  }
  if (cfg.sweep.parameters.empty()) throw Error(Errc::ConfigError, "sweep: no parameters to sweep");
  // cartesian product, last parameter fastest
  std::vector<Overrides> runs(1);
  for (const auto& [key, values] : cfg.sweep.parameters) {
    std::vector<Overrides> next;
    for (const auto& base : runs) {
      for (const auto& val : values) {
        auto o = base;
        o.emplace_back(key, val);
        next.push_back(std::move(o));
      }
    }
    runs = std::move(next);
  }
  int workers = cfg.sweep.workers;
  if (const char* env = std::getenv("VFRAC_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) workers = w;
  }
  const std::string base_ini = cfg.to_ini();
  std::vector<Json> results(runs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next++) < runs.size();) {
      char name[32];
      std::snprintf(name, sizeof name, "run_%03zu", k);
      Json rec = {{"directory", name}};
      Json over = Json::object();
      for (const auto& [key, val] : runs[k]) over[key] = val;
      rec["overrides"] = over;
      try {
        Overrides o = runs[k];
        o.emplace_back("output.directory", (dir / name).string());
        RunConfig child = parse_config(base_ini, o);
        child.base_dir = cfg.base_dir;
        std::ostringstream sink;
        run_impl(cfg.sweep.command, child, sink, (dir / "manifest.json").string());
        rec["exit_code"] = kExitOk;
      } catch (const Error& e) {
        rec["exit_code"] = e.code() == Errc::ConfigError ? kExitUsage : kExitNumerical;
        rec["error"] = {{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
      } catch (const std::exception& e) {
        rec["exit_code"] = kExitNumerical;
        rec["error"] = {{"code", "Exception"}, {"message", e.what()}};
      }
      results[k] = std::move(rec);
    }
  };
  std::vector<std::thread> pool;
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(runs.size())));
  for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  std::size_t failed = 0;
  for (const auto& rec : results) failed += rec["exit_code"].get<int>() != kExitOk;
  out << "sweep: " << runs.size() << " runs, " << failed << " failed\n";
  return {{"command", cfg.sweep.command}, {"children", results}, {"failed", failed}};
}

Json run_impl(const std::string& command, const RunConfig& cfg, std::ostream& out, const std::string& parent) {
  if (std::find(cli_commands().begin(), cli_commands().end(), command) == cli_commands().end()) {
    throw Error(Errc::ConfigError, "unknown command '" + command + "'");
  }
  const fs::path dir = cfg.output.directory;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::IoError, "cannot create " + dir.string() + ": " + ec.message());
  const OutputFormats formats{cfg.output.csv, cfg.output.vtk};

  Json manifest = {{"command", command}, {"config", cfg.to_ini()}, {"version", VFRAC_VERSION},
                   {"started", timestamp()}};
  if (!parent.empty()) manifest["parent"] = parent;
  GridPtr grid;
  if (command != "sweep") {
    grid = build_grid(cfg);
    manifest["grid"] = grid_descriptor(*grid);
  }
  Json result;
  try {
    if (command == "static") result = cmd_static(cfg, grid, dir, out, formats);
    else if (command == "quasistatic") result = cmd_quasistatic(cfg, grid, dir, out, formats, manifest);
    else if (command == "blowup") result = cmd_blowup(cfg, grid, dir, out, formats);
    else if (command == "sif") result = cmd_sif(cfg, grid, dir, out);
    else if (command == "stability") result = cmd_stability(cfg, grid, dir, out);
    else if (command == "identity-check") result = cmd_identity(cfg, grid, dir, out);
    else if (command == "demo-load-collapse") result = cmd_demo(cfg, dir, out);
    else result = cmd_sweep(cfg, dir, out);
  } catch (const Error& e) {
    manifest["finished"] = timestamp();
    manifest["error"] = {{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
    write_text_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
    throw;
  }
  manifest["finished"] = timestamp();
  manifest["result"] = result;
  if (command == "quasistatic") {
    // write_trajectory already placed a manifest; extend it
    Json m = Json::parse(read_text(dir / "manifest.json"));
    m["finished"] = manifest["finished"];
    m["result"] = result;
    manifest = std::move(m);
  }
  write_text_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

}  // namespace

Json run_command(const std::string& command, const RunConfig& cfg, std::ostream& out) {
  return run_impl(command, cfg, out, "");
}

LoadCollapseTable demo_load_collapse(const RunConfig& cfg) {
  if (cfg.demo.amplitudes.size() < 2) throw Error(Errc::ConfigError, "demo.amplitudes: need at least two values");
  const GridPtr grid = build_grid(cfg);
  const Grid& g = *grid;
  const LoadSpec loads = loads_at(cfg, grid, cfg.loads.t_end);
  const double lo = cfg.demo.band_lo, hi = cfg.demo.band_hi;
  const double tol = 1e-9 * g.hy();

  std::vector<double> v(g.node_count(), 1.0), phi(g.node_count(), 0.0);
  for (std::size_t p = 0; p < v.size(); ++p) {
    const double y = g.node_position(p).y;
    if (y >= lo - tol && y <= hi + tol) v[p] = 0.0;
    phi[p] = y >= hi - tol ? 1.0 : (y <= lo + tol ? 0.0 : (y - lo) / (hi - lo));
  }

  // nodes joined by cells that keep stiffness without the residual term
  std::vector<std::size_t> parent(g.node_count());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const auto& nodes = g.cell_nodes(c);
    double s = 0.0;
    for (auto p : nodes) s += v[p] * v[p];
    if (s <= 0.0) continue;
    for (int k = 1; k < 4; ++k) parent[find(nodes[k])] = find(nodes[0]);
  }
  const auto fixed = constrained_nodes(g, loads);
  const auto F = load_vector(g, loads);
  std::vector<std::uint8_t> anchored(g.node_count(), 0);
  for (std::size_t p = 0; p < fixed.size(); ++p) {
    if (fixed[p]) anchored[find(p)] = 1;
  }
  bool any_load = false;
  for (std::size_t p = 0; p < F.size(); ++p) {
    if (F[p] == 0.0) continue;
    any_load = true;
    if (anchored[find(p)]) {
      throw Error(Errc::NotDisconnecting, "loaded node at (" + num(g.node_position(p).x) + ", " +
                                              num(g.node_position(p).y) + ") is connected to the Dirichlet part");
    }
  }
  if (!any_load) throw Error(Errc::ConfigError, "loads: the demo needs a nonzero load on the cut-off piece");
  for (std::size_t p = 0; p < fixed.size(); ++p) {
    if (fixed[p] && phi[p] != 0.0) {
      throw Error(Errc::NotDisconnecting, "Dirichlet node lies on the cut-off side of the band");
    }
  }

  LoadSpec zero_dirichlet = loads;
  zero_dirichlet.dirichlet.assign(g.node_count(), 0.0);
  const PhaseField vf(grid, v);
  const BallMask whole = BallMask::whole(g);
  LoadCollapseTable table;
  const auto lp = load_potential(ScalarField(grid, phi), zero_dirichlet);
  table.expected_slope = -(lp.body + lp.boundary);
  std::vector<double> cs, es;
  for (double c : cfg.demo.amplitudes) {
    std::vector<double> u(phi);
    for (double& x : u) x *= c;
    const auto led = total_phase_energy(ScalarField(grid, u), &vf, cfg.material, &zero_dirichlet, whole);
    table.rows.push_back({c, led.merged_objective, led.elastic, led.surface,
                          led.body_load_potential + led.boundary_load_potential});
    cs.push_back(c);
    es.push_back(led.merged_objective);
  }
  for (std::size_t k = 1; k < table.rows.size(); ++k) {
    if (!(table.rows[k].amplitude > table.rows[k - 1].amplitude && table.rows[k].energy < table.rows[k - 1].energy)) {
      table.strictly_decreasing = false;
    }
  }
  const double n = static_cast<double>(cs.size());
  const double mc = std::accumulate(cs.begin(), cs.end(), 0.0) / n;
  const double me = std::accumulate(es.begin(), es.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < cs.size(); ++k) {
    sxy += (cs[k] - mc) * (es[k] - me);
    sxx += (cs[k] - mc) * (cs[k] - mc);
  }
  table.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  return table;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"vfrac: antiplane variational fracture toolkit"};
  std::string command, config_path, out_dir;
  std::vector<std::string> sets;
  app.add_option("command", command, "static | quasistatic | blowup | sif | stability | identity-check | "
                                     "demo-load-collapse | sweep")
      ->required();
  app.add_option("config", config_path, "INI configuration file")->required();
  app.add_option("--set", sets, "override, section.key=value (repeatable)");
  app.add_option("--out", out_dir, "output directory (overrides output.directory)");

  auto usage = [&] { err << app.help(); };
  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    usage();
    return kExitUsage;
  }
  if (std::find(cli_commands().begin(), cli_commands().end(), command) == cli_commands().end()) {
    err << "error: unknown command '" << command << "'\n";
    usage();
    return kExitUsage;
  }

  RunConfig cfg;
  try {
    auto overrides = parse_overrides(sets);
    if (!out_dir.empty()) overrides.emplace_back("output.directory", out_dir);
    cfg = load_config(config_path, overrides);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  try {
    run_command(command, cfg, out);
    return kExitOk;
  } catch (const Error& e) {
    err << Json{{"error", std::string(to_string(e.code()))}, {"message", e.what()}}.dump() << "\n";
    return e.code() == Errc::ConfigError ? kExitUsage : kExitNumerical;
  } catch (const std::exception& e) {
    err << Json{{"error", "Exception"}, {"message", e.what()}}.dump() << "\n";
    return kExitNumerical;
  }
}

}  // namespace vfrac
