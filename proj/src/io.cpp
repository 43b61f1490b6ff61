#include "vfrac/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "vfrac/error.hpp"

namespace vfrac {

namespace fs = std::filesystem;

namespace {

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

bool parse_double(std::string_view s, double& out) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool close(double a, double b, double scale) { return std::abs(a - b) <= 1e-9 * scale; }

}  // namespace

std::string field_csv(const Grid& g, const std::vector<double>& values) {
  if (values.size() != g.node_count()) throw Error(Errc::GridMismatch, "field size does not match the grid");
  std::string out = "# grid " + std::to_string(g.nx()) + " " + std::to_string(g.ny()) + " " + num(g.hx()) + " " +
                    num(g.hy()) + " " + num(g.origin().x) + " " + num(g.origin().y) + "\n";
  for (std::size_t p = 0; p < values.size(); ++p) {
    const Point x = g.node_position(p);
    out += num(x.x);
    out += ',';
    out += num(x.y);
    out += ',';
    out += num(values[p]);
    out += '\n';
  }
  return out;
}

void write_field_csv(const fs::path& path, const Grid& grid, const std::vector<double>& values) {
  write_text_atomic(path, field_csv(grid, values));
}

std::vector<double> read_field_csv(const fs::path& path, const Grid& g) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::FormatError, path.string() + ": empty file");
  {
    std::istringstream hs(line);
    std::string hash, tag;
    int nx = 0, ny = 0;
    std::string shx, shy, sox, soy;
    if (!(hs >> hash >> tag >> nx >> ny >> shx >> shy >> sox >> soy) || hash != "#" || tag != "grid") {
      throw Error(Errc::FormatError, path.string() + ": bad grid header");
    }
    double hx, hy, ox, oy;
    if (!parse_double(shx, hx) || !parse_double(shy, hy) || !parse_double(sox, ox) || !parse_double(soy, oy)) {
      throw Error(Errc::FormatError, path.string() + ": bad number in grid header");
    }
    const double L = std::max(g.rect().width(), g.rect().height());
    if (nx != g.nx() || ny != g.ny() || !close(hx, g.hx(), g.hx()) || !close(hy, g.hy(), g.hy()) ||
        !close(ox, g.origin().x, L) || !close(oy, g.origin().y, L)) {
      throw Error(Errc::GridMismatch, path.string() + ": grid header does not match the grid");
    }
  }
  const double tol = std::min(g.hx(), g.hy());
  std::vector<double> values;
  values.reserve(g.node_count());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    double x, y, val;
    if (c2 == std::string::npos || !parse_double(std::string_view(line).substr(0, c1), x) ||
        !parse_double(std::string_view(line).substr(c1 + 1, c2 - c1 - 1), y) ||
        !parse_double(std::string_view(line).substr(c2 + 1), val)) {
      throw Error(Errc::FormatError, path.string() + ": line " + std::to_string(lineno) + " is not x,y,value");
    }
    if (values.size() >= g.node_count()) {
      throw Error(Errc::FormatError, path.string() + ": more rows than grid nodes");
    }
    const Point p = g.node_position(values.size());
    if (!close(x, p.x, tol) || !close(y, p.y, tol)) {
      throw Error(Errc::GridMismatch, path.string() + ": line " + std::to_string(lineno) +
                                          " does not sit on the expected node");
    }
    values.push_back(val);
  }
  if (values.size() != g.node_count()) {
    throw Error(Errc::FormatError, path.string() + ": expected " + std::to_string(g.node_count()) + " rows, got " +
                                       std::to_string(values.size()));
  }
  return values;
}

void write_field_vtk(const fs::path& path, const Grid& g,
                     const std::vector<std::pair<std::string, std::vector<double>>>& arrays) {
  const int w = g.nx() + 1, h = g.ny() + 1;
  std::string out = "# vtk DataFile Version 3.0\nvfrac field\nASCII\nDATASET STRUCTURED_POINTS\n";
  out += "DIMENSIONS " + std::to_string(w) + " " + std::to_string(h) + " 1\n";
  out += "ORIGIN " + num(g.origin().x) + " " + num(g.origin().y) + " 0\n";
  out += "SPACING " + num(g.hx()) + " " + num(g.hy()) + " 1\n";
  out += "POINT_DATA " + std::to_string(g.logical_node_count()) + "\n";
  for (const auto& [name, values] : arrays) {
    if (values.size() != g.node_count()) throw Error(Errc::GridMismatch, "vtk array " + name + " has wrong size");
    out += "SCALARS " + name + " double 1\nLOOKUP_TABLE default\n";
    for (int j = 0; j < h; ++j) {
      for (int i = 0; i < w; ++i) out += num(values[g.primary(i, j)]) + "\n";
    }
  }
  out += "SCALARS side_tag int 1\nLOOKUP_TABLE default\n";
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) out += std::to_string(g.copies(i, j).size()) + "\n";
  }
  write_text_atomic(path, out);
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot write " + tmp.string());
    out << text;
    if (!out.flush()) throw Error(Errc::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(Errc::IoError, "cannot move " + tmp.string() + " into place: " + ec.message());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json grid_descriptor(const Grid& g) {
  Json j = {{"nx", g.nx()},         {"ny", g.ny()},         {"hx", g.hx()},
            {"hy", g.hy()},         {"origin", {g.origin().x, g.origin().y}},
            {"nodes", g.node_count()}, {"duplicated", g.duplicated_count()}};
  if (g.slit()) {
    Json segs = Json::array();
    for (const auto& s : g.slit()->segments) segs.push_back({{s.a.x, s.a.y}, {s.b.x, s.b.y}});
    j["slit"] = {{"segments", segs}, {"mouth_on_boundary", g.slit()->mouth_on_boundary}};
    if (g.slit()->tip) j["slit"]["tip"] = {g.slit()->tip->x, g.slit()->tip->y};
  }
  return j;
}

Json to_json(const MaterialParams& m) {
  return {{"G_c", m.G_c}, {"delta", m.delta}, {"eta_delta", m.eta_delta}, {"mu_eq", m.mu_eq}, {"mu_neq", m.mu_neq}};
}

Json to_json(const EnergyLedger& l) {
  return {{"elastic", l.elastic},
          {"surface", l.surface},
          {"body_load_potential", l.body_load_potential},
          {"boundary_load_potential", l.boundary_load_potential},
          {"merged_objective", l.merged_objective},
          {"work_cumulative", l.work_cumulative},
          {"total", l.total}};
}

Json to_json(const StabilityReport& r) {
  Json j = {{"tip", {r.frame.tip.x, r.frame.tip.y}},
            {"angle", r.frame.angle},
            {"K_fit", r.K_fit},
            {"fit_residual", r.fit_residual},
            {"err", r.err},
            {"verdict", to_string(r.verdict)},
            {"blowup_eps", r.blowup_eps},
            {"blowup_cauchy", r.blowup_cauchy},
            {"ball_bound_ok", r.ball_bound_ok},
            {"notes", r.notes}};
  j["blowup_rate"] = r.blowup_rate ? Json(*r.blowup_rate) : Json(nullptr);
  j["ball_slope"] = r.ball_slope ? Json(*r.ball_slope) : Json(nullptr);
  Json rows = Json::array();
  for (const auto& b : r.ball_rows) rows.push_back({{"r", b.r}, {"energy", b.energy}, {"bound", b.bound}, {"ok", b.ok}});
  j["ball_rows"] = rows;
  j["competitor_margin"] = r.competitor_margin ? Json(*r.competitor_margin) : Json(nullptr);
  j["competitor_verdict"] = r.competitor_verdict ? Json(to_string(*r.competitor_verdict)) : Json(nullptr);
  Json comp = Json::array();
  for (const auto& c : r.competitor_rows) {
    comp.push_back({{"angle", c.angle},
                    {"length", c.length},
                    {"slit_extension", c.slit_extension},
                    {"incumbent_energy", c.incumbent_energy},
                    {"competitor_energy", c.competitor_energy},
                    {"margin", c.margin}});
  }
  j["competitors"] = comp;
  return j;
}

Json to_json(const Audit& a) {
  Json tips = Json::array();
  for (const auto& t : a.tips) {
    tips.push_back({{"tip", {t.frame.tip.x, t.frame.tip.y}}, {"angle", t.frame.angle}, {"from_slit", t.from_slit}});
  }
  Json reports = Json::array();
  for (const auto& r : a.reports) reports.push_back(to_json(r));
  return {{"tips", tips}, {"reports", reports}, {"no_tip_found", a.no_tip_found}, {"notes", a.notes}};
}

std::string energies_csv_header() {
  return "step,t,elastic,surface,body_load,boundary_load,merged_objective,work,total,iterations,converged\n";
}

std::string energies_csv_row(std::size_t step, double t, const EnergyLedger& l, int iterations, bool converged) {
  return std::to_string(step) + "," + num(t) + "," + num(l.elastic) + "," + num(l.surface) + "," +
         num(l.body_load_potential) + "," + num(l.boundary_load_potential) + "," + num(l.merged_objective) + "," +
         num(l.work_cumulative) + "," + num(l.total) + "," + std::to_string(iterations) + "," +
         (converged ? "1" : "0") + "\n";
}

std::string competitor_csv(const std::vector<CompetitorRow>& rows) {
  std::string out = "angle,length,incumbent_energy,competitor_energy,margin\n";
  for (const auto& r : rows) {
    out += num(r.angle) + "," + num(r.length) + "," + num(r.incumbent_energy) + "," + num(r.competitor_energy) +
           "," + num(r.margin) + "\n";
  }
  return out;
}

std::string step_directory_name(std::size_t step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "step_%04zu", step);
  return buf;
}

void write_trajectory(const fs::path& dir, const Trajectory& traj, const Json& manifest,
                      const OutputFormats& formats) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::IoError, "cannot create " + dir.string() + ": " + ec.message());
  std::string energies = energies_csv_header();
  for (std::size_t k = 0; k < traj.steps.size(); ++k) {
    const auto& s = traj.steps[k];
    const fs::path sd = dir / step_directory_name(k);
    fs::create_directories(sd, ec);
    if (formats.csv) {
      write_field_csv(sd / "u.csv", s.u.grid(), s.u.values());
      write_field_csv(sd / "v.csv", s.v.grid(), s.v.values());
    }
    if (formats.vtk) write_field_vtk(sd / "fields.vtk", s.u.grid(), {{"u", s.u.values()}, {"v", s.v.values()}});
    Json step = {{"step", k}, {"t", s.t}, {"ledger", to_json(s.ledger)}, {"iterations", s.iterations},
                 {"converged", s.converged}};
    step["error"] = s.error ? Json(*s.error) : Json(nullptr);
    step["audit"] = s.audit ? to_json(*s.audit) : Json(nullptr);
    write_text_atomic(sd / "audit.json", step.dump(2) + "\n");
    energies += energies_csv_row(k, s.t, s.ledger, s.iterations, s.converged);
  }
  write_text_atomic(dir / "energies.csv", energies);
  Json m = manifest;
  Json events = Json::array();
  for (const auto& e : traj.events) events.push_back({{"step", e.step}, {"increase", e.increase}, {"scale", e.scale}});
  m["energy_events"] = events;
  m["max_relative_increase"] = traj.max_relative_increase;
  write_text_atomic(dir / "manifest.json", m.dump(2) + "\n");
}

}  // namespace vfrac
