#include "vfrac/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "vfrac/error.hpp"
#include "vfrac/io.hpp"
#include "vfrac/stability.hpp"

namespace vfrac {

const char* to_string(Side s) {
  switch (s) {
    case Side::Left: return "left";
    case Side::Right: return "right";
    case Side::Bottom: return "bottom";
    case Side::Top: return "top";
  }
  return "?";
}

const char* to_string(Split s) {
  switch (s) {
    case Split::Full: return "full";
    case Split::EqOnly: return "eq_only";
    case Split::NeqOnly: return "neq_only";
  }
  return "?";
}

std::vector<double> LoadsConfig::times() const {
  if (steps <= 0) return {t_end};
  std::vector<double> t(static_cast<std::size_t>(steps) + 1);
  for (int k = 0; k <= steps; ++k) t[k] = t_start + (t_end - t_start) * k / steps;
  return t;
}

namespace {

using Key = std::string;  // "section.key"

[[noreturn]] void bad(const Key& key, const std::string& what) {
  throw Error(Errc::ConfigError, key + ": " + what);
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

double parse_number(const Key& key, const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc() && ptr == s.data() + s.size()) return v;
  // constant expressions such as pi/4
  std::optional<Expression> e;
  try {
    e = Expression::parse(s);
  } catch (const Error&) {
    bad(key, "'" + s + "' is not a number");
  }
  v = (*e)(0.0, 0.0, 0.0);
  if ((*e)(1.0, 2.0, 3.0) != v) bad(key, "'" + s + "' is not a constant");
  if (!std::isfinite(v)) bad(key, "'" + s + "' is not finite");
  return v;
}

int parse_int(const Key& key, const std::string& s) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) bad(key, "'" + s + "' is not an integer");
  return v;
}

bool parse_bool(const Key& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  bad(key, "'" + s + "' is not a boolean");
}

std::vector<double> parse_numbers(const Key& key, const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) out.push_back(parse_number(key, item));
  return out;
}

std::vector<Point> parse_points(const Key& key, const std::string& s) {
  const auto v = parse_numbers(key, s);
  if (v.size() % 2) bad(key, "expected x y pairs");
  std::vector<Point> out;
  for (std::size_t k = 0; k < v.size(); k += 2) out.push_back({v[k], v[k + 1]});
  return out;
}

Expression parse_expression(const Key& key, const std::string& s) {
  try {
    return Expression::parse(s);
  } catch (const Error& e) {
    bad(key, e.what());
  }
}

Side parse_side(const Key& key, const std::string& s) {
  for (Side side : {Side::Left, Side::Right, Side::Bottom, Side::Top}) {
    if (s == to_string(side)) return side;
  }
  bad(key, "unknown side '" + s + "'");
}

std::string join_numbers(const std::vector<double>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) out += (k ? " " : "") + num(v[k]);
  return out;
}

std::string join_points(const std::vector<Point>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) out += (k ? " " : "") + num(v[k].x) + " " + num(v[k].y);
  return out;
}

const std::array<const char*, 4> kTractionKeys = {"traction_left", "traction_right", "traction_bottom",
                                                  "traction_top"};

using Handler = std::function<void(RunConfig&, const Key&, const std::string&)>;

const std::map<std::string, std::map<std::string, Handler>>& handlers() {
  static const std::map<std::string, std::map<std::string, Handler>> table = [] {
    std::map<std::string, std::map<std::string, Handler>> t;
    auto& g = t["grid"];
    g["rect"] = [](RunConfig& c, const Key& k, const std::string& s) {
      const auto v = parse_numbers(k, s);
      if (v.size() != 4) bad(k, "expected x0 y0 x1 y1");
      c.grid.rect = {{v[0], v[1]}, {v[2], v[3]}};
    };
    g["nx"] = [](RunConfig& c, const Key& k, const std::string& s) { c.grid.nx = parse_int(k, s); };
    g["ny"] = [](RunConfig& c, const Key& k, const std::string& s) { c.grid.ny = parse_int(k, s); };
    g["slit"] = [](RunConfig& c, const Key& k, const std::string& s) { c.grid.slit = parse_points(k, s); };
    g["slit_mouth_on_boundary"] = [](RunConfig& c, const Key& k, const std::string& s) {
      c.grid.slit_mouth_on_boundary = parse_bool(k, s);
    };

    auto& m = t["material"];
    m["G_c"] = [](RunConfig& c, const Key& k, const std::string& s) { c.material.G_c = parse_number(k, s); };
    m["delta"] = [](RunConfig& c, const Key& k, const std::string& s) { c.material.delta = parse_number(k, s); };
    m["eta_delta"] = [](RunConfig& c, const Key& k, const std::string& s) {
      c.material.eta_delta = parse_number(k, s);
    };
    m["mu_eq"] = [](RunConfig& c, const Key& k, const std::string& s) { c.material.mu_eq = parse_number(k, s); };
    m["mu_neq"] = [](RunConfig& c, const Key& k, const std::string& s) { c.material.mu_neq = parse_number(k, s); };

    auto& l = t["loads"];
    l["body"] = [](RunConfig& c, const Key& k, const std::string& s) { c.loads.body = parse_expression(k, s); };
    for (int side = 0; side < 4; ++side) {
      l[kTractionKeys[side]] = [side](RunConfig& c, const Key& k, const std::string& s) {
        c.loads.traction[side] = parse_expression(k, s);
      };
    }
    l["dirichlet_sides"] = [](RunConfig& c, const Key& k, const std::string& s) {
      c.loads.dirichlet_sides.clear();
      for (const auto& item : split_list(s)) c.loads.dirichlet_sides.push_back(parse_side(k, item));
    };
    l["dirichlet"] = [](RunConfig& c, const Key& k, const std::string& s) {
      c.loads.dirichlet = parse_expression(k, s);
    };
    l["singular_K"] = [](RunConfig& c, const Key& k, const std::string& s) {
      c.loads.singular_K = parse_expression(k, s);
    };
    l["t_start"] = [](RunConfig& c, const Key& k, const std::string& s) { c.loads.t_start = parse_number(k, s); };
    l["t_end"] = [](RunConfig& c, const Key& k, const std::string& s) { c.loads.t_end = parse_number(k, s); };
    l["steps"] = [](RunConfig& c, const Key& k, const std::string& s) { c.loads.steps = parse_int(k, s); };

    auto& so = t["solver"];
    so["cg_tol"] = [](RunConfig& c, const Key& k, const std::string& s) { c.solver.cg_tol = parse_number(k, s); };
    so["cg_max_iter"] = [](RunConfig& c, const Key& k, const std::string& s) {
      c.solver.cg_max_iter = parse_int(k, s);
    };
    so["altmin_tol"] = [](RunConfig& c, const Key& k, const std::string& s) {
      c.solver.altmin_tol = parse_number(k, s);
    };
    so["altmin_max_iter"] = [](RunConfig& c, const Key& k, const std::string& s) {
      c.solver.altmin_max_iter = parse_int(k, s);
    };
    so["active_set_max_sweeps"] = [](RunConfig& c, const Key& k, const std::string& s) {
      c.solver.active_set_max_sweeps = parse_int(k, s);
    };
    so["split"] = [](RunConfig& c, const Key& k, const std::string& s) {
      for (Split sp : {Split::Full, Split::EqOnly, Split::NeqOnly}) {
        if (s == to_string(sp)) {
          c.split = sp;
          return;
        }
      }
      bad(k, "unknown split '" + s + "'");
    };
    so["elastic_only"] = [](RunConfig& c, const Key& k, const std::string& s) { c.elastic_only = parse_bool(k, s); };

    auto& st = t["stability"];
    st["eps_list"] = [](RunConfig& c, const Key& k, const std::string& s) {
      c.stability.eps_list = parse_numbers(k, s);
    };
    st["radius"] = [](RunConfig& c, const Key& k, const std::string& s) { c.stability.radius = parse_number(k, s); };
    st["r_in"] = [](RunConfig& c, const Key& k, const std::string& s) { c.stability.r_in = parse_number(k, s); };
    st["r_out"] = [](RunConfig& c, const Key& k, const std::string& s) { c.stability.r_out = parse_number(k, s); };
    st["tol_band"] = [](RunConfig& c, const Key& k, const std::string& s) {
      c.stability.tol_band = parse_number(k, s);
    };
    st["ball_radii"] = [](RunConfig& c, const Key& k, const std::string& s) {
      c.stability.ball_radii = parse_numbers(k, s);
    };
    st["angles"] = [](RunConfig& c, const Key& k, const std::string& s) { c.stability.angles = parse_numbers(k, s); };
    st["lengths"] = [](RunConfig& c, const Key& k, const std::string& s) {
      c.stability.lengths = parse_numbers(k, s);
    };
    st["band_cells"] = [](RunConfig& c, const Key& k, const std::string& s) {
      c.stability.band_cells = parse_int(k, s);
    };
    st["competitor_radius"] = [](RunConfig& c, const Key& k, const std::string& s) {
      c.stability.competitor_radius = parse_number(k, s);
    };
    st["center"] = [](RunConfig& c, const Key& k, const std::string& s) {
      const auto p = parse_points(k, s);
      if (p.size() != 1) bad(k, "expected one point");
      c.stability.center = p[0];
    };
    st["tips"] = [](RunConfig& c, const Key& k, const std::string& s) {
      c.stability.tips = s == "auto" ? std::vector<Point>{} : parse_points(k, s);
    };
    st["audit_steps"] = [](RunConfig& c, const Key& k, const std::string& s) {
      c.stability.audit_steps = parse_bool(k, s);
    };
    st["tip_threshold"] = [](RunConfig& c, const Key& k, const std::string& s) {
      c.stability.tip_threshold = parse_number(k, s);
    };

    auto& d = t["demo"];
    d["band"] = [](RunConfig& c, const Key& k, const std::string& s) {
      const auto v = parse_numbers(k, s);
      if (v.size() != 2 || !(v[0] <= v[1])) bad(k, "expected lower and upper y of the band");
      c.demo.band_lo = v[0];
      c.demo.band_hi = v[1];
    };
    d["amplitudes"] = [](RunConfig& c, const Key& k, const std::string& s) {
      c.demo.amplitudes = parse_numbers(k, s);
    };

    auto& o = t["output"];
    o["directory"] = [](RunConfig& c, const Key& k, const std::string& s) {
      if (s.empty()) bad(k, "empty directory");
      c.output.directory = s;
    };
    o["formats"] = [](RunConfig& c, const Key& k, const std::string& s) {
      c.output.csv = c.output.vtk = false;
      for (const auto& f : split_list(s)) {
        if (f == "csv") c.output.csv = true;
        else if (f == "vtk") c.output.vtk = true;
        else bad(k, "unknown format '" + f + "'");
      }
    };

    auto& in = t["input"];
    in["u"] = [](RunConfig& c, const Key&, const std::string& s) { c.input.u = s; };
    in["v"] = [](RunConfig& c, const Key&, const std::string& s) { c.input.v = s; };

    auto& sw = t["sweep"];
    sw["command"] = [](RunConfig& c, const Key&, const std::string& s) { c.sweep.command = s; };
    sw["workers"] = [](RunConfig& c, const Key& k, const std::string& s) {
      c.sweep.workers = parse_int(k, s);
      if (c.sweep.workers < 1) bad(k, "must be at least 1");
    };
    return t;
  }();
  return table;
}

bool known_key(const std::string& section, const std::string& key) {
  const auto& t = handlers();
  const auto it = t.find(section);
  return it != t.end() && it->second.count(key);
}

struct Entry {
  std::string section;
  std::string key;
  std::string value;
};

void apply(RunConfig& c, const Entry& e) {
  const Key full = e.section + "." + e.key;
  if (e.section == "sweep" && e.key.find('.') != std::string::npos) {
    const auto dot = e.key.find('.');
    if (!known_key(e.key.substr(0, dot), e.key.substr(dot + 1)) || e.key.rfind("sweep.", 0) == 0) {
      bad(full, "not a sweepable key");
    }
    std::vector<std::string> values;
    if (e.value.find(';') != std::string::npos) {
      std::stringstream ss(e.value);
      std::string item;
      while (std::getline(ss, item, ';')) {
        const auto a = item.find_first_not_of(" \t"), b = item.find_last_not_of(" \t");
        if (a != std::string::npos) values.push_back(item.substr(a, b - a + 1));
      }
    } else {
      values = split_list(e.value);
    }
    if (values.empty()) bad(full, "no values");
    for (auto& p : c.sweep.parameters) {
      if (p.first == e.key) {
        p.second = values;
        return;
      }
    }
    c.sweep.parameters.emplace_back(e.key, values);
    return;
  }
  const auto& t = handlers();
  const auto sec = t.find(e.section);
  if (sec == t.end()) bad(full, "unknown section");
  const auto h = sec->second.find(e.key);
  if (h == sec->second.end()) bad(full, "unknown key");
  h->second(c, full, e.value);
}

void validate(const RunConfig& c) {
  if (c.grid.nx < 2 || c.grid.ny < 2) bad("grid.nx", "resolution must be at least 2");
  if (!(c.grid.rect.hi.x > c.grid.rect.lo.x && c.grid.rect.hi.y > c.grid.rect.lo.y)) bad("grid.rect", "empty");
  if (c.grid.slit.size() == 1) bad("grid.slit", "needs at least two vertices");
  if (c.loads.steps < 0) bad("loads.steps", "must be non-negative");
  if (c.loads.steps > 0 && !(c.loads.t_end > c.loads.t_start)) bad("loads.t_end", "must exceed t_start");
  if (c.loads.singular_K && c.grid.slit.empty()) bad("loads.singular_K", "needs a slit");
  try {
    c.material.validate();
  } catch (const Error& e) {
    bad("material", e.what());
  }
  try {
    c.solver.validate();
  } catch (const Error& e) {
    bad("solver", e.what());
  }
  for (double e : c.stability.eps_list) {
    if (!(e > 0.0 && e <= 1.0)) bad("stability.eps_list", "values must lie in (0, 1]");
  }
  if (c.stability.band_cells < 1) bad("stability.band_cells", "must be at least 1");
}

}  // namespace

Overrides parse_overrides(const std::vector<std::string>& items) {
  Overrides out;
  for (const auto& s : items) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || s.find('.') == std::string::npos || s.find('.') > eq) {
      throw Error(Errc::ConfigError, "override '" + s + "' is not section.key=value");
    }
    out.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  return out;
}

RunConfig parse_config(const std::string& text, const Overrides& overrides) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(Errc::ConfigError, std::string("line ") + std::to_string(e.line()) + ": " + e.message());
  }
  std::vector<Entry> entries;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) bad(section, "key outside of a section");
    for (const auto& [key, value] : body) entries.push_back({section, key, value.data()});
  }
  for (const auto& [path, value] : overrides) {
    const auto dot = path.find('.');
    entries.push_back({path.substr(0, dot), path.substr(dot + 1), value});
  }
  RunConfig c;
  for (const auto& e : entries) apply(c, e);
  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path, const Overrides& overrides) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const Error& e) {
    throw Error(Errc::ConfigError, e.what());
  }
  RunConfig c = parse_config(text, overrides);
  c.base_dir = path.parent_path();
  return c;
}

std::string RunConfig::to_ini() const {
  std::ostringstream o;
  o << "[grid]\nrect = " << num(grid.rect.lo.x) << " " << num(grid.rect.lo.y) << " " << num(grid.rect.hi.x) << " "
    << num(grid.rect.hi.y) << "\nnx = " << grid.nx << "\nny = " << grid.ny << "\n";
  if (!grid.slit.empty()) o << "slit = " << join_points(grid.slit) << "\n";
  o << "slit_mouth_on_boundary = " << (grid.slit_mouth_on_boundary ? "true" : "false") << "\n";

  o << "\n[material]\nG_c = " << num(material.G_c) << "\ndelta = " << num(material.delta)
    << "\neta_delta = " << num(material.eta_delta) << "\nmu_eq = " << num(material.mu_eq)
    << "\nmu_neq = " << num(material.mu_neq) << "\n";

  o << "\n[loads]\n";
  if (loads.body) o << "body = " << loads.body->text() << "\n";
  for (int s = 0; s < 4; ++s) {
    if (loads.traction[s]) o << kTractionKeys[s] << " = " << loads.traction[s]->text() << "\n";
  }
  o << "dirichlet_sides =";
  for (Side s : loads.dirichlet_sides) o << " " << to_string(s);
  o << "\ndirichlet = " << loads.dirichlet.text() << "\n";
  if (loads.singular_K) o << "singular_K = " << loads.singular_K->text() << "\n";
  o << "t_start = " << num(loads.t_start) << "\nt_end = " << num(loads.t_end) << "\nsteps = " << loads.steps << "\n";

  o << "\n[solver]\ncg_tol = " << num(solver.cg_tol) << "\ncg_max_iter = " << solver.cg_max_iter
    << "\naltmin_tol = " << num(solver.altmin_tol) << "\naltmin_max_iter = " << solver.altmin_max_iter
    << "\nactive_set_max_sweeps = " << solver.active_set_max_sweeps << "\nsplit = " << to_string(split)
    << "\nelastic_only = " << (elastic_only ? "true" : "false") << "\n";

  o << "\n[stability]\n";
  if (!stability.eps_list.empty()) o << "eps_list = " << join_numbers(stability.eps_list) << "\n";
  o << "radius = " << num(stability.radius) << "\nr_in = " << num(stability.r_in)
    << "\nr_out = " << num(stability.r_out) << "\ntol_band = " << num(stability.tol_band) << "\n";
  if (!stability.ball_radii.empty()) o << "ball_radii = " << join_numbers(stability.ball_radii) << "\n";
  if (!stability.angles.empty()) o << "angles = " << join_numbers(stability.angles) << "\n";
  if (!stability.lengths.empty()) o << "lengths = " << join_numbers(stability.lengths) << "\n";
  o << "band_cells = " << stability.band_cells << "\ncompetitor_radius = " << num(stability.competitor_radius)
    << "\n";
  if (stability.center) o << "center = " << join_points({*stability.center}) << "\n";
  o << "tips = " << (stability.tips.empty() ? std::string("auto") : join_points(stability.tips))
    << "\naudit_steps = " << (stability.audit_steps ? "true" : "false")
    << "\ntip_threshold = " << num(stability.tip_threshold) << "\n";

  o << "\n[demo]\nband = " << num(demo.band_lo) << " " << num(demo.band_hi) << "\n";
  if (!demo.amplitudes.empty()) o << "amplitudes = " << join_numbers(demo.amplitudes) << "\n";

  o << "\n[output]\ndirectory = " << output.directory << "\nformats =" << (output.csv ? " csv" : "")
    << (output.vtk ? " vtk" : "") << "\n";

  if (!input.u.empty() || !input.v.empty()) {
    o << "\n[input]\n";
    if (!input.u.empty()) o << "u = " << input.u << "\n";
    if (!input.v.empty()) o << "v = " << input.v << "\n";
  }

  o << "\n[sweep]\ncommand = " << sweep.command << "\nworkers = " << sweep.workers << "\n";
  for (const auto& [key, values] : sweep.parameters) {
    o << key << " =";
    for (std::size_t k = 0; k < values.size(); ++k) o << (k ? " ; " : " ") << values[k];
    o << "\n";
  }
  return o.str();
}

GridPtr build_grid(const RunConfig& c) {
  std::optional<SlitSpec> slit;
  if (!c.grid.slit.empty()) slit = polyline_slit(c.grid.slit, c.grid.slit_mouth_on_boundary);
  return Grid::build(c.grid.rect, c.grid.nx, c.grid.ny, slit);
}

MaterialParams material(const RunConfig& c) { return c.material; }

LoadSpec loads_at(const RunConfig& c, const GridPtr& g, double t) {
  LoadSpec l;
  for (Side s : c.loads.dirichlet_sides) l.side(s) = BoundaryKind::Dirichlet;
  if (c.loads.body) {
    const Expression& f = *c.loads.body;
    l.body = sample(g, [&](const Point& p) { return f(p.x, p.y, t); }).values();
  }
  for (int s = 0; s < 4; ++s) {
    if (!c.loads.traction[s]) continue;
    if (l.sides[s] == BoundaryKind::Dirichlet) {
      throw Error(Errc::ConfigError, std::string("loads.") + kTractionKeys[s] + ": side is Dirichlet");
    }
    const Expression& gx = *c.loads.traction[s];
    l.traction[s] = sample(g, [&](const Point& p) { return gx(p.x, p.y, t); }).values();
  }
  if (c.loads.singular_K) {
    const auto frame = slit_tip_frame(*g->slit());
    if (!frame) throw Error(Errc::ConfigError, "loads.singular_K: slit has no tip");
    const double K = (*c.loads.singular_K)(0.0, 0.0, t);
    const auto& grid = *g;
    std::vector<double> vals(grid.node_count());
    for (std::size_t p = 0; p < vals.size(); ++p) {
      vals[p] = singular_mode(K, grid.node_position(p), grid.interior_direction(p), *frame);
    }
    l.dirichlet = std::move(vals);
  } else {
    const Expression& d = c.loads.dirichlet;
    l.dirichlet = sample(g, [&](const Point& p) { return d(p.x, p.y, t); }).values();
  }
  return l;
}

LoadProgram load_program(const RunConfig& c, const GridPtr& g) {
  return LoadProgram::sampled(c.loads.times(), [&](double t) { return loads_at(c, g, t); });
}

StabilityOptions stability_options(const RunConfig& c) {
  StabilityOptions o;
  o.r_in = c.stability.r_in;
  o.r_out = c.stability.r_out;
  o.tol_band = c.stability.tol_band;
  o.eps_list = c.stability.eps_list;
  o.blowup_radius = c.stability.radius;
  o.ball_radii = c.stability.ball_radii;
  if (!c.stability.angles.empty() || !c.stability.lengths.empty()) {
    o.family = CompetitorFamily{c.stability.angles, c.stability.lengths, c.stability.band_cells};
  }
  o.competitor_radius = c.stability.competitor_radius;
  return o;
}

EvolutionSettings evolution_settings(const RunConfig& c) {
  EvolutionSettings e;
  e.solver = c.solver;
  e.split = c.split;
  e.elastic_only = c.elastic_only;
  e.audit = c.stability.audit_steps;
  e.stability = stability_options(c);
  e.tip_threshold = c.stability.tip_threshold;
  return e;
}

}  // namespace vfrac
