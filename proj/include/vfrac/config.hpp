#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vfrac/energy.hpp"
#include "vfrac/evolution.hpp"
#include "vfrac/expression.hpp"
#include "vfrac/solve.hpp"

namespace vfrac {

struct GridConfig {
  Rect rect{{0.0, 0.0}, {1.0, 1.0}};
  int nx = 32;
  int ny = 32;
  std::vector<Point> slit;  // polyline, last vertex is the tip
  bool slit_mouth_on_boundary = true;
};

struct LoadsConfig {
  std::optional<Expression> body;
  std::array<std::optional<Expression>, 4> traction;  // indexed by Side
  std::vector<Side> dirichlet_sides;
  Expression dirichlet;
  /// When set, Dirichlet values are u_S with this (time dependent) factor at
  /// the slit tip instead of `dirichlet`.
  std::optional<Expression> singular_K;
  double t_start = 0.0;
  double t_end = 1.0;
  int steps = 0;

  std::vector<double> times() const;
};

struct StabilityConfig {
  std::vector<double> eps_list;
  double radius = 1.0;
  double r_in = 0.0;
  double r_out = 0.0;
  double tol_band = 0.05;
  std::vector<double> ball_radii;
  std::vector<double> angles;
  std::vector<double> lengths;
  int band_cells = 2;
  double competitor_radius = 0.0;
  std::optional<Point> center;
  std::vector<Point> tips;  // empty: detect
  bool audit_steps = false;
  double tip_threshold = 0.1;
};

struct DemoConfig {
  double band_lo = 0.0;  // the band covers node rows with band_lo <= y <= band_hi
  double band_hi = 0.0;
  std::vector<double> amplitudes;
};

struct OutputConfig {
  std::string directory = "out";
  bool csv = true;
  bool vtk = false;
};

struct InputConfig {
  std::string u;
  std::string v;
};

struct SweepConfig {
  std::string command = "static";
  std::vector<std::pair<std::string, std::vector<std::string>>> parameters;  // "section.key" -> values
  int workers = 1;
};

struct RunConfig {
  GridConfig grid;
  MaterialParams material;
  LoadsConfig loads;
  SolverSettings solver;
  Split split = Split::Full;
  bool elastic_only = false;
  StabilityConfig stability;
  DemoConfig demo;
  OutputConfig output;
  InputConfig input;
  SweepConfig sweep;
  /// Directory relative input paths are resolved against.
  std::filesystem::path base_dir;

  /// Canonical INI text; parse_config(to_ini()) gives an equal config.
  std::string to_ini() const;
  friend bool operator==(const RunConfig& a, const RunConfig& b) { return a.to_ini() == b.to_ini(); }
};

/// "section.key=value" replacements applied on top of the file.
using Overrides = std::vector<std::pair<std::string, std::string>>;
Overrides parse_overrides(const std::vector<std::string>& items);

/// Parses INI text. Unknown sections or keys and malformed values throw
/// ConfigError naming the key.
RunConfig parse_config(const std::string& text, const Overrides& overrides = {});
RunConfig load_config(const std::filesystem::path& path, const Overrides& overrides = {});

GridPtr build_grid(const RunConfig& cfg);
MaterialParams material(const RunConfig& cfg);
LoadSpec loads_at(const RunConfig& cfg, const GridPtr& grid, double t);
LoadProgram load_program(const RunConfig& cfg, const GridPtr& grid);
StabilityOptions stability_options(const RunConfig& cfg);
EvolutionSettings evolution_settings(const RunConfig& cfg);

const char* to_string(Side s);
const char* to_string(Split s);

}  // namespace vfrac
