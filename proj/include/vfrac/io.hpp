#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "vfrac/energy.hpp"
#include "vfrac/evolution.hpp"
#include "vfrac/stability.hpp"

namespace vfrac {

using Json = nlohmann::json;

/// Field CSV: a `# grid nx ny hx hy ox oy` header, then `x,y,value` per
/// physical node in node order. Numbers are written with 17 significant
/// digits so a round trip is exact.
void write_field_csv(const std::filesystem::path& path, const Grid& grid, const std::vector<double>& values);
std::string field_csv(const Grid& grid, const std::vector<double>& values);

/// Throws FormatError for malformed or truncated files and GridMismatch when
/// the header or node positions disagree with `grid`.
std::vector<double> read_field_csv(const std::filesystem::path& path, const Grid& grid);

/// Legacy ASCII VTK on STRUCTURED_POINTS. Slit copies collapse onto their
/// lattice point (primary copy's value); the `side_tag` array counts the
/// copies at each point.
void write_field_vtk(const std::filesystem::path& path, const Grid& grid,
                     const std::vector<std::pair<std::string, std::vector<double>>>& arrays);

/// Writes to a temporary sibling and renames it into place.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

Json grid_descriptor(const Grid& grid);
Json to_json(const MaterialParams& params);
Json to_json(const EnergyLedger& ledger);
Json to_json(const StabilityReport& report);
Json to_json(const Audit& audit);

std::string energies_csv_header();
std::string energies_csv_row(std::size_t step, double t, const EnergyLedger& ledger, int iterations,
                             bool converged);

/// angle,length,incumbent_energy,competitor_energy,margin
std::string competitor_csv(const std::vector<CompetitorRow>& rows);

struct OutputFormats {
  bool csv = true;
  bool vtk = false;
};

/// step_%04d/{u.csv, v.csv, audit.json} per step, energies.csv with one row
/// per step and manifest.json at the root.
void write_trajectory(const std::filesystem::path& dir, const Trajectory& trajectory, const Json& manifest,
                      const OutputFormats& formats = {});

std::string step_directory_name(std::size_t step);

}  // namespace vfrac
