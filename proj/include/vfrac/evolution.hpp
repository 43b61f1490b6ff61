#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vfrac/energy.hpp"
#include "vfrac/solve.hpp"
#include "vfrac/stability.hpp"

namespace vfrac {

/// Loads and Dirichlet data at a list of times. The boundary partition
/// (sides and pinned nodes) must be the same at every time.
struct LoadProgram {
  std::vector<double> times;
  std::vector<LoadSpec> loads;

  /// Throws ProgramEmpty, InvalidArgument for non-increasing times, or
  /// BoundaryPartitionInvalid.
  void validate(const Grid& grid) const;

  static LoadProgram sampled(const std::vector<double>& times, const std::function<LoadSpec(double)>& at);
};

/// Phase state, or a sharp state when v is empty.
struct Snapshot {
  ScalarField u;
  std::optional<PhaseField> v;
};

struct DetectedTip {
  CrackFrame frame;
  bool from_slit = false;
};

/// Sharp state: the slit tip. Phase state: ends of the thinned {v < threshold}
/// ridge that are off the outer boundary and off the slit, plus the slit tip
/// while it is still intact.
std::vector<DetectedTip> detect_tips(const Grid& grid, const PhaseField* v, double threshold = 0.1);

struct Audit {
  std::vector<DetectedTip> tips;
  std::vector<StabilityReport> reports;
  bool no_tip_found = false;
  std::vector<std::string> notes;
};

/// analyze_tip at each supplied or detected tip. A tip whose analysis throws
/// is dropped and the error is kept in notes.
Audit stability_audit(const Snapshot& state, const MaterialParams& params, const StabilityOptions& options,
                      const std::optional<std::vector<CrackFrame>>& tips = std::nullopt,
                      const SolverSettings& settings = {}, double tip_threshold = 0.1);

struct EvolutionSettings {
  SolverSettings solver;
  Split split = Split::Full;
  /// Keep v = 1 and only solve for u.
  bool elastic_only = false;
  /// Increase of the total energy tolerated between steps, relative to the
  /// step's energy scale, before an event is recorded.
  double energy_tol = 0.02;
  std::optional<PhaseField> v_initial;
  bool audit = false;
  StabilityOptions stability;
  double tip_threshold = 0.1;
};

struct StepRecord {
  double t = 0.0;
  ScalarField u;
  PhaseField v;
  EnergyLedger ledger;
  double energy_scale = 0.0;  // elastic + surface + |load potentials| + |work|
  int iterations = 0;
  bool converged = false;
  std::optional<std::string> error;
  std::optional<Audit> audit;
};

struct EnergyEvent {
  std::size_t step = 0;
  double increase = 0.0;
  double scale = 0.0;
};

struct Trajectory {
  std::vector<StepRecord> steps;
  std::vector<EnergyEvent> events;
  double max_relative_increase = 0.0;
};

/// Staggered solve at each time with v bounded by the previous step. Work is
/// accumulated with trapezoidal increments
///   dW = Rbar . dg_D - ubar . dF,
/// R the reactions at constrained nodes and F the nodal load vector, so that
/// total = elastic + surface - F.u - W is conserved by purely elastic runs.
Trajectory quasistatic_run(const GridPtr& grid, const MaterialParams& params, const LoadProgram& program,
                           const EvolutionSettings& settings = {});

/// Reads u (and v when v_path is given) in the field CSV format on `grid`.
/// Throws FormatError or GridMismatch.
Snapshot import_snapshot(const GridPtr& grid, const std::filesystem::path& u_path,
                         const std::optional<std::filesystem::path>& v_path = std::nullopt);

}  // namespace vfrac
