#pragma once

#include <vector>

#include "vfrac/energy.hpp"
#include "vfrac/fields.hpp"

namespace vfrac {

struct SolverSettings {
  double cg_tol = 1e-10;          // relative residual of every linear solve
  int cg_max_iter = 20000;
  double altmin_tol = 1e-6;       // objective stagnation and max |dv| per cycle
  int altmin_max_iter = 300;
  int active_set_max_sweeps = 100;

  void validate() const;
  friend bool operator==(const SolverSettings&, const SolverSettings&) = default;
};

struct LinearSolveInfo {
  int iterations = 0;
  double relative_residual = 0.0;  // ||b - A x|| / ||b|| on the free equations
};

/// Minimizes 1/2 mu int (eta + v^2) |grad u|^2 - int f u - int g u subject to
/// the Dirichlet data (v == nullptr: unit stiffness, sharp mode). Components
/// of the stiffness graph that carry load but no Dirichlet node raise
/// FloatingDomain; unloaded floating components are set to zero.
ScalarField solve_displacement(const GridPtr& grid, const PhaseField* v, const MaterialParams& params,
                               const LoadSpec& loads, const SolverSettings& settings,
                               const ScalarField* initial = nullptr, LinearSolveInfo* info = nullptr);

/// K u - F at constrained nodes, zero elsewhere.
std::vector<double> reaction_forces(const ScalarField& u, const PhaseField* v, const MaterialParams& params,
                                    const LoadSpec& loads);

struct PhaseSolveInfo {
  int sweeps = 0;
  int cg_iterations = 0;
  double kkt_residual = 0.0;  // relative to the largest load entry
};

/// Minimizes 1/2 int v^2 mu_split |grad u|^2 + surface energy over
/// 0 <= v <= v_upper with a primal-dual active set method; each sweep solves
/// the free block with conjugate gradients.
PhaseField solve_phase(const ScalarField& u, const MaterialParams& params, const PhaseField& v_upper, Split split,
                       const SolverSettings& settings, const PhaseField* initial = nullptr,
                       PhaseSolveInfo* info = nullptr);

struct StaggeredResult {
  ScalarField u;
  PhaseField v;
  EnergyLedger ledger;
  int iterations = 0;
  bool converged = false;
  /// Merged objective at the start and after every half-step.
  std::vector<double> objective_history;
  double last_dv = 0.0;
};

/// Alternates displacement and phase solves with v <= v_init. With
/// Split::Full both half-steps decrease the merged objective and the loop
/// stops once its per-cycle decrease and max |dv| fall below altmin_tol;
/// with Split::EqOnly only the |dv| fixed-point criterion is used.
StaggeredResult alternate_minimize(const GridPtr& grid, const MaterialParams& params, const LoadSpec& loads,
                                   const PhaseField& v_init, const SolverSettings& settings, Split split,
                                   const ScalarField* u_init = nullptr);

/// Zero field carrying the Dirichlet values at constrained nodes.
ScalarField dirichlet_lift(const GridPtr& grid, const LoadSpec& loads);

}  // namespace vfrac
