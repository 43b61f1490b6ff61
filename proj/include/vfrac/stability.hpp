#pragma once

#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "vfrac/energy.hpp"
#include "vfrac/fields.hpp"
#include "vfrac/solve.hpp"

namespace vfrac {

/// Crack tip and the direction the crack would grow in. The crack itself
/// lies behind the tip, along angle + pi.
struct CrackFrame {
  Point tip;
  double angle = 0.0;
};

/// K r^{1/2} sin(theta/2) in the frame's polar coordinates. Nodes on the
/// crack line behind the tip take theta = +pi or -pi according to the face
/// they belong to.
double singular_mode(double K, const Point& x, const Vec2& interior_dir, const CrackFrame& frame);
ScalarField singular_field(const GridPtr& grid, double K, const CrackFrame& frame = {});

inline double energy_release_rate(double K) { return 0.25 * std::numbers::pi * K * K; }

/// Frame at the slit tip, growing along the last segment.
std::optional<CrackFrame> slit_tip_frame(const SlitSpec& slit);

struct SifFit {
  double K = 0.0;
  double residual = 0.0;  // relative RMS misfit
  std::size_t nodes = 0;
};

/// Least-squares fit of u - u(tip) = K r^{1/2} sin(theta/2) over the nodes of
/// the annulus r_in <= |x - tip| <= r_out. Nodes with v < 0.5 are skipped
/// when v is given. Requires r_in >= 3h and r_out no more than half the
/// distance from the tip to the outer boundary.
SifFit extract_sif(const ScalarField& u, const CrackFrame& frame, double r_in, double r_out,
                   const PhaseField* v = nullptr);

enum class Verdict { Stable, Marginal, Unstable };
const char* to_string(Verdict v);

Verdict griffith_verdict(double K, double G_c, double tol_band = 0.05);

struct BlowupDiagnosis {
  std::vector<double> eps;     // as supplied, decreasing
  std::vector<double> cauchy;  // distance between consecutive blow-ups on B(0, r)
  std::optional<double> rate;  // fitted exponent of cauchy against eps
  RescaledPair finest;
};

/// Blow-ups at each eps; consecutive pairs are compared on the coarser of the
/// two blow-up grids.
BlowupDiagnosis blowup_diagnose(const ScalarField& u, const PhaseField* v, const Point& x0,
                                const std::vector<double>& eps_list, double radius);

struct ScalingTerm {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double rel_diff = 0.0;
};

struct ScalingCheck {
  double eps = 1.0;
  double alpha = 0.0;  // delta / eps
  bool eta_ok = true;  // eta_delta well below alpha
  std::vector<ScalingTerm> terms;
  double max_rel_diff = 0.0;
};

/// E_alpha over B(0, r) of the blow-up against eps^{-1} E_delta over
/// B(x0, eps r) of the source state, term by term, with alpha = delta / eps.
/// rhs_radius overrides the source ball radius (default eps * r); anything
/// else breaks the identity.
ScalingCheck check_scaling_identity(const ScalarField& u, const PhaseField* v, const MaterialParams& params,
                                    const Point& x0, double eps, double radius,
                                    std::optional<double> rhs_radius = std::nullopt);

struct LoadScalingCheck {
  double eps = 1.0;
  double lhs = 0.0;          // int_{B(0,r)} f_eps u_eps
  double rhs = 0.0;          // eps^{-5/2} int_{B(x0, eps r)} f (u - u(x0))
  double rel_diff = 0.0;     // relative to int |f (u - u(x0))| as well
  double coefficient = 1.0;  // eps^{3/2}, the load factor in the rescaled energy
  double rescaled_term = 0.0;
};

/// f is dilated, f_eps(x) = f(x0 + eps x).
LoadScalingCheck check_load_scaling(const ScalarField& u, const ScalarField& f, const Point& x0, double eps,
                                    double radius);

struct BallBoundRow {
  double r = 0.0;
  double energy = 0.0;
  double bound = 0.0;
  bool ok = true;
};

struct BallBound {
  std::vector<BallBoundRow> rows;
  double slope = 0.0;  // of energy against r, fitted with intercept
  double intercept = 0.0;
  bool all_ok = true;
};

/// 1/2 mu int_{B(0,r)} k |grad u|^2 against 2 pi G_c r for each radius.
/// k = 1 without v, eta + v^2 otherwise.
BallBound check_ball_bound(const ScalarField& u_hat, double G_c, const std::vector<double>& radii,
                           const PhaseField* v = nullptr, double mu = 1.0, double eta = 0.0);

struct CompetitorFamily {
  std::vector<double> angles;   // relative to the crack frame
  std::vector<double> lengths;
  int band_cells = 2;
};

struct CompetitorRow {
  double angle = 0.0;
  double length = 0.0;
  bool slit_extension = false;
  double incumbent_energy = 0.0;
  double competitor_energy = 0.0;
  double margin = 0.0;
};

enum class FamilyVerdict { StableWithinFamily, Unstable };
const char* to_string(FamilyVerdict v);

struct CompetitorResult {
  std::vector<CompetitorRow> rows;
  double margin = 0.0;
  FamilyVerdict verdict = FamilyVerdict::StableWithinFamily;
};

/// Compares the state against crack extensions from the frame's tip inside
/// B(tip, r). Every candidate keeps u_hat on the nodes outside the ball and
/// re-solves inside. Axis-aligned extensions of a slit tip become slit
/// extensions (length snapped to the lattice); all others insert a v = 0
/// band of width max(band_cells h, delta/2) whose profile comes from the
/// phase solve. Energies are elastic plus phase-field surface energy plus
/// G_c times the slit length inside the ball.
CompetitorResult competitor_test(const ScalarField& u_hat, const PhaseField* v, const MaterialParams& params,
                                 const CrackFrame& frame, const CompetitorFamily& family, double radius,
                                 const SolverSettings& settings = {}, double margin_tol = 1e-9);

struct StabilityOptions {
  double r_in = 0.0;   // annulus; 0 picks 3h
  double r_out = 0.0;  // 0 picks half the distance to the boundary
  double tol_band = 0.05;
  std::vector<double> eps_list;
  double blowup_radius = 1.0;
  std::vector<double> ball_radii;  // relative to blowup_radius
  std::optional<CompetitorFamily> family;
  double competitor_radius = 0.0;  // 0 picks blowup_radius, or half the boundary distance without blow-ups
};

struct StabilityReport {
  CrackFrame frame;
  double K_fit = 0.0;
  double fit_residual = 0.0;
  double err = 0.0;
  Verdict verdict = Verdict::Stable;
  std::vector<double> blowup_eps;
  std::vector<double> blowup_cauchy;
  std::optional<double> blowup_rate;
  std::vector<BallBoundRow> ball_rows;
  std::optional<double> ball_slope;
  bool ball_bound_ok = true;
  std::optional<double> competitor_margin;
  std::optional<FamilyVerdict> competitor_verdict;
  std::vector<CompetitorRow> competitor_rows;
  std::vector<std::string> notes;
};

/// SIF fit, verdict, blow-up diagnostics, ball bound on the finest blow-up
/// and, if a family is configured, the competitor test. Failures of the
/// optional parts are recorded in notes.
StabilityReport analyze_tip(const ScalarField& u, const PhaseField* v, const MaterialParams& params,
                            const CrackFrame& frame, const StabilityOptions& options,
                            const SolverSettings& settings = {});

}  // namespace vfrac
