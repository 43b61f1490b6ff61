#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "vfrac/fields.hpp"
#include "vfrac/grid.hpp"

namespace vfrac {

struct MaterialParams {
  double G_c = 1.0;        // fracture toughness
  double delta = 0.05;     // regularization length
  double eta_delta = 1e-6; // residual stiffness
  double mu_eq = 1.0;      // modulus of the part that competes with surface energy
  double mu_neq = 0.0;

  double mu() const { return mu_eq + mu_neq; }
  /// Throws InvalidArgument on non-physical values.
  void validate() const;

  friend bool operator==(const MaterialParams&, const MaterialParams&) = default;
};

/// Which part of the elastic modulus an energy uses.
enum class Split { Full, EqOnly, NeqOnly };
double split_modulus(const MaterialParams& params, Split split);

enum class BoundaryKind : std::uint8_t { Neumann, Dirichlet };

/// Loads and boundary conditions, sampled at physical nodes.
///
/// A node is constrained when it lies on a Dirichlet side or is pinned; its
/// prescribed value is read from `dirichlet`. `traction` holds one nodal
/// vector per side, integrated along the edges of that side only, so corner
/// nodes can carry different values on the two sides they join. Slit faces
/// are always traction free. Empty vectors mean zero.
struct LoadSpec {
  std::array<BoundaryKind, 4> sides{BoundaryKind::Neumann, BoundaryKind::Neumann, BoundaryKind::Neumann,
                                    BoundaryKind::Neumann};
  std::vector<double> body;
  std::array<std::vector<double>, 4> traction;
  std::vector<double> dirichlet;
  std::vector<std::uint8_t> pinned;

  BoundaryKind side(Side s) const { return sides[static_cast<int>(s)]; }
  BoundaryKind& side(Side s) { return sides[static_cast<int>(s)]; }
  const std::vector<double>& traction_on(Side s) const { return traction[static_cast<int>(s)]; }
  std::vector<double>& traction_on(Side s) { return traction[static_cast<int>(s)]; }
};

/// Throws BoundaryPartitionInvalid if vectors are mis-sized, values are not
/// finite, or nonzero traction is prescribed on a Dirichlet side.
void validate_loads(const Grid& grid, const LoadSpec& loads);
std::vector<std::uint8_t> constrained_nodes(const Grid& grid, const LoadSpec& loads);

/// Nodal load vector F with F.u equal to the body plus boundary potential.
std::vector<double> load_vector(const Grid& grid, const LoadSpec& loads);

struct EnergyLedger {
  double elastic = 0.0;
  double surface = 0.0;
  double body_load_potential = 0.0;
  double boundary_load_potential = 0.0;
  double merged_objective = 0.0;
  double work_cumulative = 0.0;
  double total = 0.0;
};

/// Quadratic form of the exact cell average of |grad u|^2 for a bilinear
/// cell; corners ordered (i,j), (i+1,j), (i,j+1), (i+1,j+1).
std::array<double, 16> cell_gradient_form(double hx, double hy);

/// Exact cell average of |grad u|^2 over cell c.
double cell_gradient_sq(const Grid& grid, const std::vector<double>& values, std::size_t c);

/// Per-cell stiffness factor: eta + mean of v^2 over the corners, or 1 when
/// v is null (sharp crack mode).
double cell_stiffness(const Grid& grid, const PhaseField* v, double eta, std::size_t c);

/// 1/2 mu int k |grad u|^2 over the mask, with k = eta + v^2 or k = 1 when v
/// is null.
double elastic_energy(const ScalarField& u, const PhaseField* v, const MaterialParams& params,
                      const BallMask& mask, Split split = Split::Full);

/// G_c ( 1/(4 delta) int (1-v)^2 + delta int |grad v|^2 ) over the mask.
double surface_energy(const PhaseField& v, const MaterialParams& params, const BallMask& mask);

struct LoadPotential {
  double body = 0.0;      // int f u dx
  double boundary = 0.0;  // int_{Neumann} g u ds
};
LoadPotential load_potential(const ScalarField& u, const LoadSpec& loads);

/// int f u dx restricted to a mask, with f given at nodes.
double body_load_on_mask(const ScalarField& u, const std::vector<double>& f, const BallMask& mask);

/// Itemized phase-field energy. merged_objective = elastic + surface - loads
/// and total starts out equal to it (work_cumulative = 0).
EnergyLedger total_phase_energy(const ScalarField& u, const PhaseField* v, const MaterialParams& params,
                                const LoadSpec* loads, const BallMask& mask);

/// Sharp Griffith energy on B(0, r): 1/2 mu int |grad u|^2 + G_c H1(K n B).
double griffith_ball_energy(const ScalarField& u_hat, const SlitSpec* slit, double G_c, double r,
                            double mu = 1.0);

}  // namespace vfrac
