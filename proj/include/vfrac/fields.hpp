#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "vfrac/geometry.hpp"
#include "vfrac/grid.hpp"

namespace vfrac {

/// Nodal scalar field: one finite value per physical node.
class ScalarField {
 public:
  ScalarField(GridPtr grid, std::vector<double> values);
  static ScalarField zeros(GridPtr grid);
  static ScalarField constant(GridPtr grid, double value);

  const GridPtr& grid_ptr() const { return grid_; }
  const Grid& grid() const { return *grid_; }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t p) const { return values_[p]; }
  std::size_t size() const { return values_.size(); }

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

/// Damage field with 0 <= v <= 1 at every node (1 intact, 0 broken).
class PhaseField {
 public:
  PhaseField(GridPtr grid, std::vector<double> values);
  static PhaseField ones(GridPtr grid) { return constant(std::move(grid), 1.0); }
  static PhaseField constant(GridPtr grid, double value);

  const GridPtr& grid_ptr() const { return grid_; }
  const Grid& grid() const { return *grid_; }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t p) const { return values_[p]; }
  std::size_t size() const { return values_.size(); }

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

/// Evaluate f at every physical node position.
ScalarField sample(const GridPtr& grid, const std::function<double(const Point&)>& f);

/// Evaluate f at every node, also passing the node's interior direction so
/// that functions discontinuous across a slit can pick the correct face.
ScalarField sample_sided(const GridPtr& grid, const std::function<double(const Point&, const Vec2&)>& f);

/// Throws GridMismatch unless both grids share a layout.
void require_same_grid(const Grid& a, const Grid& b, const char* what);

/// Cell-center gradient of the bilinear interpolant, one vector per cell.
std::vector<Vec2> gradient(const ScalarField& u);

/// Blow-up of a state around a lattice node x0 at dyadic scale eps:
/// u_eps(x) = eps^{-1/2} [u(x0 + eps x) - u(x0)], v_eps(x) = v(x0 + eps x),
/// K_eps = (K - x0) / eps. Fields live on a grid of spacing h / eps whose
/// nodes are exactly the source nodes inside the window, so no
/// interpolation takes place.
struct RescaledPair {
  double eps = 1.0;
  Point x0;
  double radius = 0.0;
  ScalarField u;
  std::optional<PhaseField> v;
  std::optional<SlitSpec> slit;
  std::vector<std::size_t> source_node;

  const GridPtr& grid_ptr() const { return u.grid_ptr(); }
};

/// Window geometry shared by the rescaling operators.
struct BlowupWindow {
  Grid::Window window;
  double eps;
  Point x0;
  double radius;
};

/// Throws CenterOffLattice, WindowTooCoarse (eps*r below 8 cells),
/// WindowOutsideDomain, or InvalidArgument for non-dyadic eps.
BlowupWindow blowup_window(const Grid& grid, const Point& x0, double eps, double radius);

RescaledPair blowup_rescale(const ScalarField& u, const Point& x0, double eps, double radius);
RescaledPair blowup_rescale(const ScalarField& u, const PhaseField& v, const Point& x0, double eps,
                            double radius);

PhaseField dilate(const PhaseField& v, const Point& x0, double eps, double radius);
/// Pure dilation f_eps(x) = f(x0 + eps x), no amplitude scaling.
ScalarField dilate(const ScalarField& f, const Point& x0, double eps, double radius);
SlitSpec dilate(const SlitSpec& slit, const Point& x0, double eps);

/// Restrict a field to the nodes of `coarse`, whose node positions must be a
/// subset of the field's grid nodes. Slit faces are matched by direction.
ScalarField inject(const ScalarField& fine, const GridPtr& coarse);

/// L2 norm of (a - b) over the mask (nodal quadrature per cell).
double l2_distance_on_ball(const ScalarField& a, const ScalarField& b, const BallMask& mask);

}  // namespace vfrac
