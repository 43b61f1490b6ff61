#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "vfrac/geometry.hpp"

namespace vfrac {

/// Sharp crack made of axis-aligned segments lying on grid lines.
///
/// For a grid built with `Grid::build` the segments must form a single
/// connected chain and `tip` must be one of its two ends. When
/// `mouth_on_boundary` is set the other end is required to lie on the
/// outer boundary; otherwise the slit may not touch the boundary at all.
struct SlitSpec {
  std::vector<Segment> segments;
  std::optional<Point> tip;
  bool mouth_on_boundary = false;

  double total_length() const;
  double length_in_disk(const Point& center, double radius) const;

  friend bool operator==(const SlitSpec&, const SlitSpec&) = default;
};

/// Slit defined by a polyline through `vertices`; the last vertex is the tip.
SlitSpec polyline_slit(const std::vector<Point>& vertices, bool mouth_on_boundary);

enum class Side : std::uint8_t { Left = 0, Right = 1, Bottom = 2, Top = 3 };

struct BoundaryEdge {
  Side side;
  std::size_t a;  // physical node ids
  std::size_t b;
  double length;
};

class Grid;
using GridPtr = std::shared_ptr<const Grid>;

/// Structured quad grid on a rectangle. Nodes along an optional slit are
/// duplicated so that cells on opposite faces reference distinct copies.
///
/// Physical nodes are numbered in row-major logical order (j outer, i inner),
/// with duplicate copies following their primary node immediately. Cells are
/// numbered c = j * nx + i and list their corners as (i,j), (i+1,j), (i,j+1),
/// (i+1,j+1). Immutable once built.
class Grid {
 public:
  using CellNodes = std::array<std::uint32_t, 4>;

  static GridPtr build(const Rect& rect, int nx, int ny,
                       const std::optional<SlitSpec>& slit = std::nullopt);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }
  Point origin() const { return origin_; }
  Rect rect() const { return {origin_, {origin_.x + nx_ * hx_, origin_.y + ny_ * hy_}}; }
  double cell_area() const { return hx_ * hy_; }
  const std::optional<SlitSpec>& slit() const { return slit_; }

  std::size_t node_count() const { return node_i_.size(); }
  std::size_t cell_count() const { return cells_.size(); }
  std::size_t logical_node_count() const {
    return static_cast<std::size_t>(nx_ + 1) * static_cast<std::size_t>(ny_ + 1);
  }
  std::size_t duplicated_count() const { return node_count() - logical_node_count(); }

  const CellNodes& cell_nodes(std::size_t c) const { return cells_[c]; }
  std::pair<int, int> cell_index(std::size_t c) const {
    return {static_cast<int>(c % static_cast<std::size_t>(nx_)),
            static_cast<int>(c / static_cast<std::size_t>(nx_))};
  }
  Point cell_center(std::size_t c) const;

  int node_i(std::size_t p) const { return node_i_[p]; }
  int node_j(std::size_t p) const { return node_j_[p]; }
  /// 0 for the primary copy of a logical node, 1 for a slit duplicate.
  int node_copy(std::size_t p) const { return node_copy_[p]; }
  Point node_position(std::size_t p) const {
    return {origin_.x + node_i_[p] * hx_, origin_.y + node_j_[p] * hy_};
  }

  /// Physical copies of logical node (i, j), primary first.
  std::span<const std::uint32_t> copies(int i, int j) const;
  std::uint32_t primary(int i, int j) const { return copies(i, j).front(); }

  /// Mean offset from the node to the centers of the cells using it; tells
  /// the two faces of a slit apart.
  Vec2 interior_direction(std::size_t p) const;

  /// Cells (up to four) that reference physical node p.
  std::vector<std::size_t> node_cells(std::size_t p) const;

  /// Logical index of a point that lies on a node (within 1e-9 cells).
  std::optional<std::pair<int, int>> lattice_index(const Point& x) const;

  /// Physical node at lattice point x whose faces best match direction dir.
  std::optional<std::size_t> locate(const Point& x, const Vec2& dir) const;

  bool on_boundary(std::size_t p) const {
    return node_i_[p] == 0 || node_j_[p] == 0 || node_i_[p] == nx_ || node_j_[p] == ny_;
  }

  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }

  /// Sub-grid over cells [i0, i1) x [j0, j1) with a new origin and spacing.
  /// Node copies are inherited, never recomputed; `source` maps each new
  /// physical node to its id in this grid.
  struct Window {
    GridPtr grid;
    std::vector<std::size_t> source;
  };
  Window window(int i0, int j0, int i1, int j1, const Point& new_origin, double new_hx,
                double new_hy, std::optional<SlitSpec> new_slit) const;

  /// Same lattice, node count and cell table.
  bool same_layout(const Grid& other) const;

 private:
  Grid() = default;
  void finalize();

  int nx_ = 0;
  int ny_ = 0;
  double hx_ = 0.0;
  double hy_ = 0.0;
  Point origin_;
  std::optional<SlitSpec> slit_;

  std::vector<CellNodes> cells_;
  std::vector<int> node_i_;
  std::vector<int> node_j_;
  std::vector<std::uint8_t> node_copy_;
  std::vector<std::uint32_t> logical_offset_;  // size logical+1, into logical_nodes_
  std::vector<std::uint32_t> logical_nodes_;
  std::vector<BoundaryEdge> boundary_edges_;
};

/// Per-cell quadrature weights restricting integrals to a disk.
struct BallMask {
  Point center;
  double radius = 0.0;
  std::vector<double> cell_weights;
  bool truncated = false;

  double area() const;
  static BallMask whole(const Grid& grid);
};

/// Cells fully inside the disk get their full area, cells fully outside get
/// zero, and boundary cells are sampled on a 4x4 sub-cell lattice.
BallMask ball_mask(const Grid& grid, const Point& center, double radius);

}  // namespace vfrac
