#include "vfrac/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "vfrac/error.hpp"

namespace vfrac {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::InvalidResolution: return "InvalidResolution";
    case Errc::SlitOffLattice: return "SlitOffLattice";
    case Errc::SlitTouchesBoundary: return "SlitTouchesBoundary";
    case Errc::InvalidSlit: return "InvalidSlit";
    case Errc::GridMismatch: return "GridMismatch";
    case Errc::InvalidField: return "InvalidField";
    case Errc::WindowTooCoarse: return "WindowTooCoarse";
    case Errc::WindowOutsideDomain: return "WindowOutsideDomain";
    case Errc::CenterOffLattice: return "CenterOffLattice";
    case Errc::BoundaryPartitionInvalid: return "BoundaryPartitionInvalid";
    case Errc::FloatingDomain: return "FloatingDomain";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::AnnulusEmpty: return "AnnulusEmpty";
    case Errc::TipOffLattice: return "TipOffLattice";
    case Errc::FamilyEmpty: return "FamilyEmpty";
    case Errc::ProgramEmpty: return "ProgramEmpty";
    case Errc::NoTipFound: return "NoTipFound";
    case Errc::FormatError: return "FormatError";
    case Errc::ConfigError: return "ConfigError";
    case Errc::NotDisconnecting: return "NotDisconnecting";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

double SlitSpec::total_length() const {
  double sum = 0.0;
  for (const auto& s : segments) sum += s.length();
  return sum;
}

double SlitSpec::length_in_disk(const Point& center, double radius) const {
  double sum = 0.0;
  for (const auto& s : segments) sum += segment_length_in_disk(s, center, radius);
  return sum;
}

SlitSpec polyline_slit(const std::vector<Point>& vertices, bool mouth_on_boundary) {
  if (vertices.size() < 2) throw Error(Errc::InvalidSlit, "a slit needs at least two vertices");
  SlitSpec slit;
  for (std::size_t k = 0; k + 1 < vertices.size(); ++k) {
    slit.segments.push_back({vertices[k], vertices[k + 1]});
  }
  slit.tip = vertices.back();
  slit.mouth_on_boundary = mouth_on_boundary;
  return slit;
}

namespace {

constexpr double kLatticeTol = 1e-9;

std::optional<int> snap(double value, double origin, double h, int n) {
  const double f = (value - origin) / h;
  const double r = std::round(f);
  if (std::abs(f - r) > kLatticeTol || r < 0 || r > n) return std::nullopt;
  return static_cast<int>(r);
}

struct UnionFind4 {
  std::array<int, 4> parent{0, 1, 2, 3};
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

Point Grid::cell_center(std::size_t c) const {
  const auto [i, j] = cell_index(c);
  return {origin_.x + (i + 0.5) * hx_, origin_.y + (j + 0.5) * hy_};
}

std::span<const std::uint32_t> Grid::copies(int i, int j) const {
  const std::size_t l = static_cast<std::size_t>(j) * (nx_ + 1) + i;
  return {logical_nodes_.data() + logical_offset_[l], logical_offset_[l + 1] - logical_offset_[l]};
}

std::vector<std::size_t> Grid::node_cells(std::size_t p) const {
  std::vector<std::size_t> out;
  const int i = node_i_[p];
  const int j = node_j_[p];
  // corner index of (i, j) inside cell (ci, cj)
  const std::array<std::array<int, 3>, 4> candidates{{{i, j, 0}, {i - 1, j, 1}, {i, j - 1, 2}, {i - 1, j - 1, 3}}};
  for (const auto& [ci, cj, corner] : candidates) {
    if (ci < 0 || cj < 0 || ci >= nx_ || cj >= ny_) continue;
    const std::size_t c = static_cast<std::size_t>(cj) * nx_ + ci;
    if (cells_[c][corner] == p) out.push_back(c);
  }
  return out;
}

Vec2 Grid::interior_direction(std::size_t p) const {
  const auto cells = node_cells(p);
  const Point x = node_position(p);
  Vec2 sum;
  for (auto c : cells) sum = sum + (cell_center(c) - x);
  if (cells.empty()) return sum;
  return (1.0 / static_cast<double>(cells.size())) * sum;
}

std::optional<std::pair<int, int>> Grid::lattice_index(const Point& x) const {
  const auto i = snap(x.x, origin_.x, hx_, nx_);
  const auto j = snap(x.y, origin_.y, hy_, ny_);
  if (!i || !j) return std::nullopt;
  return std::make_pair(*i, *j);
}

std::optional<std::size_t> Grid::locate(const Point& x, const Vec2& dir) const {
  const auto ij = lattice_index(x);
  if (!ij) return std::nullopt;
  const auto list = copies(ij->first, ij->second);
  if (list.size() == 1) return list.front();
  std::size_t best = list.front();
  double best_dot = -std::numeric_limits<double>::infinity();
  for (auto p : list) {
    const double d = interior_direction(p).dot(dir);
    if (d > best_dot) {
      best_dot = d;
      best = p;
    }
  }
  return best;
}

bool Grid::same_layout(const Grid& o) const {
  if (this == &o) return true;
  return nx_ == o.nx_ && ny_ == o.ny_ && hx_ == o.hx_ && hy_ == o.hy_ && origin_ == o.origin_ &&
         cells_ == o.cells_ && node_count() == o.node_count();
}

void Grid::finalize() {
  const std::size_t nl = logical_node_count();
  logical_offset_.assign(nl + 1, 0);
  for (std::size_t p = 0; p < node_i_.size(); ++p) {
    logical_offset_[static_cast<std::size_t>(node_j_[p]) * (nx_ + 1) + node_i_[p] + 1]++;
  }
  for (std::size_t l = 0; l < nl; ++l) logical_offset_[l + 1] += logical_offset_[l];
  logical_nodes_.assign(node_i_.size(), 0);
  std::vector<std::uint32_t> fill(logical_offset_.begin(), logical_offset_.end() - 1);
  for (std::size_t p = 0; p < node_i_.size(); ++p) {
    const std::size_t l = static_cast<std::size_t>(node_j_[p]) * (nx_ + 1) + node_i_[p];
    logical_nodes_[fill[l]++] = static_cast<std::uint32_t>(p);
  }

  boundary_edges_.clear();
  auto cell = [&](int ci, int cj) -> const CellNodes& {
    return cells_[static_cast<std::size_t>(cj) * nx_ + ci];
  };
  for (int cj = 0; cj < ny_; ++cj) boundary_edges_.push_back({Side::Left, cell(0, cj)[0], cell(0, cj)[2], hy_});
  for (int cj = 0; cj < ny_; ++cj) {
    boundary_edges_.push_back({Side::Right, cell(nx_ - 1, cj)[1], cell(nx_ - 1, cj)[3], hy_});
  }
  for (int ci = 0; ci < nx_; ++ci) boundary_edges_.push_back({Side::Bottom, cell(ci, 0)[0], cell(ci, 0)[1], hx_});
  for (int ci = 0; ci < nx_; ++ci) {
    boundary_edges_.push_back({Side::Top, cell(ci, ny_ - 1)[2], cell(ci, ny_ - 1)[3], hx_});
  }
}

GridPtr Grid::build(const Rect& rect, int nx, int ny, const std::optional<SlitSpec>& slit) {
  if (nx < 2 || ny < 2) {
    throw Error(Errc::InvalidResolution, "resolution must be at least 2x2, got " + std::to_string(nx) +
                                             "x" + std::to_string(ny));
  }
  if (!(rect.width() > 0.0) || !(rect.height() > 0.0)) {
    throw Error(Errc::InvalidArgument, "rectangle must have positive extent");
  }

  std::shared_ptr<Grid> g(new Grid());
  g->nx_ = nx;
  g->ny_ = ny;
  g->hx_ = rect.width() / nx;
  g->hy_ = rect.height() / ny;
  g->origin_ = rect.lo;
  g->slit_ = slit;

  const int nxn = nx + 1;
  const int nyn = ny + 1;
  // hedge(i, j): (i,j)-(i+1,j); vedge(i, j): (i,j)-(i,j+1)
  std::vector<std::uint8_t> hedge(static_cast<std::size_t>(nx) * nyn, 0);
  std::vector<std::uint8_t> vedge(static_cast<std::size_t>(nxn) * ny, 0);
  auto h_at = [&](int i, int j) -> std::uint8_t& { return hedge[static_cast<std::size_t>(j) * nx + i]; };
  auto v_at = [&](int i, int j) -> std::uint8_t& { return vedge[static_cast<std::size_t>(j) * nxn + i]; };
  auto is_h = [&](int i, int j) { return i >= 0 && i < nx && j >= 0 && j <= ny && h_at(i, j); };
  auto is_v = [&](int i, int j) { return i >= 0 && i <= nx && j >= 0 && j < ny && v_at(i, j); };

  if (slit) {
    if (slit->segments.empty()) throw Error(Errc::InvalidSlit, "slit has no segments");
    if (!slit->tip) throw Error(Errc::InvalidSlit, "slit has no designated tip");
    std::vector<int> degree(static_cast<std::size_t>(nxn) * nyn, 0);
    auto deg = [&](int i, int j) -> int& { return degree[static_cast<std::size_t>(j) * nxn + i]; };
    std::size_t edge_count = 0;
    for (const auto& s : slit->segments) {
      const auto a = g->lattice_index(s.a);
      const auto b = g->lattice_index(s.b);
      if (!a || !b) throw Error(Errc::SlitOffLattice, "slit endpoint is not a grid node");
      if (a->first != b->first && a->second != b->second) {
        throw Error(Errc::SlitOffLattice, "slit segment is not aligned with grid edges");
      }
      if (*a == *b) throw Error(Errc::InvalidSlit, "zero-length slit segment");
      if (a->second == b->second) {
        const int j = a->second;
        if (j == 0 || j == ny) throw Error(Errc::SlitTouchesBoundary, "slit runs along the boundary");
        for (int i = std::min(a->first, b->first); i < std::max(a->first, b->first); ++i) {
          if (h_at(i, j)) throw Error(Errc::InvalidSlit, "overlapping slit segments");
          h_at(i, j) = 1;
          deg(i, j)++;
          deg(i + 1, j)++;
          ++edge_count;
        }
      } else {
        const int i = a->first;
        if (i == 0 || i == nx) throw Error(Errc::SlitTouchesBoundary, "slit runs along the boundary");
        for (int j = std::min(a->second, b->second); j < std::max(a->second, b->second); ++j) {
          if (v_at(i, j)) throw Error(Errc::InvalidSlit, "overlapping slit segments");
          v_at(i, j) = 1;
          deg(i, j)++;
          deg(i, j + 1)++;
          ++edge_count;
        }
      }
    }
    const auto tip = g->lattice_index(*slit->tip);
    if (!tip) throw Error(Errc::SlitOffLattice, "slit tip is not a grid node");
    std::vector<std::pair<int, int>> ends;
    for (int j = 0; j < nyn; ++j) {
      for (int i = 0; i < nxn; ++i) {
        if (deg(i, j) > 2) throw Error(Errc::InvalidSlit, "slit branches; only simple chains are supported");
        if (deg(i, j) == 1) ends.emplace_back(i, j);
      }
    }
    if (ends.size() != 2) throw Error(Errc::InvalidSlit, "slit must be an open chain with two ends");
    if (*tip != ends[0] && *tip != ends[1]) throw Error(Errc::InvalidSlit, "tip is not an end of the slit");
    const auto mouth = (*tip == ends[0]) ? ends[1] : ends[0];

    // Connectivity: walk the chain from the mouth.
    std::size_t walked = 0;
    std::pair<int, int> cur = mouth;
    std::pair<int, int> prev{-1, -1};
    while (true) {
      const auto [i, j] = cur;
      std::array<std::pair<int, int>, 4> nb{{{i + 1, j}, {i - 1, j}, {i, j + 1}, {i, j - 1}}};
      std::array<bool, 4> link{is_h(i, j), is_h(i - 1, j), is_v(i, j), is_v(i, j - 1)};
      bool moved = false;
      for (int k = 0; k < 4; ++k) {
        if (link[k] && nb[k] != prev) {
          prev = cur;
          cur = nb[k];
          ++walked;
          moved = true;
          break;
        }
      }
      if (!moved || cur == *tip) break;
    }
    if (cur != *tip || walked != edge_count) throw Error(Errc::InvalidSlit, "slit segments are not connected");

    auto on_bnd = [&](int i, int j) { return i == 0 || j == 0 || i == nx || j == ny; };
    for (int j = 0; j < nyn; ++j) {
      for (int i = 0; i < nxn; ++i) {
        if (deg(i, j) == 0 || !on_bnd(i, j)) continue;
        const bool is_mouth = std::make_pair(i, j) == mouth;
        if (!(is_mouth && slit->mouth_on_boundary)) {
          throw Error(Errc::SlitTouchesBoundary, "slit touches the boundary at a node not declared as its mouth");
        }
      }
    }
    if (slit->mouth_on_boundary && !on_bnd(mouth.first, mouth.second)) {
      throw Error(Errc::InvalidSlit, "slit declared to meet the boundary but its mouth is interior");
    }
  }

  // Group the (up to four) cells around each node by connectivity across
  // non-slit edges; each group beyond the first gets its own copy.
  const std::size_t nl = static_cast<std::size_t>(nxn) * nyn;
  std::vector<std::array<std::uint8_t, 4>> quadrant_copy(nl);
  std::vector<std::uint8_t> ncopies(nl, 1);
  for (int j = 0; j < nyn; ++j) {
    for (int i = 0; i < nxn; ++i) {
      const std::size_t l = static_cast<std::size_t>(j) * nxn + i;
      const std::array<bool, 4> exists{i < nx && j < ny, i > 0 && j < ny, i > 0 && j > 0, i < nx && j > 0};
      const std::array<bool, 4> cut{is_v(i, j), is_h(i - 1, j), is_v(i, j - 1), is_h(i, j)};
      UnionFind4 uf;
      for (int q = 0; q < 4; ++q) {
        const int r = (q + 1) % 4;
        if (exists[q] && exists[r] && !cut[q]) uf.unite(q, r);
      }
      std::array<int, 4> label{-1, -1, -1, -1};
      int groups = 0;
      for (int q = 0; q < 4; ++q) {
        if (!exists[q]) continue;
        const int root = uf.find(q);
        if (label[root] < 0) label[root] = groups++;
        quadrant_copy[l][q] = static_cast<std::uint8_t>(label[root]);
      }
      ncopies[l] = static_cast<std::uint8_t>(std::max(groups, 1));
    }
  }

  std::vector<std::uint32_t> first(nl + 1, 0);
  for (std::size_t l = 0; l < nl; ++l) first[l + 1] = first[l] + ncopies[l];
  const std::size_t np = first[nl];
  g->node_i_.resize(np);
  g->node_j_.resize(np);
  g->node_copy_.resize(np);
  for (int j = 0; j < nyn; ++j) {
    for (int i = 0; i < nxn; ++i) {
      const std::size_t l = static_cast<std::size_t>(j) * nxn + i;
      for (std::uint32_t k = 0; k < ncopies[l]; ++k) {
        g->node_i_[first[l] + k] = i;
        g->node_j_[first[l] + k] = j;
        g->node_copy_[first[l] + k] = static_cast<std::uint8_t>(k);
      }
    }
  }

  g->cells_.resize(static_cast<std::size_t>(nx) * ny);
  for (int cj = 0; cj < ny; ++cj) {
    for (int ci = 0; ci < nx; ++ci) {
      auto& cn = g->cells_[static_cast<std::size_t>(cj) * nx + ci];
      // corner node -> quadrant of this cell as seen from the node
      const std::array<std::array<int, 3>, 4> corners{{{ci, cj, 0}, {ci + 1, cj, 1}, {ci, cj + 1, 3}, {ci + 1, cj + 1, 2}}};
      for (int k = 0; k < 4; ++k) {
        const auto [i, j, q] = corners[k];
        const std::size_t l = static_cast<std::size_t>(j) * nxn + i;
        cn[k] = first[l] + quadrant_copy[l][q];
      }
    }
  }
  g->finalize();
  return g;
}

Grid::Window Grid::window(int i0, int j0, int i1, int j1, const Point& new_origin, double new_hx,
                          double new_hy, std::optional<SlitSpec> new_slit) const {
  if (i0 < 0 || j0 < 0 || i1 > nx_ || j1 > ny_ || i1 - i0 < 1 || j1 - j0 < 1) {
    throw Error(Errc::WindowOutsideDomain, "window exceeds the grid");
  }
  std::shared_ptr<Grid> g(new Grid());
  g->nx_ = i1 - i0;
  g->ny_ = j1 - j0;
  g->hx_ = new_hx;
  g->hy_ = new_hy;
  g->origin_ = new_origin;
  g->slit_ = std::move(new_slit);

  std::vector<std::uint32_t> used;
  used.reserve(static_cast<std::size_t>(g->nx_ + 1) * (g->ny_ + 1) + 16);
  for (int cj = j0; cj < j1; ++cj) {
    for (int ci = i0; ci < i1; ++ci) {
      for (auto p : cells_[static_cast<std::size_t>(cj) * nx_ + ci]) used.push_back(p);
    }
  }
  std::sort(used.begin(), used.end());
  used.erase(std::unique(used.begin(), used.end()), used.end());

  Window out;
  out.source.assign(used.begin(), used.end());
  g->node_i_.resize(used.size());
  g->node_j_.resize(used.size());
  g->node_copy_.resize(used.size());
  for (std::size_t k = 0; k < used.size(); ++k) {
    g->node_i_[k] = node_i_[used[k]] - i0;
    g->node_j_[k] = node_j_[used[k]] - j0;
    const bool same_as_prev = k > 0 && g->node_i_[k] == g->node_i_[k - 1] && g->node_j_[k] == g->node_j_[k - 1];
    g->node_copy_[k] = same_as_prev ? static_cast<std::uint8_t>(g->node_copy_[k - 1] + 1) : 0;
  }
  auto rank = [&](std::uint32_t p) {
    return static_cast<std::uint32_t>(std::lower_bound(used.begin(), used.end(), p) - used.begin());
  };
  g->cells_.resize(static_cast<std::size_t>(g->nx_) * g->ny_);
  for (int cj = j0; cj < j1; ++cj) {
    for (int ci = i0; ci < i1; ++ci) {
      const auto& src = cells_[static_cast<std::size_t>(cj) * nx_ + ci];
      auto& dst = g->cells_[static_cast<std::size_t>(cj - j0) * g->nx_ + (ci - i0)];
      for (int k = 0; k < 4; ++k) dst[k] = rank(src[k]);
    }
  }
  g->finalize();
  out.grid = g;
  return out;
}

double BallMask::area() const {
  double sum = 0.0;
  for (double w : cell_weights) sum += w;
  return sum;
}

BallMask BallMask::whole(const Grid& grid) {
  BallMask m;
  m.center = {grid.origin().x + 0.5 * grid.rect().width(), grid.origin().y + 0.5 * grid.rect().height()};
  m.radius = std::numeric_limits<double>::infinity();
  m.cell_weights.assign(grid.cell_count(), grid.cell_area());
  return m;
}

BallMask ball_mask(const Grid& grid, const Point& center, double radius) {
  if (!(radius > 0.0)) throw Error(Errc::InvalidArgument, "ball radius must be positive");
  BallMask m;
  m.center = center;
  m.radius = radius;
  m.cell_weights.assign(grid.cell_count(), 0.0);

  const double hx = grid.hx();
  const double hy = grid.hy();
  // Center in cell units, snapped to the lattice when it sits on a node so
  // that sample offsets are exact integers times the spacing.
  auto cell_units = [](double v, double o, double h) {
    const double f = (v - o) / h;
    const double r = std::round(f);
    return std::abs(f - r) <= kLatticeTol ? r : f;
  };
  const double fx = cell_units(center.x, grid.origin().x, hx);
  const double fy = cell_units(center.y, grid.origin().y, hy);
  const double r2 = radius * radius;
  const double area = grid.cell_area();

  const Rect rect = grid.rect();
  m.truncated = center.x - radius < rect.lo.x || center.x + radius > rect.hi.x ||
                center.y - radius < rect.lo.y || center.y + radius > rect.hi.y;

  for (int cj = 0; cj < grid.ny(); ++cj) {
    const double y0 = (cj - fy) * hy;
    const double y1 = (cj + 1 - fy) * hy;
    const double ymin = (y0 > 0.0) ? y0 : (y1 < 0.0 ? -y1 : 0.0);
    const double ymax = std::max(std::abs(y0), std::abs(y1));
    for (int ci = 0; ci < grid.nx(); ++ci) {
      const double x0 = (ci - fx) * hx;
      const double x1 = (ci + 1 - fx) * hx;
      const double xmin = (x0 > 0.0) ? x0 : (x1 < 0.0 ? -x1 : 0.0);
      const double xmax = std::max(std::abs(x0), std::abs(x1));
      double w = 0.0;
      if (xmax * xmax + ymax * ymax <= r2) {
        w = area;
      } else if (xmin * xmin + ymin * ymin < r2) {
        int inside = 0;
        for (int sy = 0; sy < 4; ++sy) {
          const double dy = (cj - fy + (sy + 0.5) / 4.0) * hy;
          for (int sx = 0; sx < 4; ++sx) {
            const double dx = (ci - fx + (sx + 0.5) / 4.0) * hx;
            if (dx * dx + dy * dy <= r2) ++inside;
          }
        }
        w = area * inside / 16.0;
      }
      m.cell_weights[static_cast<std::size_t>(cj) * grid.nx() + ci] = w;
    }
  }
  return m;
}

}  // namespace vfrac
