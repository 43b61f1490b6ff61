#include "vfrac/energy.hpp"

#include <cmath>
#include <string>

#include "vfrac/error.hpp"

namespace vfrac {

void MaterialParams::validate() const {
  if (!(G_c > 0.0)) throw Error(Errc::InvalidArgument, "G_c must be positive");
  if (!(delta > 0.0)) throw Error(Errc::InvalidArgument, "delta must be positive");
  if (!(eta_delta >= 0.0) || eta_delta >= 1.0) throw Error(Errc::InvalidArgument, "eta_delta must lie in [0, 1)");
  if (!(mu_eq >= 0.0) || !(mu_neq >= 0.0) || !(mu() > 0.0)) {
    throw Error(Errc::InvalidArgument, "moduli must be nonnegative with positive sum");
  }
}

double split_modulus(const MaterialParams& params, Split split) {
  switch (split) {
    case Split::Full: return params.mu();
    case Split::EqOnly: return params.mu_eq;
    case Split::NeqOnly: return params.mu_neq;
  }
  return params.mu();
}

namespace {

void check_size(const std::vector<double>& v, std::size_t n, const char* name) {
  if (!v.empty() && v.size() != n) {
    throw Error(Errc::BoundaryPartitionInvalid, std::string(name) + " has wrong length");
  }
  for (double x : v) {
    if (!std::isfinite(x)) throw Error(Errc::BoundaryPartitionInvalid, std::string(name) + " is not finite");
  }
}

}  // namespace

void validate_loads(const Grid& grid, const LoadSpec& loads) {
  const std::size_t n = grid.node_count();
  check_size(loads.body, n, "body load");
  for (const auto& t : loads.traction) check_size(t, n, "traction");
  check_size(loads.dirichlet, n, "dirichlet data");
  if (!loads.pinned.empty() && loads.pinned.size() != n) {
    throw Error(Errc::BoundaryPartitionInvalid, "pinned mask has wrong length");
  }
  for (const auto& e : grid.boundary_edges()) {
    const auto& t = loads.traction_on(e.side);
    if (loads.side(e.side) != BoundaryKind::Dirichlet || t.empty()) continue;
    if (t[e.a] != 0.0 || t[e.b] != 0.0) {
      throw Error(Errc::BoundaryPartitionInvalid, "traction prescribed on the Dirichlet boundary");
    }
  }
}

std::vector<std::uint8_t> constrained_nodes(const Grid& grid, const LoadSpec& loads) {
  std::vector<std::uint8_t> fixed(grid.node_count(), 0);
  if (!loads.pinned.empty()) {
    for (std::size_t p = 0; p < fixed.size(); ++p) fixed[p] = loads.pinned[p] ? 1 : 0;
  }
  for (const auto& e : grid.boundary_edges()) {
    if (loads.side(e.side) == BoundaryKind::Dirichlet) fixed[e.a] = fixed[e.b] = 1;
  }
  return fixed;
}

std::vector<double> load_vector(const Grid& grid, const LoadSpec& loads) {
  std::vector<double> F(grid.node_count(), 0.0);
  if (!loads.body.empty()) {
    const double q = 0.25 * grid.cell_area();
    for (std::size_t c = 0; c < grid.cell_count(); ++c) {
      for (auto p : grid.cell_nodes(c)) F[p] += q * loads.body[p];
    }
  }
  for (const auto& e : grid.boundary_edges()) {
    const auto& t = loads.traction_on(e.side);
    if (loads.side(e.side) != BoundaryKind::Neumann || t.empty()) continue;
    F[e.a] += 0.5 * e.length * t[e.a];
    F[e.b] += 0.5 * e.length * t[e.b];
  }
  return F;
}

std::array<double, 16> cell_gradient_form(double hx, double hy) {
  std::array<double, 16> S{};
  auto add_pair = [&S](const std::array<double, 4>& d1, const std::array<double, 4>& d2, double s) {
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) {
        S[a * 4 + b] += s * (d1[a] * d1[b] + 0.5 * (d1[a] * d2[b] + d2[a] * d1[b]) + d2[a] * d2[b]);
      }
    }
  };
  add_pair({-1, 1, 0, 0}, {0, 0, -1, 1}, 1.0 / (3.0 * hx * hx));
  add_pair({-1, 0, 1, 0}, {0, -1, 0, 1}, 1.0 / (3.0 * hy * hy));
  return S;
}

double cell_gradient_sq(const Grid& grid, const std::vector<double>& val, std::size_t c) {
  const auto& n = grid.cell_nodes(c);
  const double u00 = val[n[0]], u10 = val[n[1]], u01 = val[n[2]], u11 = val[n[3]];
  const double p = u10 - u00, q = u11 - u01;
  const double r = u01 - u00, s = u11 - u10;
  return (p * p + p * q + q * q) / (3.0 * grid.hx() * grid.hx()) +
         (r * r + r * s + s * s) / (3.0 * grid.hy() * grid.hy());
}

double cell_stiffness(const Grid& grid, const PhaseField* v, double eta, std::size_t c) {
  if (v == nullptr) return 1.0;
  double s = 0.0;
  for (auto p : grid.cell_nodes(c)) s += (*v)[p] * (*v)[p];
  return eta + 0.25 * s;
}

namespace {

void check_mask(const Grid& g, const BallMask& mask) {
  if (mask.cell_weights.size() != g.cell_count()) throw Error(Errc::GridMismatch, "mask does not match grid");
}

}  // namespace

double elastic_energy(const ScalarField& u, const PhaseField* v, const MaterialParams& params,
                      const BallMask& mask, Split split) {
  const Grid& g = u.grid();
  if (v) require_same_grid(g, v->grid(), "elastic_energy: u and v on different grids");
  check_mask(g, mask);
  const double mu = split_modulus(params, split);
  double sum = 0.0;
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const double w = mask.cell_weights[c];
    if (w == 0.0) continue;
    sum += w * cell_stiffness(g, v, params.eta_delta, c) * cell_gradient_sq(g, u.values(), c);
  }
  return 0.5 * mu * sum;
}

double surface_energy(const PhaseField& v, const MaterialParams& params, const BallMask& mask) {
  const Grid& g = v.grid();
  check_mask(g, mask);
  double bulk = 0.0;
  double grad = 0.0;
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const double w = mask.cell_weights[c];
    if (w == 0.0) continue;
    double s = 0.0;
    for (auto p : g.cell_nodes(c)) s += (1.0 - v[p]) * (1.0 - v[p]);
    bulk += 0.25 * w * s;
    grad += w * cell_gradient_sq(g, v.values(), c);
  }
  return params.G_c * (bulk / (4.0 * params.delta) + params.delta * grad);
}

LoadPotential load_potential(const ScalarField& u, const LoadSpec& loads) {
  const Grid& g = u.grid();
  validate_loads(g, loads);
  LoadPotential out;
  if (!loads.body.empty()) out.body = body_load_on_mask(u, loads.body, BallMask::whole(g));
  for (const auto& e : g.boundary_edges()) {
    const auto& t = loads.traction_on(e.side);
    if (loads.side(e.side) != BoundaryKind::Neumann || t.empty()) continue;
    out.boundary += 0.5 * e.length * (t[e.a] * u[e.a] + t[e.b] * u[e.b]);
  }
  return out;
}

double body_load_on_mask(const ScalarField& u, const std::vector<double>& f, const BallMask& mask) {
  const Grid& g = u.grid();
  check_mask(g, mask);
  if (f.size() != g.node_count()) throw Error(Errc::GridMismatch, "body load does not match grid");
  double sum = 0.0;
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const double w = mask.cell_weights[c];
    if (w == 0.0) continue;
    double s = 0.0;
    for (auto p : g.cell_nodes(c)) s += f[p] * u[p];
    sum += 0.25 * w * s;
  }
  return sum;
}

EnergyLedger total_phase_energy(const ScalarField& u, const PhaseField* v, const MaterialParams& params,
                                const LoadSpec* loads, const BallMask& mask) {
  EnergyLedger led;
  led.elastic = elastic_energy(u, v, params, mask, Split::Full);
  led.surface = v ? surface_energy(*v, params, mask) : 0.0;
  if (loads) {
    const auto lp = load_potential(u, *loads);
    led.body_load_potential = lp.body;
    led.boundary_load_potential = lp.boundary;
  }
  led.merged_objective = led.elastic + led.surface - led.body_load_potential - led.boundary_load_potential;
  led.total = led.merged_objective;
  return led;
}

double griffith_ball_energy(const ScalarField& u_hat, const SlitSpec* slit, double G_c, double r, double mu) {
  const Grid& g = u_hat.grid();
  const auto mask = ball_mask(g, {0.0, 0.0}, r);
  double sum = 0.0;
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const double w = mask.cell_weights[c];
    if (w != 0.0) sum += w * cell_gradient_sq(g, u_hat.values(), c);
  }
  const double crack = slit ? slit->length_in_disk({0.0, 0.0}, r) : 0.0;
  return 0.5 * mu * sum + G_c * crack;
}

}  // namespace vfrac
