#include "vfrac/solve.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "vfrac/error.hpp"

namespace vfrac {

void SolverSettings::validate() const {
  if (!(cg_tol > 0.0) || !(altmin_tol > 0.0)) throw Error(Errc::InvalidArgument, "tolerances must be positive");
  if (cg_max_iter < 1 || altmin_max_iter < 1 || active_set_max_sweeps < 1) {
    throw Error(Errc::InvalidArgument, "iteration caps must be at least 1");
  }
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

/// sum_c coef_c * |cell| * S_c, the stiffness of int coef |grad u|^2 / 2 doubled.
SpMat assemble_gradient_operator(const Grid& g, const std::vector<double>& coef) {
  const auto S = cell_gradient_form(g.hx(), g.hy());
  const double area = g.cell_area();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(g.cell_count() * 16);
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const double k = coef[c] * area;
    if (k == 0.0) continue;
    const auto& n = g.cell_nodes(c);
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) trip.emplace_back(n[a], n[b], k * S[a * 4 + b]);
    }
  }
  const auto n = static_cast<Eigen::Index>(g.node_count());
  SpMat K(n, n);
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

struct Reduced {
  SpMat A;
  Vec b;
  std::vector<Eigen::Index> free_index;  // -1 for fixed nodes
  std::vector<std::size_t> free_nodes;
};

/// Restrict K x = F to free nodes given fixed values.
Reduced reduce(const SpMat& K, const std::vector<double>& F, const std::vector<std::uint8_t>& fixed,
               const std::vector<double>& fixed_values) {
  Reduced r;
  const std::size_t n = fixed.size();
  r.free_index.assign(n, -1);
  for (std::size_t p = 0; p < n; ++p) {
    if (!fixed[p]) {
      r.free_index[p] = static_cast<Eigen::Index>(r.free_nodes.size());
      r.free_nodes.push_back(p);
    }
  }
  const auto nf = static_cast<Eigen::Index>(r.free_nodes.size());
  r.b.resize(nf);
  for (Eigen::Index k = 0; k < nf; ++k) r.b[k] = F[r.free_nodes[k]];
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(K.nonZeros()));
  for (Eigen::Index col = 0; col < K.outerSize(); ++col) {
    const auto jc = r.free_index[col];
    for (SpMat::InnerIterator it(K, col); it; ++it) {
      const auto ir = r.free_index[it.row()];
      if (ir < 0) continue;
      if (jc >= 0) {
        trip.emplace_back(ir, jc, it.value());
      } else {
        r.b[ir] -= it.value() * fixed_values[col];
      }
    }
  }
  r.A.resize(nf, nf);
  r.A.setFromTriplets(trip.begin(), trip.end());
  return r;
}

Vec conjugate_gradients(const SpMat& A, const Vec& b, const Vec& guess, const SolverSettings& settings,
                        LinearSolveInfo& info, const char* what) {
  if (A.rows() == 0) return Vec();
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    info = {0, 0.0};
    return Vec::Zero(b.size());
  }
  Vec x;
  Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper, Eigen::IncompleteCholesky<double>> cg;
  cg.setTolerance(settings.cg_tol);
  cg.setMaxIterations(settings.cg_max_iter);
  cg.compute(A);
  bool ok = false;
  if (cg.info() == Eigen::Success) {
    x = cg.solveWithGuess(b, guess);
    info.iterations = static_cast<int>(cg.iterations());
    ok = cg.info() == Eigen::Success;
  }
  if (!ok) {
    Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> jcg;
    jcg.setTolerance(settings.cg_tol);
    jcg.setMaxIterations(settings.cg_max_iter);
    jcg.compute(A);
    x = jcg.solveWithGuess(b, guess);
    info.iterations += static_cast<int>(jcg.iterations());
    ok = jcg.info() == Eigen::Success;
  }
  info.relative_residual = (b - A * x).norm() / bnorm;
  if (!ok && info.relative_residual > settings.cg_tol) {
    throw Error(Errc::NoConvergence, std::string(what) + ": conjugate gradients stalled at relative residual " +
                                         std::to_string(info.relative_residual));
  }
  return x;
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
  std::size_t find(std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

std::vector<double> stiffness_coefficients(const Grid& g, const PhaseField* v, const MaterialParams& params) {
  std::vector<double> coef(g.cell_count());
  for (std::size_t c = 0; c < coef.size(); ++c) coef[c] = params.mu() * cell_stiffness(g, v, params.eta_delta, c);
  return coef;
}

}  // namespace

ScalarField dirichlet_lift(const GridPtr& grid, const LoadSpec& loads) {
  const auto fixed = constrained_nodes(*grid, loads);
  std::vector<double> values(grid->node_count(), 0.0);
  if (!loads.dirichlet.empty()) {
    for (std::size_t p = 0; p < values.size(); ++p) {
      if (fixed[p]) values[p] = loads.dirichlet[p];
    }
  }
  return ScalarField(grid, std::move(values));
}

ScalarField solve_displacement(const GridPtr& grid, const PhaseField* v, const MaterialParams& params,
                               const LoadSpec& loads, const SolverSettings& settings, const ScalarField* initial,
                               LinearSolveInfo* info) {
  const Grid& g = *grid;
  params.validate();
  settings.validate();
  validate_loads(g, loads);
  if (v) require_same_grid(g, v->grid(), "solve_displacement: v on a different grid");
  if (initial) require_same_grid(g, initial->grid(), "solve_displacement: initial guess on a different grid");

  auto fixed = constrained_nodes(g, loads);
  std::vector<double> values = dirichlet_lift(grid, loads).values();
  const auto F = load_vector(g, loads);
  const auto coef = stiffness_coefficients(g, v, params);

  // Components of the stiffness graph must reach Dirichlet data.
  const std::size_t n = g.node_count();
  UnionFind uf(n);
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    if (coef[c] <= 0.0) continue;
    const auto& cn = g.cell_nodes(c);
    for (int k = 1; k < 4; ++k) uf.unite(cn[0], cn[k]);
  }
  std::vector<std::uint8_t> anchored(n, 0), loaded(n, 0);
  for (std::size_t p = 0; p < n; ++p) {
    const auto r = uf.find(p);
    if (fixed[p]) anchored[r] = 1;
    if (F[p] != 0.0) loaded[r] = 1;
  }
  for (std::size_t p = 0; p < n; ++p) {
    const auto r = uf.find(p);
    if (anchored[r]) continue;
    if (loaded[r]) {
      throw Error(Errc::FloatingDomain, "a loaded region is not connected to Dirichlet data");
    }
    fixed[p] = 1;
    values[p] = 0.0;
  }

  const SpMat K = assemble_gradient_operator(g, coef);
  const Reduced red = reduce(K, F, fixed, values);
  Vec guess = Vec::Zero(static_cast<Eigen::Index>(red.free_nodes.size()));
  if (initial) {
    for (std::size_t k = 0; k < red.free_nodes.size(); ++k) guess[static_cast<Eigen::Index>(k)] = (*initial)[red.free_nodes[k]];
  }
  LinearSolveInfo local;
  const Vec x = conjugate_gradients(red.A, red.b, guess, settings, local, "solve_displacement");
  for (std::size_t k = 0; k < red.free_nodes.size(); ++k) values[red.free_nodes[k]] = x[static_cast<Eigen::Index>(k)];
  if (info) *info = local;
  return ScalarField(grid, std::move(values));
}

std::vector<double> reaction_forces(const ScalarField& u, const PhaseField* v, const MaterialParams& params,
                                    const LoadSpec& loads) {
  const Grid& g = u.grid();
  const SpMat K = assemble_gradient_operator(g, stiffness_coefficients(g, v, params));
  const auto F = load_vector(g, loads);
  const auto fixed = constrained_nodes(g, loads);
  const Vec uv = Eigen::Map<const Vec>(u.values().data(), static_cast<Eigen::Index>(u.size()));
  const Vec Ku = K * uv;
  std::vector<double> R(g.node_count(), 0.0);
  for (std::size_t p = 0; p < R.size(); ++p) {
    if (fixed[p]) R[p] = Ku[static_cast<Eigen::Index>(p)] - F[p];
  }
  return R;
}

PhaseField solve_phase(const ScalarField& u, const MaterialParams& params, const PhaseField& v_upper, Split split,
                       const SolverSettings& settings, const PhaseField* initial, PhaseSolveInfo* info) {
  const Grid& g = u.grid();
  params.validate();
  settings.validate();
  require_same_grid(g, v_upper.grid(), "solve_phase: v_upper on a different grid");
  if (initial) require_same_grid(g, initial->grid(), "solve_phase: initial guess on a different grid");

  const std::size_t n = g.node_count();
  const double mu = split_modulus(params, split);
  const double area = g.cell_area();
  const double well = params.G_c / (2.0 * params.delta);

  // E_u(v) = 1/2 v^T H v - b^T v + const with lumped zeroth-order terms.
  std::vector<double> coef(g.cell_count(), 2.0 * params.G_c * params.delta);
  SpMat H = assemble_gradient_operator(g, coef);
  std::vector<double> diag(n, 0.0), b(n, 0.0);
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const double drive = mu * cell_gradient_sq(g, u.values(), c);
    for (auto p : g.cell_nodes(c)) {
      diag[p] += 0.25 * area * (drive + well);
      b[p] += 0.25 * area * well;
    }
  }
  {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(n);
    for (std::size_t p = 0; p < n; ++p) trip.emplace_back(p, p, diag[p]);
    SpMat D(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    D.setFromTriplets(trip.begin(), trip.end());
    H += D;
  }
  const Vec Hdiag = H.diagonal();

  const auto& hi = v_upper.values();
  std::vector<double> v(n);
  for (std::size_t p = 0; p < n; ++p) v[p] = std::clamp(initial ? (*initial)[p] : hi[p], 0.0, hi[p]);

  // state: 0 free, -1 at the lower bound, +1 at the upper bound
  std::vector<int> state(n, 0);
  for (std::size_t p = 0; p < n; ++p) {
    if (hi[p] <= 0.0) state[p] = 1;
  }

  const double bscale = *std::max_element(b.begin(), b.end());
  PhaseSolveInfo local;
  bool done = false;
  Vec grad;
  for (int sweep = 1; sweep <= settings.active_set_max_sweeps; ++sweep) {
    local.sweeps = sweep;
    std::vector<std::uint8_t> fixed(n, 0);
    for (std::size_t p = 0; p < n; ++p) {
      if (state[p] != 0) {
        fixed[p] = 1;
        v[p] = state[p] < 0 ? 0.0 : hi[p];
      }
    }
    const Reduced red = reduce(H, b, fixed, v);
    Vec guess(static_cast<Eigen::Index>(red.free_nodes.size()));
    for (std::size_t k = 0; k < red.free_nodes.size(); ++k) guess[static_cast<Eigen::Index>(k)] = v[red.free_nodes[k]];
    LinearSolveInfo lin;
    const Vec x = conjugate_gradients(red.A, red.b, guess, settings, lin, "solve_phase");
    local.cg_iterations += lin.iterations;
    for (std::size_t k = 0; k < red.free_nodes.size(); ++k) v[red.free_nodes[k]] = x[static_cast<Eigen::Index>(k)];

    const Vec vv = Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(n));
    grad = H * vv - Eigen::Map<const Vec>(b.data(), static_cast<Eigen::Index>(n));
    bool changed = false;
    for (std::size_t p = 0; p < n; ++p) {
      if (hi[p] <= 0.0) continue;
      const double trial = v[p] - grad[static_cast<Eigen::Index>(p)] / Hdiag[static_cast<Eigen::Index>(p)];
      const int next = trial <= 0.0 ? -1 : (trial >= hi[p] ? 1 : 0);
      if (next != state[p]) {
        state[p] = next;
        changed = true;
      }
    }
    if (!changed) {
      done = true;
      break;
    }
  }
  if (!done) throw Error(Errc::NoConvergence, "solve_phase: active set did not settle");

  double kkt = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    const double gp = grad[static_cast<Eigen::Index>(p)];
    double r = 0.0;
    if (hi[p] <= 0.0) r = 0.0;
    else if (state[p] == 0) r = std::abs(gp);
    else if (state[p] < 0) r = std::max(0.0, -gp);
    else r = std::max(0.0, gp);
    kkt = std::max(kkt, r);
  }
  local.kkt_residual = bscale > 0.0 ? kkt / bscale : kkt;
  for (std::size_t p = 0; p < n; ++p) v[p] = std::clamp(v[p], 0.0, hi[p]);
  if (info) *info = local;
  return PhaseField(u.grid_ptr(), std::move(v));
}

StaggeredResult alternate_minimize(const GridPtr& grid, const MaterialParams& params, const LoadSpec& loads,
                                   const PhaseField& v_init, const SolverSettings& settings, Split split,
                                   const ScalarField* u_init) {
  settings.validate();
  require_same_grid(*grid, v_init.grid(), "alternate_minimize: v_init on a different grid");
  const BallMask whole = BallMask::whole(*grid);
  auto merged = [&](const ScalarField& u, const PhaseField& v) {
    return total_phase_energy(u, &v, params, &loads, whole).merged_objective;
  };

  ScalarField u = u_init ? *u_init : dirichlet_lift(grid, loads);
  if (u_init) {
    // keep the guess but honor the current Dirichlet data
    const auto fixed = constrained_nodes(*grid, loads);
    std::vector<double> vals = u.values();
    for (std::size_t p = 0; p < vals.size(); ++p) {
      if (fixed[p]) vals[p] = loads.dirichlet.empty() ? 0.0 : loads.dirichlet[p];
    }
    u = ScalarField(grid, std::move(vals));
  }
  PhaseField v = v_init;

  StaggeredResult res{u, v, {}, 0, false, {}, 0.0};
  res.objective_history.push_back(merged(u, v));
  for (int it = 1; it <= settings.altmin_max_iter; ++it) {
    const double cycle_start = res.objective_history.back();
    u = solve_displacement(grid, &v, params, loads, settings, &u);
    res.objective_history.push_back(merged(u, v));
    PhaseField v_new = solve_phase(u, params, v_init, split, settings, &v);
    const double m = merged(u, v_new);
    res.objective_history.push_back(m);
    double dv = 0.0;
    for (std::size_t p = 0; p < v.size(); ++p) dv = std::max(dv, std::abs(v_new[p] - v[p]));
    v = std::move(v_new);
    res.iterations = it;
    res.last_dv = dv;
    const double decrease = cycle_start - m;
    const bool stalled = std::abs(decrease) <= settings.altmin_tol * std::max(std::abs(m), 1e-12);
    const bool fixed_point = dv <= settings.altmin_tol;
    if (split == Split::Full ? (stalled && fixed_point) : fixed_point) {
      res.converged = true;
      break;
    }
  }
  res.u = u;
  res.v = v;
  res.ledger = total_phase_energy(u, &v, params, &loads, whole);
  return res;
}

}  // namespace vfrac
