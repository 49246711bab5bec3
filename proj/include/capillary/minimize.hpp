#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "capillary/domain.hpp"
#include "capillary/energy.hpp"
#include "capillary/field.hpp"

namespace capillary {

struct SolverConfig {
  double v_floor = 1e-8;            // projection floor, inactive at the minimizer
  int max_iterations = 50000;
  double grad_tolerance = 1e-8;     // sup-norm of projected gradient per unit area
  double energy_rel_tolerance = 0;  // 0 disables the energy-plateau stop
  double armijo_c = 1e-4;
  double min_step = 1e-14;          // backtracking floor before declaring failure

  void validate() const {
    if (!(v_floor > 0.0) || v_floor >= std::exp(-1.0))
      throw std::invalid_argument("v_floor must lie in (0, e^{-1})");
    if (max_iterations < 1) throw std::invalid_argument("max_iterations must be positive");
    if (!(grad_tolerance > 0.0)) throw std::invalid_argument("grad_tolerance must be positive");
    if (energy_rel_tolerance < 0.0)
      throw std::invalid_argument("energy_rel_tolerance must be nonnegative");
  }
};

struct TraceEntry {
  int iteration = 0;
  EnergyBreakdown energy;
  double grad_norm = 0.0;  // projected gradient, sup-norm per unit area
  double bv_norm = 0.0;    // sum |Dv| + sum |v| (cell areas included)
};

struct MinimizeResult {
  ScalarField v_star;
  std::vector<TraceEntry> trace;
  bool converged = false;
  int iterations = 0;
};

inline ScalarField truncate_above(const ScalarField& v, double k) {
  if (!(k > 0.0)) throw std::invalid_argument("truncation level must be positive");
  ScalarField w = v;
  for (double& x : w.values) x = std::min(x, k);
  return w;
}

inline ScalarField truncate_below(const ScalarField& v, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("truncation level must be positive");
  ScalarField w = v;
  for (double& x : w.values) x = std::max(x, eps);
  return w;
}

namespace detail {

inline double bv_norm(const ScalarField& v, const Grid& grid) {
  const double cell_area = grid.cell_size() * grid.cell_size();
  double sum = 0.0;
  for (int c = 0; c < grid.inside_count(); ++c) {
    const double gx = fwd_x(grid, v.values, c);
    const double gy = fwd_y(grid, v.values, c);
    sum += (std::sqrt(gx * gx + gy * gy) + std::abs(v.values[static_cast<std::size_t>(c)])) * cell_area;
  }
  return sum;
}

inline double projected_grad_sup(const std::vector<double>& x, const std::vector<double>& g,
                                 double floor, double inv_area) {
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = (x[i] <= floor && g[i] > 0.0) ? 0.0 : g[i];
    m = std::max(m, std::abs(r) * inv_area);
  }
  return m;
}

// Hessian of the discrete energy.  The surface integrand is |z| with
// z = (v_c, gx, gy) affine in (v_c, v_E, v_N), so its Hessian block is
// A^T (I - zz^T/|z|^2) A / |z|; the potential adds 1/v on the diagonal and
// the wetting term is linear.  Positive definite for positive fields.
inline Eigen::SparseMatrix<double> energy_hessian(const ScalarField& v, const Grid& grid,
                                                  const Weights& w) {
  const double h = grid.cell_size();
  const double cell_area = h * h;
  const int m = grid.inside_count();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(m) * 9);

  for (int c = 0; c < m; ++c) {
    const int e = grid.neighbors(c)[0];
    const int n = grid.neighbors(c)[2];
    const double vc = v.values[static_cast<std::size_t>(c)];
    const double gx = fwd_x(grid, v.values, c);
    const double gy = fwd_y(grid, v.values, c);
    const double s = std::sqrt(vc * vc + gx * gx + gy * gy);

    // rows of A for the active variables; z-space order (v, gx, gy)
    int vars[3] = {c, e, n};
    double A[3][3] = {{1.0, 0.0, 0.0},
                      {e >= 0 ? -1.0 / h : 0.0, e >= 0 ? 1.0 / h : 0.0, 0.0},
                      {n >= 0 ? -1.0 / h : 0.0, 0.0, n >= 0 ? 1.0 / h : 0.0}};
    const double z[3] = {vc / s, gx / s, gy / s};
    for (int a = 0; a < 3; ++a) {
      if (vars[a] < 0) continue;
      for (int b = 0; b < 3; ++b) {
        if (vars[b] < 0) continue;
        double hab = 0.0;
        for (int p = 0; p < 3; ++p)
          for (int q = 0; q < 3; ++q)
            hab += A[p][a] * ((p == q ? 1.0 : 0.0) - z[p] * z[q]) * A[q][b];
        hab *= w.gamma1 * cell_area / s;
        if (hab != 0.0) trip.emplace_back(vars[a], vars[b], hab);
      }
    }
    trip.emplace_back(c, c, w.gamma2 * cell_area / vc);
  }
  Eigen::SparseMatrix<double> H(m, m);
  H.setFromTriplets(trip.begin(), trip.end());
  return H;
}

}  // namespace detail

// Projected descent on {v >= v_floor}: Barzilai-Borwein steps with monotone
// Armijo backtracking drive the iterate into the convex basin; a damped
// Newton polish on the gradient system then pushes the projected gradient to
// tolerances far below what energy comparisons can resolve in doubles.  The
// discrete energy is convex, so any stationary point is the global minimizer.
inline MinimizeResult minimize(const Grid& grid, const BoundaryData& bdata,
                               const SolverConfig& config = {}, const Weights& weights = {},
                               const ScalarField* initial = nullptr) {
  config.validate();
  weights.validate();
  bdata.validate(grid);

  const double h = grid.cell_size();
  const double inv_area = 1.0 / (h * h);
  const int m = grid.inside_count();

  ScalarField x = initial ? *initial : ScalarField::constant(grid, 1.0);
  if (initial) require_density(*initial, grid);
  require_size(x, grid);
  x.role = FieldRole::density;
  for (double& xi : x.values) xi = std::max(xi, config.v_floor);

  MinimizeResult result;
  EnergyBreakdown eb = total_energy(x, bdata, grid, weights);
  std::vector<double> g = energy_gradient(x, bdata, grid, weights);
  double pg = detail::projected_grad_sup(x.values, g, config.v_floor, inv_area);
  result.trace.push_back({0, eb, pg, detail::bv_norm(x, grid)});

  const double phase1_target = std::max(config.grad_tolerance, 1e-4);
  std::vector<double> g_new, s(static_cast<std::size_t>(m)), y(static_cast<std::size_t>(m));
  double t = 0.0;
  int k = 0;
  while (k < config.max_iterations && pg > phase1_target) {
    if (k == 0) {
      double gmax = 0.0, xmin = x.values[0];
      for (std::size_t i = 0; i < x.values.size(); ++i) {
        gmax = std::max(gmax, std::abs(g[i]));
        xmin = std::min(xmin, x.values[i]);
      }
      t = gmax > 0.0 ? 0.1 * std::max(xmin, 1e-3) / gmax : 1.0;
    }

    bool accepted = false;
    double trial = t;
    ScalarField cand;
    cand.role = FieldRole::density;
    EnergyBreakdown eb_new;
    double dir_deriv = 0.0;
    while (trial >= config.min_step) {
      cand.values.assign(x.values.begin(), x.values.end());
      dir_deriv = 0.0;
      for (std::size_t i = 0; i < cand.values.size(); ++i) {
        cand.values[i] = std::max(config.v_floor, x.values[i] - trial * g[i]);
        dir_deriv += g[i] * (cand.values[i] - x.values[i]);
      }
      eb_new = total_energy(cand, bdata, grid, weights);
      if (eb_new.total <= eb.total + config.armijo_c * dir_deriv) {
        accepted = true;
        break;
      }
      trial *= 0.5;
    }
    if (!accepted) {
      // the smallest admissible step carries no measurable descent; hand
      // over to the polish phase
      if (std::abs(dir_deriv) <= 1e-14 * std::max(1.0, std::abs(eb.total))) break;
      throw std::runtime_error("minimize: line search failed below the minimum step");
    }

    g_new = energy_gradient(cand, bdata, grid, weights);
    double ss = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < cand.values.size(); ++i) {
      s[i] = cand.values[i] - x.values[i];
      y[i] = g_new[i] - g[i];
      ss += s[i] * s[i];
      sy += s[i] * y[i];
    }
    x.values.swap(cand.values);
    g.swap(g_new);
    eb = eb_new;
    pg = detail::projected_grad_sup(x.values, g, config.v_floor, inv_area);
    ++k;
    const double prev_total = result.trace.back().energy.total;
    result.trace.push_back({k, eb, pg, detail::bv_norm(x, grid)});

    if (config.energy_rel_tolerance > 0.0 &&
        prev_total - eb.total <= config.energy_rel_tolerance * std::max(1.0, std::abs(eb.total))) {
      result.converged = true;
      result.iterations = k;
      result.v_star = std::move(x);
      return result;
    }

    // Barzilai-Borwein trial step for the next iteration
    if (sy > 0.0 && ss > 0.0)
      t = std::clamp(ss / sy, 1e-14, 1e12);
    else
      t = std::min(trial * 2.0, 1e12);
  }

  // Newton polish: valid while the floor is inactive, which holds for any
  // minimizer of this energy (it stays above e^{-1} for beta <= 0 and above
  // a positive level otherwise).
  while (k < config.max_iterations && pg > config.grad_tolerance) {
    bool floor_active = false;
    for (std::size_t i = 0; i < x.values.size(); ++i)
      if (x.values[i] <= config.v_floor && g[i] > 0.0) floor_active = true;
    if (floor_active) break;

    const Eigen::SparseMatrix<double> H = detail::energy_hessian(x, grid, weights);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    ldlt.compute(H);
    if (ldlt.info() != Eigen::Success) break;
    Eigen::VectorXd rhs(m);
    for (int i = 0; i < m; ++i) rhs[i] = -g[static_cast<std::size_t>(i)];
    const Eigen::VectorXd delta = ldlt.solve(rhs);
    if (ldlt.info() != Eigen::Success) break;

    bool accepted = false;
    double damping = 1.0;
    ScalarField cand;
    cand.role = FieldRole::density;
    while (damping >= 1e-6) {
      cand.values.assign(x.values.begin(), x.values.end());
      for (int i = 0; i < m; ++i)
        cand.values[static_cast<std::size_t>(i)] =
            std::max(config.v_floor, x.values[static_cast<std::size_t>(i)] + damping * delta[i]);
      const EnergyBreakdown eb_new = total_energy(cand, bdata, grid, weights);
      g_new = energy_gradient(cand, bdata, grid, weights);
      const double pg_new = detail::projected_grad_sup(cand.values, g_new, config.v_floor, inv_area);
      // polish steps operate below the resolution of energy comparisons, so
      // acceptance is driven by the gradient; the energy guard only blocks
      // real ascents, not ulp-level ties
      if (pg_new < pg && eb_new.total <= eb.total + 1e-12 * std::max(1.0, std::abs(eb.total))) {
        x.values.swap(cand.values);
        g.swap(g_new);
        eb = eb_new;
        pg = pg_new;
        accepted = true;
        break;
      }
      damping *= 0.5;
    }
    if (!accepted) break;
    ++k;
    if (eb.total <= result.trace.back().energy.total)
      result.trace.push_back({k, eb, pg, detail::bv_norm(x, grid)});
  }

  result.converged = pg <= config.grad_tolerance;
  result.iterations = k;
  result.v_star = std::move(x);
  return result;
}

}  // namespace capillary
