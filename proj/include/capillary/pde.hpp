#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "capillary/domain.hpp"
#include "capillary/energy.hpp"
#include "capillary/field.hpp"

namespace capillary {

namespace detail {

// A (cell, coefficient) dependency of a difference quotient.
struct Dep {
  int cell;
  double coef;
};

using DepList = std::vector<Dep>;

// Derivative in one direction from whatever neighbors exist: central when
// both, one-sided when one, zero when none.
inline double one_dir_derivative(const std::vector<double>& u, int c, int hi, int lo, double h,
                                 DepList* deps = nullptr) {
  if (hi >= 0 && lo >= 0) {
    if (deps) {
      deps->push_back({hi, 0.5 / h});
      deps->push_back({lo, -0.5 / h});
    }
    return (u[static_cast<std::size_t>(hi)] - u[static_cast<std::size_t>(lo)]) / (2.0 * h);
  }
  if (hi >= 0) {
    if (deps) {
      deps->push_back({hi, 1.0 / h});
      deps->push_back({c, -1.0 / h});
    }
    return (u[static_cast<std::size_t>(hi)] - u[static_cast<std::size_t>(c)]) / h;
  }
  if (lo >= 0) {
    if (deps) {
      deps->push_back({c, 1.0 / h});
      deps->push_back({lo, -1.0 / h});
    }
    return (u[static_cast<std::size_t>(c)] - u[static_cast<std::size_t>(lo)]) / h;
  }
  return 0.0;
}

// Nonlinear operator F(u) = div(Du/W) - sigma (u - 1/W) over a neighbor
// table.  Face W uses the face gradient (normal forward difference plus the
// averaged transverse derivative); the zero-order W is cell-centered.
class MeanCurvatureOperator {
 public:
  MeanCurvatureOperator(const std::vector<std::array<int, 4>>& neighbors, double h)
      : nb_(neighbors), h_(h) {}

  double face_flux(const std::vector<double>& u, int a, int b, int axis) const {
    const double dn = (u[static_cast<std::size_t>(b)] - u[static_cast<std::size_t>(a)]) / h_;
    const double dt = transverse_pair(u, a, b, axis);
    return dn / std::sqrt(1.0 + dn * dn + dt * dt);
  }

  double cell_w(const std::vector<double>& u, int c) const {
    const auto& n = nb_[static_cast<std::size_t>(c)];
    const double dx = one_dir_derivative(u, c, n[0], n[1], h_);
    const double dy = one_dir_derivative(u, c, n[2], n[3], h_);
    return std::sqrt(1.0 + dx * dx + dy * dy);
  }

  double divergence(const std::vector<double>& u, int c) const {
    const auto& n = nb_[static_cast<std::size_t>(c)];
    double div = 0.0;
    if (n[0] >= 0) div += face_flux(u, c, n[0], 0);
    if (n[1] >= 0) div -= face_flux(u, n[1], c, 0);
    if (n[2] >= 0) div += face_flux(u, c, n[2], 1);
    if (n[3] >= 0) div -= face_flux(u, n[3], c, 1);
    return div / h_;
  }

  double residual_cell(const std::vector<double>& u, int c, double sigma) const {
    return divergence(u, c) - sigma * (u[static_cast<std::size_t>(c)] - 1.0 / cell_w(u, c));
  }

  // Row contributions of the flux through face (a -> b); the caller applies
  // the divergence sign and the 1/h factor.
  void face_flux_derivatives(const std::vector<double>& u, int a, int b, int axis,
                             DepList& out) const {
    const double dn = (u[static_cast<std::size_t>(b)] - u[static_cast<std::size_t>(a)]) / h_;
    DepList tdeps;
    const double dt = transverse_pair(u, a, b, axis, &tdeps);
    const double w2 = 1.0 + dn * dn + dt * dt;
    const double q3 = 1.0 / (w2 * std::sqrt(w2));
    const double dphi_dn = (1.0 + dt * dt) * q3;
    const double dphi_dt = -dn * dt * q3;
    out.push_back({b, dphi_dn / h_});
    out.push_back({a, -dphi_dn / h_});
    for (const auto& d : tdeps) out.push_back({d.cell, dphi_dt * d.coef});
  }

  // d/du of -sigma (u_c - 1/W_c)
  void zero_order_derivatives(const std::vector<double>& u, int c, double sigma,
                              DepList& out) const {
    out.push_back({c, -sigma});
    const auto& n = nb_[static_cast<std::size_t>(c)];
    DepList dx_deps, dy_deps;
    const double dx = one_dir_derivative(u, c, n[0], n[1], h_, &dx_deps);
    const double dy = one_dir_derivative(u, c, n[2], n[3], h_, &dy_deps);
    const double w2 = 1.0 + dx * dx + dy * dy;
    const double q3 = 1.0 / (w2 * std::sqrt(w2));
    for (const auto& d : dx_deps) out.push_back({d.cell, sigma * (-dx * q3) * d.coef});
    for (const auto& d : dy_deps) out.push_back({d.cell, sigma * (-dy * q3) * d.coef});
  }

 private:
  double transverse_pair(const std::vector<double>& u, int a, int b, int axis,
                         DepList* deps = nullptr) const {
    const int hi = axis == 0 ? 2 : 0;
    const int lo = axis == 0 ? 3 : 1;
    DepList da, db;
    const double ta = one_dir_derivative(u, a, nb_[static_cast<std::size_t>(a)][hi],
                                         nb_[static_cast<std::size_t>(a)][lo], h_,
                                         deps ? &da : nullptr);
    const double tb = one_dir_derivative(u, b, nb_[static_cast<std::size_t>(b)][hi],
                                         nb_[static_cast<std::size_t>(b)][lo], h_,
                                         deps ? &db : nullptr);
    if (deps) {
      for (const auto& d : da) deps->push_back({d.cell, 0.5 * d.coef});
      for (const auto& d : db) deps->push_back({d.cell, 0.5 * d.coef});
    }
    return 0.5 * (ta + tb);
  }

  const std::vector<std::array<int, 4>>& nb_;
  double h_;
};

}  // namespace detail

// Per-cell residual of the capillary Euler-Lagrange equation
// r = div(Du/W) - u + 1/W.  Fluxes through mask boundaries are dropped, so
// interior cells (all four neighbors present) carry the meaningful values.
inline std::vector<double> el_residual(const ScalarField& u, const Grid& grid) {
  require_size(u, grid);
  detail::MeanCurvatureOperator op(grid.neighbor_table(), grid.cell_size());
  std::vector<double> r(static_cast<std::size_t>(grid.inside_count()));
  for (int c = 0; c < grid.inside_count(); ++c)
    r[static_cast<std::size_t>(c)] = op.residual_cell(u.values, c, 1.0);
  return r;
}

// Contact-angle residual (Du . nu)/W - beta per boundary edge, with one-sided
// differences into the domain.
inline std::vector<double> boundary_residual(const ScalarField& u, const BoundaryData& bdata,
                                             const Grid& grid) {
  require_size(u, grid);
  bdata.validate(grid);
  const double h = grid.cell_size();
  std::vector<double> res;
  res.reserve(grid.boundary().size());
  for (std::size_t e = 0; e < grid.boundary().size(); ++e) {
    const auto& edge = grid.boundary()[e];
    const int c = edge.owner;
    const auto& n = grid.neighbors(c);
    // one-sided derivative toward the wall on the edge axis, whatever is
    // available on the other axis
    double dx = 0.0, dy = 0.0;
    if (edge.axis == 0) {
      if (edge.inward >= 0)
        dx = edge.sign * (u.values[static_cast<std::size_t>(c)] -
                          u.values[static_cast<std::size_t>(edge.inward)]) / h;
      dy = detail::one_dir_derivative(u.values, c, n[2], n[3], h);
    } else {
      if (edge.inward >= 0)
        dy = edge.sign * (u.values[static_cast<std::size_t>(c)] -
                          u.values[static_cast<std::size_t>(edge.inward)]) / h;
      dx = detail::one_dir_derivative(u.values, c, n[0], n[1], h);
    }
    const double w = std::sqrt(1.0 + dx * dx + dy * dy);
    res.push_back((dx * edge.normal_x + dy * edge.normal_y) / w - bdata.beta[e]);
  }
  return res;
}

struct NewtonConfig {
  double tolerance = 1e-10;  // residual sup-norm
  int max_iterations = 50;
  double min_damping = 1e-8;
};

struct NewtonStats {
  bool converged = false;
  int iterations = 0;
  double final_residual = 0.0;
  std::vector<double> residual_history;  // sup-norms, including the initial one
};

struct DirichletSolution {
  std::vector<double> u;  // aligned with BallSubset::cells
  NewtonStats stats;
};

namespace detail {

// Local problem on a ball subset: unknowns are the non-flagged cells,
// flagged cells hold fixed Dirichlet values.
class BallProblem {
 public:
  BallProblem(const Grid& grid, const BallSubset& ball) : h_(grid.cell_size()) {
    const std::size_t n = ball.cells.size();
    local_nb_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      const auto& gn = grid.neighbors(ball.cells[k]);
      for (int d = 0; d < 4; ++d)
        local_nb_[k][d] = gn[d] >= 0 ? ball.local_of(gn[d]) : -1;
    }
    unknown_of_.assign(n, -1);
    for (std::size_t k = 0; k < n; ++k)
      if (!ball.is_flagged[k]) {
        unknown_of_[k] = static_cast<int>(rows_.size());
        rows_.push_back(static_cast<int>(k));
      }
  }

  int unknown_count() const { return static_cast<int>(rows_.size()); }
  const std::vector<int>& rows() const { return rows_; }
  const std::vector<std::array<int, 4>>& neighbor_table() const { return local_nb_; }

  double residual_norm(const MeanCurvatureOperator& op, const std::vector<double>& u,
                       double sigma, std::vector<double>* out = nullptr) const {
    double norm = 0.0;
    if (out) out->assign(rows_.size(), 0.0);
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const double f = op.residual_cell(u, rows_[i], sigma);
      if (out) (*out)[i] = f;
      norm = std::max(norm, std::abs(f));
    }
    return norm;
  }

  Eigen::SparseMatrix<double> jacobian(const MeanCurvatureOperator& op,
                                       const std::vector<double>& u, double sigma) const {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(rows_.size() * 12);
    DepList deps;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const int c = rows_[i];
      const auto& n = local_nb_[static_cast<std::size_t>(c)];
      auto add_face = [&](int a, int b, int axis, double sign) {
        deps.clear();
        op.face_flux_derivatives(u, a, b, axis, deps);
        for (const auto& d : deps) {
          const int col = unknown_of_[static_cast<std::size_t>(d.cell)];
          if (col >= 0)
            trip.emplace_back(static_cast<int>(i), col, sign * d.coef / h_);
        }
      };
      if (n[0] >= 0) add_face(c, n[0], 0, 1.0);
      if (n[1] >= 0) add_face(n[1], c, 0, -1.0);
      if (n[2] >= 0) add_face(c, n[2], 1, 1.0);
      if (n[3] >= 0) add_face(n[3], c, 1, -1.0);
      deps.clear();
      op.zero_order_derivatives(u, c, sigma, deps);
      for (const auto& d : deps) {
        const int col = unknown_of_[static_cast<std::size_t>(d.cell)];
        if (col >= 0) trip.emplace_back(static_cast<int>(i), col, d.coef);
      }
    }
    Eigen::SparseMatrix<double> J(unknown_count(), unknown_count());
    J.setFromTriplets(trip.begin(), trip.end());
    return J;
  }

 private:
  double h_;
  std::vector<std::array<int, 4>> local_nb_;
  std::vector<int> unknown_of_;
  std::vector<int> rows_;
};

}  // namespace detail

// Damped Newton solve of div(Du/W) = sigma (-1/W + u) on the ball with u = g
// on the flagged ring.  g is aligned with BallSubset::flagged.  An initial
// iterate aligned with BallSubset::cells may be supplied for warm starts.
inline DirichletSolution solve_dirichlet(const Grid& grid, const BallSubset& ball,
                                         const std::vector<double>& g, double sigma,
                                         const NewtonConfig& config = {},
                                         const std::vector<double>* warm_start = nullptr) {
  if (sigma < 0.0 || sigma > 1.0) throw std::invalid_argument("sigma must lie in [0, 1]");
  if (g.size() != ball.flagged.size())
    throw std::invalid_argument("Dirichlet data size does not match flagged ring");
  for (double gv : g)
    if (!std::isfinite(gv)) throw std::invalid_argument("Dirichlet data must be bounded");

  detail::BallProblem problem(grid, ball);
  if (problem.unknown_count() == 0)
    throw std::invalid_argument("ball has no interior cells to solve on");

  std::vector<double> u(ball.cells.size(), 0.0);
  double gmean = 0.0;
  for (double gv : g) gmean += gv;
  gmean /= static_cast<double>(g.size());
  if (warm_start) {
    if (warm_start->size() != ball.cells.size())
      throw std::invalid_argument("warm start size does not match ball subset");
    u = *warm_start;
  } else {
    std::fill(u.begin(), u.end(), gmean);
  }
  // pin Dirichlet values
  {
    std::size_t fi = 0;
    for (std::size_t k = 0; k < ball.cells.size(); ++k)
      if (ball.is_flagged[k]) u[k] = g[fi++];
  }

  detail::MeanCurvatureOperator op(problem.neighbor_table(), grid.cell_size());
  DirichletSolution sol;
  std::vector<double> f;
  double norm = problem.residual_norm(op, u, sigma, &f);
  sol.stats.residual_history.push_back(norm);

  std::vector<double> u_trial(u.size());
  for (int it = 0; it < config.max_iterations; ++it) {
    if (norm <= config.tolerance) {
      sol.stats.converged = true;
      break;
    }
    Eigen::SparseMatrix<double> J = problem.jacobian(op, u, sigma);
    Eigen::VectorXd rhs(problem.unknown_count());
    for (int i = 0; i < problem.unknown_count(); ++i) rhs[i] = -f[static_cast<std::size_t>(i)];
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(J);
    if (lu.info() != Eigen::Success) break;  // singular linearization
    Eigen::VectorXd delta = lu.solve(rhs);
    if (lu.info() != Eigen::Success) break;

    double t = 1.0;
    bool step_ok = false;
    while (t >= config.min_damping) {
      u_trial = u;
      for (int i = 0; i < problem.unknown_count(); ++i)
        u_trial[static_cast<std::size_t>(problem.rows()[static_cast<std::size_t>(i)])] +=
            t * delta[i];
      const double trial_norm = problem.residual_norm(op, u_trial, sigma);
      if (trial_norm <= (1.0 - 1e-4 * t) * norm) {
        u.swap(u_trial);
        norm = problem.residual_norm(op, u, sigma, &f);
        step_ok = true;
        break;
      }
      t *= 0.5;
    }
    if (!step_ok) break;  // damping floor: report failure
    sol.stats.residual_history.push_back(norm);
    ++sol.stats.iterations;
  }
  if (norm <= config.tolerance) sol.stats.converged = true;
  sol.stats.final_residual = norm;
  sol.u = std::move(u);
  return sol;
}

struct SigmaStep {
  double sigma = 0.0;
  int newton_iterations = 0;
  double final_residual = 0.0;
};

// Homotopy bookkeeping for the Dirichlet sub-problem solver; sigma is
// non-decreasing over a run.
struct ContinuationState {
  std::vector<SigmaStep> steps;
  double last_sigma = 0.0;
};

struct ContinuationConfig {
  double sigma_step = 0.1;
  double min_sigma_step = 1e-3;
  NewtonConfig newton;
};

struct ContinuationResult {
  std::vector<double> u;  // aligned with BallSubset::cells (final or partial)
  ContinuationState state;
  bool success = false;
};

// Solve the sigma = 1 problem by marching sigma from 0 with warm starts;
// Newton failures halve the sigma step until the minimum step underflows.
inline ContinuationResult continuation(const Grid& grid, const BallSubset& ball,
                                       const std::vector<double>& g,
                                       const ContinuationConfig& config = {}) {
  ContinuationResult res;
  double sigma = 0.0;
  DirichletSolution first = solve_dirichlet(grid, ball, g, 0.0, config.newton);
  res.state.steps.push_back({0.0, first.stats.iterations, first.stats.final_residual});
  res.state.last_sigma = 0.0;
  res.u = std::move(first.u);
  if (!first.stats.converged) return res;

  double step = config.sigma_step;
  while (sigma < 1.0) {
    const double target = std::min(1.0, sigma + step);
    DirichletSolution sol =
        solve_dirichlet(grid, ball, g, target, config.newton, &res.u);
    if (sol.stats.converged) {
      sigma = target;
      res.u = std::move(sol.u);
      res.state.steps.push_back({sigma, sol.stats.iterations, sol.stats.final_residual});
      res.state.last_sigma = sigma;
    } else {
      step *= 0.5;
      if (step < config.min_sigma_step) return res;  // abort with partial state
    }
  }
  res.success = true;
  return res;
}

struct HeightBoundCheck {
  double max_u = 0.0;
  double min_u = 0.0;
  double sup_g = 0.0;
  double upper_bound = 0.0;  // min(1, sup|g|)
  double lower_bound = 0.0;  // -sup|g|
  double upper_margin = 0.0;
  double lower_margin = 0.0;
  double tolerance = 1e-6;
  bool pass = false;
};

// Uniform height bound of the continuation family: the solution stays within
// [-sup|g|, min(1, sup|g|)] up to the stated tolerance.
inline HeightBoundCheck check_height_bound(const std::vector<double>& u_ball,
                                           const std::vector<double>& g, double tol = 1e-6) {
  if (u_ball.empty() || g.empty()) throw std::invalid_argument("empty height-bound input");
  HeightBoundCheck c;
  c.tolerance = tol;
  c.max_u = *std::max_element(u_ball.begin(), u_ball.end());
  c.min_u = *std::min_element(u_ball.begin(), u_ball.end());
  for (double gv : g) c.sup_g = std::max(c.sup_g, std::abs(gv));
  c.upper_bound = std::min(1.0, c.sup_g);
  c.lower_bound = -c.sup_g;
  c.upper_margin = c.upper_bound + tol - c.max_u;
  c.lower_margin = c.min_u - (c.lower_bound - tol);
  c.pass = c.upper_margin >= 0.0 && c.lower_margin >= 0.0;
  return c;
}

// Replace v by w inside the ball; w is aligned with BallSubset::cells.
inline ScalarField patch(const ScalarField& v, const BallSubset& ball,
                         const std::vector<double>& w) {
  if (w.size() != ball.cells.size())
    throw std::invalid_argument("patch data size does not match ball subset");
  ScalarField out = v;
  for (std::size_t k = 0; k < ball.cells.size(); ++k)
    out.values[static_cast<std::size_t>(ball.cells[k])] = w[k];
  return out;
}

// Ball-restricted energy: integral over the subset of sqrt(v^2 + |Dv|^2) plus
// the potential integrand, with the usual forward-difference stencils taken
// from the full field.  Fields agreeing outside the subset differ in total
// energy by exactly the difference of this quantity.
inline double ball_energy(const ScalarField& v, const Grid& grid, const BallSubset& ball) {
  require_size(v, grid);
  const double cell_area = grid.cell_size() * grid.cell_size();
  double sum = 0.0;
  for (int c : ball.cells) {
    const double gx = detail::fwd_x(grid, v.values, c);
    const double gy = detail::fwd_y(grid, v.values, c);
    const double vc = v.values[static_cast<std::size_t>(c)];
    if (!(vc > 0.0)) throw std::invalid_argument("ball energy needs positive densities");
    sum += (std::sqrt(vc * vc + gx * gx + gy * gy) + detail::potential_integrand(vc)) * cell_area;
  }
  return sum;
}

}  // namespace capillary
