#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "capillary/domain.hpp"
#include "capillary/energy.hpp"
#include "capillary/field.hpp"

namespace capillary {

// Axisymmetric solution of the capillary equation on a disk of radius R0:
// (1/r)(r u'/W)' = u - 1/W with u'(0) = 0 and contact condition
// u'(R0)/W(R0) = beta at the wall.
struct RadialProfile {
  std::vector<double> r;
  std::vector<double> u;
  std::vector<double> du;
  double beta = 0.0;
  double contact_residual = 0.0;
};

namespace detail {

// RK4 march of (u, p) with p = u'.  The first step leaves r = 0 on the series
// u ~ c + (c-1) r^2 / 4, which removes the 1/r singularity.
inline void radial_march(double center_height, double R0, int steps, std::vector<double>* r_out,
                         std::vector<double>* u_out, std::vector<double>* p_out) {
  const double dr = R0 / steps;
  auto p_rate = [](double r, double u, double p) {
    const double w2 = 1.0 + p * p;
    const double w = std::sqrt(w2);
    const double w3 = w2 * w;
    if (r <= 0.0) return 0.5 * w3 * (u - 1.0 / w);
    return w3 * (u - 1.0 / w) - w2 * p / r;
  };

  double r = dr;
  double u = center_height + 0.25 * (center_height - 1.0) * dr * dr;
  double p = 0.5 * (center_height - 1.0) * dr;
  if (r_out) {
    r_out->push_back(0.0);
    u_out->push_back(center_height);
    p_out->push_back(0.0);
    r_out->push_back(r);
    u_out->push_back(u);
    p_out->push_back(p);
  }
  for (int i = 1; i < steps; ++i) {
    const double k1u = p;
    const double k1p = p_rate(r, u, p);
    const double k2u = p + 0.5 * dr * k1p;
    const double k2p = p_rate(r + 0.5 * dr, u + 0.5 * dr * k1u, p + 0.5 * dr * k1p);
    const double k3u = p + 0.5 * dr * k2p;
    const double k3p = p_rate(r + 0.5 * dr, u + 0.5 * dr * k2u, p + 0.5 * dr * k2p);
    const double k4u = p + dr * k3p;
    const double k4p = p_rate(r + dr, u + dr * k3u, p + dr * k3p);
    u += dr * (k1u + 2.0 * k2u + 2.0 * k3u + k4u) / 6.0;
    p += dr * (k1p + 2.0 * k2p + 2.0 * k3p + k4p) / 6.0;
    r += dr;
    if (r_out) {
      r_out->push_back(r);
      u_out->push_back(u);
      p_out->push_back(p);
    }
  }
}

inline double wall_condition(double center_height, double R0, int steps, double beta) {
  std::vector<double> r, u, p;
  radial_march(center_height, R0, steps, &r, &u, &p);
  const double pw = p.back();
  return pw / std::sqrt(1.0 + pw * pw) - beta;
}

}  // namespace detail

// Shooting on the center height with bisection on the wall contact condition.
inline RadialProfile radial_solve(double R0, double beta, double tol = 1e-10, int steps = 4096) {
  if (!(R0 > 0.0)) throw std::invalid_argument("disk radius must be positive");
  if (!(std::abs(beta) < 1.0)) throw std::invalid_argument("|beta| must be below 1");
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (steps < 16) throw std::invalid_argument("integrator needs at least 16 steps");

  // the flat profile solves beta = 0 exactly
  auto assemble = [&](double c) {
    RadialProfile prof;
    detail::radial_march(c, R0, steps, &prof.r, &prof.u, &prof.du);
    prof.beta = beta;
    const double pw = prof.du.back();
    prof.contact_residual = pw / std::sqrt(1.0 + pw * pw) - beta;
    return prof;
  };

  double lo = 1.0, hi = 1.0;
  double flo = detail::wall_condition(lo, R0, steps, beta);
  if (std::abs(flo) <= tol) return assemble(lo);

  // expand a bracket away from the flat profile (wall slope grows with the
  // center height)
  double span = 0.25;
  double fhi = flo;
  for (int i = 0; i < 60; ++i) {
    if (flo < 0.0) {
      hi = 1.0 + span;
      fhi = detail::wall_condition(hi, R0, steps, beta);
      if (fhi > 0.0) break;
    } else {
      lo = 1.0 - span;
      flo = detail::wall_condition(lo, R0, steps, beta);
      if (flo < 0.0) break;
    }
    span *= 2.0;
    if (i == 59)
      throw std::runtime_error("radial_solve: bisection bracket not found");
  }
  if (flo > 0.0) std::swap(lo, hi);

  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    const double fm = detail::wall_condition(mid, R0, steps, beta);
    if (std::abs(fm) <= tol) return assemble(mid);
    if (fm < 0.0)
      lo = mid;
    else
      hi = mid;
    if (std::abs(hi - lo) < 1e-15 * std::max(1.0, std::abs(mid))) break;
  }
  RadialProfile prof = assemble(mid);
  if (std::abs(prof.contact_residual) > 10.0 * tol)
    throw std::runtime_error("radial_solve: contact condition not met to tolerance");
  return prof;
}

// Linear interpolation of a profile at radius r.
inline double profile_value(const RadialProfile& prof, double r) {
  if (prof.r.empty()) throw std::invalid_argument("empty radial profile");
  if (r <= prof.r.front()) return prof.u.front();
  if (r >= prof.r.back()) return prof.u.back();
  const auto it = std::upper_bound(prof.r.begin(), prof.r.end(), r);
  const std::size_t i = static_cast<std::size_t>(it - prof.r.begin());
  const double t = (r - prof.r[i - 1]) / (prof.r[i] - prof.r[i - 1]);
  return prof.u[i - 1] + t * (prof.u[i] - prof.u[i - 1]);
}

namespace detail {

// Energy terms that involve a single cell value: its own integrand, the
// integrands of the west/south cells whose forward stencils reach it, the
// potential, and the cell's wetting edges.  Written against the grid directly
// so the reference minimizer shares nothing with the gradient path.
class LocalEnergy {
 public:
  LocalEnergy(const Grid& grid, const BoundaryData& bdata, const Weights& w)
      : grid_(grid), weights_(w) {
    edge_coef_.assign(static_cast<std::size_t>(grid.inside_count()), 0.0);
    const auto& edges = grid.boundary();
    for (std::size_t e = 0; e < edges.size(); ++e)
      edge_coef_[static_cast<std::size_t>(edges[e].owner)] += bdata.beta[e] * edges[e].length;
  }

  // one-cell slice of the energy with everything but x frozen
  struct Slice {
    double h = 0.0, cell_area = 0.0;
    double ve = -1.0, vn = -1.0;      // forward-neighbor values, < 0 when absent
    bool has_e = false, has_n = false;
    double kw = -1.0, vw = 0.0;       // west integrand: sqrt(kw + ((x-vw)/h)^2)
    double ks = -1.0, vs = 0.0;       // south integrand likewise
    double gamma1 = 1.0, gamma2 = 1.0;
    double wetting_coef = 0.0;

    double operator()(double x) const {
      double gx = has_e ? (ve - x) / h : 0.0;
      double gy = has_n ? (vn - x) / h : 0.0;
      double e = std::sqrt(x * x + gx * gx + gy * gy);
      if (kw >= 0.0) {
        const double d = (x - vw) / h;
        e += std::sqrt(kw + d * d);
      }
      if (ks >= 0.0) {
        const double d = (x - vs) / h;
        e += std::sqrt(ks + d * d);
      }
      double total = (gamma1 * e + gamma2 * (x * std::log(x) - x + 1.0)) * cell_area;
      total -= wetting_coef * (1.0 - x);
      return total;
    }
  };

  Slice prepare(const std::vector<double>& v, int c) const {
    const double h = grid_.cell_size();
    Slice s;
    s.h = h;
    s.cell_area = h * h;
    s.gamma1 = weights_.gamma1;
    s.gamma2 = weights_.gamma2;
    s.wetting_coef = weights_.gamma3 * edge_coef_[static_cast<std::size_t>(c)];
    const auto& n = grid_.neighbors(c);
    if (n[0] >= 0) {
      s.has_e = true;
      s.ve = v[static_cast<std::size_t>(n[0])];
    }
    if (n[2] >= 0) {
      s.has_n = true;
      s.vn = v[static_cast<std::size_t>(n[2])];
    }
    const int w = n[1];
    if (w >= 0) {
      s.vw = v[static_cast<std::size_t>(w)];
      const int wn = grid_.neighbors(w)[2];
      const double gyw = wn >= 0 ? (v[static_cast<std::size_t>(wn)] - s.vw) / h : 0.0;
      s.kw = s.vw * s.vw + gyw * gyw;
    }
    const int so = n[3];
    if (so >= 0) {
      s.vs = v[static_cast<std::size_t>(so)];
      const int se = grid_.neighbors(so)[0];
      const double gxs = se >= 0 ? (v[static_cast<std::size_t>(se)] - s.vs) / h : 0.0;
      s.ks = s.vs * s.vs + gxs * gxs;
    }
    return s;
  }

 private:
  const Grid& grid_;
  Weights weights_;
  std::vector<double> edge_coef_;
};

template <typename F>
double golden_minimize(F&& f, double lo, double hi, double tol) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace detail

// Deliberately simple reference minimizer for small grids: cyclic coordinate
// descent with golden-section searches, run to stagnation.  Independent of
// the gradient-based solver.
inline ScalarField coarse_reference_minimize(const Grid& grid, const BoundaryData& bdata,
                                             const Weights& weights = {},
                                             double stagnation = 1e-10,
                                             const ScalarField* initial = nullptr,
                                             int max_sweeps = 200000) {
  if (grid.inside_count() > 16 * 16)
    throw std::invalid_argument("reference minimizer is restricted to tiny grids");
  bdata.validate(grid);
  weights.validate();

  ScalarField v = initial ? *initial : ScalarField::constant(grid, 1.0);
  if (initial) require_density(*initial, grid);
  require_size(v, grid);

  detail::LocalEnergy local(grid, bdata, weights);
  const int m = grid.inside_count();
  // the search bracket shrinks with the sweep-to-sweep movement; golden
  // results hugging an endpoint trigger re-expansion, so each coordinate
  // minimization stays exact
  double bracket = 0.0;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (int c = 0; c < m; ++c) {
      const double x0 = v.values[static_cast<std::size_t>(c)];
      const auto f = local.prepare(v.values, c);
      double width = sweep == 0 ? std::max(4.0, 4.0 * x0) : bracket;
      double x_new = x0;
      for (int tries = 0; tries < 40; ++tries) {
        const double lo = std::max(1e-9, x0 - width);
        const double hi = x0 + width;
        const double tol = std::max(1e-12 * std::max(1.0, hi), 4e-16 * hi);
        x_new = detail::golden_minimize(f, lo, hi, tol);
        const bool at_hi = x_new >= hi - 4.0 * tol;
        const bool at_lo = lo > 1e-9 && x_new <= lo + 4.0 * tol;
        if (!at_hi && !at_lo) break;
        width *= 8.0;
      }
      max_change = std::max(max_change, std::abs(x_new - x0));
      v.values[static_cast<std::size_t>(c)] = x_new;
    }
    if (max_change <= stagnation) break;
    bracket = std::max(1e4 * max_change, 1e-8);
  }
  return v;
}

// Discrete convolution with a truncated Gaussian, renormalized over the
// inside mask so constants are preserved.  Values stay inside [min v, max v].
inline ScalarField mollify(const ScalarField& v, const Grid& grid, double width) {
  require_size(v, grid);
  if (!(width >= grid.cell_size()))
    throw std::invalid_argument("mollification width must be at least the cell side");
  const double h = grid.cell_size();
  const int reach = static_cast<int>(std::ceil(width / h));
  const double sigma = 0.5 * width;

  ScalarField out = v;
  for (int c = 0; c < grid.inside_count(); ++c) {
    const double cx = grid.cell_x(c);
    const double cy = grid.cell_y(c);
    double acc = 0.0, wsum = 0.0;
    for (int dj = -reach; dj <= reach; ++dj)
      for (int di = -reach; di <= reach; ++di) {
        const double x = cx + di * h;
        const double y = cy + dj * h;
        const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
        if (d2 > width * width) continue;
        const int nb = grid.cell_at(x, y);
        if (nb < 0) continue;
        const double wgt = std::exp(-0.5 * d2 / (sigma * sigma));
        acc += wgt * v.values[static_cast<std::size_t>(nb)];
        wsum += wgt;
      }
    out.values[static_cast<std::size_t>(c)] = acc / wsum;
  }
  return out;
}

}  // namespace capillary
