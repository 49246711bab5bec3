#pragma once

#include <cmath>
#include <vector>

#include "capillary/domain.hpp"
#include "capillary/field.hpp"

namespace capillary {

struct Weights {
  double gamma1 = 1.0;  // surface
  double gamma2 = 1.0;  // potential
  double gamma3 = 1.0;  // wetting

  void validate() const {
    if (!(gamma1 > 0.0) || !(gamma2 > 0.0) || !(gamma3 > 0.0))
      throw std::invalid_argument("energy weights must be strictly positive");
  }
};

// Components of the transformed energy in the density variable.  Mass is a
// diagnostic only and never enters the total.
struct EnergyBreakdown {
  double surface = 0.0;
  double potential = 0.0;
  double wetting = 0.0;
  double mass = 0.0;
  double gamma1 = 1.0, gamma2 = 1.0, gamma3 = 1.0;
  double total = 0.0;
};

namespace detail {

// Forward differences, dropped (zero) where the neighbor is outside the mask.
inline double fwd_x(const Grid& g, const std::vector<double>& v, int c) {
  const int e = g.neighbors(c)[0];
  return e >= 0 ? (v[static_cast<std::size_t>(e)] - v[static_cast<std::size_t>(c)]) / g.cell_size() : 0.0;
}

inline double fwd_y(const Grid& g, const std::vector<double>& v, int c) {
  const int n = g.neighbors(c)[2];
  return n >= 0 ? (v[static_cast<std::size_t>(n)] - v[static_cast<std::size_t>(c)]) / g.cell_size() : 0.0;
}

inline double potential_integrand(double v) { return v * std::log(v) - v + 1.0; }

}  // namespace detail

// Integral of sqrt(v^2 + |Dv|^2) over the grid.
inline double weighted_area(const ScalarField& v, const Grid& grid) {
  require_density(v, grid);
  const double cell_area = grid.cell_size() * grid.cell_size();
  double sum = 0.0;
  for (int c = 0; c < grid.inside_count(); ++c) {
    const double gx = detail::fwd_x(grid, v.values, c);
    const double gy = detail::fwd_y(grid, v.values, c);
    const double vc = v.values[static_cast<std::size_t>(c)];
    sum += std::sqrt(vc * vc + gx * gx + gy * gy) * cell_area;
  }
  return sum;
}

// Integral of v ln v - v + 1; nonnegative, zero exactly at v == 1.
inline double potential_energy(const ScalarField& v, const Grid& grid) {
  require_density(v, grid);
  const double cell_area = grid.cell_size() * grid.cell_size();
  double sum = 0.0;
  for (double vc : v.values) sum += detail::potential_integrand(vc) * cell_area;
  return sum;
}

// -sum over boundary edges of beta (1 - v|_edge) ds, with the trace taken
// from the owning inside cell.
inline double wetting_energy(const ScalarField& v, const BoundaryData& bdata, const Grid& grid) {
  require_density(v, grid);
  bdata.validate(grid);
  double sum = 0.0;
  const auto& edges = grid.boundary();
  for (std::size_t e = 0; e < edges.size(); ++e)
    sum -= bdata.beta[e] * (1.0 - v.values[static_cast<std::size_t>(edges[e].owner)]) * edges[e].length;
  return sum;
}

// Fluid mass relative to the reference level: integral of (1 - v).
inline double mass(const ScalarField& v, const Grid& grid) {
  require_density(v, grid);
  const double cell_area = grid.cell_size() * grid.cell_size();
  double sum = 0.0;
  for (double vc : v.values) sum += (1.0 - vc) * cell_area;
  return sum;
}

inline EnergyBreakdown total_energy(const ScalarField& v, const BoundaryData& bdata,
                                    const Grid& grid, const Weights& w = {}) {
  w.validate();
  EnergyBreakdown b;
  b.surface = weighted_area(v, grid);
  b.potential = potential_energy(v, grid);
  b.wetting = wetting_energy(v, bdata, grid);
  b.mass = mass(v, grid);
  b.gamma1 = w.gamma1;
  b.gamma2 = w.gamma2;
  b.gamma3 = w.gamma3;
  b.total = w.gamma1 * b.surface + w.gamma2 * b.potential + w.gamma3 * b.wetting;
  return b;
}

// u = -ln v
inline ScalarField to_height(const ScalarField& v) {
  if (v.role != FieldRole::density) throw std::invalid_argument("to_height expects a density field");
  ScalarField u;
  u.role = FieldRole::height;
  u.values.reserve(v.values.size());
  for (double vc : v.values) {
    if (!(vc > 0.0)) throw std::invalid_argument("density fields must be strictly positive");
    u.values.push_back(-std::log(vc));
  }
  return u;
}

// v = e^{-u}
inline ScalarField to_density(const ScalarField& u) {
  if (u.role != FieldRole::height) throw std::invalid_argument("to_density expects a height field");
  ScalarField v;
  v.role = FieldRole::density;
  v.values.reserve(u.values.size());
  for (double uc : u.values) v.values.push_back(std::exp(-uc));
  return v;
}

// Exact gradient of the discrete total energy with respect to each cell value
// (the same stencils differentiated, boundary terms included).
inline std::vector<double> energy_gradient(const ScalarField& v, const BoundaryData& bdata,
                                           const Grid& grid, const Weights& w = {}) {
  require_density(v, grid);
  bdata.validate(grid);
  w.validate();
  const double h = grid.cell_size();
  const double cell_area = h * h;
  const int m = grid.inside_count();
  std::vector<double> grad(static_cast<std::size_t>(m), 0.0);

  for (int c = 0; c < m; ++c) {
    const double gx = detail::fwd_x(grid, v.values, c);
    const double gy = detail::fwd_y(grid, v.values, c);
    const double vc = v.values[static_cast<std::size_t>(c)];
    const double s = std::sqrt(vc * vc + gx * gx + gy * gy);
    // own integrand
    grad[static_cast<std::size_t>(c)] += w.gamma1 * cell_area * (vc - (gx + gy) / h) / s;
    // this cell appears in its east/north neighbors' difference stencils
    const int e = grid.neighbors(c)[0];
    if (e >= 0) grad[static_cast<std::size_t>(e)] += w.gamma1 * cell_area * gx / (h * s);
    const int n = grid.neighbors(c)[2];
    if (n >= 0) grad[static_cast<std::size_t>(n)] += w.gamma1 * cell_area * gy / (h * s);
    // potential
    grad[static_cast<std::size_t>(c)] += w.gamma2 * cell_area * std::log(vc);
  }
  const auto& edges = grid.boundary();
  for (std::size_t e = 0; e < edges.size(); ++e)
    grad[static_cast<std::size_t>(edges[e].owner)] += w.gamma3 * bdata.beta[e] * edges[e].length;
  return grad;
}

}  // namespace capillary
