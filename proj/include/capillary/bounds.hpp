#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "capillary/domain.hpp"
#include "capillary/energy.hpp"
#include "capillary/field.hpp"

namespace capillary {

// Constants of the level-set recursion (h-k)B(h) <= C k B(k)^gamma.
struct IterationParams {
  double C = 1.0;
  double gamma = 2.0;
  double k0 = 1.0;
  double B0 = 0.0;  // B(k0)

  void validate() const {
    if (!(C > 0.0) || !std::isfinite(C)) throw std::invalid_argument("C must be positive and finite");
    if (!(gamma > 1.0) || !std::isfinite(gamma))
      throw std::invalid_argument("gamma must exceed 1 and be finite");
    if (!(k0 > 0.0) || !std::isfinite(k0))
      throw std::invalid_argument("k0 must be positive and finite");
    if (!(B0 >= 0.0) || !std::isfinite(B0))
      throw std::invalid_argument("B0 must be finite and nonnegative");
  }
};

// Partial product s_m = prod_{j=1..m} (1 + d / alpha^j); converges to a
// nonzero limit for alpha > 1, d > -alpha.
inline double s_sequence(double alpha, double d, int m) {
  if (!(alpha > 1.0)) throw std::invalid_argument("alpha must exceed 1");
  if (!(d > -alpha)) throw std::invalid_argument("d must exceed -alpha");
  if (m < 0) throw std::invalid_argument("m must be nonnegative");
  double s = 1.0;
  double pw = 1.0;
  for (int j = 1; j <= m; ++j) {
    pw *= alpha;
    s *= 1.0 + d / pw;
  }
  return s;
}

namespace detail {

inline double s_limit(double alpha, double d) {
  double s = 1.0;
  double pw = 1.0;
  for (int j = 1; j <= 10000; ++j) {
    pw *= alpha;
    const double next = s * (1.0 + d / pw);
    if (std::abs(next - s) <= 1e-12 * std::abs(next)) return next;
    s = next;
  }
  return s;
}

}  // namespace detail

struct StampacchiaResult {
  bool applicable = true;
  std::string diagnostic;
  double K = 0.0;
  double alpha = 0.0;
  double d = 0.0;
  std::vector<double> k_ladder;  // increasing levels converging to K
  // envelope_closed[m] is the proof's bound on B(k_m); envelope_certified[m]
  // is one recursion step applied to envelope_closed[m-1], so each induction
  // step is checked independently of the others.
  std::vector<double> envelope_certified;
  std::vector<double> envelope_closed;
};

// Vanishing level from the recursion (h-k)B(h) <= C k B(k)^gamma: fixes
// alpha = 2 and d = C B0^{gamma-1} 2^{gamma/(gamma-1)}, pushes the product to
// its limit, and certifies B(k_m) <= B0 2^{m/(1-gamma)} step by step.
inline StampacchiaResult stampacchia_bound(const IterationParams& p) {
  p.validate();
  StampacchiaResult r;
  r.alpha = 2.0;
  if (p.B0 == 0.0) {
    r.K = p.k0;
    r.d = 0.0;
    r.k_ladder = {p.k0};
    r.envelope_certified = {0.0};
    r.envelope_closed = {0.0};
    r.diagnostic = "B(k0) = 0: level k0 already vanishes";
    return r;
  }
  const double mu = 1.0 / (1.0 - p.gamma);
  r.d = p.C * std::pow(p.B0, p.gamma - 1.0) * std::pow(2.0, p.gamma / (p.gamma - 1.0));

  // k_m = k0 s_m with s_m = s_{m-1}(1 + d/2^m); the increment k_m - k_{m-1}
  // equals k0 s_{m-1} d / 2^m, used directly to avoid cancellation.
  r.k_ladder.push_back(p.k0);
  r.envelope_certified.push_back(p.B0);
  r.envelope_closed.push_back(p.B0);
  double s = 1.0, pw = 1.0;
  for (int m = 1; m <= 10000; ++m) {
    pw *= 2.0;
    const double increment = p.k0 * s * (r.d / pw);
    const double k_prev = r.k_ladder.back();
    const double k_next = k_prev + increment;
    s *= 1.0 + r.d / pw;
    r.k_ladder.push_back(k_next);
    const double e_prev = r.envelope_closed.back();
    // increment = k0 s_{m-1} d/2^m, so C k_{m-1} / increment = C 2^m / d
    r.envelope_certified.push_back(p.C * (pw / r.d) * std::pow(e_prev, p.gamma));
    r.envelope_closed.push_back(p.B0 * std::pow(2.0, mu * static_cast<double>(m)));
    if (increment <= 1e-12 * k_next) break;
  }
  r.K = r.k_ladder.back();
  return r;
}

// Variant for the recursion (h-k)B(h) <= C h B(k)^gamma.  Applicable only
// under the smallness condition C B0^{gamma-1} < 1; searches a deterministic
// (alpha, d) grid with C B0^{gamma-1} alpha^{gamma/(gamma-1)} <= d < alpha
// and returns the smallest K = k0 / lim s_m(alpha, -d).
inline StampacchiaResult stampacchia_bound_v2(const IterationParams& p,
                                              const std::vector<double>& alpha_grid = {},
                                              int d_points = 32) {
  p.validate();
  StampacchiaResult r;
  if (p.B0 == 0.0) {
    r.K = p.k0;
    r.k_ladder = {p.k0};
    r.envelope_certified = {0.0};
    r.envelope_closed = {0.0};
    r.diagnostic = "B(k0) = 0: level k0 already vanishes";
    return r;
  }
  const double cb = p.C * std::pow(p.B0, p.gamma - 1.0);
  if (cb >= 1.0) {
    r.applicable = false;
    r.diagnostic = "not applicable: C B(k0)^{gamma-1} >= 1";
    return r;
  }

  std::vector<double> alphas = alpha_grid;
  if (alphas.empty())
    for (int i = 1; i <= 30; ++i) alphas.push_back(1.0 + 0.1 * i);  // 1.1 .. 4.0

  double best_K = std::numeric_limits<double>::infinity();
  double best_alpha = 0.0, best_d = 0.0;
  for (double alpha : alphas) {
    const double d_lo = cb * std::pow(alpha, p.gamma / (p.gamma - 1.0));
    if (!(d_lo < alpha)) continue;
    for (int i = 0; i < d_points; ++i) {
      const double d = d_lo + (alpha - d_lo) * static_cast<double>(i) / d_points;
      const double s_inf = detail::s_limit(alpha, -d);
      if (!(s_inf > 0.0)) continue;
      const double K = p.k0 / s_inf;
      if (K < best_K) {
        best_K = K;
        best_alpha = alpha;
        best_d = d;
      }
    }
  }
  if (!std::isfinite(best_K)) {
    r.applicable = false;
    r.diagnostic = "not applicable: no feasible (alpha, d) on the search grid";
    return r;
  }

  r.K = best_K;
  r.alpha = best_alpha;
  r.d = best_d;

  // k_m = k_{m-1} / (1 - d/alpha^m); the increment equals k_m d / alpha^m.
  r.k_ladder.push_back(p.k0);
  r.envelope_certified.push_back(p.B0);
  r.envelope_closed.push_back(p.B0);
  double pw = 1.0;
  for (int m = 1; m <= 10000; ++m) {
    pw *= best_alpha;
    const double q = best_d / pw;
    const double k_prev = r.k_ladder.back();
    const double k_next = k_prev / (1.0 - q);
    const double increment = k_next * q;
    r.k_ladder.push_back(k_next);
    const double e_prev = r.envelope_closed.back();
    // increment = k_m d/alpha^m, so C k_m / increment = C alpha^m / d
    r.envelope_certified.push_back(p.C * (pw / best_d) * std::pow(e_prev, p.gamma));
    r.envelope_closed.push_back(p.B0 *
                                std::pow(best_alpha, -static_cast<double>(m) / (p.gamma - 1.0)));
    if (increment <= 1e-12 * k_next) break;
  }
  r.K = r.k_ladder.back();
  return r;
}

// |{v > k}|
inline double superlevel_measure(const ScalarField& v, const Grid& grid, double k) {
  if (!(k > 0.0)) throw std::invalid_argument("level k must be positive");
  require_size(v, grid);
  const double cell_area = grid.cell_size() * grid.cell_size();
  double area = 0.0;
  for (double x : v.values)
    if (x > k) area += cell_area;
  return area;
}

// |{v < 1/k}|
inline double sublevel_measure(const ScalarField& v, const Grid& grid, double k) {
  if (!(k > 0.0)) throw std::invalid_argument("level k must be positive");
  require_size(v, grid);
  const double cell_area = grid.cell_size() * grid.cell_size();
  const double threshold = 1.0 / k;
  double area = 0.0;
  for (double x : v.values)
    if (x < threshold) area += cell_area;
  return area;
}

struct SublevelDiagnostic {
  double k = 0.0;
  double measured = 0.0;  // |{v < 1/(2k)}|
  double bound = 0.0;     // (4|g1-g2||Omega| + g3(1-a)|Sigma|) / (g2 (ln 2k - 1))
  bool within = false;
};

struct HeightBoundReport {
  double min_v = 0.0;
  double max_v = 0.0;
  bool beta_nonpositive = false;
  bool beta_nonnegative = false;
  bool lower_bound_checked = false;  // beta <= 0: min >= e^{-1} - 1e-3
  bool lower_bound_pass = true;
  double lower_margin = 0.0;
  bool upper_bound_checked = false;  // beta >= 0: max <= max(1, initial sup) + 1e-3
  bool upper_bound_pass = true;
  double upper_margin = 0.0;
  double k_zero = 0.0;  // finite level with empty superlevel set
  double superlevel_at_k_zero = 0.0;
  std::vector<SublevelDiagnostic> sublevel_ladder;
  bool pass = true;
};

inline HeightBoundReport height_bound_report(const ScalarField& v_star, const Grid& grid,
                                             const BoundaryData& bdata, const Weights& weights = {},
                                             double initial_sup = 1.0) {
  require_density(v_star, grid);
  bdata.validate(grid);
  HeightBoundReport rep;
  rep.min_v = v_star.values[0];
  rep.max_v = v_star.values[0];
  for (double x : v_star.values) {
    rep.min_v = std::min(rep.min_v, x);
    rep.max_v = std::max(rep.max_v, x);
  }
  rep.beta_nonpositive = true;
  rep.beta_nonnegative = true;
  for (double b : bdata.beta) {
    if (b > 0.0) rep.beta_nonpositive = false;
    if (b < 0.0) rep.beta_nonnegative = false;
  }

  const double e_inv = std::exp(-1.0);
  if (rep.beta_nonpositive) {
    rep.lower_bound_checked = true;
    rep.lower_margin = rep.min_v - (e_inv - 1e-3);
    rep.lower_bound_pass = rep.lower_margin >= 0.0;
  }
  if (rep.beta_nonnegative) {
    rep.upper_bound_checked = true;
    const double bound = std::max(1.0, initial_sup) + 1e-3;
    rep.upper_margin = bound - rep.max_v;
    rep.upper_bound_pass = rep.upper_margin >= 0.0;
  }

  // the decreasing superlevel map reaches zero at a finite level
  rep.k_zero = std::max(rep.max_v * (1.0 + 1e-12), rep.max_v + 1e-300);
  rep.superlevel_at_k_zero = superlevel_measure(v_star, grid, rep.k_zero);

  for (double k = 2.0; k <= 256.0; k *= 2.0) {
    SublevelDiagnostic d;
    d.k = k;
    d.measured = sublevel_measure(v_star, grid, 2.0 * k);
    const double denom = weights.gamma2 * (std::log(2.0 * k) - 1.0);
    d.bound = denom > 0.0
                  ? (4.0 * std::abs(weights.gamma1 - weights.gamma2) * grid.area() +
                     weights.gamma3 * (1.0 - bdata.margin_a) * grid.boundary_length()) /
                        denom
                  : std::numeric_limits<double>::infinity();
    d.within = d.measured <= d.bound;
    rep.sublevel_ladder.push_back(d);
  }

  rep.pass = rep.lower_bound_pass && rep.upper_bound_pass && rep.superlevel_at_k_zero == 0.0;
  return rep;
}

struct TraceCheckReport {
  double boundary_integral = 0.0;  // integral of |v| over the discrete boundary
  double gradient_integral = 0.0;  // integral of |Dv|
  double weighted_l1 = 0.0;        // c_R integral of |v|
  double margin = 0.0;
  bool holds = false;
};

// Informational check of the trace estimate with a user-supplied c_R.
inline TraceCheckReport boundary_trace_check(const ScalarField& v, const Grid& grid, double c_R) {
  if (!(c_R > 0.0)) throw std::invalid_argument("c_R must be positive");
  require_size(v, grid);
  TraceCheckReport rep;
  for (const auto& e : grid.boundary())
    rep.boundary_integral += std::abs(v.values[static_cast<std::size_t>(e.owner)]) * e.length;
  const double cell_area = grid.cell_size() * grid.cell_size();
  for (int c = 0; c < grid.inside_count(); ++c) {
    const double gx = detail::fwd_x(grid, v.values, c);
    const double gy = detail::fwd_y(grid, v.values, c);
    rep.gradient_integral += std::sqrt(gx * gx + gy * gy) * cell_area;
    rep.weighted_l1 += c_R * std::abs(v.values[static_cast<std::size_t>(c)]) * cell_area;
  }
  rep.margin = rep.gradient_integral + rep.weighted_l1 - rep.boundary_integral;
  rep.holds = rep.margin >= -1e-12 * std::max(1.0, rep.boundary_integral);
  return rep;
}

}  // namespace capillary
