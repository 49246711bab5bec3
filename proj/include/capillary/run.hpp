#pragma once

#include <cmath>
#include <filesystem>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "capillary/bounds.hpp"
#include "capillary/config.hpp"
#include "capillary/domain.hpp"
#include "capillary/energy.hpp"
#include "capillary/io.hpp"
#include "capillary/minimize.hpp"
#include "capillary/oracle.hpp"
#include "capillary/pde.hpp"

namespace capillary {

// Process exit codes of the command front end.
enum ExitCode : int {
  exit_ok = 0,
  exit_config_error = 2,
  exit_no_convergence = 3,
  exit_property_violation = 4,
};

namespace detail {

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw io::IoError("cannot create output directory: " + dir);
}

inline std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

inline ScalarField random_density(const Grid& grid, std::mt19937_64& rng, double lo = 0.2,
                                  double hi = 3.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  ScalarField f = ScalarField::constant(grid, 1.0);
  for (double& x : f.values) x = dist(rng);
  return f;
}

struct BvChainCheck {
  double tv = 0.0, weighted = 0.0, upper = 0.0;
  bool holds = false;
};

inline BvChainCheck bv_chain_check(const ScalarField& v, const Grid& grid) {
  BvChainCheck c;
  const double cell_area = grid.cell_size() * grid.cell_size();
  double tv = 0.0, upper = 0.0;
  for (int cidx = 0; cidx < grid.inside_count(); ++cidx) {
    const double gx = fwd_x(grid, v.values, cidx);
    const double gy = fwd_y(grid, v.values, cidx);
    const double g2 = gx * gx + gy * gy;
    tv += std::sqrt(g2) * cell_area;
    upper += (std::sqrt(1.0 + g2) + std::abs(v.values[static_cast<std::size_t>(cidx)])) * cell_area;
  }
  c.tv = tv;
  c.weighted = weighted_area(v, grid);
  c.upper = upper;
  c.holds = c.tv <= c.weighted && c.weighted <= c.upper;
  return c;
}

}  // namespace detail

inline int cmd_solve(const RunConfig& rc, const std::string& out_dir) {
  detail::ensure_dir(out_dir);
  const Grid grid = build_grid(rc.domain, rc.resolution);
  const BoundaryData bdata = make_boundary_data(rc, grid);

  const MinimizeResult result = minimize(grid, bdata, rc.solver, rc.weights);
  const EnergyBreakdown eb = total_energy(result.v_star, bdata, grid, rc.weights);

  io::write_field_csv(detail::join(out_dir, "v_star.csv"), grid, result.v_star);
  io::write_field_csv(detail::join(out_dir, "u_star.csv"), grid, to_height(result.v_star));
  io::write_json(detail::join(out_dir, "energy.json"), io::breakdown_json(eb));
  io::write_trace_csv(detail::join(out_dir, "trace.csv"), result.trace);
  io::write_text(detail::join(out_dir, "config.txt"), render_config(rc));
  return result.converged ? exit_ok : exit_no_convergence;
}

inline int cmd_verify(const RunConfig& rc, const std::string& field_csv,
                      const std::string& out_dir) {
  detail::ensure_dir(out_dir);
  const Grid grid = build_grid(rc.domain, rc.resolution);
  const BoundaryData bdata = make_boundary_data(rc, grid);
  const ScalarField v = io::read_field_csv(field_csv, grid, FieldRole::density);
  require_density(v, grid);

  nlohmann::ordered_json j;
  bool violated = false;

  // Euler-Lagrange residual of u = -ln v on interior cells
  {
    const ScalarField u = to_height(v);
    const std::vector<double> r = el_residual(u, grid);
    double l2 = 0.0, linf = 0.0;
    int interior = 0;
    for (int c = 0; c < grid.inside_count(); ++c) {
      const auto& n = grid.neighbors(c);
      if (n[0] < 0 || n[1] < 0 || n[2] < 0 || n[3] < 0) continue;
      ++interior;
      l2 += r[static_cast<std::size_t>(c)] * r[static_cast<std::size_t>(c)];
      linf = std::max(linf, std::abs(r[static_cast<std::size_t>(c)]));
    }
    l2 = interior > 0 ? std::sqrt(l2 / interior) : 0.0;
    j["el_residual"] = {{"interior_l2", l2}, {"interior_sup", linf}, {"interior_cells", interior}};

    const std::vector<double> br = boundary_residual(u, bdata, grid);
    double bmax = 0.0;
    for (double x : br) bmax = std::max(bmax, std::abs(x));
    j["boundary_residual"] = {{"sup", bmax}};
  }

  {
    const HeightBoundReport rep = height_bound_report(v, grid, bdata, rc.weights);
    j["height_bound"] = {{"min_v", rep.min_v},
                         {"max_v", rep.max_v},
                         {"lower_bound_checked", rep.lower_bound_checked},
                         {"lower_margin", rep.lower_margin},
                         {"upper_bound_checked", rep.upper_bound_checked},
                         {"upper_margin", rep.upper_margin},
                         {"k_zero", rep.k_zero},
                         {"pass", rep.pass}};
    nlohmann::ordered_json ladder = nlohmann::ordered_json::array();
    for (const auto& d : rep.sublevel_ladder)
      ladder.push_back({{"k", d.k}, {"measured", d.measured}, {"bound", d.bound},
                        {"within", d.within}});
    j["height_bound"]["sublevel_ladder"] = ladder;
    if (!rep.pass) violated = true;
  }

  {
    const double c_R = rc.c_R ? *rc.c_R : grid.boundary_length() / grid.area();
    const TraceCheckReport rep = boundary_trace_check(v, grid, c_R);
    j["trace_inequality"] = {{"c_R", c_R},
                             {"boundary_integral", rep.boundary_integral},
                             {"gradient_integral", rep.gradient_integral},
                             {"weighted_l1", rep.weighted_l1},
                             {"margin", rep.margin},
                             {"holds", rep.holds}};
  }

  {
    std::mt19937_64 rng(rc.seed);
    bool chain_ok = true;
    const detail::BvChainCheck own = detail::bv_chain_check(v, grid);
    chain_ok = chain_ok && own.holds;
    for (int i = 0; i < 20; ++i)
      chain_ok = chain_ok && detail::bv_chain_check(detail::random_density(grid, rng), grid).holds;

    bool convex_ok = true;
    for (int i = 0; i < 10; ++i) {
      const ScalarField a = detail::random_density(grid, rng);
      const ScalarField b = detail::random_density(grid, rng);
      ScalarField midf = a;
      for (std::size_t k = 0; k < midf.values.size(); ++k)
        midf.values[k] = 0.5 * (a.values[k] + b.values[k]);
      const double ja = total_energy(a, bdata, grid, rc.weights).total;
      const double jb = total_energy(b, bdata, grid, rc.weights).total;
      const double jm = total_energy(midf, bdata, grid, rc.weights).total;
      if (jm > 0.5 * ja + 0.5 * jb + 1e-12 * (std::abs(ja) + std::abs(jb))) convex_ok = false;
    }
    j["bv_chain"] = {{"pass", chain_ok}};
    j["convexity"] = {{"pass", convex_ok}};
    if (!chain_ok || !convex_ok) violated = true;
  }

  j["pass"] = !violated;
  io::write_json(detail::join(out_dir, "verify.json"), j);
  return violated ? exit_property_violation : exit_ok;
}

inline int cmd_radial(const RunConfig& rc, const std::string& out_dir) {
  detail::ensure_dir(out_dir);
  const RadialProfile prof =
      radial_solve(rc.radial.R0, rc.radial.beta, rc.radial.tolerance, rc.radial.steps);
  io::write_profile_csv(detail::join(out_dir, "profile.csv"), prof);
  nlohmann::ordered_json j;
  j["center_height"] = prof.u.front();
  j["wall_height"] = prof.u.back();
  j["contact_residual"] = prof.contact_residual;
  io::write_json(detail::join(out_dir, "radial.json"), j);
  return exit_ok;
}

inline int cmd_continuation(const RunConfig& rc, const std::string& out_dir) {
  detail::ensure_dir(out_dir);
  if (!(rc.ball.radius > 0.0))
    throw ConfigError("continuation requires a ball specification (ball.radius > 0)");
  const Grid grid = build_grid(rc.domain, rc.resolution);
  const BallSubset ball = interior_ball(grid, rc.ball.center_x, rc.ball.center_y, rc.ball.radius);

  std::vector<double> g;
  if (!rc.continuation.boundary_file.empty()) {
    const ScalarField vfield =
        io::read_field_csv(rc.continuation.boundary_file, grid, FieldRole::density);
    require_density(vfield, grid);
    for (int c : ball.flagged) g.push_back(-std::log(vfield.values[static_cast<std::size_t>(c)]));
  } else {
    g.assign(ball.flagged.size(), rc.continuation.boundary_value);
  }

  ContinuationConfig cc;
  cc.sigma_step = rc.continuation.sigma_step;
  cc.min_sigma_step = rc.continuation.min_sigma_step;
  cc.newton.tolerance = rc.continuation.newton_tolerance;
  cc.newton.max_iterations = rc.continuation.newton_max_iterations;
  const ContinuationResult res = continuation(grid, ball, g, cc);

  io::write_continuation_csv(detail::join(out_dir, "continuation.csv"), res.state);
  {
    std::ostringstream out;
    out << "x,y,value\n";
    for (std::size_t k = 0; k < ball.cells.size(); ++k)
      out << io::format17(grid.cell_x(ball.cells[k])) << ','
          << io::format17(grid.cell_y(ball.cells[k])) << ',' << io::format17(res.u[k]) << '\n';
    io::write_text(detail::join(out_dir, "u_ball.csv"), out.str());
  }
  const HeightBoundCheck hb = check_height_bound(res.u, g);
  nlohmann::ordered_json j;
  j["success"] = res.success;
  j["last_sigma"] = res.state.last_sigma;
  j["height_bound"] = {{"max_u", hb.max_u},      {"min_u", hb.min_u},
                       {"sup_g", hb.sup_g},      {"upper_margin", hb.upper_margin},
                       {"lower_margin", hb.lower_margin}, {"pass", hb.pass}};
  io::write_json(detail::join(out_dir, "continuation.json"), j);
  if (!res.success) return exit_no_convergence;
  return hb.pass ? exit_ok : exit_property_violation;
}

inline int cmd_lemmas(const RunConfig& rc, const std::string& out_dir, std::ostream& log) {
  detail::ensure_dir(out_dir);
  if (!rc.has_lemmas) throw ConfigError("lemmas command requires lemmas.* parameters");
  const StampacchiaResult r1 = stampacchia_bound(rc.lemmas);
  const StampacchiaResult r2 = stampacchia_bound_v2(rc.lemmas);

  auto envelope_ok = [](const StampacchiaResult& r) {
    for (std::size_t m = 0; m < r.envelope_certified.size(); ++m)
      if (r.envelope_certified[m] > r.envelope_closed[m] * (1.0 + 1e-12) + 1e-300) return false;
    return true;
  };

  log << "vanishing level K = " << io::format17(r1.K) << " (alpha = 2, d = "
      << io::format17(r1.d) << ")\n";
  log << "ladder size " << r1.k_ladder.size() << ", certified envelope "
      << (envelope_ok(r1) ? "holds" : "violated") << "\n";
  if (r2.applicable)
    log << "variant K = " << io::format17(r2.K) << " (alpha = " << io::format17(r2.alpha)
        << ", d = " << io::format17(r2.d) << "), certified envelope "
        << (envelope_ok(r2) ? "holds" : "violated") << "\n";
  else
    log << "variant " << r2.diagnostic << "\n";

  nlohmann::ordered_json j;
  j["K"] = r1.K;
  j["alpha"] = r1.alpha;
  j["d"] = r1.d;
  j["k_ladder"] = r1.k_ladder;
  j["envelope_certified"] = r1.envelope_certified;
  j["envelope_closed"] = r1.envelope_closed;
  j["envelope_holds"] = envelope_ok(r1);
  j["v2"] = {{"applicable", r2.applicable}, {"diagnostic", r2.diagnostic}};
  if (r2.applicable) {
    j["v2"]["K"] = r2.K;
    j["v2"]["alpha"] = r2.alpha;
    j["v2"]["d"] = r2.d;
    j["v2"]["envelope_holds"] = envelope_ok(r2);
  }
  io::write_json(detail::join(out_dir, "lemmas.json"), j);
  const bool ok = envelope_ok(r1) && (!r2.applicable || envelope_ok(r2));
  return ok ? exit_ok : exit_property_violation;
}

}  // namespace capillary
