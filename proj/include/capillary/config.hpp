#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "capillary/bounds.hpp"
#include "capillary/domain.hpp"
#include "capillary/energy.hpp"
#include "capillary/io.hpp"
#include "capillary/minimize.hpp"
#include "capillary/pde.hpp"

namespace capillary {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

// Flat "key = value" file with dotted section names and '#' comments.
class KeyValueFile {
 public:
  static KeyValueFile parse(const std::string& text) {
    KeyValueFile kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
      };
      if (trim(line).empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config line " + std::to_string(lineno) + " has no '='");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + " has no key");
      kv.entries_[key] = value;
    }
    return kv;
  }

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  std::string get_string(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("missing config key: " + key);
    return it->second;
  }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? entries_.at(key) : fallback;
  }

  double get_double(const std::string& key) const { return to_double(key, get_string(key)); }

  double get_double(const std::string& key, double fallback) const {
    return has(key) ? to_double(key, entries_.at(key)) : fallback;
  }

  long long get_int(const std::string& key, long long fallback) const {
    if (!has(key)) return fallback;
    try {
      return std::stoll(entries_.at(key));
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "' is not an integer");
    }
  }

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  static double to_double(const std::string& key, const std::string& s) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "' is not a number");
    }
  }

  std::map<std::string, std::string> entries_;
};

}  // namespace detail

// Adhesion coefficient specification: a constant, a value per outward side,
// or angular sectors (degrees, measured about the domain centroid).
struct BetaSpec {
  enum class Kind { constant, per_side, table };
  Kind kind = Kind::constant;
  double value = 0.0;
  double left = 0.0, right = 0.0, bottom = 0.0, top = 0.0;
  struct Sector {
    double from_deg = 0.0, to_deg = 0.0, value = 0.0;
  };
  std::vector<Sector> sectors;

  void check_magnitudes(double a) const {
    auto check = [&](double b) {
      if (!(std::abs(b) <= 1.0 - a + 1e-15))
        throw ConfigError("adhesion coefficient violates |beta| <= 1 - a");
    };
    switch (kind) {
      case Kind::constant:
        check(value);
        break;
      case Kind::per_side:
        check(left);
        check(right);
        check(bottom);
        check(top);
        break;
      case Kind::table:
        if (sectors.empty()) throw ConfigError("beta table must not be empty");
        for (const auto& s : sectors) check(s.value);
        break;
    }
  }
};

struct BallSpec {
  double center_x = 0.0, center_y = 0.0, radius = 0.0;
};

struct ContinuationSpec {
  double boundary_value = 1.0;
  std::string boundary_file;  // density CSV; g = -ln v on the flagged ring
  double sigma_step = 0.1;
  double min_sigma_step = 1e-3;
  double newton_tolerance = 1e-10;
  int newton_max_iterations = 50;
};

struct RadialSpec {
  double R0 = 1.0;
  double beta = 0.0;
  double tolerance = 1e-10;
  int steps = 4096;
};

struct RunConfig {
  DomainSpec domain;
  int resolution = 64;
  double margin_a = 0.5;
  BetaSpec beta;
  Weights weights;
  SolverConfig solver;
  std::optional<double> c_R;
  std::string output_dir = "out";
  std::uint64_t seed = 1;
  BallSpec ball;
  ContinuationSpec continuation;
  RadialSpec radial;
  IterationParams lemmas;
  bool has_lemmas = false;
};

inline RunConfig parse_config_text(const std::string& text) {
  const auto kv = detail::KeyValueFile::parse(text);
  RunConfig rc;

  const std::string shape = kv.get_string("domain.shape", "rectangle");
  if (shape == "rectangle") {
    rc.domain = DomainSpec::make_rectangle(kv.get_double("domain.width", 1.0),
                                           kv.get_double("domain.height", 1.0));
  } else if (shape == "disk") {
    rc.domain = DomainSpec::make_disk(kv.get_double("domain.radius", 1.0));
  } else if (shape == "polygon") {
    std::vector<std::array<double, 2>> verts;
    std::istringstream vs(kv.get_string("domain.vertices"));
    std::string pair;
    while (std::getline(vs, pair, ';')) {
      std::istringstream ps(pair);
      double x, y;
      if (!(ps >> x >> y)) throw ConfigError("polygon vertex entries must be 'x y; x y; ...'");
      verts.push_back({x, y});
    }
    rc.domain = DomainSpec::make_polygon(std::move(verts));
  } else {
    throw ConfigError("unknown domain.shape: " + shape);
  }

  rc.resolution = static_cast<int>(kv.get_int("grid.resolution", 64));
  if (rc.resolution < 4) throw ConfigError("grid.resolution must be at least 4");

  rc.margin_a = kv.get_double("boundary.a", 0.5);
  if (!(rc.margin_a > 0.0) || rc.margin_a > 1.0) throw ConfigError("boundary.a must lie in (0, 1]");

  if (kv.has("boundary.beta.table")) {
    rc.beta.kind = BetaSpec::Kind::table;
    std::istringstream ts(kv.get_string("boundary.beta.table"));
    std::string entry;
    while (std::getline(ts, entry, ';')) {
      std::istringstream es(entry);
      BetaSpec::Sector s;
      if (!(es >> s.from_deg >> s.to_deg >> s.value))
        throw ConfigError("beta table entries must be 'from to value; ...'");
      rc.beta.sectors.push_back(s);
    }
  } else if (kv.has("boundary.beta.left") || kv.has("boundary.beta.right") ||
             kv.has("boundary.beta.bottom") || kv.has("boundary.beta.top")) {
    rc.beta.kind = BetaSpec::Kind::per_side;
    rc.beta.left = kv.get_double("boundary.beta.left", 0.0);
    rc.beta.right = kv.get_double("boundary.beta.right", 0.0);
    rc.beta.bottom = kv.get_double("boundary.beta.bottom", 0.0);
    rc.beta.top = kv.get_double("boundary.beta.top", 0.0);
  } else {
    rc.beta.kind = BetaSpec::Kind::constant;
    rc.beta.value = kv.get_double("boundary.beta", 0.0);
  }
  rc.beta.check_magnitudes(rc.margin_a);

  rc.weights.gamma1 = kv.get_double("weights.gamma1", 1.0);
  rc.weights.gamma2 = kv.get_double("weights.gamma2", 1.0);
  rc.weights.gamma3 = kv.get_double("weights.gamma3", 1.0);
  rc.weights.validate();

  rc.solver.v_floor = kv.get_double("solver.v_floor", 1e-8);
  rc.solver.max_iterations = static_cast<int>(kv.get_int("solver.max_iterations", 50000));
  rc.solver.grad_tolerance = kv.get_double("solver.grad_tolerance", 1e-8);
  rc.solver.energy_rel_tolerance = kv.get_double("solver.energy_rel_tolerance", 0.0);
  rc.solver.validate();

  if (kv.has("check.c_R")) {
    rc.c_R = kv.get_double("check.c_R");
    if (!(*rc.c_R > 0.0)) throw ConfigError("check.c_R must be positive");
  }

  rc.output_dir = kv.get_string("output.dir", "out");
  rc.seed = static_cast<std::uint64_t>(kv.get_int("seed", 1));

  rc.ball.center_x = kv.get_double("ball.center_x", 0.0);
  rc.ball.center_y = kv.get_double("ball.center_y", 0.0);
  rc.ball.radius = kv.get_double("ball.radius", 0.0);

  rc.continuation.boundary_value = kv.get_double("continuation.boundary_value", 1.0);
  rc.continuation.boundary_file = kv.get_string("continuation.boundary_file", "");
  rc.continuation.sigma_step = kv.get_double("continuation.sigma_step", 0.1);
  rc.continuation.min_sigma_step = kv.get_double("continuation.min_sigma_step", 1e-3);
  rc.continuation.newton_tolerance = kv.get_double("continuation.newton_tolerance", 1e-10);
  rc.continuation.newton_max_iterations =
      static_cast<int>(kv.get_int("continuation.newton_max_iterations", 50));

  rc.radial.R0 = kv.get_double("radial.R0",
                               rc.domain.shape == DomainSpec::Shape::disk ? rc.domain.radius : 1.0);
  if (kv.has("radial.beta"))
    rc.radial.beta = kv.get_double("radial.beta");
  else
    rc.radial.beta = rc.beta.kind == BetaSpec::Kind::constant ? rc.beta.value : 0.0;
  rc.radial.tolerance = kv.get_double("radial.tolerance", 1e-10);
  rc.radial.steps = static_cast<int>(kv.get_int("radial.steps", 4096));
  if (!(std::abs(rc.radial.beta) <= 1.0 - rc.margin_a + 1e-15))
    throw ConfigError("radial beta violates |beta| <= 1 - a");

  if (kv.has("lemmas.C") || kv.has("lemmas.gamma") || kv.has("lemmas.k0") || kv.has("lemmas.B0")) {
    rc.has_lemmas = true;
    rc.lemmas.C = kv.get_double("lemmas.C", 1.0);
    rc.lemmas.gamma = kv.get_double("lemmas.gamma", 2.0);
    rc.lemmas.k0 = kv.get_double("lemmas.k0", 1.0);
    rc.lemmas.B0 = kv.get_double("lemmas.B0", 0.0);
    rc.lemmas.validate();
  }
  return rc;
}

inline RunConfig parse_config(const std::string& path) {
  return parse_config_text(io::read_text(path));
}

// Per-edge adhesion coefficients from the specification.
inline BoundaryData make_boundary_data(const RunConfig& rc, const Grid& grid) {
  BoundaryData b;
  b.margin_a = rc.margin_a;
  const auto& edges = grid.boundary();
  b.beta.resize(edges.size(), 0.0);
  switch (rc.beta.kind) {
    case BetaSpec::Kind::constant:
      std::fill(b.beta.begin(), b.beta.end(), rc.beta.value);
      break;
    case BetaSpec::Kind::per_side:
      for (std::size_t e = 0; e < edges.size(); ++e) {
        const auto& edge = edges[e];
        if (edge.axis == 0)
          b.beta[e] = edge.sign > 0 ? rc.beta.right : rc.beta.left;
        else
          b.beta[e] = edge.sign > 0 ? rc.beta.top : rc.beta.bottom;
      }
      break;
    case BetaSpec::Kind::table: {
      double cx = 0.0, cy = 0.0;
      for (int c = 0; c < grid.inside_count(); ++c) {
        cx += grid.cell_x(c);
        cy += grid.cell_y(c);
      }
      cx /= grid.inside_count();
      cy /= grid.inside_count();
      for (std::size_t e = 0; e < edges.size(); ++e) {
        double ang = std::atan2(edges[e].mid_y - cy, edges[e].mid_x - cx) * 180.0 / std::numbers::pi;
        if (ang < 0.0) ang += 360.0;
        bool found = false;
        for (const auto& s : rc.beta.sectors) {
          if (ang >= s.from_deg && ang < s.to_deg) {
            b.beta[e] = s.value;
            found = true;
            break;
          }
        }
        if (!found) b.beta[e] = rc.beta.sectors.back().value;
      }
      break;
    }
  }
  b.validate(grid);
  return b;
}

// Effective configuration echo; re-parses to an equivalent RunConfig.
inline std::string render_config(const RunConfig& rc) {
  std::ostringstream out;
  auto put = [&](const std::string& key, const std::string& value) {
    out << key << " = " << value << '\n';
  };
  auto putd = [&](const std::string& key, double v) { put(key, io::format17(v)); };

  switch (rc.domain.shape) {
    case DomainSpec::Shape::rectangle:
      put("domain.shape", "rectangle");
      putd("domain.width", rc.domain.width);
      putd("domain.height", rc.domain.height);
      break;
    case DomainSpec::Shape::disk:
      put("domain.shape", "disk");
      putd("domain.radius", rc.domain.radius);
      break;
    case DomainSpec::Shape::polygon: {
      put("domain.shape", "polygon");
      std::ostringstream vs;
      for (std::size_t i = 0; i < rc.domain.vertices.size(); ++i) {
        if (i) vs << "; ";
        vs << io::format17(rc.domain.vertices[i][0]) << ' '
           << io::format17(rc.domain.vertices[i][1]);
      }
      put("domain.vertices", vs.str());
      break;
    }
  }
  put("grid.resolution", std::to_string(rc.resolution));
  putd("boundary.a", rc.margin_a);
  switch (rc.beta.kind) {
    case BetaSpec::Kind::constant:
      putd("boundary.beta", rc.beta.value);
      break;
    case BetaSpec::Kind::per_side:
      putd("boundary.beta.left", rc.beta.left);
      putd("boundary.beta.right", rc.beta.right);
      putd("boundary.beta.bottom", rc.beta.bottom);
      putd("boundary.beta.top", rc.beta.top);
      break;
    case BetaSpec::Kind::table: {
      std::ostringstream ts;
      for (std::size_t i = 0; i < rc.beta.sectors.size(); ++i) {
        if (i) ts << "; ";
        ts << io::format17(rc.beta.sectors[i].from_deg) << ' '
           << io::format17(rc.beta.sectors[i].to_deg) << ' '
           << io::format17(rc.beta.sectors[i].value);
      }
      put("boundary.beta.table", ts.str());
      break;
    }
  }
  putd("weights.gamma1", rc.weights.gamma1);
  putd("weights.gamma2", rc.weights.gamma2);
  putd("weights.gamma3", rc.weights.gamma3);
  putd("solver.v_floor", rc.solver.v_floor);
  put("solver.max_iterations", std::to_string(rc.solver.max_iterations));
  putd("solver.grad_tolerance", rc.solver.grad_tolerance);
  putd("solver.energy_rel_tolerance", rc.solver.energy_rel_tolerance);
  if (rc.c_R) putd("check.c_R", *rc.c_R);
  put("output.dir", rc.output_dir);
  put("seed", std::to_string(rc.seed));
  if (rc.ball.radius > 0.0) {
    putd("ball.center_x", rc.ball.center_x);
    putd("ball.center_y", rc.ball.center_y);
    putd("ball.radius", rc.ball.radius);
  }
  putd("continuation.boundary_value", rc.continuation.boundary_value);
  if (!rc.continuation.boundary_file.empty())
    put("continuation.boundary_file", rc.continuation.boundary_file);
  putd("continuation.sigma_step", rc.continuation.sigma_step);
  putd("continuation.min_sigma_step", rc.continuation.min_sigma_step);
  putd("continuation.newton_tolerance", rc.continuation.newton_tolerance);
  put("continuation.newton_max_iterations", std::to_string(rc.continuation.newton_max_iterations));
  putd("radial.R0", rc.radial.R0);
  putd("radial.beta", rc.radial.beta);
  putd("radial.tolerance", rc.radial.tolerance);
  put("radial.steps", std::to_string(rc.radial.steps));
  if (rc.has_lemmas) {
    putd("lemmas.C", rc.lemmas.C);
    putd("lemmas.gamma", rc.lemmas.gamma);
    putd("lemmas.k0", rc.lemmas.k0);
    putd("lemmas.B0", rc.lemmas.B0);
  }
  return out.str();
}

}  // namespace capillary
