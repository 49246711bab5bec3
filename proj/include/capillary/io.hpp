#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "capillary/domain.hpp"
#include "capillary/energy.hpp"
#include "capillary/field.hpp"
#include "capillary/minimize.hpp"
#include "capillary/oracle.hpp"
#include "capillary/pde.hpp"

namespace capillary::io {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// 17 significant digits: lossless round-trip for doubles.
inline std::string format17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << text;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_field_csv(const std::string& path, const Grid& grid, const ScalarField& f) {
  require_size(f, grid);
  std::ostringstream out;
  out << "x,y,value\n";
  for (int c = 0; c < grid.inside_count(); ++c)
    out << format17(grid.cell_x(c)) << ',' << format17(grid.cell_y(c)) << ','
        << format17(f.values[static_cast<std::size_t>(c)]) << '\n';
  write_text(path, out.str());
}

inline ScalarField read_field_csv(const std::string& path, const Grid& grid, FieldRole role) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open field file: " + path);
  std::string header;
  if (!std::getline(in, header)) throw IoError("empty field file: " + path);
  if (header != "x,y,value")
    throw IoError("field file needs an 'x,y,value' header: " + path);
  ScalarField f;
  f.role = role;
  f.values.assign(static_cast<std::size_t>(grid.inside_count()), 0.0);
  std::vector<char> seen(static_cast<std::size_t>(grid.inside_count()), 0);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string xs, ys, vs;
    if (!std::getline(ls, xs, ',') || !std::getline(ls, ys, ',') || !std::getline(ls, vs))
      throw IoError("malformed field row: " + line);
    auto parse = [&](const std::string& s) {
      try {
        std::size_t pos = 0;
        const double value = std::stod(s, &pos);
        while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\r')) ++pos;
        if (pos != s.size()) throw std::invalid_argument(s);
        return value;
      } catch (const std::exception&) {
        throw IoError("non-numeric field row: " + line);
      }
    };
    const double x = parse(xs);
    const double y = parse(ys);
    const double v = parse(vs);
    const int c = grid.cell_at(x, y);
    if (c < 0) throw IoError("field row lies outside the grid: " + line);
    f.values[static_cast<std::size_t>(c)] = v;
    seen[static_cast<std::size_t>(c)] = 1;
    ++rows;
  }
  if (rows != grid.inside_count())
    throw IoError("field file has " + std::to_string(rows) + " rows, grid has " +
                  std::to_string(grid.inside_count()) + " cells");
  for (char s : seen)
    if (!s) throw IoError("field file does not cover every inside cell");
  return f;
}

inline void write_trace_csv(const std::string& path, const std::vector<TraceEntry>& trace) {
  std::ostringstream out;
  out << "iteration,E_S,W,E_Sigma,total,grad_norm\n";
  for (const auto& t : trace)
    out << t.iteration << ',' << format17(t.energy.surface) << ',' << format17(t.energy.potential)
        << ',' << format17(t.energy.wetting) << ',' << format17(t.energy.total) << ','
        << format17(t.grad_norm) << '\n';
  write_text(path, out.str());
}

inline void write_profile_csv(const std::string& path, const RadialProfile& prof) {
  std::ostringstream out;
  out << "r,u,du\n";
  for (std::size_t i = 0; i < prof.r.size(); ++i)
    out << format17(prof.r[i]) << ',' << format17(prof.u[i]) << ',' << format17(prof.du[i])
        << '\n';
  write_text(path, out.str());
}

inline void write_continuation_csv(const std::string& path, const ContinuationState& state) {
  std::ostringstream out;
  out << "sigma,newton_iterations,final_residual\n";
  for (const auto& s : state.steps)
    out << format17(s.sigma) << ',' << s.newton_iterations << ',' << format17(s.final_residual)
        << '\n';
  write_text(path, out.str());
}

inline nlohmann::ordered_json breakdown_json(const EnergyBreakdown& b) {
  nlohmann::ordered_json j;
  j["surface"] = b.surface;
  j["potential"] = b.potential;
  j["wetting"] = b.wetting;
  j["mass"] = b.mass;
  j["gamma1"] = b.gamma1;
  j["gamma2"] = b.gamma2;
  j["gamma3"] = b.gamma3;
  j["total"] = b.total;
  return j;
}

inline void write_json(const std::string& path, const nlohmann::ordered_json& j) {
  write_text(path, j.dump(2) + "\n");
}

}  // namespace capillary::io
