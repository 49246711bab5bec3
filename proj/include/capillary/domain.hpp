#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace capillary {

// Cross-section of the tube. All lengths dimensionless.
struct DomainSpec {
  enum class Shape { rectangle, disk, polygon };

  Shape shape = Shape::rectangle;
  double width = 1.0;   // rectangle
  double height = 1.0;  // rectangle
  double radius = 1.0;  // disk
  std::vector<std::array<double, 2>> vertices;  // polygon, CCW or CW

  static DomainSpec make_rectangle(double w, double h) {
    DomainSpec s;
    s.shape = Shape::rectangle;
    s.width = w;
    s.height = h;
    s.validate();
    return s;
  }

  static DomainSpec make_disk(double r) {
    DomainSpec s;
    s.shape = Shape::disk;
    s.radius = r;
    s.validate();
    return s;
  }

  static DomainSpec make_polygon(std::vector<std::array<double, 2>> v) {
    DomainSpec s;
    s.shape = Shape::polygon;
    s.vertices = std::move(v);
    s.validate();
    return s;
  }

  void validate() const;
  double characteristic_length() const;
};

namespace detail {

inline double shoelace_area(const std::vector<std::array<double, 2>>& v) {
  double a = 0.0;
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = v[i];
    const auto& q = v[(i + 1) % n];
    a += p[0] * q[1] - q[0] * p[1];
  }
  return 0.5 * a;
}

inline int orientation(const std::array<double, 2>& a, const std::array<double, 2>& b,
                       const std::array<double, 2>& c) {
  const double d = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
  const double scale = std::abs(b[0] - a[0]) + std::abs(b[1] - a[1]) +
                       std::abs(c[0] - a[0]) + std::abs(c[1] - a[1]);
  if (std::abs(d) <= 1e-14 * std::max(1.0, scale * scale)) return 0;
  return d > 0 ? 1 : -1;
}

inline bool on_segment(const std::array<double, 2>& a, const std::array<double, 2>& b,
                       const std::array<double, 2>& p) {
  return std::min(a[0], b[0]) - 1e-14 <= p[0] && p[0] <= std::max(a[0], b[0]) + 1e-14 &&
         std::min(a[1], b[1]) - 1e-14 <= p[1] && p[1] <= std::max(a[1], b[1]) + 1e-14;
}

inline bool segments_intersect(const std::array<double, 2>& a, const std::array<double, 2>& b,
                               const std::array<double, 2>& c, const std::array<double, 2>& d) {
  const int o1 = orientation(a, b, c);
  const int o2 = orientation(a, b, d);
  const int o3 = orientation(c, d, a);
  const int o4 = orientation(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

inline bool polygon_is_simple(const std::vector<std::array<double, 2>>& v) {
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // skip adjacent edges (they share an endpoint)
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
      if (segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n])) return false;
    }
  }
  return true;
}

inline bool point_in_polygon(const std::vector<std::array<double, 2>>& v, double x, double y) {
  bool inside = false;
  const std::size_t n = v.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const double xi = v[i][0], yi = v[i][1];
    const double xj = v[j][0], yj = v[j][1];
    if ((yi > y) != (yj > y)) {
      const double xcross = xj + (y - yj) / (yi - yj) * (xi - xj);
      if (x < xcross) inside = !inside;
    }
  }
  return inside;
}

}  // namespace detail

inline void DomainSpec::validate() const {
  switch (shape) {
    case Shape::rectangle:
      if (!(width > 0.0) || !(height > 0.0))
        throw std::invalid_argument("rectangle dimensions must be strictly positive");
      break;
    case Shape::disk:
      if (!(radius > 0.0)) throw std::invalid_argument("disk radius must be strictly positive");
      break;
    case Shape::polygon:
      if (vertices.size() < 3) throw std::invalid_argument("polygon needs at least 3 vertices");
      if (std::abs(detail::shoelace_area(vertices)) <= 0.0)
        throw std::invalid_argument("polygon has zero area");
      if (!detail::polygon_is_simple(vertices))
        throw std::invalid_argument("polygon must be simple (non-self-intersecting)");
      break;
  }
}

inline double DomainSpec::characteristic_length() const {
  switch (shape) {
    case Shape::rectangle:
      return std::max(width, height);
    case Shape::disk:
      return 2.0 * radius;
    case Shape::polygon: {
      double xmin = vertices[0][0], xmax = xmin, ymin = vertices[0][1], ymax = ymin;
      for (const auto& p : vertices) {
        xmin = std::min(xmin, p[0]);
        xmax = std::max(xmax, p[0]);
        ymin = std::min(ymin, p[1]);
        ymax = std::max(ymax, p[1]);
      }
      return std::max(xmax - xmin, ymax - ymin);
    }
  }
  return 0.0;
}

// One face of an inside cell with no inside neighbor across it.
// `normal_*` is the outward unit normal of the underlying domain boundary at
// the face midpoint; `length` is the share of boundary measure the face
// carries (h times the projection of the true normal onto the face axis), so
// that sums over edges approximate boundary integrals.  Rectangle boundaries
// are exact: normal equals the face axis and length equals the cell side.
struct BoundaryEdge {
  int owner = -1;    // inside-cell index the edge belongs to
  int inward = -1;   // owner's inside neighbor opposite the face, or -1
  int axis = 0;      // 0: x-facing, 1: y-facing
  int sign = 1;      // +1 or -1 along the axis
  double mid_x = 0.0;
  double mid_y = 0.0;
  double normal_x = 0.0;
  double normal_y = 0.0;
  double length = 0.0;
};

// Uniform cell-centered Cartesian discretization of a DomainSpec.  Immutable
// once built; safe to share read-only across threads.
class Grid {
 public:
  double cell_size() const { return h_; }
  int inside_count() const { return static_cast<int>(cells_.size()); }
  double area() const { return area_; }
  double boundary_length() const { return boundary_length_; }

  double cell_x(int c) const { return x0_ + (cells_[c][0] + 0.5) * h_; }
  double cell_y(int c) const { return y0_ + (cells_[c][1] + 0.5) * h_; }

  // E, W, N, S inside-cell indices; -1 where the neighbor is outside.
  const std::array<int, 4>& neighbors(int c) const { return neighbors_[c]; }
  const std::vector<std::array<int, 4>>& neighbor_table() const { return neighbors_; }
  const std::vector<BoundaryEdge>& boundary() const { return boundary_; }

  // Inside-cell index at a point, or -1.
  int cell_at(double x, double y) const {
    const int i = static_cast<int>(std::floor((x - x0_) / h_));
    const int j = static_cast<int>(std::floor((y - y0_) / h_));
    if (i < 0 || j < 0 || i >= nx_ || j >= ny_) return -1;
    return index_[static_cast<std::size_t>(j) * nx_ + i];
  }

  int box_nx() const { return nx_; }
  int box_ny() const { return ny_; }
  double origin_x() const { return x0_; }
  double origin_y() const { return y0_; }

  friend Grid build_grid(const DomainSpec& spec, int resolution);

 private:
  double h_ = 0.0;
  int nx_ = 0, ny_ = 0;
  double x0_ = 0.0, y0_ = 0.0;
  double area_ = 0.0;
  double boundary_length_ = 0.0;
  std::vector<int> index_;                        // box cell -> inside index or -1
  std::vector<std::array<int, 2>> cells_;         // inside index -> (i, j)
  std::vector<std::array<int, 4>> neighbors_;     // inside index -> E,W,N,S
  std::vector<BoundaryEdge> boundary_;
};

namespace detail {

// Outward unit normal of the true boundary closest to (x, y).
inline std::array<double, 2> true_normal(const DomainSpec& spec, double x, double y,
                                         int axis, int sign) {
  switch (spec.shape) {
    case DomainSpec::Shape::rectangle:
      return axis == 0 ? std::array<double, 2>{static_cast<double>(sign), 0.0}
                       : std::array<double, 2>{0.0, static_cast<double>(sign)};
    case DomainSpec::Shape::disk: {
      const double r = std::hypot(x, y);
      if (r <= 1e-300) return {static_cast<double>(sign) * (axis == 0), static_cast<double>(sign) * (axis == 1)};
      return {x / r, y / r};
    }
    case DomainSpec::Shape::polygon: {
      // nearest side's outward normal (vertices oriented CCW)
      const auto& v = spec.vertices;
      const std::size_t n = v.size();
      double best = std::numeric_limits<double>::max();
      std::array<double, 2> nrm{static_cast<double>(sign) * (axis == 0),
                                static_cast<double>(sign) * (axis == 1)};
      for (std::size_t i = 0; i < n; ++i) {
        const auto& a = v[i];
        const auto& b = v[(i + 1) % n];
        const double ex = b[0] - a[0], ey = b[1] - a[1];
        const double len2 = ex * ex + ey * ey;
        if (len2 <= 0.0) continue;
        double t = ((x - a[0]) * ex + (y - a[1]) * ey) / len2;
        t = std::clamp(t, 0.0, 1.0);
        const double dx = x - (a[0] + t * ex), dy = y - (a[1] + t * ey);
        const double d2 = dx * dx + dy * dy;
        if (d2 < best) {
          best = d2;
          const double len = std::sqrt(len2);
          nrm = {ey / len, -ex / len};  // outward for CCW orientation
        }
      }
      return nrm;
    }
  }
  return {0.0, 0.0};
}

}  // namespace detail

inline Grid build_grid(const DomainSpec& input_spec, int resolution) {
  input_spec.validate();
  if (resolution < 4) throw std::invalid_argument("resolution must be at least 4");

  // normalize polygons to counter-clockwise orientation so side normals
  // point outward
  DomainSpec spec = input_spec;
  if (spec.shape == DomainSpec::Shape::polygon && detail::shoelace_area(spec.vertices) < 0.0)
    std::reverse(spec.vertices.begin(), spec.vertices.end());

  Grid g;
  const double L = spec.characteristic_length();
  g.h_ = L / resolution;

  double xmin = 0.0, ymin = 0.0, xmax = 0.0, ymax = 0.0;
  switch (spec.shape) {
    case DomainSpec::Shape::rectangle:
      xmax = spec.width;
      ymax = spec.height;
      break;
    case DomainSpec::Shape::disk:
      xmin = -spec.radius;
      ymin = -spec.radius;
      xmax = spec.radius;
      ymax = spec.radius;
      break;
    case DomainSpec::Shape::polygon: {
      xmin = xmax = spec.vertices[0][0];
      ymin = ymax = spec.vertices[0][1];
      for (const auto& p : spec.vertices) {
        xmin = std::min(xmin, p[0]);
        xmax = std::max(xmax, p[0]);
        ymin = std::min(ymin, p[1]);
        ymax = std::max(ymax, p[1]);
      }
      break;
    }
  }
  g.x0_ = xmin;
  g.y0_ = ymin;
  g.nx_ = std::max(1, static_cast<int>(std::llround((xmax - xmin) / g.h_)));
  g.ny_ = std::max(1, static_cast<int>(std::llround((ymax - ymin) / g.h_)));
  // cover the box even when extents are not a multiple of h
  while (g.x0_ + g.nx_ * g.h_ < xmax - 1e-12 * L) ++g.nx_;
  while (g.y0_ + g.ny_ * g.h_ < ymax - 1e-12 * L) ++g.ny_;

  auto center_inside = [&](int i, int j) {
    const double x = g.x0_ + (i + 0.5) * g.h_;
    const double y = g.y0_ + (j + 0.5) * g.h_;
    switch (spec.shape) {
      case DomainSpec::Shape::rectangle:
        return x > xmin && x < xmax && y > ymin && y < ymax;
      case DomainSpec::Shape::disk:
        return x * x + y * y <= spec.radius * spec.radius;
      case DomainSpec::Shape::polygon:
        return detail::point_in_polygon(spec.vertices, x, y);
    }
    return false;
  };

  std::vector<char> mask(static_cast<std::size_t>(g.nx_) * g.ny_, 0);
  for (int j = 0; j < g.ny_; ++j)
    for (int i = 0; i < g.nx_; ++i)
      if (center_inside(i, j)) mask[static_cast<std::size_t>(j) * g.nx_ + i] = 1;

  // keep the largest 4-connected component so the inside region is connected
  {
    std::vector<int> comp(mask.size(), -1);
    int ncomp = 0;
    std::vector<int> comp_size;
    for (std::size_t s = 0; s < mask.size(); ++s) {
      if (!mask[s] || comp[s] >= 0) continue;
      int size = 0;
      std::queue<std::size_t> q;
      q.push(s);
      comp[s] = ncomp;
      while (!q.empty()) {
        const std::size_t t = q.front();
        q.pop();
        ++size;
        const int i = static_cast<int>(t % g.nx_);
        const int j = static_cast<int>(t / g.nx_);
        const int di[4] = {1, -1, 0, 0};
        const int dj[4] = {0, 0, 1, -1};
        for (int d = 0; d < 4; ++d) {
          const int ii = i + di[d], jj = j + dj[d];
          if (ii < 0 || jj < 0 || ii >= g.nx_ || jj >= g.ny_) continue;
          const std::size_t u = static_cast<std::size_t>(jj) * g.nx_ + ii;
          if (mask[u] && comp[u] < 0) {
            comp[u] = ncomp;
            q.push(u);
          }
        }
      }
      comp_size.push_back(size);
      ++ncomp;
    }
    if (ncomp > 1) {
      const int keep = static_cast<int>(
          std::max_element(comp_size.begin(), comp_size.end()) - comp_size.begin());
      for (std::size_t s = 0; s < mask.size(); ++s)
        if (mask[s] && comp[s] != keep) mask[s] = 0;
    }
  }

  g.index_.assign(mask.size(), -1);
  for (int j = 0; j < g.ny_; ++j)
    for (int i = 0; i < g.nx_; ++i) {
      const std::size_t s = static_cast<std::size_t>(j) * g.nx_ + i;
      if (mask[s]) {
        g.index_[s] = static_cast<int>(g.cells_.size());
        g.cells_.push_back({i, j});
      }
    }
  if (g.cells_.empty()) throw std::invalid_argument("degenerate domain: no inside cells");

  auto at = [&](int i, int j) -> int {
    if (i < 0 || j < 0 || i >= g.nx_ || j >= g.ny_) return -1;
    return g.index_[static_cast<std::size_t>(j) * g.nx_ + i];
  };

  g.neighbors_.resize(g.cells_.size());
  for (std::size_t c = 0; c < g.cells_.size(); ++c) {
    const int i = g.cells_[c][0], j = g.cells_[c][1];
    g.neighbors_[c] = {at(i + 1, j), at(i - 1, j), at(i, j + 1), at(i, j - 1)};
  }

  for (std::size_t c = 0; c < g.cells_.size(); ++c) {
    for (int d = 0; d < 4; ++d) {
      if (g.neighbors_[c][d] >= 0) continue;
      BoundaryEdge e;
      e.owner = static_cast<int>(c);
      e.axis = d < 2 ? 0 : 1;
      e.sign = (d == 0 || d == 2) ? 1 : -1;
      e.inward = g.neighbors_[c][d ^ 1];  // opposite direction
      const double cx = g.cell_x(static_cast<int>(c));
      const double cy = g.cell_y(static_cast<int>(c));
      e.mid_x = cx + (e.axis == 0 ? e.sign * 0.5 * g.h_ : 0.0);
      e.mid_y = cy + (e.axis == 1 ? e.sign * 0.5 * g.h_ : 0.0);
      const auto nrm = detail::true_normal(spec, e.mid_x, e.mid_y, e.axis, e.sign);
      e.normal_x = nrm[0];
      e.normal_y = nrm[1];
      const double axis_dot = e.axis == 0 ? e.sign * nrm[0] : e.sign * nrm[1];
      e.length = g.h_ * std::max(0.0, axis_dot);
      g.boundary_.push_back(e);
    }
  }

  g.area_ = static_cast<double>(g.cells_.size()) * g.h_ * g.h_;
  double bl = 0.0;
  for (const auto& e : g.boundary_) bl += e.length;
  g.boundary_length_ = bl;
  return g;
}

// Relative adhesion coefficient per boundary edge, with |beta| <= 1 - a.
struct BoundaryData {
  std::vector<double> beta;
  double margin_a = 0.5;  // a in (0, 1]

  static BoundaryData constant(const Grid& grid, double beta_value, double a = 0.5) {
    BoundaryData b;
    b.beta.assign(grid.boundary().size(), beta_value);
    b.margin_a = a;
    b.validate(grid);
    return b;
  }

  void validate(const Grid& grid) const {
    if (!(margin_a > 0.0) || margin_a > 1.0)
      throw std::invalid_argument("margin a must lie in (0, 1]");
    if (beta.size() != grid.boundary().size())
      throw std::invalid_argument("boundary data size does not match grid boundary");
    for (double b : beta)
      if (!(std::abs(b) <= 1.0 - margin_a + 1e-15))
        throw std::invalid_argument("adhesion coefficient violates |beta| <= 1 - a");
  }
};

// Cells of an interior ball, with the ring adjacent to the complement flagged
// for Dirichlet collocation.
struct BallSubset {
  std::vector<int> cells;       // inside-cell indices
  std::vector<char> is_flagged; // parallel to cells
  std::vector<int> flagged;     // inside-cell indices of the flagged ring
  double center_x = 0.0, center_y = 0.0, radius = 0.0;

  int local_of(int inside_index) const {
    const auto it = std::lower_bound(cells.begin(), cells.end(), inside_index);
    if (it == cells.end() || *it != inside_index) return -1;
    return static_cast<int>(it - cells.begin());
  }
};

inline BallSubset interior_ball(const Grid& grid, double cx, double cy, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("ball radius must be strictly positive");
  const double h = grid.cell_size();
  // the ball plus a one-cell margin must consist of inside cells
  const double guard = radius + h;
  const int i0 = static_cast<int>(std::floor((cx - guard - grid.origin_x()) / h)) - 1;
  const int i1 = static_cast<int>(std::ceil((cx + guard - grid.origin_x()) / h)) + 1;
  const int j0 = static_cast<int>(std::floor((cy - guard - grid.origin_y()) / h)) - 1;
  const int j1 = static_cast<int>(std::ceil((cy + guard - grid.origin_y()) / h)) + 1;
  for (int j = j0; j <= j1; ++j)
    for (int i = i0; i <= i1; ++i) {
      const double x = grid.origin_x() + (i + 0.5) * h;
      const double y = grid.origin_y() + (j + 0.5) * h;
      const double d = std::hypot(x - cx, y - cy);
      if (d <= guard && grid.cell_at(x, y) < 0)
        throw std::invalid_argument("ball (with one-cell margin) is not contained in the domain");
    }

  BallSubset b;
  b.center_x = cx;
  b.center_y = cy;
  b.radius = radius;
  for (int c = 0; c < grid.inside_count(); ++c) {
    const double d = std::hypot(grid.cell_x(c) - cx, grid.cell_y(c) - cy);
    if (d <= radius) b.cells.push_back(c);
  }
  if (b.cells.empty()) throw std::invalid_argument("ball contains no cell centers");

  b.is_flagged.assign(b.cells.size(), 0);
  for (std::size_t k = 0; k < b.cells.size(); ++k) {
    for (int d = 0; d < 4; ++d) {
      const int nb = grid.neighbors(b.cells[k])[d];
      if (nb < 0 || b.local_of(nb) < 0) {
        b.is_flagged[k] = 1;
        b.flagged.push_back(b.cells[k]);
        break;
      }
    }
  }
  return b;
}

}  // namespace capillary
