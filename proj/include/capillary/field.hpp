#pragma once

#include <stdexcept>
#include <vector>

#include "capillary/domain.hpp"

namespace capillary {

enum class FieldRole { density, height };

// One real value per inside cell.  Density fields (v) must stay strictly
// positive; height fields (u) are unconstrained.
struct ScalarField {
  FieldRole role = FieldRole::density;
  std::vector<double> values;

  static ScalarField constant(const Grid& grid, double value,
                              FieldRole role = FieldRole::density) {
    ScalarField f;
    f.role = role;
    f.values.assign(static_cast<std::size_t>(grid.inside_count()), value);
    return f;
  }

  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
  std::size_t size() const { return values.size(); }
};

inline void require_size(const ScalarField& f, const Grid& grid) {
  if (f.values.size() != static_cast<std::size_t>(grid.inside_count()))
    throw std::invalid_argument("field length does not match grid inside-cell count");
}

inline void require_density(const ScalarField& f, const Grid& grid) {
  require_size(f, grid);
  if (f.role != FieldRole::density)
    throw std::invalid_argument("expected a density field");
  for (double v : f.values)
    if (!(v > 0.0)) throw std::invalid_argument("density fields must be strictly positive");
}

}  // namespace capillary
