// Minimize the energy on the unit square with beta = 0; the minimizer is the
// flat density e^{-1}.
#include <cmath>
#include <iostream>

#include "capillary/domain.hpp"
#include "capillary/energy.hpp"
#include "capillary/minimize.hpp"

int main() {
  using namespace capillary;
  const Grid grid = build_grid(DomainSpec::make_rectangle(1.0, 1.0), 32);
  const BoundaryData bdata = BoundaryData::constant(grid, 0.0);

  const MinimizeResult result = minimize(grid, bdata);
  double dev = 0.0;
  for (double v : result.v_star.values) dev = std::max(dev, std::abs(v - std::exp(-1.0)));

  const EnergyBreakdown eb = total_energy(result.v_star, bdata, grid);
  std::cout << "converged: " << (result.converged ? "yes" : "no") << " in " << result.iterations
            << " iterations\n"
            << "sup |v - 1/e| = " << dev << "\n"
            << "energy: surface " << eb.surface << ", potential " << eb.potential << ", wetting "
            << eb.wetting << ", total " << eb.total << "\n";
  return 0;
}
