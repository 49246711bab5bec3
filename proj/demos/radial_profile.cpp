// Shoot the axisymmetric profile on the unit disk for a wetting wall.
#include <iostream>

#include "capillary/oracle.hpp"

int main() {
  const capillary::RadialProfile prof = capillary::radial_solve(1.0, 0.4);
  std::cout << "center height " << prof.u.front() << ", wall height " << prof.u.back()
            << ", contact residual " << prof.contact_residual << "\n";
  for (std::size_t i = 0; i < prof.r.size(); i += prof.r.size() / 8)
    std::cout << "  r = " << prof.r[i] << "  u = " << prof.u[i] << "\n";
  return 0;
}
