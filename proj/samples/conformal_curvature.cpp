// Curvature of u^{4/(Q-2)} g on the Heisenberg group for the extremal profile and a bump.

#include <iostream>

#include "htype/htype.hpp"

int main() {
  using namespace htype;
  const HTypeGroup g = HTypeGroup::from_module(build_generators(1, 1));
  const ConnectionEngine engine(g);
  const double power = 4.0 / (g.homogeneous_dimension() - 2.0);

  const ScalarField profile = gv_profile(g, calibrate_profile(g).c_g);
  const ScalarField bump = fields::gaussian(g.dim(), 1.0, 0.5, 1.0);
  for (const auto& p : sample_points(g, 4, 2)) {
    const double k_sphere = engine.scalar_curvature(fields::power(profile, power), p).k;
    const double k_bump = engine.scalar_curvature(fields::power(bump, power), p).k;
    std::cout << io::format_point(p) << "  K(sphere)=" << k_sphere << "  K(bump)=" << k_bump << "\n";
  }
  return 0;
}
