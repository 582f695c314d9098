// Builds the quaternionic Heisenberg group, checks its structure and prints a few numbers.

#include <iostream>

#include "htype/htype.hpp"

int main() {
  using namespace htype;
  const CliffordModule module = build_generators(3, 1);
  std::cout << "module: k=" << module.k << " n2=" << module.n2
            << " verified=" << verify_clifford(module).pass
            << " iwasawa=" << is_iwasawa_type(module).iwasawa << "\n";

  const HTypeGroup g = HTypeGroup::from_module(module);
  std::cout << "homogeneous dimension Q=" << g.homogeneous_dimension() << "\n";

  const CalibrationRecord rec = calibrate_profile(g);
  std::cout << "profile constant C_G=" << rec.c_g << " fresh residual=" << rec.max_residual << "\n";

  const GroupPoint p = io::parse_point("0.3,-0.2,0.1,0.5;0.2,0,-0.1", g.n2(), g.k());
  const GroupPoint q = spherical_inversion(g, p);
  std::cout << "sigma(" << io::format_point(p) << ") = " << io::format_point(q) << "\n"
            << "leakage at p: " << horizontal_leakage(g, p) << "\n";

  const ProjectorPair pp = build_projectors(module);
  std::cout << "dim Xi=" << pp.dim_xi() << " dim Sigma=" << pp.dim_sigma() << "\n";
  return 0;
}
