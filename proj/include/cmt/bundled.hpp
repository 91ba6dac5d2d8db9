#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cmt {

inline constexpr std::string_view protein_system = R"(# Protein assembly kinetics with the small rates D1, k, Ye, p set to zero:
#   x' = a Xe x - b Xe z + a x^2 - b x z
#   z' = c x^2 + c x z
# The stable direction needs a Xe < 0.
vars x z
param a = -2
param b = 1
param c = 1
param Xe = 1
equilibrium 0 0
# columns: centre direction (b, a), stable direction (1, 0)
basis b 1 a 0
dx/dt = a*Xe*x - b*Xe*z + a*x^2 - b*x*z
dz/dt = c*x^2 + c*x*z
)";

inline constexpr std::string_view generic3d_system = R"(# Rotation in (x, y), decay in z, full quadratic coupling.
# Eigenvalues: +i*l1, -i*l1, -l2.
vars x y z
param l1 = 1
param l2 = 1
param c0 = 1
param c1 = 1
param c2 = 1
param c3 = 1
param c4 = 1
param c5 = 1
param d0 = 1
param d1 = 1
param d2 = 1
param d3 = 1
param d4 = 1
param d5 = 1
param e0 = 1
param e1 = 1
param e2 = 1
param e3 = 1
param e4 = 1
param e5 = 1
equilibrium 0 0 0
dx/dt = l1*y + c0*x^2 + c1*y^2 + c2*z^2 + c3*x*y + c4*y*z + c5*z*x
dy/dt = -l1*x + d0*x^2 + d1*y^2 + d2*z^2 + d3*x*y + d4*y*z + d5*z*x
dz/dt = -l2*z + e0*x^2 + e1*y^2 + e2*z^2 + e3*x*y + e4*y*z + e5*z*x
)";

inline std::vector<std::string> bundled_system_names() { return {"generic3d", "protein"}; }

inline std::optional<std::string_view> bundled_system(std::string_view name) {
  if (name == "protein") return protein_system;
  if (name == "generic3d") return generic3d_system;
  return std::nullopt;
}

}  // namespace cmt
