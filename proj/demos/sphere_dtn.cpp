// Completes the Neumann trace of a harmonic function from its Dirichlet trace
// on the unit sphere and compares with the closed form.
#include <cstdio>

#include "ubve/ubve.hpp"

int main() {
  const ubve::Surface sphere = ubve::make_sphere(1.0, ubve::Point::Zero(), 24, 48);
  const ubve::LaplaceSystem sys(sphere);
  for (const char* name : {"linear-z", "r2Y2", "point-source"}) {
    const auto [u0, u1] = ubve::harmonic_traces(ubve::harmonic_oracle(name), sphere);
    const ubve::ResidualReport check = ubve::laplace_residual(sys, u0, u1);
    const ubve::BoundaryTrace u1_solved = ubve::solve_u1_from_u0(sys, u0);
    std::printf("%-13s residual %.3e  Neumann completion error %.3e\n", name, check.sup_norm,
                ubve::sup_norm(u1_solved.values - u1.values));
  }
}
