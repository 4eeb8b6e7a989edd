// Boundary flux of u = erf(x / 2 sqrt(t)) recovered from its initial and
// boundary values, then the field rebuilt inside the quarter plane.
#include <cmath>
#include <cstdio>

#include "ubve/ubve.hpp"

int main() {
  const ubve::CaloricOracle erf = ubve::caloric_oracle("erf-similarity");
  ubve::CaloricTraces tr =
      ubve::caloric_traces(erf, ubve::uniform_grid(20.0, 400), ubve::uniform_grid(1.0, 64));
  tr.psi.reset();
  const ubve::Vector psi = ubve::psi_from_v_phi(tr);
  std::printf("%8s %12s %12s %10s\n", "t", "psi", "exact", "error");
  for (int k : {0, 3, 7, 15, 31, 63}) {
    const double t = tr.t_grid[k];
    std::printf("%8.4f %12.6f %12.6f %10.2e\n", t, psi[k], erf.psi(t), std::abs(psi[k] - erf.psi(t)));
  }
  tr.psi = psi;
  std::printf("\n%8s %8s %12s %12s %10s\n", "t", "x", "u", "exact", "error");
  for (double t : {0.25, 1.0})
    for (double x : {0.05, 0.25, 1.0, 3.0}) {
      const double u = ubve::reconstruct_quarterplane(tr, {{t, x}})[0];
      std::printf("%8.2f %8.2f %12.6f %12.6f %10.2e\n", t, x, u, erf.eval(t, x), std::abs(u - erf.eval(t, x)));
    }
}
