#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "ubve/errors.hpp"

namespace ubve {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

/// n-point Gauss-Legendre rule on [-1, 1], nodes ascending.
inline QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw InvalidArgument("gauss_legendre: need at least one node");
  QuadratureRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[n - 1 - i] = x;
    rule.nodes[i] = -x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

/// Affine map of a rule on [-1, 1] to [a, b].
inline QuadratureRule map_rule(const QuadratureRule& ref, double a, double b) {
  QuadratureRule out = ref;
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (std::size_t k = 0; k < ref.size(); ++k) {
    out.nodes[k] = mid + half * ref.nodes[k];
    out.weights[k] = half * ref.weights[k];
  }
  return out;
}

/// Evaluates sum_{n=0}^{N} c_n P_n(x) by Clenshaw recurrence.
template <class Coefficients>
double legendre_series(const Coefficients& c, int degree, double x) {
  double b1 = 0.0, b2 = 0.0;
  for (int n = degree; n >= 1; --n) {
    const double alpha = (2.0 * n + 1.0) / (n + 1.0) * x;
    const double beta = -(n + 1.0) / (n + 2.0);
    const double b0 = c[n] + alpha * b1 + beta * b2;
    b2 = b1;
    b1 = b0;
  }
  return c[0] + x * b1 - 0.5 * b2;
}

inline double legendre_p(int n, double x) {
  if (n == 0) return 1.0;
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

}  // namespace ubve
