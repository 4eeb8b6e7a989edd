#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ubve/quadrature.hpp"

using namespace ubve;

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
  for (int n : {1, 2, 5, 16, 64}) {
    const auto rule = gauss_legendre(n);
    for (int deg = 0; deg <= 2 * n - 1; deg += 1) {
      double sum = 0.0;
      for (std::size_t i = 0; i < rule.size(); ++i) sum += rule.weights[i] * std::pow(rule.nodes[i], deg);
      const double exact = deg % 2 ? 0.0 : 2.0 / (deg + 1);
      EXPECT_NEAR(sum, exact, 1e-13) << "n=" << n << " deg=" << deg;
    }
  }
}

TEST(GaussLegendre, NodesAscendAndRejectEmptyRule) {
  const auto rule = gauss_legendre(9);
  for (std::size_t i = 1; i < rule.size(); ++i) EXPECT_LT(rule.nodes[i - 1], rule.nodes[i]);
  EXPECT_THROW(gauss_legendre(0), InvalidArgument);
}

TEST(GaussLegendre, MappedRuleIntegratesGaussian) {
  const auto rule = map_rule(gauss_legendre(64), 0.0, 8.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) sum += rule.weights[i] * std::exp(-rule.nodes[i] * rule.nodes[i]);
  EXPECT_NEAR(sum, 0.5 * std::sqrt(std::numbers::pi) * std::erf(8.0), 1e-15);
}

TEST(Legendre, SeriesMatchesClosedForms) {
  for (double x : {-1.0, -0.3, 0.0, 0.7, 1.0}) {
    EXPECT_NEAR(legendre_p(2, x), 0.5 * (3 * x * x - 1), 1e-15);
    EXPECT_NEAR(legendre_p(3, x), 0.5 * (5 * x * x * x - 3 * x), 1e-15);
    const std::vector<double> c{1.0, 2.0, -1.0, 0.5};
    const double direct = 1.0 + 2.0 * x - legendre_p(2, x) + 0.5 * legendre_p(3, x);
    EXPECT_NEAR(legendre_series(c, 3, x), direct, 1e-14);
  }
}
