#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ubve/heat.hpp"
#include "ubve/oracles.hpp"

using namespace ubve;

namespace {

const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);

Vector t_grid(int n = 64) { return uniform_grid(1.0, n); }

CaloricTraces oracle_traces(const std::string& name, int nt = 64) {
  return caloric_traces(caloric_oracle(name), uniform_grid(17.0, 512), t_grid(nt));
}

double sup_from(const Vector& err, const Vector& t, double t0) {
  double worst = 0.0;
  for (Eigen::Index k = 0; k < t.size(); ++k)
    if (t[k] >= t0 - 1e-14) worst = std::max(worst, std::abs(err[k]));
  return worst;
}

CaloricTraces zero_v(const Vector& tg) {
  CaloricTraces tr;
  tr.x_grid = uniform_grid(1.0, 8);
  tr.v = Vector::Zero(8);
  tr.t_grid = tg;
  tr.decay = DecayTag::compactly_supported;
  return tr;
}

}  // namespace

TEST(DecayTag, ParsesNames) {
  for (auto tag : {DecayTag::compactly_supported, DecayTag::gaussian_dominated, DecayTag::polynomial})
    EXPECT_EQ(parse_decay_tag(to_string(tag)), tag);
  EXPECT_THROW(parse_decay_tag("bounded"), InvalidArgument);
}

TEST(PhiFromVPsi, LinearX) {
  CaloricTraces tr = oracle_traces("linear-x");
  tr.phi.reset();
  EXPECT_LE(sup_norm(phi_from_v_psi(tr)), 1e-8);
}

TEST(PhiFromVPsi, Constant) {
  CaloricTraces tr = oracle_traces("constant");
  EXPECT_LE(sup_norm(phi_from_v_psi(tr).array() - 1.0), 1e-12);
}

TEST(PhiFromVPsi, QuadraticPlusTime) {
  CaloricTraces tr = oracle_traces("x2-plus-2t");
  EXPECT_LE(sup_norm(phi_from_v_psi(tr) - 2.0 * tr.t_grid), 1e-8);
}

TEST(PhiFromVPsi, ErfSimilarity) {
  const CaloricTraces tr = oracle_traces("erf-similarity");
  EXPECT_LE(sup_from(phi_from_v_psi(tr), tr.t_grid, 0.1), 1e-3);
}

TEST(PhiFromVPsi, ExpGrowthTail) {
  // e^{x+t}: the v-tail grows but the Gaussian weight dominates
  const CaloricTraces tr = oracle_traces("exp-growth");
  EXPECT_LE(sup_from(phi_from_v_psi(tr) - *tr.phi, tr.t_grid, 0.1), 1e-3);
}

TEST(PhiFromVPsi, GaussTermNormalization) {
  const CaloricTraces tr = oracle_traces("constant");
  for (double t : {1e-3, 0.5, 2.0}) EXPECT_NEAR(gauss_weierstrass_term(tr, t), 1.0, 1e-12);
}

TEST(PhiFromVPsi, CompactSupportTruncates) {
  // v = (1 - x^2)^3 on [0, 1], zero beyond
  auto v = [](double x) { return x < 1.0 ? std::pow(1.0 - x * x, 3) : 0.0; };
  CaloricTraces tr;
  tr.x_grid = uniform_grid(1.0, 400);
  tr.v = tr.x_grid.unaryExpr(v);
  tr.t_grid = t_grid();
  tr.decay = DecayTag::compactly_supported;
  for (double t : {0.05, 0.2, 1.0}) {
    const double ref = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                           [&](double x) { return std::exp(-x * x / (4 * t)) * v(x); }, 0.0, 1.0) *
                       inv_sqrt_pi / std::sqrt(t);
    EXPECT_NEAR(gauss_weierstrass_term(tr, t), ref, 1e-4) << t;
  }
}

TEST(PhiFromVPsi, RejectsBadInput) {
  CaloricTraces tr = oracle_traces("linear-x");
  EXPECT_THROW(gauss_weierstrass_term(tr, 0.0), InvalidArgument);
  EXPECT_THROW(gauss_weierstrass_term(tr, -1.0), InvalidArgument);
  CaloricTraces no_tail = tr;
  no_tail.v_tail = nullptr;
  EXPECT_THROW(phi_from_v_psi(no_tail), InvalidArgument);
  CaloricTraces bad_t = tr;
  bad_t.t_grid[0] = 0.0;
  EXPECT_THROW(phi_from_v_psi(bad_t), InvalidArgument);
  CaloricTraces no_psi = tr;
  no_psi.psi.reset();
  EXPECT_THROW(phi_from_v_psi(no_psi), InvalidArgument);
  QuadratureConfig cfg;
  cfg.gauss_nodes = 4;
  EXPECT_THROW(phi_from_v_psi(tr, cfg), InvalidArgument);
}

TEST(HeatResidual, OraclesAreConsistent) {
  for (const std::string name : {"constant", "linear-x", "x2-plus-2t"}) {
    const auto rep = heat_residual(oracle_traces(name));
    EXPECT_LE(rep.sup_norm, 1e-8) << name;
    EXPECT_TRUE(rep.consistent) << name;
  }
  EXPECT_LE(heat_residual(oracle_traces("constant")).sup_norm, 1e-12);
}

TEST(HeatResidual, ErfSimilarity) {
  const CaloricTraces tr = oracle_traces("erf-similarity");
  const auto rep = heat_residual(tr, {}, 1.0);
  EXPECT_LE(sup_from(rep.pointwise, tr.t_grid, 0.1), 1e-3);
}

TEST(HeatResidual, AffineInPhi) {
  CaloricTraces tr = oracle_traces("constant");
  tr.phi->array() += 0.1;
  const auto rep = heat_residual(tr);
  EXPECT_NEAR(rep.sup_norm, 0.1, 1e-6);
  EXPECT_FALSE(rep.consistent);
}

TEST(HeatResidual, LinearInTraces) {
  std::mt19937 gen(3);
  std::normal_distribution<double> nd;
  const Vector tg = t_grid(32);
  auto random_traces = [&] {
    CaloricTraces tr;
    tr.x_grid = uniform_grid(8.0, 64);
    tr.v = tr.x_grid.unaryExpr([&](double) { return nd(gen); });
    tr.t_grid = tg;
    tr.phi = Vector(tg.unaryExpr([&](double) { return nd(gen); }));
    tr.psi = Vector(tg.unaryExpr([&](double) { return nd(gen); }));
    tr.decay = DecayTag::compactly_supported;
    return tr;
  };
  const CaloricTraces a = random_traces(), b = random_traces();
  CaloricTraces c = a;
  c.v = 2.0 * a.v - 0.5 * b.v;
  c.phi = Vector(2.0 * *a.phi - 0.5 * *b.phi);
  c.psi = Vector(2.0 * *a.psi - 0.5 * *b.psi);
  const Vector lhs = heat_residual(c, {}, 1.0).pointwise;
  const Vector rhs = 2.0 * heat_residual(a, {}, 1.0).pointwise - 0.5 * heat_residual(b, {}, 1.0).pointwise;
  EXPECT_LE(sup_norm(lhs - rhs), 1e-10);

  CaloricTraces ca = a, cb = b, cc = c;
  ca.phi.reset(), cb.phi.reset(), cc.phi.reset();
  EXPECT_LE(sup_norm(phi_from_v_psi(cc) - 2.0 * phi_from_v_psi(ca) + 0.5 * phi_from_v_psi(cb)), 1e-10);
  ca = a, cb = b, cc = c;
  ca.psi.reset(), cb.psi.reset(), cc.psi.reset();
  EXPECT_LE(sup_norm(psi_from_v_phi(cc) - 2.0 * psi_from_v_phi(ca) + 0.5 * psi_from_v_phi(cb)),
            1e-10 * (1.0 + sup_norm(psi_from_v_phi(cc))));
  const std::vector<SpaceTimePoint> pts = {{0.3, 0.2}, {0.9, 1.5}};
  EXPECT_LE(sup_norm(reconstruct_quarterplane(c, pts) - 2.0 * reconstruct_quarterplane(a, pts) +
                     0.5 * reconstruct_quarterplane(b, pts)),
            1e-10);
}

TEST(AbelMatrix, ExactOnConstantsAndLowerTriangular) {
  const Vector tg = t_grid();
  const Eigen::MatrixXd M = abel_matrix(tg);
  // pi^{-1/2} int_0^t (t - s)^{-1/2} ds = 2 sqrt(t / pi)
  const Vector got = M * Vector::Ones(tg.size());
  EXPECT_LE(sup_norm(got - 2.0 * inv_sqrt_pi * tg.array().sqrt().matrix()), 1e-13);
  // the three-node start fits reach at most one node ahead
  for (Eigen::Index k = 0; k < M.rows(); ++k)
    for (Eigen::Index j = std::max<Eigen::Index>(k + 1, 2) + 1; j < M.cols(); ++j) EXPECT_EQ(M(k, j), 0.0);
}

TEST(AbelMatrix, ErfFluxIntegratesToOne) {
  // pi^{-1/2} int_0^t (pi s)^{-1/2} (t - s)^{-1/2} ds = 1
  const Vector tg = t_grid();
  const Vector psi = inv_sqrt_pi * tg.array().rsqrt().matrix();
  const Vector got = abel_matrix(tg) * psi;
  EXPECT_LE(sup_from(got.array() - 1.0, tg, 0.1), 1e-3);
}

TEST(PsiFromVPhi, LinearX) {
  CaloricTraces tr = oracle_traces("linear-x");
  tr.psi.reset();
  const Vector psi = psi_from_v_phi(tr);
  EXPECT_LE(sup_norm(psi.array() - 1.0), 1e-3);
}

TEST(PsiFromVPhi, ConstantHasNoFlux) {
  CaloricTraces tr = oracle_traces("constant");
  tr.psi.reset();
  EXPECT_LE(sup_norm(psi_from_v_phi(tr)), 1e-6);
}

TEST(PsiFromVPhi, SignFlippedAbelTerm) {
  CaloricTraces tr = zero_v(t_grid());
  tr.phi = Vector(-2.0 * inv_sqrt_pi * tr.t_grid.array().sqrt().matrix());
  EXPECT_LE(sup_norm(psi_from_v_phi(tr).array() - 1.0), 1e-3);
}

TEST(PsiFromVPhi, RoundTripSmoothFlux) {
  for (int nt : {64, 128}) {
    CaloricTraces tr = zero_v(t_grid(nt));
    const Vector psi = tr.t_grid.unaryExpr([](double t) { return std::cos(3.0 * t) + t * t; });
    tr.psi = psi;
    tr.phi = phi_from_v_psi(tr);
    tr.psi.reset();
    const double h = 1.0 / nt;
    EXPECT_LE(sup_from(psi_from_v_phi(tr) - psi, tr.t_grid, 4 * h), 1e-3) << nt;
  }
}

TEST(PsiFromVPhi, NeedsEightPoints) {
  CaloricTraces tr = zero_v(t_grid(7));
  tr.phi = Vector(Vector::Zero(7));
  EXPECT_THROW(psi_from_v_phi(tr), InvalidArgument);
}

TEST(Reconstruct, LinearXInterior) {
  const CaloricTraces tr = oracle_traces("linear-x");
  EXPECT_NEAR(reconstruct_quarterplane(tr, {{0.5, 1.0}})[0], 1.0, 1e-6);
}

TEST(Reconstruct, ConstantEverywhere) {
  const CaloricTraces tr = oracle_traces("constant");
  const Vector u = reconstruct_quarterplane(tr, {{0.01, 0.1}, {0.5, 1e-6}, {1.0, 3.0}, {0.3, 15.0}});
  EXPECT_LE(sup_norm(u.array() - 1.0), 1e-10);
}

TEST(Reconstruct, MatchesOraclesInInterior) {
  for (const std::string name : {"linear-x", "x2-plus-2t", "erf-similarity"}) {
    const CaloricOracle o = caloric_oracle(name);
    const CaloricTraces tr = oracle_traces(name);
    std::vector<SpaceTimePoint> pts;
    for (double t : {0.2, 0.5, 1.0})
      for (double x : {0.1, 0.5, 1.0, 2.0}) pts.push_back({t, x});
    const Vector u = reconstruct_quarterplane(tr, pts);
    for (std::size_t i = 0; i < pts.size(); ++i)
      EXPECT_NEAR(u[static_cast<Eigen::Index>(i)], o.eval(pts[i].t, pts[i].x), 1e-4) << name;
  }
}

TEST(Reconstruct, BoundaryLimitMatchesEvaluation) {
  const CaloricTraces tr = oracle_traces("erf-similarity");
  const Vector phi = phi_from_v_psi(tr);
  for (Eigen::Index k : {7, 31, 63}) {
    const double t = tr.t_grid[k];
    EXPECT_NEAR(reconstruct_quarterplane(tr, {{t, 1e-6}})[0], phi[k], 1e-4);
    double prev = std::numeric_limits<double>::infinity();
    for (double x : {1e-2, 1e-3, 1e-4}) {
      const double err = std::abs(reconstruct_quarterplane(tr, {{t, x}})[0] - phi[k]);
      EXPECT_LT(err, prev) << "t=" << t << " x=" << x;
      prev = err;
    }
  }
}

TEST(Reconstruct, SatisfiesHeatEquation) {
  const CaloricTraces tr = oracle_traces("erf-similarity");
  const double h = 1e-3;
  double worst = 0.0;
  for (double t : {0.3, 0.6, 0.9}) {
    for (double x : {0.2, 0.7, 1.5}) {
      const Vector u = reconstruct_quarterplane(
          tr, {{t, x}, {t + h, x}, {t - h, x}, {t, x + h}, {t, x - h}});
      const double ut = (u[1] - u[2]) / (2 * h);
      const double uxx = (u[3] - 2 * u[0] + u[4]) / (h * h);
      worst = std::max(worst, std::abs(ut - uxx));
    }
  }
  EXPECT_LE(worst, 1e-3);
}

TEST(Reconstruct, RejectsPointsOutsideDomain) {
  const CaloricTraces tr = oracle_traces("constant");
  EXPECT_THROW(reconstruct_quarterplane(tr, {{0.0, 1.0}}), InvalidArgument);
  EXPECT_THROW(reconstruct_quarterplane(tr, {{0.5, 0.0}}), InvalidArgument);
  EXPECT_THROW(reconstruct_quarterplane(tr, {{2.0, 1.0}}), InvalidArgument);
}

TEST(HeatSystem, OperatorSlots) {
  const CaloricTraces tr = oracle_traces("constant", 16);
  const UniversalBoundarySystem sys = heat_system(tr);
  EXPECT_EQ(sys.u0_size, 16);
  EXPECT_EQ(sys.f_size, 512);
  const Vector phi = Vector::LinSpaced(16, 0.0, 1.0);
  EXPECT_EQ(sys.apply_A(phi), phi);
  EXPECT_NEAR(sys.apply_C(tr.v)[0], -1.0, 1e-12);
  EXPECT_NEAR(sys.residual_space.weights.sum(), 1.0 - 0.5 / 16, 1e-14);
}
