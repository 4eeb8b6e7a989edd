#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <map>
#include <random>

#include "oracle_support.hpp"
#include "ubve/laplace.hpp"
#include "ubve/oracles.hpp"

using namespace ubve;
constexpr double pi = std::numbers::pi;

namespace {

const LaplaceSystem& sphere_system() {
  static const LaplaceSystem sys(make_sphere(1.0, Point::Zero(), 24, 48),
                                 make_ball_volume_quadrature(1.0, Point::Zero()));
  return sys;
}

BoundaryTrace constant_trace(const Surface& s, double c, TraceRole role) {
  return BoundaryTrace::on(s, Vector::Constant(static_cast<Eigen::Index>(s.size()), c), role);
}

double mean_free_error(const Surface& s, const Vector& got, const Vector& want) {
  const double shift = (surface_integral(s, want) - surface_integral(s, got)) / s.area();
  return sup_norm(got.array() + shift - want.array());
}

}  // namespace

TEST(SystemResidual, TrivialElements) {
  const LaplaceSystem& sys = sphere_system();
  const Surface& s = sys.surface();
  const auto zero0 = constant_trace(s, 0, TraceRole::dirichlet);
  const auto zero1 = constant_trace(s, 0, TraceRole::neumann);
  const auto r0 = laplace_residual(sys, zero0, zero1);
  EXPECT_TRUE(r0.consistent);
  EXPECT_EQ(r0.sup_norm, 0.0);
  EXPECT_EQ(r0.weighted_l2, 0.0);

  const auto one0 = constant_trace(s, 1, TraceRole::dirichlet);
  const auto r1 = laplace_residual(sys, one0, zero1);
  EXPECT_TRUE(r1.consistent);
  EXPECT_LE(r1.sup_norm, 1e-12);

  const auto r2 = laplace_residual(sys, one0, constant_trace(s, 1, TraceRole::neumann));
  EXPECT_FALSE(r2.consistent);
  EXPECT_NEAR(r2.compatibility_values.at(0), 4 * pi, 1e-10);
}

TEST(SystemResidual, RejectsBadTolerance) {
  const LaplaceSystem& sys = sphere_system();
  const auto z0 = constant_trace(sys.surface(), 0, TraceRole::dirichlet);
  const auto z1 = constant_trace(sys.surface(), 0, TraceRole::neumann);
  EXPECT_THROW(laplace_residual(sys, z0, z1, 0.0), InvalidArgument);
  EXPECT_THROW(laplace_residual(sys, z0, z1, -1.0), InvalidArgument);
}

TEST(LaplaceResidual, HarmonicOraclesOnSphere) {
  const LaplaceSystem& sys = sphere_system();
  for (const auto& name : harmonic_oracle_names()) {
    const auto [u0, u1] = harmonic_traces(harmonic_oracle(name), sys.surface());
    const auto rep = laplace_residual(sys, u0, u1);
    EXPECT_LE(rep.sup_norm, 1e-4) << name;
    EXPECT_LE(std::abs(rep.compatibility_values[0]), 1e-10) << name;
    EXPECT_TRUE(rep.consistent) << name;
  }
}

TEST(LaplaceResidual, HarmonicOraclesOnEllipsoidConverge) {
  double prev = 0.0;
  for (int nt : {16, 32}) {
    const LaplaceSystem sys(make_ellipsoid(1, 1, 2, nt, 2 * nt));
    double worst = 0.0;
    for (const auto& name : harmonic_oracle_names()) {
      const auto [u0, u1] = harmonic_traces(harmonic_oracle(name), sys.surface());
      worst = std::max(worst, laplace_residual(sys, u0, u1).sup_norm);
    }
    if (nt == 32) {
      EXPECT_LE(worst, 1e-3);
      EXPECT_GE(prev / worst, 4.0);
    }
    prev = worst;
  }
}

TEST(LaplaceResidual, LinearInTraces) {
  const LaplaceSystem& sys = sphere_system();
  const Surface& s = sys.surface();
  std::mt19937 gen(7);
  std::normal_distribution<double> nd;
  const Eigen::Index n = static_cast<Eigen::Index>(s.size());
  Vector a0(n), a1(n), b0(n), b1(n);
  for (Eigen::Index i = 0; i < n; ++i) a0[i] = nd(gen), a1[i] = nd(gen), b0[i] = nd(gen), b1[i] = nd(gen);
  auto res = [&](const Vector& u0, const Vector& u1) {
    return laplace_residual(sys, BoundaryTrace::on(s, u0, TraceRole::dirichlet),
                            BoundaryTrace::on(s, u1, TraceRole::neumann), 1.0)
        .pointwise;
  };
  const Vector lhs = res(2.0 * a0 - 3.0 * b0, 2.0 * a1 - 3.0 * b1);
  const Vector rhs = 2.0 * res(a0, a1) - 3.0 * res(b0, b1);
  EXPECT_LE(sup_norm(lhs - rhs), 1e-10 * (1.0 + sup_norm(lhs)));
}

TEST(LaplaceResidual, PerturbationScalesLinearly) {
  const LaplaceSystem& sys = sphere_system();
  const auto [u0, u1] = harmonic_traces(harmonic_oracle("r2Y2"), sys.surface());
  const double base = laplace_residual(sys, u0, u1).sup_norm;
  for (double eps : {1e-3, 1e-2, 1e-1}) {
    BoundaryTrace p0 = u0;
    p0.values.array() += eps * p0.values.array().cos();
    const double r = laplace_residual(sys, p0, u1).sup_norm - base;
    const double r_unit = [&] {
      BoundaryTrace q = u0;
      q.values.array() += 1e-2 * q.values.array().cos();
      return (laplace_residual(sys, q, u1).sup_norm - base) / 1e-2;
    }();
    EXPECT_NEAR(r / eps, r_unit, 0.05 * r_unit);
  }
}

TEST(PoissonResidual, QuadraticOracle) {
  const LaplaceSystem& sys = sphere_system();
  const PoissonData d = poisson_traces(PoissonOracle{}, sys.surface(), *sys.volume());
  const auto rep = poisson_residual(sys, d.u0, d.u1, d.f);
  EXPECT_LE(rep.sup_norm, 1e-3);
  EXPECT_LE(std::abs(rep.compatibility_values[0]), 1e-6);
  EXPECT_NEAR(surface_integral(sys.surface(), d.u1.values), 8 * pi, 1e-9);
  EXPECT_TRUE(rep.consistent);
}

TEST(PoissonResidual, PrintedSignGivesSixteenPi) {
  LaplaceOptions opt;
  opt.poisson_sign = -1.0;
  const LaplaceSystem sys(make_sphere(1.0, Point::Zero(), 16, 32),
                          make_ball_volume_quadrature(1.0, Point::Zero()), opt);
  const PoissonData d = poisson_traces(PoissonOracle{}, sys.surface(), *sys.volume());
  const auto rep = poisson_residual(sys, d.u0, d.u1, d.f);
  EXPECT_NEAR(rep.sup_norm, 16 * pi, 1e-3);
  EXPECT_FALSE(rep.consistent);
  LaplaceOptions bad;
  bad.poisson_sign = 2.0;
  EXPECT_THROW(LaplaceSystem(make_sphere(1.0, Point::Zero(), 8, 16), std::nullopt, bad), InvalidArgument);
}

TEST(PoissonResidual, ZeroSourceReducesToLaplace) {
  const LaplaceSystem& sys = sphere_system();
  const auto [u0, u1] = harmonic_traces(harmonic_oracle("point-source"), sys.surface());
  const Vector f = Vector::Zero(static_cast<Eigen::Index>(sys.volume()->size()));
  const auto p = poisson_residual(sys, u0, u1, f, 1.0);
  const auto l = laplace_residual(sys, u0, u1, 1.0);
  EXPECT_LE(sup_norm(p.pointwise / (2 * pi) - l.pointwise), 1e-14);
}

TEST(PoissonResidual, ScalesWithData) {
  const LaplaceSystem& sys = sphere_system();
  PoissonData d = poisson_traces(PoissonOracle{}, sys.surface(), *sys.volume());
  d.u0.values.array() += 0.01;  // make the residual non-trivial
  const auto full = poisson_residual(sys, d.u0, d.u1, d.f, 1.0);
  const auto sixth = poisson_residual(
      sys, BoundaryTrace::on(sys.surface(), d.u0.values / 6, TraceRole::dirichlet),
      BoundaryTrace::on(sys.surface(), d.u1.values / 6, TraceRole::neumann), d.f / 6, 1.0);
  EXPECT_NEAR(sixth.sup_norm, full.sup_norm / 6, 1e-12);
}

TEST(PoissonResidual, NeedsVolumeQuadrature) {
  const LaplaceSystem sys(make_sphere(1.0, Point::Zero(), 8, 16));
  const auto z0 = constant_trace(sys.surface(), 0, TraceRole::dirichlet);
  const auto z1 = constant_trace(sys.surface(), 0, TraceRole::neumann);
  EXPECT_THROW(poisson_residual(sys, z0, z1, Vector::Zero(4)), InvalidArgument);
}

TEST(NeumannCompletion, RecoversDirichletTraceUpToConstant) {
  const LaplaceSystem& sys = sphere_system();
  const Surface& s = sys.surface();
  for (const auto& name : harmonic_oracle_names()) {
    const auto [u0, u1] = harmonic_traces(harmonic_oracle(name), s);
    const NeumannCompletion nc = solve_u0_from_u1(sys, u1);
    EXPECT_LE(mean_free_error(s, nc.u0.values, u0.values), 1e-3) << name;
    EXPECT_NEAR(surface_integral(s, nc.u0.values), 0.0, 1e-10) << name;
    EXPECT_LE(std::abs(nc.range_defect), 1e-8) << name;
    EXPECT_FALSE(nc.nullspace_note.empty());
  }
  // u = z has zero mean already
  const auto [z0, z1] = harmonic_traces(harmonic_oracle("linear-z"), s);
  EXPECT_LE(sup_norm(solve_u0_from_u1(sys, z1).u0.values - z0.values), 1e-3);
}

TEST(NeumannCompletion, ZeroDataAndMeanConstraint) {
  const LaplaceSystem& sys = sphere_system();
  const Surface& s = sys.surface();
  EXPECT_LE(sup_norm(solve_u0_from_u1(sys, constant_trace(s, 0, TraceRole::neumann)).u0.values), 1e-14);
  const auto [u0, u1] = harmonic_traces(harmonic_oracle("quadratic-y2"), s);
  const Vector a = solve_u0_from_u1(sys, u1, 1e-8, 0.0).u0.values;
  const Vector b = solve_u0_from_u1(sys, u1, 1e-8, 5.0).u0.values;
  const Vector diff = b - a;
  EXPECT_NEAR(diff.maxCoeff() - diff.minCoeff(), 0.0, 1e-10);
  EXPECT_NEAR(surface_integral(s, b), 5.0, 1e-10);
}

TEST(NeumannCompletion, RejectsIncompatibleFlux) {
  const LaplaceSystem& sys = sphere_system();
  try {
    solve_u0_from_u1(sys, constant_trace(sys.surface(), 1, TraceRole::neumann));
    FAIL() << "expected incompatible-data";
  } catch (const IncompatibleData& e) {
    const auto j = nlohmann::json::parse(e.detail());
    EXPECT_EQ(j["constraint"], "eq3");
    EXPECT_NEAR(j["value"].get<double>(), 4 * pi, 1e-10);
  }
}

TEST(DirichletCompletion, RecoversNeumannTrace) {
  const LaplaceSystem& sys = sphere_system();
  const Surface& s = sys.surface();
  for (const auto& name : harmonic_oracle_names()) {
    const auto [u0, u1] = harmonic_traces(harmonic_oracle(name), s);
    const BoundaryTrace got = solve_u1_from_u0(sys, u0);
    EXPECT_LE(sup_norm(got.values - u1.values), 1e-3) << name;
    EXPECT_LE(std::abs(surface_integral(s, got.values)), 1e-10) << name;
    EXPECT_EQ(got.role, TraceRole::neumann);
  }
  EXPECT_LE(sup_norm(solve_u1_from_u0(sys, constant_trace(s, 1, TraceRole::dirichlet)).values), 1e-8);
  // r^2 Y2 with Y2 = (3 cos^2 - 1)/2: u1 = 2 u0 on the unit sphere
  Vector y2(static_cast<Eigen::Index>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double c = s.node(i).z();
    y2[static_cast<Eigen::Index>(i)] = 0.5 * (3 * c * c - 1);
  }
  const auto got = solve_u1_from_u0(sys, BoundaryTrace::on(s, y2, TraceRole::dirichlet));
  EXPECT_LE(sup_norm(got.values - 2 * y2), 1e-3);
}

TEST(DirichletCompletion, UnregularizedSphereIsRankDeficient) {
  const LaplaceSystem sys(make_sphere(1.0, Point::Zero(), 8, 16));
  const auto [u0, u1] = harmonic_traces(harmonic_oracle("linear-z"), sys.surface());
  EXPECT_THROW(solve_u1_from_u0(sys, u0, 0.0), NumericFailure);
  EXPECT_THROW(solve_u1_from_u0(sys, u0, -1.0), InvalidArgument);
}

TEST(InteriorReconstruction, MatchesOracles) {
  const LaplaceSystem& sys = sphere_system();
  const auto probes = oracle::random_points_in_ball(20, 0.7, 11);
  for (const auto& name : harmonic_oracle_names()) {
    const HarmonicOracle o = harmonic_oracle(name);
    const auto [u0, u1] = harmonic_traces(o, sys.surface());
    const auto rec = reconstruct_interior(sys, u0, u1, probes);
    EXPECT_TRUE(rec.trace_check.consistent);
    for (std::size_t i = 0; i < probes.size(); ++i)
      EXPECT_NEAR(rec.evaluation.values[static_cast<Eigen::Index>(i)], o.eval(probes[i]), 1e-5) << name;
  }
  const auto [z0, z1] = harmonic_traces(harmonic_oracle("linear-z"), sys.surface());
  EXPECT_NEAR(reconstruct_interior(sys, z0, z1, {Point(0, 0, 0.5)}).evaluation.values[0], 0.5, 1e-6);
}

TEST(InteriorReconstruction, RefusesInconsistentTraces) {
  const LaplaceSystem& sys = sphere_system();
  const auto one0 = constant_trace(sys.surface(), 1, TraceRole::dirichlet);
  const auto one1 = constant_trace(sys.surface(), 1, TraceRole::neumann);
  EXPECT_THROW(reconstruct_interior(sys, one0, one1, {Point::Zero()}), IncompatibleData);
  EXPECT_NO_THROW(reconstruct_interior(sys, one0, one1, {Point::Zero()}, std::nullopt, true));
  const auto zero1 = constant_trace(sys.surface(), 0, TraceRole::neumann);
  EXPECT_NEAR(reconstruct_interior(sys, one0, zero1, {Point::Zero()}).evaluation.values[0], 1.0, 1e-8);
}

TEST(LaplaceSystem, TriangulatedSurfaceResidualIsSmall) {
  // octahedron refined twice and projected to the unit sphere
  TriangleMesh m;
  m.vertices = {Point(1, 0, 0), Point(-1, 0, 0), Point(0, 1, 0),
                Point(0, -1, 0), Point(0, 0, 1), Point(0, 0, -1)};
  m.triangles = {{0, 2, 4}, {2, 1, 4}, {1, 3, 4}, {3, 0, 4},
                 {2, 0, 5}, {1, 2, 5}, {3, 1, 5}, {0, 3, 5}};
  for (int level = 0; level < 3; ++level) {
    std::vector<std::array<int, 3>> next;
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      m.vertices.push_back((m.vertices[a] + m.vertices[b]).normalized());
      return mid[key] = static_cast<int>(m.vertices.size()) - 1;
    };
    for (const auto& t : m.triangles) {
      const int ab = midpoint(t[0], t[1]), bc = midpoint(t[1], t[2]), ca = midpoint(t[2], t[0]);
      next.push_back({t[0], ab, ca});
      next.push_back({ab, t[1], bc});
      next.push_back({ca, bc, t[2]});
      next.push_back({ab, bc, ca});
    }
    m.triangles = next;
  }
  const LaplaceSystem sys(make_triangulated_surface(m));
  EXPECT_EQ(sys.surface().size(), 512u);
  const auto [u0, u1] = harmonic_traces(harmonic_oracle("linear-z"), sys.surface());
  const auto rep = laplace_residual(sys, u0, u1, 1.0);
  EXPECT_LE(rep.sup_norm, 0.1);
  EXPECT_GT(sys.nullspace_margin(), 0.1);
}
