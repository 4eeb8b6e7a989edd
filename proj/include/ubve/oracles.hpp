#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ubve/errors.hpp"
#include "ubve/heat.hpp"
#include "ubve/layer_potentials.hpp"
#include "ubve/surface.hpp"

namespace ubve {

/// Closed-form harmonic function with its gradient.
struct HarmonicOracle {
  std::string name;
  std::function<double(const Point&)> eval;
  std::function<Eigen::Vector3d(const Point&)> grad;
  /// Singular point for point sources.
  std::optional<Point> source;
};

inline HarmonicOracle point_source_oracle(const Point& x0) {
  return {"point-source",
          [x0](const Point& x) { return 1.0 / (x - x0).norm(); },
          [x0](const Point& x) -> Eigen::Vector3d {
            const Eigen::Vector3d d = x - x0;
            const double r = d.norm();
            return -d / (r * r * r);
          },
          x0};
}

/// Catalog lookup: constant, linear-z, quadratic-y2, r2Y2, point-source
/// (default source (0,0,3); "point-source:x,y,z" selects another).
inline HarmonicOracle harmonic_oracle(const std::string& name) {
  if (name == "constant")
    return {name, [](const Point&) { return 1.0; }, [](const Point&) { return Eigen::Vector3d(Eigen::Vector3d::Zero()); }, {}};
  if (name == "linear-z")
    return {name, [](const Point& x) { return x.z(); }, [](const Point&) { return Eigen::Vector3d(0, 0, 1); }, {}};
  if (name == "quadratic-y2")
    return {name, [](const Point& x) { return x.x() * x.x() - x.y() * x.y(); },
            [](const Point& x) { return Eigen::Vector3d(2 * x.x(), -2 * x.y(), 0); }, {}};
  if (name == "r2Y2")
    return {name,
            [](const Point& x) { return x.z() * x.z() - 0.5 * (x.x() * x.x() + x.y() * x.y()); },
            [](const Point& x) { return Eigen::Vector3d(-x.x(), -x.y(), 2 * x.z()); }, {}};
  if (name == "point-source") return point_source_oracle(Point(0, 0, 3));
  const std::string prefix = "point-source:";
  if (name.rfind(prefix, 0) == 0) {
    std::istringstream in(name.substr(prefix.size()));
    double c[3];
    char sep;
    if (!(in >> c[0] >> sep >> c[1] >> sep >> c[2]))
      throw InvalidArgument("point-source oracle expects 'point-source:x,y,z'");
    return point_source_oracle(Point(c[0], c[1], c[2]));
  }
  throw InvalidArgument("unknown harmonic oracle '" + name + "'");
}

inline std::vector<std::string> harmonic_oracle_names() {
  return {"constant", "linear-z", "quadratic-y2", "r2Y2", "point-source"};
}

/// u0 = u on the nodes, u1 = grad u . normal.
inline std::pair<BoundaryTrace, BoundaryTrace> harmonic_traces(const HarmonicOracle& oracle,
                                                               const Surface& surface) {
  if (oracle.source) {
    if (surface.contains(*oracle.source) || surface.distance_to(*oracle.source) < 0.5)
      throw InvalidArgument("point source must lie outside the surface at distance >= 0.5");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(surface.size());
  Vector u0(n), u1(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Point& x = surface.node(static_cast<std::size_t>(i));
    u0[i] = oracle.eval(x);
    u1[i] = oracle.grad(x).dot(surface.normal(static_cast<std::size_t>(i)));
  }
  return {BoundaryTrace::on(surface, std::move(u0), TraceRole::dirichlet),
          BoundaryTrace::on(surface, std::move(u1), TraceRole::neumann)};
}

/// Largest fourth-order finite-difference Laplacian of the oracle over the points.
inline double harmonic_fd_residual(const HarmonicOracle& oracle, const std::vector<Point>& points,
                                   double h = 1e-3) {
  double worst = 0.0;
  for (const Point& x : points) {
    double lap = -90.0 * oracle.eval(x);
    for (int d = 0; d < 3; ++d) {
      Point e = Point::Zero();
      e[d] = h;
      lap += 16.0 * (oracle.eval(x + e) + oracle.eval(x - e)) -
             (oracle.eval(x + 2.0 * e) + oracle.eval(x - 2.0 * e));
    }
    worst = std::max(worst, std::abs(lap / (12.0 * h * h)));
  }
  return worst;
}

/// u = |x - c|^2 with Delta u = 6.
struct PoissonOracle {
  Point center = Point::Zero();
  double eval(const Point& x) const { return (x - center).squaredNorm(); }
  Eigen::Vector3d grad(const Point& x) const { return 2.0 * (x - center); }
  double source(const Point&) const { return 6.0; }
};

struct PoissonData {
  BoundaryTrace u0, u1;
  Vector f;
};

inline PoissonData poisson_traces(const PoissonOracle& oracle, const Surface& surface,
                                  const VolumeQuadrature& vq) {
  const Eigen::Index n = static_cast<Eigen::Index>(surface.size());
  Vector u0(n), u1(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Point& x = surface.node(static_cast<std::size_t>(i));
    u0[i] = oracle.eval(x);
    u1[i] = oracle.grad(x).dot(surface.normal(static_cast<std::size_t>(i)));
  }
  Vector f(static_cast<Eigen::Index>(vq.size()));
  for (std::size_t j = 0; j < vq.size(); ++j) f[static_cast<Eigen::Index>(j)] = oracle.source(vq.points[j]);
  return {BoundaryTrace::on(surface, std::move(u0), TraceRole::dirichlet),
          BoundaryTrace::on(surface, std::move(u1), TraceRole::neumann), std::move(f)};
}

/// Closed-form solution of u_t = u_xx with its quarter-plane traces.
struct CaloricOracle {
  std::string name;
  std::function<double(double t, double x)> eval;
  std::function<double(double x)> v;
  std::function<double(double t)> phi;
  std::function<double(double t)> psi;
  DecayTag decay = DecayTag::polynomial;
  /// Unbounded growth violates the boundedness hypothesis on the quarter plane.
  bool outside_theorem_hypotheses = false;
};

/// Catalog lookup: constant, linear-x, x2-plus-2t, erf-similarity, exp-growth.
inline CaloricOracle caloric_oracle(const std::string& name) {
  const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
  if (name == "constant")
    return {name, [](double, double) { return 1.0; }, [](double) { return 1.0; },
            [](double) { return 1.0; }, [](double) { return 0.0; }, DecayTag::polynomial, false};
  if (name == "linear-x")
    return {name, [](double, double x) { return x; }, [](double x) { return x; },
            [](double) { return 0.0; }, [](double) { return 1.0; }, DecayTag::polynomial, true};
  if (name == "x2-plus-2t")
    return {name, [](double t, double x) { return x * x + 2.0 * t; },
            [](double x) { return x * x; }, [](double t) { return 2.0 * t; },
            [](double) { return 0.0; }, DecayTag::polynomial, true};
  if (name == "erf-similarity")
    return {name, [](double t, double x) { return std::erf(x / (2.0 * std::sqrt(t))); },
            [](double) { return 1.0; }, [](double) { return 0.0; },
            [inv_sqrt_pi](double t) { return inv_sqrt_pi / std::sqrt(t); }, DecayTag::polynomial,
            false};
  if (name == "exp-growth")
    return {name, [](double t, double x) { return std::exp(x + t); },
            [](double x) { return std::exp(x); }, [](double t) { return std::exp(t); },
            [](double t) { return std::exp(t); }, DecayTag::gaussian_dominated, true};
  throw InvalidArgument("unknown caloric oracle '" + name + "'");
}

inline std::vector<std::string> caloric_oracle_names() {
  return {"constant", "linear-x", "x2-plus-2t", "erf-similarity", "exp-growth"};
}

inline CaloricTraces caloric_traces(const CaloricOracle& oracle, const Vector& x_grid,
                                    const Vector& t_grid) {
  CaloricTraces tr;
  tr.x_grid = x_grid;
  tr.t_grid = t_grid;
  tr.v = x_grid.unaryExpr(oracle.v);
  tr.phi = Vector(t_grid.unaryExpr(oracle.phi));
  tr.psi = Vector(t_grid.unaryExpr(oracle.psi));
  tr.decay = oracle.decay;
  tr.v_tail = oracle.v;
  return tr;
}

/// Largest fourth-order centered finite-difference |u_t - u_xx| over the points.
inline double caloric_fd_residual(const CaloricOracle& oracle,
                                  const std::vector<SpaceTimePoint>& points, double h = 1e-3) {
  double worst = 0.0;
  for (const auto& p : points) {
    auto u = [&](double dt, double dx) { return oracle.eval(p.t + dt, p.x + dx); };
    const double ut = (8.0 * (u(h, 0) - u(-h, 0)) - (u(2 * h, 0) - u(-2 * h, 0))) / (12.0 * h);
    const double uxx =
        (16.0 * (u(0, h) + u(0, -h)) - (u(0, 2 * h) + u(0, -2 * h)) - 30.0 * u(0, 0)) /
        (12.0 * h * h);
    worst = std::max(worst, std::abs(ut - uxx));
  }
  return worst;
}

/// Basis of degree-n homogeneous harmonic polynomials (n <= 3); restricted to
/// the unit sphere they span the spherical harmonics of degree n.
inline std::vector<std::function<double(const Point&)>> harmonic_polynomials(int n) {
  using F = std::function<double(const Point&)>;
  switch (n) {
    case 0: return {F([](const Point&) { return 1.0; })};
    case 1:
      return {F([](const Point& p) { return p.x(); }), F([](const Point& p) { return p.y(); }),
              F([](const Point& p) { return p.z(); })};
    case 2:
      return {F([](const Point& p) { return p.x() * p.y(); }),
              F([](const Point& p) { return p.x() * p.z(); }),
              F([](const Point& p) { return p.y() * p.z(); }),
              F([](const Point& p) { return p.x() * p.x() - p.y() * p.y(); }),
              F([](const Point& p) { return 2 * p.z() * p.z() - p.x() * p.x() - p.y() * p.y(); })};
    case 3:
      return {F([](const Point& p) { return p.x() * p.y() * p.z(); }),
              F([](const Point& p) { return p.z() * (p.x() * p.x() - p.y() * p.y()); }),
              F([](const Point& p) { return p.x() * (p.x() * p.x() - 3 * p.y() * p.y()); }),
              F([](const Point& p) { return p.y() * (3 * p.x() * p.x() - p.y() * p.y()); }),
              F([](const Point& p) { return p.x() * (4 * p.z() * p.z() - p.x() * p.x() - p.y() * p.y()); }),
              F([](const Point& p) { return p.y() * (4 * p.z() * p.z() - p.x() * p.x() - p.y() * p.y()); }),
              F([](const Point& p) {
                return p.z() * (2 * p.z() * p.z() - 3 * p.x() * p.x() - 3 * p.y() * p.y());
              })};
    default: throw InvalidArgument("harmonic polynomials are tabulated for degree <= 3");
  }
}

/// Uniform grid {h, 2h, ..., n h} with h = length / n.
inline Vector uniform_grid(double length, int n) {
  if (n < 1 || !(length > 0.0)) throw InvalidArgument("grid needs positive length and count");
  return Vector::LinSpaced(n, length / n, length);
}

}  // namespace ubve
