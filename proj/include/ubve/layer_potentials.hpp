#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "ubve/errors.hpp"
#include "ubve/quadrature.hpp"
#include "ubve/surface.hpp"

namespace ubve {

enum class KernelTag { single_layer, double_layer, newtonian };

inline const char* to_string(KernelTag tag) {
  switch (tag) {
    case KernelTag::single_layer: return "single-layer";
    case KernelTag::double_layer: return "double-layer";
    case KernelTag::newtonian: return "newtonian";
  }
  return "unknown";
}

enum class TraceRole { dirichlet, neumann };

/// Values sampled on the nodes of one surface: u0 = u|_S or u1 = du/dnu|_S.
struct BoundaryTrace {
  Vector values;
  TraceRole role = TraceRole::dirichlet;
  std::uint64_t surface_id = 0;

  static BoundaryTrace on(const Surface& surface, Vector values, TraceRole role) {
    if (static_cast<std::size_t>(values.size()) != surface.size())
      throw InvalidArgument("trace length " + std::to_string(values.size()) +
                            " does not match node count " + std::to_string(surface.size()));
    return {std::move(values), role, surface.id()};
  }
};

inline void require_trace_on(const Surface& surface, const BoundaryTrace& trace,
                             const char* what) {
  if (static_cast<std::size_t>(trace.values.size()) != surface.size() ||
      trace.surface_id != surface.id())
    throw InvalidArgument(std::string(what) + ": trace does not live on this surface");
}

/// Matrix of a discretized boundary (or volume) integral operator.
struct DenseOperator {
  Eigen::MatrixXd matrix;
  std::vector<Point> row_points;
  std::vector<Point> col_nodes;
  KernelTag kernel_tag = KernelTag::single_layer;

  Eigen::Index rows() const { return matrix.rows(); }
  Eigen::Index cols() const { return matrix.cols(); }

  Vector apply(const Vector& x) const {
    if (x.size() != matrix.cols()) throw InvalidArgument("operator/vector size mismatch");
    return matrix * x;
  }
};

/// Double-layer kernel d/dnu_y 1/|x - y| with exterior normal nu_y.
inline double double_layer_kernel(const Point& x, const Point& y, const Point& normal_y) {
  const Point d = x - y;
  const double r = d.norm();
  return d.dot(normal_y) / (r * r * r);
}

namespace detail {

inline int sphere_band_limit(const ParamGrid& g) {
  return std::min(g.n_theta - 1, (g.n_phi - 1) / 2);
}

/// Legendre coefficients c_n of the pole-rotated rule for a zonal kernel:
/// the rule applied to the spherical-harmonic interpolant of u on the
/// tensor grid gives sum_j w_j sum_n c_n P_n(s_i . s_j) u_j (unit sphere).
/// `kernel_sin` is kernel(theta') * sin(theta'), smooth at the pole.
template <class KernelSin>
std::vector<double> zonal_coefficients(KernelSin kernel_sin, int degree, int n_quad) {
  const auto rule = map_rule(gauss_legendre(n_quad), 0.0, std::numbers::pi);
  std::vector<double> c(static_cast<std::size_t>(degree) + 1, 0.0);
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const double th = rule.nodes[k];
    const double t = std::cos(th);
    const double base = 2.0 * std::numbers::pi * rule.weights[k] * kernel_sin(th);
    double p0 = 1.0, p1 = t;
    c[0] += base;
    if (degree >= 1) c[1] += base * t;
    for (int n = 2; n <= degree; ++n) {
      const double p2 = ((2 * n - 1) * t * p1 - (n - 1) * p0) / n;
      p0 = p1;
      p1 = p2;
      c[n] += base * p1;
    }
  }
  for (int n = 0; n <= degree; ++n) c[n] *= (2.0 * n + 1.0) / (4.0 * std::numbers::pi);
  return c;
}

inline Eigen::MatrixXd zonal_matrix(const Surface& surface, const std::vector<double>& coeff,
                                    double scale) {
  const auto& dirs = surface.unit_directions();
  const double r2 = surface.analytic()->semi_axes[0] * surface.analytic()->semi_axes[0];
  const Eigen::Index n = static_cast<Eigen::Index>(surface.size());
  const int degree = static_cast<int>(coeff.size()) - 1;
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const double t = std::clamp(dirs[i].dot(dirs[j]), -1.0, 1.0);
      const double v = scale * legendre_series(coeff, degree, t);
      m(i, j) = v * surface.weight(j) / r2;
      m(j, i) = v * surface.weight(i) / r2;
    }
  }
  return m;
}

/// Integral of 1/|p - y| over a flat triangle containing p in its plane.
inline double flat_triangle_inverse_distance(const Point& p, const Point& a, const Point& b,
                                             const Point& c) {
  const std::array<Point, 3> v{a, b, c};
  double total = 0.0;
  for (int k = 0; k < 3; ++k) {
    const Point& e0 = v[k];
    const Point& e1 = v[(k + 1) % 3];
    const Eigen::Vector3d dir = (e1 - e0).normalized();
    const Point foot = e0 + dir * (p - e0).dot(dir);
    const double h = (p - foot).norm();
    if (h < 1e-300) continue;  // p on the edge line: zero-area sub-triangle
    const double s0 = (e0 - foot).dot(dir), s1 = (e1 - foot).dot(dir);
    total += h * (std::asinh(s1 / h) - std::asinh(s0 / h));
  }
  return std::abs(total);
}

/// Integral of 1/|x_i - y| over an analytic ellipsoid by a Gauss rule in polar
/// coordinates about the target's unit-sphere preimage.
inline double polar_inverse_distance(const AnalyticShape& shape, const Eigen::Vector3d& s0,
                                     int n_theta, int n_phi) {
  const Point x = shape.map(s0);
  Eigen::Vector3d e1 = (std::abs(s0[0]) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY());
  e1 = (e1 - e1.dot(s0) * s0).normalized();
  const Eigen::Vector3d e2 = s0.cross(e1);
  const auto rule = map_rule(gauss_legendre(n_theta), 0.0, std::numbers::pi);
  const double dphi = 2.0 * std::numbers::pi / n_phi;
  double total = 0.0;
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const double th = rule.nodes[k], st = std::sin(th), ct = std::cos(th);
    double ring = 0.0;
    for (int m = 0; m < n_phi; ++m) {
      const double ph = (m + 0.5) * dphi;
      const Eigen::Vector3d s = st * (std::cos(ph) * e1 + std::sin(ph) * e2) + ct * s0;
      ring += shape.area_factor(s) / (x - shape.map(s)).norm();
    }
    total += rule.weights[k] * st * ring * dphi;
  }
  return total;
}

}  // namespace detail

/// Double-layer operator on the surface nodes, with the diagonal set so that
/// every row sums to -2 pi (the on-surface Gauss constant). Rows then realize
/// int K(x_i, y) (u(y) - u(x_i)) dS - 2 pi u(x_i).
inline DenseOperator assemble_double_layer(const Surface& surface) {
  const Eigen::Index n = static_cast<Eigen::Index>(surface.size());
  DenseOperator op;
  op.kernel_tag = KernelTag::double_layer;
  op.row_points = surface.nodes();
  op.col_nodes = surface.nodes();

  if (surface.rotation_support()) {
    const auto& g = *surface.param_grid();
    const auto coeff = detail::zonal_coefficients(
        [](double th) { return -0.5 * std::cos(0.5 * th); }, detail::sphere_band_limit(g),
        std::max(16, 2 * g.n_theta));
    op.matrix = detail::zonal_matrix(surface, coeff, 1.0);
  } else {
    op.matrix.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        op.matrix(i, j) =
            i == j ? 0.0
                   : surface.weight(j) * double_layer_kernel(surface.node(i), surface.node(j),
                                                             surface.normal(j));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    op.matrix(i, i) = 0.0;
    op.matrix(i, i) = -2.0 * std::numbers::pi - op.matrix.row(i).sum();
  }
  return op;
}

/// Single-layer operator (S u)(x_i) ~ int u(y) / |x_i - y| dS.
///
/// Spheres: pole-rotated Gauss rule with spherical-harmonic interpolation
/// (spectral). Ellipsoids: punctured rule with the diagonal completed from a
/// polar-coordinate integral of 1/|x_i - y|. Meshes: centroid rule with the
/// self-triangle integrated analytically (first order only).
inline DenseOperator assemble_single_layer(const Surface& surface) {
  const Eigen::Index n = static_cast<Eigen::Index>(surface.size());
  DenseOperator op;
  op.kernel_tag = KernelTag::single_layer;
  op.row_points = surface.nodes();
  op.col_nodes = surface.nodes();

  if (surface.rotation_support()) {
    const auto& g = *surface.param_grid();
    const auto coeff = detail::zonal_coefficients([](double th) { return std::cos(0.5 * th); },
                                                  detail::sphere_band_limit(g),
                                                  std::max(16, 2 * g.n_theta));
    op.matrix = detail::zonal_matrix(surface, coeff, surface.analytic()->semi_axes[0]);
    return op;
  }

  op.matrix.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      op.matrix(i, j) =
          i == j ? 0.0 : surface.weight(j) / (surface.node(i) - surface.node(j)).norm();

  if (const auto* shape = surface.analytic()) {
    const auto& g = *surface.param_grid();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double full = detail::polar_inverse_distance(*shape, surface.unit_directions()[i],
                                                         2 * g.n_theta, 2 * g.n_phi);
      op.matrix(i, i) = full - op.matrix.row(i).sum();
    }
  } else {
    const auto& m = *surface.mesh();
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto c = m.corners(static_cast<std::size_t>(i));
      op.matrix(i, i) = detail::flat_triangle_inverse_distance(surface.node(i), c[0], c[1], c[2]);
    }
  }
  return op;
}

// ---------------------------------------------------------------------------
// Off-surface evaluation

struct OffSurfaceOptions {
  /// Points closer than near_fraction * diameter are flagged as near-singular.
  double near_fraction = 0.05;
};

struct PointEvaluation {
  Vector values;
  std::vector<bool> near_singular;

  bool degraded() const {
    for (bool b : near_singular)
      if (b) return true;
    return false;
  }
};

/// Green representation u(x) = (1/4pi) int u1/|x-y| dS - (1/4pi) int K(x,y) u0 dS
/// for x inside the surface, by the surface's own (smooth) quadrature.
inline PointEvaluation eval_green_representation(const Surface& surface, const BoundaryTrace& u0,
                                                 const BoundaryTrace& u1,
                                                 const std::vector<Point>& points,
                                                 const OffSurfaceOptions& opt = {}) {
  require_trace_on(surface, u0, "eval_green_representation(u0)");
  require_trace_on(surface, u1, "eval_green_representation(u1)");
  const double eps = opt.near_fraction * surface.diameter();
  PointEvaluation out;
  out.values.resize(static_cast<Eigen::Index>(points.size()));
  out.near_singular.assign(points.size(), false);
  for (std::size_t p = 0; p < points.size(); ++p) {
    const Point& x = points[p];
    if (!surface.contains(x))
      throw InvalidArgument("point is not inside the surface", "{\"point_index\":" +
                                                                   std::to_string(p) + "}");
    out.near_singular[p] = surface.distance_to(x) < eps;
    double acc = 0.0;
    for (std::size_t j = 0; j < surface.size(); ++j) {
      const Point& y = surface.node(j);
      const double r = (x - y).norm();
      const auto jj = static_cast<Eigen::Index>(j);
      acc += surface.weight(j) *
             (u1.values[jj] / r - double_layer_kernel(x, y, surface.normal(j)) * u0.values[jj]);
    }
    out.values[static_cast<Eigen::Index>(p)] = acc / (4.0 * std::numbers::pi);
  }
  return out;
}

enum class ProbeClass { inside, outside };

struct GaussIdentityReport {
  Vector probe_values;                  // int_S d/dnu_y 1/|x-y| dS per probe
  std::vector<ProbeClass> classification;
  Vector expected;                      // -4 pi inside, 0 outside
  double max_probe_deviation = 0.0;     // max |value - expected|
  double row_sum_deviation = 0.0;       // max |row sum of K + 2 pi|
};

inline GaussIdentityReport gauss_identity_check(const Surface& surface,
                                                const std::vector<Point>& probes,
                                                const DenseOperator& double_layer) {
  if (double_layer.kernel_tag != KernelTag::double_layer ||
      static_cast<std::size_t>(double_layer.rows()) != surface.size())
    throw InvalidArgument("gauss_identity_check needs the surface's double-layer operator");
  GaussIdentityReport rep;
  const auto np = static_cast<Eigen::Index>(probes.size());
  rep.probe_values.resize(np);
  rep.expected.resize(np);
  const double tiny = 1e-12 * surface.diameter();
  for (Eigen::Index p = 0; p < np; ++p) {
    const Point& x = probes[static_cast<std::size_t>(p)];
    if (surface.distance_to(x) < tiny) throw InvalidArgument("probe lies on the surface");
    double acc = 0.0;
    for (std::size_t j = 0; j < surface.size(); ++j)
      acc += surface.weight(j) * double_layer_kernel(x, surface.node(j), surface.normal(j));
    rep.probe_values[p] = acc;
    const bool inside = surface.contains(x);
    rep.classification.push_back(inside ? ProbeClass::inside : ProbeClass::outside);
    rep.expected[p] = inside ? -4.0 * std::numbers::pi : 0.0;
  }
  if (np > 0) rep.max_probe_deviation = (rep.probe_values - rep.expected).cwiseAbs().maxCoeff();
  rep.row_sum_deviation =
      (double_layer.matrix.rowwise().sum().array() + 2.0 * std::numbers::pi).abs().maxCoeff();
  return rep;
}

inline GaussIdentityReport gauss_identity_check(const Surface& surface,
                                                const std::vector<Point>& probes) {
  return gauss_identity_check(surface, probes, assemble_double_layer(surface));
}

/// int_G f(y) / |x - y| dy per target. Ball rules subtract f(nearest node)
/// times the closed-form potential of the uniform ball, which removes the
/// boundary singularity for targets on or near the sphere; other rules use
/// the plain weighted sum.
inline Vector newtonian_volume_potential(const VolumeQuadrature& vq, const Vector& f,
                                         const std::vector<Point>& targets) {
  if (static_cast<std::size_t>(f.size()) != vq.size())
    throw InvalidArgument("newtonian_volume_potential: f does not match quadrature size");
  Vector out(static_cast<Eigen::Index>(targets.size()));
  const double scale = vq.ball ? vq.ball->radius : 1.0;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const Point& x = targets[t];
    double nearest = std::numeric_limits<double>::infinity();
    Eigen::Index near_idx = 0;
    for (std::size_t j = 0; j < vq.size(); ++j) {
      const double r = (x - vq.points[j]).norm();
      if (r < nearest) nearest = r, near_idx = static_cast<Eigen::Index>(j);
    }
    if (nearest < 1e-12 * scale)
      throw NearSingular("target coincides with a volume quadrature point");
    const double f_ref = vq.ball ? f[near_idx] : 0.0;
    double acc = 0.0;
    for (std::size_t j = 0; j < vq.size(); ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      acc += vq.weights[jj] * (f[jj] - f_ref) / (x - vq.points[j]).norm();
    }
    if (vq.ball) acc += f_ref * vq.ball->inverse_distance_integral(x);
    out[static_cast<Eigen::Index>(t)] = acc;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Binary dump: int64 rows, int64 cols, then row-major float64 entries.

inline void write_operator_binary(std::ostream& out, const DenseOperator& op) {
  const std::int64_t rows = op.rows(), cols = op.cols();
  out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
  out.write(reinterpret_cast<const char*>(&cols), sizeof cols);
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = op.matrix;
  out.write(reinterpret_cast<const char*>(rm.data()),
            static_cast<std::streamsize>(sizeof(double) * rm.size()));
  if (!out) throw InvalidArgument("failed to write operator dump");
}

inline Eigen::MatrixXd read_operator_binary(std::istream& in) {
  std::int64_t rows = 0, cols = 0;
  in.read(reinterpret_cast<char*>(&rows), sizeof rows);
  in.read(reinterpret_cast<char*>(&cols), sizeof cols);
  if (!in || rows < 0 || cols < 0) throw InvalidArgument("bad operator dump header");
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(rows, cols);
  in.read(reinterpret_cast<char*>(rm.data()),
          static_cast<std::streamsize>(sizeof(double) * rm.size()));
  if (!in) throw InvalidArgument("truncated operator dump");
  return rm;
}

}  // namespace ubve
