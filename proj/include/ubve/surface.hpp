#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ubve/errors.hpp"
#include "ubve/quadrature.hpp"

namespace ubve {

using Point = Eigen::Vector3d;
using Vector = Eigen::VectorXd;

enum class SurfaceKind { analytic_sphere, analytic_ellipsoid, triangulated };

inline const char* to_string(SurfaceKind kind) {
  switch (kind) {
    case SurfaceKind::analytic_sphere: return "analytic-sphere";
    case SurfaceKind::analytic_ellipsoid: return "analytic-ellipsoid";
    case SurfaceKind::triangulated: return "triangulated";
  }
  return "unknown";
}

/// Tensor grid of an analytic surface: node index = it * n_phi + ip, where
/// it runs over Gauss-Legendre nodes in cos(theta) (ascending) and ip over
/// phi = 2 pi ip / n_phi.
struct ParamGrid {
  int n_theta = 0;
  int n_phi = 0;

  std::size_t index(int it, int ip) const {
    return static_cast<std::size_t>(it) * n_phi + ip;
  }
};

/// Linear image of the unit sphere, x = center + frame * diag(semi_axes) * s.
struct AnalyticShape {
  Point center = Point::Zero();
  Eigen::Vector3d semi_axes = Eigen::Vector3d::Ones();
  Eigen::Matrix3d frame = Eigen::Matrix3d::Identity();

  Point map(const Eigen::Vector3d& s) const {
    return center + frame * semi_axes.cwiseProduct(s);
  }
  Eigen::Vector3d normal(const Eigen::Vector3d& s) const {
    return frame * s.cwiseQuotient(semi_axes).normalized();
  }
  /// Area stretch of s -> map(s) at the unit direction s.
  double area_factor(const Eigen::Vector3d& s) const {
    return semi_axes.prod() * s.cwiseQuotient(semi_axes).norm();
  }
  /// Unit-sphere preimage of a surface point.
  Eigen::Vector3d preimage(const Point& x) const {
    return (frame.transpose() * (x - center)).cwiseQuotient(semi_axes);
  }
};

struct TriangleMesh {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;

  std::array<Point, 3> corners(std::size_t t) const {
    const auto& tri = triangles[t];
    return {vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]};
  }
};

/// Closed surface with a quadrature rule (nodes, area weights, outward unit
/// normals). Immutable after construction; copies share nothing mutable.
class Surface {
 public:
  SurfaceKind kind() const { return kind_; }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<Point>& nodes() const { return nodes_; }
  const std::vector<Point>& normals() const { return normals_; }
  const Vector& weights() const { return weights_; }
  const Point& node(std::size_t i) const { return nodes_[i]; }
  const Point& normal(std::size_t i) const { return normals_[i]; }
  double weight(std::size_t i) const { return weights_[static_cast<Eigen::Index>(i)]; }
  const std::optional<ParamGrid>& param_grid() const { return grid_; }
  bool rotation_support() const { return kind_ == SurfaceKind::analytic_sphere; }
  std::uint64_t id() const { return id_; }

  const AnalyticShape* analytic() const { return std::get_if<AnalyticShape>(&geometry_); }
  const TriangleMesh* mesh() const { return std::get_if<TriangleMesh>(&geometry_); }

  /// Unit-sphere preimages of the nodes (analytic kinds only, empty otherwise).
  const std::vector<Eigen::Vector3d>& unit_directions() const { return directions_; }

  double area() const { return weights_.sum(); }

  Point centroid() const {
    Point c = Point::Zero();
    for (std::size_t i = 0; i < size(); ++i) c += weight(i) * nodes_[i];
    return c / area();
  }

  double diameter() const {
    if (const auto* shape = analytic()) return 2.0 * shape->semi_axes.maxCoeff();
    const auto& v = mesh()->vertices;
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = i + 1; j < v.size(); ++j) d = std::max(d, (v[i] - v[j]).norm());
    return d;
  }

  /// True when x lies in the open domain bounded by the surface.
  bool contains(const Point& x) const {
    if (const auto* shape = analytic()) return shape->preimage(x).norm() < 1.0;
    // winding number via summed solid angles (4 pi inside, 0 outside)
    double omega = 0.0;
    for (std::size_t t = 0; t < mesh()->triangles.size(); ++t) {
      const auto c = mesh()->corners(t);
      omega += solid_angle(x, c[0], c[1], c[2]);
    }
    return omega > 2.0 * std::numbers::pi;
  }

  /// Distance from x to the surface: exact for spheres and meshes, a node-based
  /// upper estimate for ellipsoids.
  double distance_to(const Point& x) const {
    if (const auto* shape = analytic()) {
      if (kind_ == SurfaceKind::analytic_sphere)
        return std::abs((x - shape->center).norm() - shape->semi_axes[0]);
      double d = std::numeric_limits<double>::infinity();
      for (const auto& p : nodes_) d = std::min(d, (p - x).norm());
      return d;
    }
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < mesh()->triangles.size(); ++t) {
      const auto c = mesh()->corners(t);
      d = std::min(d, point_triangle_distance(x, c[0], c[1], c[2]));
    }
    return d;
  }

  /// Signed solid angle of triangle (a,b,c) seen from x (Van Oosterom-Strackee).
  static double solid_angle(const Point& x, const Point& a, const Point& b, const Point& c) {
    const Point ra = a - x, rb = b - x, rc = c - x;
    const double la = ra.norm(), lb = rb.norm(), lc = rc.norm();
    const double num = ra.dot(rb.cross(rc));
    const double den = la * lb * lc + ra.dot(rb) * lc + ra.dot(rc) * lb + rb.dot(rc) * la;
    return 2.0 * std::atan2(num, den);
  }

  static double point_triangle_distance(const Point& p, const Point& a, const Point& b,
                                        const Point& c) {
    // closest point on triangle, Ericson's region classification
    const Point ab = b - a, ac = c - a, ap = p - a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0 && d2 <= 0) return (p - a).norm();
    const Point bp = p - b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0 && d4 <= d3) return (p - b).norm();
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0 && d1 >= 0 && d3 <= 0) return (p - (a + d1 / (d1 - d3) * ab)).norm();
    const Point cp = p - c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0 && d5 <= d6) return (p - c).norm();
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0 && d2 >= 0 && d6 <= 0) return (p - (a + d2 / (d2 - d6) * ac)).norm();
    const double va = d3 * d6 - d5 * d4;
    if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
      const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
      return (p - (b + w * (c - b))).norm();
    }
    const double denom = 1.0 / (va + vb + vc);
    const Point q = a + ab * (vb * denom) + ac * (vc * denom);
    return (p - q).norm();
  }

 private:
  Surface() = default;

  static std::uint64_t next_id() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1);
  }

  SurfaceKind kind_ = SurfaceKind::triangulated;
  std::vector<Point> nodes_;
  std::vector<Point> normals_;
  std::vector<Eigen::Vector3d> directions_;
  Vector weights_;
  std::optional<ParamGrid> grid_;
  std::variant<AnalyticShape, TriangleMesh> geometry_;
  std::uint64_t id_ = 0;

  friend Surface make_analytic_surface(SurfaceKind, const AnalyticShape&, int, int);
  friend Surface make_triangulated_surface(TriangleMesh);
};

inline Surface make_analytic_surface(SurfaceKind kind, const AnalyticShape& shape, int n_theta,
                                     int n_phi) {
  if (n_theta < 4 || n_phi < 8)
    throw InvalidArgument("surface grid must have n_theta >= 4 and n_phi >= 8");
  if (!(shape.semi_axes.array() > 0.0).all() || !shape.semi_axes.allFinite())
    throw InvalidArgument("surface lengths must be positive");
  if (!(shape.frame.transpose() * shape.frame).isIdentity(1e-12))
    throw InvalidArgument("surface frame must be orthonormal");

  Surface s;
  s.kind_ = kind;
  s.grid_ = ParamGrid{n_theta, n_phi};
  s.geometry_ = shape;
  s.id_ = Surface::next_id();

  const auto gl = gauss_legendre(n_theta);
  const std::size_t n = static_cast<std::size_t>(n_theta) * n_phi;
  s.nodes_.reserve(n);
  s.normals_.reserve(n);
  s.directions_.reserve(n);
  s.weights_.resize(static_cast<Eigen::Index>(n));
  const double dphi = 2.0 * std::numbers::pi / n_phi;
  for (int it = 0; it < n_theta; ++it) {
    const double ct = gl.nodes[it];
    const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    for (int ip = 0; ip < n_phi; ++ip) {
      const double phi = ip * dphi;
      const Eigen::Vector3d dir(st * std::cos(phi), st * std::sin(phi), ct);
      s.directions_.push_back(dir);
      s.nodes_.push_back(shape.map(dir));
      s.normals_.push_back(shape.normal(dir));
      s.weights_[static_cast<Eigen::Index>(s.grid_->index(it, ip))] =
          gl.weights[it] * dphi * shape.area_factor(dir);
    }
  }
  return s;
}

/// Sphere of the given radius; Gauss-Legendre in cos(theta) times uniform phi.
inline Surface make_sphere(double radius, const Point& center, int n_theta, int n_phi,
                           const Eigen::Matrix3d& frame = Eigen::Matrix3d::Identity()) {
  if (!(radius > 0.0)) throw InvalidArgument("sphere radius must be positive");
  AnalyticShape shape{center, Eigen::Vector3d::Constant(radius), frame};
  return make_analytic_surface(SurfaceKind::analytic_sphere, shape, n_theta, n_phi);
}

inline Surface make_ellipsoid(double a, double b, double c, int n_theta, int n_phi,
                              const Point& center = Point::Zero(),
                              const Eigen::Matrix3d& frame = Eigen::Matrix3d::Identity()) {
  if (!(a > 0.0 && b > 0.0 && c > 0.0))
    throw InvalidArgument("ellipsoid semi-axes must be positive");
  AnalyticShape shape{center, Eigen::Vector3d(a, b, c), frame};
  return make_analytic_surface(SurfaceKind::analytic_ellipsoid, shape, n_theta, n_phi);
}

/// Centroid-rule surface on a closed triangle mesh. Normals are oriented by
/// positive enclosed volume; any face whose normal does not point away from
/// the mesh centroid makes the input non-star-shaped and is rejected.
inline Surface make_triangulated_surface(TriangleMesh mesh) {
  if (mesh.vertices.size() < 4 || mesh.triangles.size() < 4)
    throw InvalidArgument("triangulated surface needs at least 4 vertices and 4 faces");
  const int nv = static_cast<int>(mesh.vertices.size());
  for (const auto& tri : mesh.triangles)
    for (int k : tri)
      if (k < 0 || k >= nv) throw InvalidArgument("triangle index out of range");

  double volume = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto c = mesh.corners(t);
    volume += c[0].dot(c[1].cross(c[2])) / 6.0;
  }
  if (!(std::abs(volume) > 0.0)) throw InvalidArgument("triangulated surface encloses no volume");
  if (volume < 0.0)
    for (auto& tri : mesh.triangles) std::swap(tri[1], tri[2]);

  Surface s;
  s.kind_ = SurfaceKind::triangulated;
  s.id_ = Surface::next_id();
  s.weights_.resize(static_cast<Eigen::Index>(mesh.triangles.size()));
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto c = mesh.corners(t);
    const Eigen::Vector3d cr = (c[1] - c[0]).cross(c[2] - c[0]);
    const double twice_area = cr.norm();
    if (!(twice_area > 0.0)) throw InvalidArgument("degenerate triangle in mesh");
    s.nodes_.push_back((c[0] + c[1] + c[2]) / 3.0);
    s.normals_.push_back(cr / twice_area);
    s.weights_[static_cast<Eigen::Index>(t)] = 0.5 * twice_area;
  }
  s.geometry_ = std::move(mesh);
  const Point centre = s.centroid();
  for (std::size_t t = 0; t < s.size(); ++t)
    if (!((s.nodes_[t] - centre).dot(s.normals_[t]) > 0.0))
      throw InvalidArgument("triangulated surface is not star-shaped about its centroid");
  return s;
}

/// Sum_i w_i values_i.
inline double surface_integral(const Surface& surface, const Vector& values) {
  if (static_cast<std::size_t>(values.size()) != surface.size())
    throw InvalidArgument("surface_integral: value count does not match node count");
  return surface.weights().dot(values);
}

// ---------------------------------------------------------------------------
// Strong convexity

struct ConvexityOptions {
  int n_theta_samples = 64;
  int n_phi_samples = 128;
  int n_directions = 16;
  double threshold = 1e-8;
};

struct ParamLocation {
  int chart = 0;  // 0: polar axis = frame z, 1: polar axis = frame x
  double theta = 0.0;
  double phi = 0.0;
};

struct ConvexityReport {
  double c0_estimate = 0.0;
  ParamLocation min_location;
  bool passed = false;
  /// Smallest |principal curvature| over the samples (parametrization free).
  double min_normal_curvature = 0.0;
};

/// Samples |(nu, d^2 r(du, dv))| / (du^2 + dv^2) over a two-chart atlas of
/// regular polar parametrizations (theta restricted to [pi/4, 3pi/4] in each
/// chart; together they cover the surface). The result is an estimate, not a
/// bound.
inline ConvexityReport verify_strong_convexity(const Surface& surface,
                                               const ConvexityOptions& opt = {}) {
  const auto* shape = surface.analytic();
  if (!shape) throw Unsupported("strong convexity needs an analytic (C^2) parametrization");
  if (opt.n_theta_samples < 1 || opt.n_phi_samples < 1 || opt.n_directions < 1)
    throw InvalidArgument("convexity sampling counts must be positive");

  const double scale = shape->semi_axes.maxCoeff();
  const double lo = 0.25 * std::numbers::pi, hi = 0.75 * std::numbers::pi;
  ConvexityReport report;
  report.c0_estimate = std::numeric_limits<double>::infinity();
  report.min_normal_curvature = std::numeric_limits<double>::infinity();

  auto to_chart = [](int chart, const Eigen::Vector3d& v) -> Eigen::Vector3d {
    return chart == 0 ? v : Eigen::Vector3d(v[2], v[0], v[1]);
  };
  auto lin = [&](const Eigen::Vector3d& v) -> Eigen::Vector3d {
    return shape->frame * shape->semi_axes.cwiseProduct(v);
  };

  for (int chart = 0; chart < 2; ++chart) {
    for (int it = 0; it < opt.n_theta_samples; ++it) {
      const double th =
          opt.n_theta_samples == 1 ? lo : lo + it * (hi - lo) / (opt.n_theta_samples - 1);
      const double st = std::sin(th), ct = std::cos(th);
      for (int ip = 0; ip < opt.n_phi_samples; ++ip) {
        const double ph = 2.0 * std::numbers::pi * ip / opt.n_phi_samples;
        const double sp = std::sin(ph), cp = std::cos(ph);
        const Eigen::Vector3d s(st * cp, st * sp, ct);
        const Eigen::Vector3d s_t(ct * cp, ct * sp, -st), s_p(-st * sp, st * cp, 0.0);
        const Eigen::Vector3d s_tp(-ct * sp, ct * cp, 0.0), s_pp(-st * cp, -st * sp, 0.0);
        const Eigen::Vector3d r_t = lin(to_chart(chart, s_t)), r_p = lin(to_chart(chart, s_p));
        const Eigen::Vector3d r_tt = lin(to_chart(chart, -s)), r_tp = lin(to_chart(chart, s_tp));
        const Eigen::Vector3d r_pp = lin(to_chart(chart, s_pp));
        Eigen::Vector3d nu = r_t.cross(r_p);
        const double jac = nu.norm();
        if (!(jac > 1e-12 * scale * scale))
          throw NumericFailure("degenerate parametrization in convexity sampling");
        nu /= jac;
        if (nu.dot(lin(to_chart(chart, s))) < 0.0) nu = -nu;

        const double L = nu.dot(r_tt), M = nu.dot(r_tp), N = nu.dot(r_pp);
        for (int m = 0; m < opt.n_directions; ++m) {
          const double alpha = std::numbers::pi * m / opt.n_directions;
          const double du = std::cos(alpha), dv = std::sin(alpha);
          const double q = std::abs(L * du * du + 2.0 * M * du * dv + N * dv * dv);
          if (q < report.c0_estimate) {
            report.c0_estimate = q;
            report.min_location = {chart, th, ph};
          }
        }
        // principal curvatures: eigenvalues of II in an orthonormal tangent frame
        Eigen::Matrix2d first, second;
        first << r_t.squaredNorm(), r_t.dot(r_p), r_t.dot(r_p), r_p.squaredNorm();
        second << L, M, M, N;
        const Eigen::Matrix2d rinv =
            first.llt().matrixU().solve(Eigen::Matrix2d::Identity().eval());
        const Eigen::Vector2d k = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(
                                      rinv.transpose() * second * rinv, Eigen::EigenvaluesOnly)
                                      .eigenvalues();
        const double k1 = k[0], k2 = k[1];
        report.min_normal_curvature =
            std::min({report.min_normal_curvature, std::abs(k1), std::abs(k2)});
      }
    }
  }
  report.passed = report.c0_estimate > opt.threshold;
  return report;
}

// ---------------------------------------------------------------------------
// Volume quadrature

struct BallGeometry {
  Point center = Point::Zero();
  double radius = 1.0;

  /// Closed-form integral of 1/|x - y| over the ball.
  double inverse_distance_integral(const Point& x) const {
    const double r = (x - center).norm();
    if (r >= radius) return 4.0 * std::numbers::pi * radius * radius * radius / (3.0 * r);
    return 2.0 * std::numbers::pi * (radius * radius - r * r / 3.0);
  }
};

struct VolumeQuadrature {
  std::vector<Point> points;
  Vector weights;
  /// Present for rules built over a ball; enables singular corrections.
  std::optional<BallGeometry> ball;

  std::size_t size() const { return points.size(); }
  double volume() const { return weights.sum(); }
};

/// Product rule on a ball: Gauss-Legendre in r and cos(theta), uniform phi
/// (half-step offset), Jacobian r^2 folded into the weights.
inline VolumeQuadrature make_ball_volume_quadrature(double radius, const Point& center,
                                                    int n_r = 24, int n_theta = 24,
                                                    int n_phi = 48) {
  if (!(radius > 0.0)) throw InvalidArgument("ball radius must be positive");
  if (n_r < 1 || n_theta < 1 || n_phi < 1)
    throw InvalidArgument("ball quadrature sizes must be positive");
  const auto gr = map_rule(gauss_legendre(n_r), 0.0, radius);
  const auto gt = gauss_legendre(n_theta);
  const double dphi = 2.0 * std::numbers::pi / n_phi;
  VolumeQuadrature vq;
  vq.ball = BallGeometry{center, radius};
  vq.points.reserve(static_cast<std::size_t>(n_r) * n_theta * n_phi);
  vq.weights.resize(static_cast<Eigen::Index>(n_r) * n_theta * n_phi);
  Eigen::Index k = 0;
  for (int ir = 0; ir < n_r; ++ir) {
    const double r = gr.nodes[ir];
    for (int it = 0; it < n_theta; ++it) {
      const double ct = gt.nodes[it], st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
      for (int ip = 0; ip < n_phi; ++ip) {
        const double phi = (ip + 0.5) * dphi;
        vq.points.push_back(center + r * Point(st * std::cos(phi), st * std::sin(phi), ct));
        vq.weights[k++] = gr.weights[ir] * r * r * gt.weights[it] * dphi;
      }
    }
  }
  return vq;
}

}  // namespace ubve
