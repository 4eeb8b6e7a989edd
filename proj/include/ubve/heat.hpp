#pragma once

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "ubve/errors.hpp"
#include "ubve/quadrature.hpp"
#include "ubve/system.hpp"

namespace ubve {

/// Behavior of v beyond the last x-grid point.
enum class DecayTag { compactly_supported, gaussian_dominated, polynomial };

inline const char* to_string(DecayTag tag) {
  switch (tag) {
    case DecayTag::compactly_supported: return "compactly-supported";
    case DecayTag::gaussian_dominated: return "gaussian-dominated";
    case DecayTag::polynomial: return "polynomial";
  }
  return "unknown";
}

inline DecayTag parse_decay_tag(const std::string& s) {
  if (s == "compactly-supported" || s == "compact") return DecayTag::compactly_supported;
  if (s == "gaussian-dominated") return DecayTag::gaussian_dominated;
  if (s == "polynomial") return DecayTag::polynomial;
  throw InvalidArgument("unknown decay tag '" + s + "'");
}

/// Boundary values of a caloric function u(t, x) on the quarter plane t, x > 0:
/// v(x) = u(0+, x), phi(t) = u(t, 0+), psi(t) = u_x(t, 0+).
struct CaloricTraces {
  Vector x_grid;
  Vector v;
  Vector t_grid;
  std::optional<Vector> phi;
  std::optional<Vector> psi;
  DecayTag decay = DecayTag::compactly_supported;
  /// Closed form of v used beyond the x-grid (required unless compactly supported).
  std::function<double(double)> v_tail;
};

enum class AbelScheme { product_linear };

struct QuadratureConfig {
  int gauss_nodes = 64;
  double s_max = 8.0;
  AbelScheme abel_scheme = AbelScheme::product_linear;
  /// Panels after [0, t_1] that use a three-term local fit capturing
  /// s^{-1/2} (or sqrt(s)) behavior near t = 0.
  int singular_start_panels = 16;
};

namespace detail {

inline void require_increasing(const Vector& g, const char* what) {
  for (Eigen::Index i = 1; i < g.size(); ++i)
    if (!(g[i] > g[i - 1]))
      throw InvalidArgument(std::string(what) + " must be strictly increasing");
}

inline void validate_config(const QuadratureConfig& cfg) {
  if (cfg.gauss_nodes < 8) throw InvalidArgument("gauss_nodes must be at least 8");
  if (!(cfg.s_max > 0.0)) throw InvalidArgument("s_max must be positive");
  if (cfg.singular_start_panels < 0)
    throw InvalidArgument("singular_start_panels must be nonnegative");
}

inline void validate_t_grid(const Vector& t_grid) {
  if (t_grid.size() < 3) throw InvalidArgument("t-grid needs at least 3 points");
  if (!(t_grid[0] > 0.0)) throw InvalidArgument("t-grid must be positive");
  require_increasing(t_grid, "t-grid");
}

inline void validate_v(const CaloricTraces& tr) {
  if (tr.x_grid.size() < 4) throw InvalidArgument("x-grid needs at least 4 points");
  if (tr.v.size() != tr.x_grid.size()) throw InvalidArgument("v does not match the x-grid");
  if (!(tr.x_grid[0] >= 0.0)) throw InvalidArgument("x-grid must be nonnegative");
  require_increasing(tr.x_grid, "x-grid");
  if (tr.decay != DecayTag::compactly_supported && !tr.v_tail)
    throw InvalidArgument(std::string("v with decay tag '") + to_string(tr.decay) +
                          "' needs a closed-form extension beyond the x-grid");
}

inline void validate_t_trace(const CaloricTraces& tr, const std::optional<Vector>& f,
                             const char* name) {
  if (!f) throw InvalidArgument(std::string(name) + " trace is required");
  if (f->size() != tr.t_grid.size())
    throw InvalidArgument(std::string(name) + " does not match the t-grid");
}

/// v(xi): cubic Lagrange interpolation on the grid (extrapolation below the
/// first node), the decay model beyond the last node.
inline double v_at(const CaloricTraces& tr, double xi) {
  const Vector& xg = tr.x_grid;
  const Eigen::Index n = xg.size();
  if (xi > xg[n - 1]) return tr.decay == DecayTag::compactly_supported ? 0.0 : tr.v_tail(xi);
  const double* begin = xg.data();
  Eigen::Index i = std::upper_bound(begin, begin + n, xi) - begin - 1;
  Eigen::Index base = std::clamp<Eigen::Index>(i - 1, 0, n - 4);
  double sum = 0.0;
  for (int a = 0; a < 4; ++a) {
    double l = 1.0;
    for (int b = 0; b < 4; ++b)
      if (b != a) l *= (xi - xg[base + b]) / (xg[base + a] - xg[base + b]);
    sum += l * tr.v[base + a];
  }
  return sum;
}

/// Moments over [a, b] of a basis {1, s, third(s)} against a weight.
using MomentFn = std::function<std::array<double, 3>(double a, double b, bool need_third)>;

/// Row r with int_0^t f(s) w(s) ds ~ r . f(t_grid). Panel [0, t_1] and the
/// next `start_panels` panels fit f by {1, s, third} through three nodes;
/// later panels interpolate f linearly.
inline Vector product_row(const Vector& tg, double t, int start_panels,
                          double (*third)(double), const MomentFn& moments) {
  const Eigen::Index n = tg.size();
  Vector row = Vector::Zero(n);
  for (Eigen::Index p = 0; p < n; ++p) {
    const double a = p == 0 ? 0.0 : tg[p - 1];
    if (!(a < t)) break;
    const double b = std::min(tg[p], t);
    if (p <= start_panels) {
      const Eigen::Index base = std::min<Eigen::Index>(p == 0 ? 0 : p - 1, n - 3);
      Eigen::Matrix3d V;
      for (int r = 0; r < 3; ++r) {
        const double s = tg[base + r];
        V(r, 0) = 1.0;
        V(r, 1) = s;
        V(r, 2) = third(s);
      }
      const auto m = moments(a, b, true);
      const Eigen::Vector3d w = V.transpose().partialPivLu().solve(Eigen::Vector3d(m[0], m[1], m[2]));
      for (int r = 0; r < 3; ++r) row[base + r] += w[r];
    } else {
      const auto m = moments(a, b, false);
      const double s1 = tg[p - 1], s2 = tg[p], h = s2 - s1;
      row[p - 1] += (s2 * m[0] - m[1]) / h;
      row[p] += (m[1] - s1 * m[0]) / h;
    }
  }
  return row;
}

inline double inv_sqrt(double s) { return 1.0 / std::sqrt(s); }
inline double plain_sqrt(double s) { return std::sqrt(s); }

/// Moments of {1, s, s^{-1/2}} (or sqrt(s) as third) against (t - s)^{-1/2}.
inline MomentFn abel_moments(double t, bool sqrt_third) {
  return [t, sqrt_third](double a, double b, bool need_third) {
    const double ra = std::sqrt(std::max(t - a, 0.0)), rb = std::sqrt(std::max(t - b, 0.0));
    const double m0 = 2.0 * (ra - rb);
    auto F = [t](double r) { return -2.0 * t * r + (2.0 / 3.0) * r * r * r; };
    const double m1 = F(rb) - F(ra);
    double m2 = 0.0;
    if (need_third) {
      const double ta = std::asin(std::sqrt(std::min(a / t, 1.0)));
      const double tb = std::asin(std::sqrt(std::min(b / t, 1.0)));
      if (sqrt_third) {
        auto G = [](double th) { return th - std::sin(th) * std::cos(th); };
        m2 = t * (G(tb) - G(ta));
      } else {
        m2 = 2.0 * (tb - ta);
      }
    }
    return std::array<double, 3>{m0, m1, m2};
  };
}

/// Moments of {1, s, s^{-1/2}} against (t - s)^{-1/2} exp(-c / (t - s)).
inline MomentFn heat_kernel_moments(double t, double c) {
  if (c == 0.0) return abel_moments(t, false);
  return [t, c](double a, double b, bool need_third) {
    // antiderivatives in sigma = t - s
    auto F = [c](double sg) {
      if (sg <= 0.0) return 0.0;
      return 2.0 * std::sqrt(sg) * std::exp(-c / sg) -
             2.0 * std::sqrt(std::numbers::pi * c) * std::erfc(std::sqrt(c / sg));
    };
    auto G = [c, &F](double sg) {
      if (sg <= 0.0) return 0.0;
      return (2.0 / 3.0) * sg * std::sqrt(sg) * std::exp(-c / sg) - (2.0 * c / 3.0) * F(sg);
    };
    const double sa = std::max(t - a, 0.0), sb = std::max(t - b, 0.0);
    const double m0 = F(sa) - F(sb);
    const double m1 = t * m0 - (G(sa) - G(sb));
    double m2 = 0.0;
    if (need_third) {
      const double ta = std::asin(std::sqrt(std::min(a / t, 1.0)));
      const double tb = std::asin(std::sqrt(std::min(b / t, 1.0)));
      auto f = [t, c](double th) {
        const double cs = std::cos(th);
        const double den = t * cs * cs;
        return den > 0.0 ? 2.0 * std::exp(-c / den) : 0.0;
      };
      m2 = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, ta, tb, 15, 1e-13);
    }
    return std::array<double, 3>{m0, m1, m2};
  };
}

/// d/dt at node i of the fit of f by {sqrt(t), t, t^{3/2}, t^2} through four
/// nodes; these functions vanish at t = 0 like the Abel integral does.
inline double half_power_derivative(const Vector& x, const Vector& f, Eigen::Index i,
                                    Eigen::Index base) {
  Eigen::Matrix4d V;
  Eigen::Vector4d rhs;
  for (int r = 0; r < 4; ++r) {
    const double s = x[base + r], q = std::sqrt(s);
    V.row(r) << q, s, s * q, s * s;
    rhs[r] = f[base + r];
  }
  const Eigen::Vector4d c = V.colPivHouseholderQr().solve(rhs);
  const double s = x[i], q = std::sqrt(s);
  return c[0] / (2.0 * q) + c[1] + 1.5 * c[2] * q + 2.0 * c[3] * s;
}

}  // namespace detail

/// (pi t)^{-1/2} int_0^inf exp(-xi^2 / 4t) v(xi) dxi, after xi = 2 sqrt(t) s,
/// by Gauss-Legendre on [0, s_max].
inline double gauss_weierstrass_term(const CaloricTraces& tr, double t,
                                     const QuadratureConfig& cfg = {}) {
  detail::validate_config(cfg);
  detail::validate_v(tr);
  if (!(t > 0.0)) throw InvalidArgument("time must be positive");
  const QuadratureRule rule = map_rule(gauss_legendre(cfg.gauss_nodes), 0.0, cfg.s_max);
  const double scale = 2.0 * std::sqrt(t);
  double sum = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const double s = rule.nodes[q];
    sum += rule.weights[q] * std::exp(-s * s) * detail::v_at(tr, scale * s);
  }
  return 2.0 / std::sqrt(std::numbers::pi) * sum;
}

inline Vector gauss_weierstrass_term(const CaloricTraces& tr, const QuadratureConfig& cfg = {}) {
  Vector out(tr.t_grid.size());
  for (Eigen::Index k = 0; k < out.size(); ++k)
    out[k] = gauss_weierstrass_term(tr, tr.t_grid[k], cfg);
  return out;
}

/// Matrix of psi -> pi^{-1/2} int_0^t psi(s) (t - s)^{-1/2} ds on the t-grid.
inline Eigen::MatrixXd abel_matrix(const Vector& t_grid, const QuadratureConfig& cfg = {}) {
  detail::validate_config(cfg);
  detail::validate_t_grid(t_grid);
  const Eigen::Index n = t_grid.size();
  Eigen::MatrixXd M(n, n);
  for (Eigen::Index k = 0; k < n; ++k)
    M.row(k) = detail::product_row(t_grid, t_grid[k], cfg.singular_start_panels,
                                   &detail::inv_sqrt, detail::abel_moments(t_grid[k], false))
                   .transpose() /
               std::sqrt(std::numbers::pi);
  return M;
}

/// phi(t) = GaussTerm(v)(t) - pi^{-1/2} int_0^t psi(s) (t - s)^{-1/2} ds.
inline Vector phi_from_v_psi(const CaloricTraces& tr, const QuadratureConfig& cfg = {}) {
  detail::validate_t_grid(tr.t_grid);
  detail::validate_t_trace(tr, tr.psi, "psi");
  return gauss_weierstrass_term(tr, cfg) - abel_matrix(tr.t_grid, cfg) * *tr.psi;
}

/// A = identity on phi, B = Abel operator on psi, C = minus the Gauss-Weierstrass
/// operator. The source slot carries the v samples; beyond-grid values come
/// from the decay model of `tr`.
inline UniversalBoundarySystem heat_system(const CaloricTraces& tr, const QuadratureConfig& cfg = {}) {
  detail::validate_t_grid(tr.t_grid);
  detail::validate_v(tr);
  const Eigen::MatrixXd abel = abel_matrix(tr.t_grid, cfg);
  UniversalBoundarySystem sys;
  sys.apply_A = [](const Vector& phi) { return phi; };
  sys.apply_B = [abel](const Vector& psi) { return Vector(abel * psi); };
  CaloricTraces base = tr;
  base.phi.reset();
  base.psi.reset();
  sys.apply_C = [base, cfg](const Vector& v) {
    CaloricTraces probe = base;
    probe.v = v;
    return Vector(-gauss_weierstrass_term(probe, cfg));
  };
  const Eigen::Index n = tr.t_grid.size();
  sys.u0_size = sys.u1_size = n;
  sys.f_size = tr.x_grid.size();
  Vector w(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double left = k == 0 ? tr.t_grid[0] : tr.t_grid[k] - tr.t_grid[k - 1];
    const double right = k + 1 < n ? tr.t_grid[k + 1] - tr.t_grid[k] : 0.0;
    w[k] = 0.5 * (left + right);
  }
  sys.residual_space = {"t-grid", w};
  return sys;
}

/// Residual phi - GaussTerm(v) + Abel(psi) on the t-grid.
inline ResidualReport heat_residual(const CaloricTraces& tr, const QuadratureConfig& cfg = {},
                                    std::optional<double> tol = std::nullopt) {
  detail::validate_t_trace(tr, tr.phi, "phi");
  detail::validate_t_trace(tr, tr.psi, "psi");
  const double t = tol.value_or(default_tolerance(*tr.phi, *tr.psi));
  return system_residual(heat_system(tr, cfg), *tr.phi, *tr.psi, tr.v, t);
}

/// Abel inversion of the heat boundary equation for psi:
/// psi(t) = pi^{-1/2} d/dt int_0^t g(s) (t - s)^{-1/2} ds, g = GaussTerm(v) - phi.
inline Vector psi_from_v_phi(const CaloricTraces& tr, const QuadratureConfig& cfg = {}) {
  detail::validate_t_grid(tr.t_grid);
  detail::validate_t_trace(tr, tr.phi, "phi");
  const Vector& tg = tr.t_grid;
  const Eigen::Index n = tg.size();
  if (n < 8) throw InvalidArgument("t-grid too coarse for differentiation (need 8 points)");
  const Vector g = gauss_weierstrass_term(tr, cfg) - *tr.phi;
  // H is differentiated, so every panel uses the three-node {1, s, sqrt(s)} fit
  Vector H(n);
  for (Eigen::Index k = 0; k < n; ++k)
    H[k] = detail::product_row(tg, tg[k], static_cast<int>(n), &detail::plain_sqrt,
                               detail::abel_moments(tg[k], true))
               .dot(g);
  Vector psi(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double dH = detail::half_power_derivative(tg, H, i, std::clamp<Eigen::Index>(i - 1, 0, n - 4));
    psi[i] = dH / std::sqrt(std::numbers::pi);
  }
  if (!psi.allFinite()) throw NumericFailure("Abel inversion produced non-finite values");
  return psi;
}

struct SpaceTimePoint {
  double t = 0.0;
  double x = 0.0;
};

/// u(t, x) = int_0^inf G_N(x, xi, t) v(xi) dxi
///           - pi^{-1/2} int_0^t psi(s) (t - s)^{-1/2} exp(-x^2 / 4(t - s)) ds
/// with the Neumann half-line heat kernel G_N. Requires 0 < t <= last t-grid point.
inline Vector reconstruct_quarterplane(const CaloricTraces& tr,
                                       const std::vector<SpaceTimePoint>& points,
                                       const QuadratureConfig& cfg = {}) {
  detail::validate_config(cfg);
  detail::validate_v(tr);
  detail::validate_t_grid(tr.t_grid);
  detail::validate_t_trace(tr, tr.psi, "psi");
  const Vector& tg = tr.t_grid;
  const QuadratureRule ref = gauss_legendre(cfg.gauss_nodes);
  const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
  Vector out(static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double t = points[i].t, x = points[i].x;
    if (!(t > 0.0)) throw InvalidArgument("reconstruction time must be positive");
    if (!(x > 0.0)) throw InvalidArgument("reconstruction abscissa must be positive");
    if (t > tg[tg.size() - 1] * (1.0 + 1e-12))
      throw InvalidArgument("reconstruction time lies beyond the t-grid");

    const double rt = 2.0 * std::sqrt(t);
    double vterm = 0.0;
    const double lo1 = std::max(-x / rt, -cfg.s_max);
    if (lo1 < cfg.s_max) {
      const QuadratureRule r = map_rule(ref, lo1, cfg.s_max);
      for (std::size_t q = 0; q < r.size(); ++q)
        vterm += r.weights[q] * std::exp(-r.nodes[q] * r.nodes[q]) *
                 detail::v_at(tr, x + rt * r.nodes[q]);
    }
    const double lo2 = x / rt;
    if (lo2 < cfg.s_max) {
      const QuadratureRule r = map_rule(ref, lo2, cfg.s_max);
      for (std::size_t q = 0; q < r.size(); ++q)
        vterm += r.weights[q] * std::exp(-r.nodes[q] * r.nodes[q]) *
                 detail::v_at(tr, -x + rt * r.nodes[q]);
    }
    const Vector row = detail::product_row(tg, t, cfg.singular_start_panels, &detail::inv_sqrt,
                                           detail::heat_kernel_moments(t, 0.25 * x * x));
    out[static_cast<Eigen::Index>(i)] = inv_sqrt_pi * (vterm - row.dot(*tr.psi));
  }
  return out;
}

}  // namespace ubve
