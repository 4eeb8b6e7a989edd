#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "ubve/errors.hpp"
#include "ubve/format.hpp"
#include "ubve/layer_potentials.hpp"
#include "ubve/surface.hpp"
#include "ubve/system.hpp"

namespace ubve {

struct LaplaceOptions {
  /// Sign of the volume term in the Poisson residual. +1 follows the third
  /// Green identity for Delta u = f; -1 is the printed form (Delta u = -f).
  double poisson_sign = 1.0;
  /// Build fails if the deflated double-layer matrix has a smaller singular value.
  double nullspace_threshold = 1e-6;
};

/// Assembled operators for the universal boundary equations of Laplace's
/// equation on one surface:
///   A = I + K / 2pi,  B = -S / 2pi,  compatibility int_S u1 dS = 0.
/// Construction assembles K and S, factors D = A + 1 w^T / area (A with its
/// constant nullspace deflated) and checks that D is well conditioned.
class LaplaceSystem {
 public:
  explicit LaplaceSystem(Surface surface, std::optional<VolumeQuadrature> volume = std::nullopt,
                         LaplaceOptions options = {})
      : state_(std::make_shared<State>()) {
    if (options.poisson_sign != 1.0 && options.poisson_sign != -1.0)
      throw InvalidArgument("poisson sign convention must be +1 or -1");
    auto& s = *state_;
    s.surface = std::move(surface);
    s.volume = std::move(volume);
    s.options = options;
    s.K = assemble_double_layer(s.surface);
    s.S = assemble_single_layer(s.surface);

    const Eigen::Index n = static_cast<Eigen::Index>(s.surface.size());
    const double area = s.surface.area();
    Eigen::MatrixXd D = s.K.matrix / (2.0 * std::numbers::pi);
    D.diagonal().array() += 1.0;
    D += Vector::Ones(n) * s.surface.weights().transpose() / area;
    s.deflated.compute(D);
    s.nullspace_margin = smallest_singular_value(s.deflated, n);
    if (!(s.nullspace_margin > options.nullspace_threshold))
      throw NumericFailure("double-layer system is singular beyond its constant nullspace");
  }

  const Surface& surface() const { return state_->surface; }
  const DenseOperator& double_layer() const { return state_->K; }
  const DenseOperator& single_layer() const { return state_->S; }
  const std::optional<VolumeQuadrature>& volume() const { return state_->volume; }
  const LaplaceOptions& options() const { return state_->options; }
  /// Estimated smallest singular value of the deflated A.
  double nullspace_margin() const { return state_->nullspace_margin; }

  Vector apply_A(const Vector& u0) const {
    return u0 + state_->K.apply(u0) / (2.0 * std::numbers::pi);
  }
  Vector apply_B(const Vector& u1) const {
    return -state_->S.apply(u1) / (2.0 * std::numbers::pi);
  }

  /// Eq. (2)/(3) form: residual u0 + K u0 / 2pi - S u1 / 2pi.
  UniversalBoundarySystem laplace_form() const {
    auto st = state_;
    UniversalBoundarySystem sys;
    sys.apply_A = [st](const Vector& u0) {
      return Vector(u0 + st->K.apply(u0) / (2.0 * std::numbers::pi));
    };
    sys.apply_B = [st](const Vector& u1) {
      return Vector(-st->S.apply(u1) / (2.0 * std::numbers::pi));
    };
    sys.u0_size = sys.u1_size = static_cast<Eigen::Index>(st->surface.size());
    sys.compatibility.push_back(
        {"int_S u1 dS", [st](const Vector&, const Vector& u1, const Vector&) {
           return surface_integral(st->surface, u1);
         }});
    sys.residual_space = {"surface nodes", st->surface.weights()};
    return sys;
  }

  /// Poisson form: residual 2pi u0 + K u0 - S u1 + sign * int_G f/|x-y| dy,
  /// compatibility int_S u1 dS - int_G f dy.
  UniversalBoundarySystem poisson_form() const {
    if (!state_->volume) throw InvalidArgument("Poisson residual needs a volume quadrature");
    auto st = state_;
    UniversalBoundarySystem sys;
    sys.apply_A = [st](const Vector& u0) {
      return Vector(2.0 * std::numbers::pi * u0 + st->K.apply(u0));
    };
    sys.apply_B = [st](const Vector& u1) { return Vector(-st->S.apply(u1)); };
    sys.apply_C = [st](const Vector& f) {
      return Vector(st->options.poisson_sign *
                    newtonian_volume_potential(*st->volume, f, st->surface.nodes()));
    };
    sys.u0_size = sys.u1_size = static_cast<Eigen::Index>(st->surface.size());
    sys.f_size = static_cast<Eigen::Index>(st->volume->size());
    sys.compatibility.push_back(
        {"int_S u1 dS - int_G f dy", [st](const Vector&, const Vector& u1, const Vector& f) {
           return surface_integral(st->surface, u1) - st->volume->weights.dot(f);
         }});
    sys.residual_space = {"surface nodes", st->surface.weights()};
    return sys;
  }

  const Eigen::PartialPivLU<Eigen::MatrixXd>& deflated_factor() const {
    return state_->deflated;
  }

  /// Householder QR of [S; sqrt(lambda) diag(sqrt(w / w_mean))], cached per lambda.
  const Eigen::HouseholderQR<Eigen::MatrixXd>& dirichlet_factor(double lambda) const {
    auto& s = *state_;
    std::lock_guard lock(s.cache_mutex);
    auto it = s.tikhonov.find(lambda);
    if (it != s.tikhonov.end()) return *it->second;
    const Eigen::Index n = static_cast<Eigen::Index>(s.surface.size());
    const Vector& w = s.surface.weights();
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(2 * n, n);
    M.topRows(n) = s.S.matrix;
    M.bottomRows(n).diagonal() = (lambda * w.array() * (static_cast<double>(n) / s.surface.area())).sqrt();
    auto qr = std::make_unique<Eigen::HouseholderQR<Eigen::MatrixXd>>(M);
    const Vector r = qr->matrixQR().diagonal().cwiseAbs();
    const double rcond = r.minCoeff() / r.maxCoeff();
    if (!(rcond > 1e-14))
      throw NumericFailure("single-layer least-squares system is rank deficient (rcond " +
                           format_double(rcond) + "); increase the regularization");
    return *s.tikhonov.emplace(lambda, std::move(qr)).first->second;
  }

 private:
  struct State {
    Surface surface = make_sphere(1.0, Point::Zero(), 4, 8);
    std::optional<VolumeQuadrature> volume;
    LaplaceOptions options;
    DenseOperator K, S;
    Eigen::PartialPivLU<Eigen::MatrixXd> deflated;
    double nullspace_margin = 0.0;
    std::mutex cache_mutex;
    std::map<double, std::unique_ptr<Eigen::HouseholderQR<Eigen::MatrixXd>>> tikhonov;
  };

  static double smallest_singular_value(const Eigen::PartialPivLU<Eigen::MatrixXd>& lu,
                                        Eigen::Index n) {
    // inverse power iteration on (D^T D)^{-1}
    Vector x = Vector::LinSpaced(n, 1.0, 2.0).normalized();
    double lambda = 0.0;
    for (int it = 0; it < 60; ++it) {
      const Vector y = lu.solve(x);
      const Vector z = lu.transpose().solve(y);
      const double next = z.norm();
      x = z / next;
      if (it > 5 && std::abs(next - lambda) <= 1e-10 * next) {
        lambda = next;
        break;
      }
      lambda = next;
    }
    return 1.0 / std::sqrt(lambda);
  }

  std::shared_ptr<State> state_;
};

inline ResidualReport laplace_residual(const LaplaceSystem& sys, const BoundaryTrace& u0,
                                       const BoundaryTrace& u1,
                                       std::optional<double> tol = std::nullopt) {
  require_trace_on(sys.surface(), u0, "laplace_residual(u0)");
  require_trace_on(sys.surface(), u1, "laplace_residual(u1)");
  return system_residual(sys.laplace_form(), u0.values, u1.values, Vector(),
                         tol.value_or(default_tolerance(u0.values, u1.values)));
}

inline ResidualReport poisson_residual(const LaplaceSystem& sys, const BoundaryTrace& u0,
                                       const BoundaryTrace& u1, const Vector& f,
                                       std::optional<double> tol = std::nullopt) {
  require_trace_on(sys.surface(), u0, "poisson_residual(u0)");
  require_trace_on(sys.surface(), u1, "poisson_residual(u1)");
  const double t = tol.value_or(1e-6 * (1.0 + sup_norm(u0.values) + sup_norm(u1.values) +
                                        sup_norm(f)));
  return system_residual(sys.poisson_form(), u0.values, u1.values, f, t);
}

inline std::string eq3_detail(double value) {
  return "{\"constraint\":\"eq3\",\"value\":" + format_double(value) + "}";
}

struct NeumannCompletion {
  BoundaryTrace u0;
  /// Component of S u1 / 2pi along the constants removed by the deflation;
  /// vanishes with the discretization error when int u1 = 0 holds.
  double range_defect = 0.0;
  std::string nullspace_note;
};

/// Completes u0 from u1: solves (I + K/2pi) u0 = S u1 / 2pi on the subspace
/// sum_i w_i u0_i = mean_constraint. Any u0 + const solves the same equation.
inline NeumannCompletion solve_u0_from_u1(const LaplaceSystem& sys, const BoundaryTrace& u1,
                                          double tol = 1e-8, double mean_constraint = 0.0) {
  const Surface& surf = sys.surface();
  require_trace_on(surf, u1, "solve_u0_from_u1");
  const double flux = surface_integral(surf, u1.values);
  const double area = surf.area();
  if (!(std::abs(flux) <= tol * area * sup_norm(u1.values)) && std::abs(flux) > 0.0)
    throw IncompatibleData("Neumann data violate int_S u1 dS = 0", eq3_detail(flux));

  const Vector rhs = sys.single_layer().apply(u1.values) / (2.0 * std::numbers::pi);
  Vector y = sys.deflated_factor().solve(rhs);
  const double defect = surf.weights().dot(y) / area;
  y.array() += mean_constraint / area - defect;
  if (!y.allFinite()) throw NumericFailure("double-layer solve produced non-finite values");

  NeumannCompletion out;
  out.u0 = BoundaryTrace::on(surf, std::move(y), TraceRole::dirichlet);
  out.range_defect = defect;
  out.nullspace_note =
      "u0 is determined up to an additive constant; returned representative has "
      "int_S u0 dS = " + format_double(mean_constraint);
  return out;
}

/// Completes u1 from u0: Tikhonov-regularized least squares for
/// S u1 = (2pi I + K) u0 in the quadrature-weighted norm, followed by removal
/// of the mean so that int_S u1 dS = 0. On spheres S annihilates the modes
/// beyond the grid's band limit; the weighted penalty keeps them at zero.
inline BoundaryTrace solve_u1_from_u0(const LaplaceSystem& sys, const BoundaryTrace& u0,
                                      double regularization = 1e-10) {
  const Surface& surf = sys.surface();
  require_trace_on(surf, u0, "solve_u1_from_u0");
  if (!(regularization >= 0.0)) throw InvalidArgument("regularization must be nonnegative");
  const Eigen::Index n = static_cast<Eigen::Index>(surf.size());
  Vector rhs = Vector::Zero(2 * n);
  rhs.head(n) = 2.0 * std::numbers::pi * u0.values + sys.double_layer().apply(u0.values);
  Vector u1 = sys.dirichlet_factor(regularization).solve(rhs);
  u1.array() -= surface_integral(surf, u1) / surf.area();
  if (!u1.allFinite()) throw NumericFailure("single-layer solve produced non-finite values");
  return BoundaryTrace::on(surf, std::move(u1), TraceRole::neumann);
}

struct InteriorReconstruction {
  PointEvaluation evaluation;
  ResidualReport trace_check;
};

/// Harmonic function with the given consistent traces, evaluated at interior
/// points through the Green representation. Inconsistent traces are refused
/// unless `allow_inconsistent` is set.
inline InteriorReconstruction reconstruct_interior(const LaplaceSystem& sys,
                                                   const BoundaryTrace& u0,
                                                   const BoundaryTrace& u1,
                                                   const std::vector<Point>& points,
                                                   std::optional<double> tol = std::nullopt,
                                                   bool allow_inconsistent = false,
                                                   const OffSurfaceOptions& opt = {}) {
  InteriorReconstruction out;
  out.trace_check = laplace_residual(sys, u0, u1, tol);
  if (!out.trace_check.consistent && !allow_inconsistent) {
    const double compat = out.trace_check.compatibility_values.at(0);
    throw IncompatibleData("traces do not satisfy the universal boundary equations",
                           "{\"constraint\":\"eq2-eq3\",\"sup_norm\":" +
                               format_double(out.trace_check.sup_norm) +
                               ",\"value\":" + format_double(compat) + "}");
  }
  out.evaluation = eval_green_representation(sys.surface(), u0, u1, points, opt);
  return out;
}

}  // namespace ubve
