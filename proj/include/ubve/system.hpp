#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <cmath>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "ubve/errors.hpp"
#include "ubve/format.hpp"

namespace ubve {

using Vector = Eigen::VectorXd;
using LinearMap = std::function<Vector(const Vector&)>;

/// Scalar linear constraint on (u0, u1, f), e.g. int_S u1 dS = 0.
struct CompatibilityFunctional {
  std::string name;
  std::function<double(const Vector& u0, const Vector& u1, const Vector& f)> evaluate;
};

/// Where residuals live: a grid of `weights.size()` points with quadrature
/// weights for the weighted L2 norm.
struct ResidualSpace {
  std::string description;
  Vector weights;
};

/// A u0 + B u1 + C f = 0 together with scalar compatibility functionals. The
/// three maps are linear; an empty apply_C means the source slot is unused.
struct UniversalBoundarySystem {
  LinearMap apply_A;
  LinearMap apply_B;
  LinearMap apply_C;
  Eigen::Index u0_size = 0;
  Eigen::Index u1_size = 0;
  Eigen::Index f_size = 0;
  std::vector<CompatibilityFunctional> compatibility;
  ResidualSpace residual_space;
};

struct ResidualReport {
  Vector pointwise;
  double sup_norm = 0.0;
  double weighted_l2 = 0.0;
  std::vector<std::string> compatibility_names;
  std::vector<double> compatibility_values;
  double tolerance = 0.0;
  bool consistent = false;
};

inline double sup_norm(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

/// 1e-6 * (1 + |u0|_inf + |u1|_inf).
inline double default_tolerance(const Vector& u0, const Vector& u1) {
  return 1e-6 * (1.0 + sup_norm(u0) + sup_norm(u1));
}

inline ResidualReport system_residual(const UniversalBoundarySystem& sys, const Vector& u0,
                                      const Vector& u1, const Vector& f, double tol) {
  if (u0.size() != sys.u0_size || u1.size() != sys.u1_size)
    throw InvalidArgument("system_residual: trace sizes do not match the system grids");
  if (sys.apply_C ? f.size() != sys.f_size : f.size() != 0)
    throw InvalidArgument("system_residual: source size does not match the system grid");
  if (!(tol > 0.0)) throw InvalidArgument("system_residual: tolerance must be positive");

  ResidualReport rep;
  rep.pointwise = sys.apply_A(u0) + sys.apply_B(u1);
  if (sys.apply_C) rep.pointwise += sys.apply_C(f);
  const Vector& w = sys.residual_space.weights;
  if (w.size() != rep.pointwise.size())
    throw InvalidArgument("system_residual: residual space weights have the wrong size");
  rep.sup_norm = sup_norm(rep.pointwise);
  rep.weighted_l2 = std::sqrt(w.dot(rep.pointwise.cwiseAbs2()));
  rep.tolerance = tol;
  rep.consistent = rep.sup_norm <= tol;
  for (const auto& c : sys.compatibility) {
    const double v = c.evaluate(u0, u1, f);
    rep.compatibility_names.push_back(c.name);
    rep.compatibility_values.push_back(v);
    if (!(std::abs(v) <= tol)) rep.consistent = false;
  }
  if (!std::isfinite(rep.sup_norm)) rep.consistent = false;
  return rep;
}

inline nlohmann::json to_json(const ResidualReport& rep) {
  nlohmann::json j;
  j["sup_norm"] = rep.sup_norm;
  j["weighted_l2"] = rep.weighted_l2;
  j["compatibility"] = rep.compatibility_values;
  j["compatibility_names"] = rep.compatibility_names;
  j["tolerance"] = rep.tolerance;
  j["consistent"] = rep.consistent;
  return j;
}

/// Pointwise residual CSV: `index,value`, or `index,<coords...>,value` when a
/// coordinate writer is supplied.
inline void write_residual_csv(std::ostream& out, const ResidualReport& rep,
                               const std::string& coord_header = {},
                               const std::function<std::string(Eigen::Index)>& coords = {}) {
  out << "index," << (coord_header.empty() ? "" : coord_header + ",") << "value\n";
  for (Eigen::Index i = 0; i < rep.pointwise.size(); ++i) {
    out << i << ',';
    if (coords) out << coords(i) << ',';
    out << format_double(rep.pointwise[i]) << '\n';
  }
}

}  // namespace ubve
