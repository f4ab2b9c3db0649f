#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "otcert/workbox.hpp"

namespace otcert {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Evaluable transport cost c(x,y) on R^n x R^n with optional analytic
/// derivatives. The surplus used by monotonicity and rectifiability checks
/// is b = -c throughout. Immutable after construction; all evaluation entry
/// points are pure, so models can be shared across worker threads.
struct CostModel {
  int dim = 0;
  std::string label;
  WorkBox box;

  std::function<double(const Vec&, const Vec&)> evaluate;
  std::function<Vec(const Vec&, const Vec&)> grad_x;    // optional
  std::function<Vec(const Vec&, const Vec&)> grad_y;    // optional
  std::function<Mat(const Vec&, const Vec&)> mixed_hessian;  // d2c/dx_i dy_j

  /// Domain predicate; defaults to box^2 containment. Coordinate-changed
  /// models (rectifier) install their own predicate.
  std::function<bool(const Vec&, const Vec&)> in_domain;

  bool has_analytic_gradients() const { return bool(grad_x) && bool(grad_y); }
  bool has_analytic_hessian() const { return bool(mixed_hessian); }
  bool inside(const Vec& x, const Vec& y) const {
    if (in_domain) return in_domain(x, y);
    return box.contains(x) && box.contains(y);
  }
};

enum class DerivativeMethod { Analytic, FiniteDifference };

/// Default step for central finite differences.
inline constexpr double kDefaultFdStep = 1e-4;

/// c(x,y) with a domain check. Throws domain_error outside the box.
double eval_cost(const CostModel& model, const Vec& x, const Vec& y);

/// Mixed second-derivative matrix with entries d2c/dx_i dy_j. The
/// finite-difference path uses a 4-point central stencil per entry and
/// requires a margin of h inside the box.
Mat mixed_hessian(const CostModel& model, const Vec& x, const Vec& y,
                  DerivativeMethod method = DerivativeMethod::Analytic,
                  double h = kDefaultFdStep);

/// Gradient of c in x (resp. y); analytic when available, else central
/// differences at step h.
Vec cost_grad_x(const CostModel& model, const Vec& x, const Vec& y,
                double h = kDefaultFdStep);
Vec cost_grad_y(const CostModel& model, const Vec& x, const Vec& y,
                double h = kDefaultFdStep);

/// Built-in costs: "bilinear" (-x.y), "quadratic" (|x-y|^2/2), and the two
/// exponential/trigonometric costs "example31", "example32" (dim 2 only).
/// All four carry analytic gradients and mixed Hessians. Working boxes:
///   bilinear  [-5,5]^n
///   quadratic [-12,12]^n
///   example31 [0,1] x [0,9*pi]   (covers the three-sheet images)
///   example32 [-3.5,8] x [-2,2]
CostModel builtin_cost(const std::string& name, int dim = 2);

/// Names accepted by builtin_cost, for error messages and CLI help.
const std::vector<std::string>& builtin_cost_names();

/// Spectral norm (largest singular value).
double spectral_norm(const Mat& m);

}  // namespace otcert
