#include "otcert/cost_model.hpp"

#include <cmath>

#include "otcert/errors.hpp"

namespace otcert {

double eval_cost(const CostModel& model, const Vec& x, const Vec& y) {
  if (x.size() != model.dim || y.size() != model.dim)
    throw input_error("eval_cost: point dimension does not match model '" +
                      model.label + "'");
  if (!model.inside(x, y))
    throw domain_error("eval_cost: point outside working box of '" +
                       model.label + "'");
  return model.evaluate(x, y);
}

Mat mixed_hessian(const CostModel& model, const Vec& x, const Vec& y,
                  DerivativeMethod method, double h) {
  const int n = model.dim;
  if (method == DerivativeMethod::Analytic) {
    if (!model.mixed_hessian)
      throw unsupported_error("mixed_hessian: cost '" + model.label +
                              "' has no analytic mixed Hessian");
    return model.mixed_hessian(x, y);
  }
  if (!(h > 0)) throw input_error("mixed_hessian: step h must be positive");
  if (!model.in_domain && (!model.box.contains(x, h) || !model.box.contains(y, h)))
    throw domain_error(
        "mixed_hessian: finite differences need margin h inside the box");
  Mat out(n, n);
  Vec xp = x, xm = x, yp = y, ym = y;
  for (int i = 0; i < n; ++i) {
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    for (int j = 0; j < n; ++j) {
      yp[j] = y[j] + h;
      ym[j] = y[j] - h;
      double cpp = model.evaluate(xp, yp);
      double cpm = model.evaluate(xp, ym);
      double cmp = model.evaluate(xm, yp);
      double cmm = model.evaluate(xm, ym);
      out(i, j) = (cpp - cpm - cmp + cmm) / (4.0 * h * h);
      yp[j] = y[j];
      ym[j] = y[j];
    }
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return out;
}

Vec cost_grad_x(const CostModel& model, const Vec& x, const Vec& y, double h) {
  if (model.grad_x) return model.grad_x(x, y);
  Vec g(model.dim);
  Vec xp = x, xm = x;
  for (int i = 0; i < model.dim; ++i) {
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    g[i] = (model.evaluate(xp, y) - model.evaluate(xm, y)) / (2.0 * h);
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return g;
}

Vec cost_grad_y(const CostModel& model, const Vec& x, const Vec& y, double h) {
  if (model.grad_y) return model.grad_y(x, y);
  Vec g(model.dim);
  Vec yp = y, ym = y;
  for (int j = 0; j < model.dim; ++j) {
    yp[j] = y[j] + h;
    ym[j] = y[j] - h;
    g[j] = (model.evaluate(x, yp) - model.evaluate(x, ym)) / (2.0 * h);
    yp[j] = y[j];
    ym[j] = y[j];
  }
  return g;
}

double spectral_norm(const Mat& m) {
  return m.jacobiSvd().singularValues()(0);
}

namespace {

CostModel make_bilinear(int dim) {
  CostModel m;
  m.dim = dim;
  m.label = "bilinear";
  m.box = WorkBox::cube(dim, -5.0, 5.0);
  m.evaluate = [](const Vec& x, const Vec& y) { return -x.dot(y); };
  m.grad_x = [](const Vec&, const Vec& y) { return Vec(-y); };
  m.grad_y = [](const Vec& x, const Vec&) { return Vec(-x); };
  m.mixed_hessian = [dim](const Vec&, const Vec&) {
    return Mat(-Mat::Identity(dim, dim));
  };
  return m;
}

CostModel make_quadratic(int dim) {
  CostModel m;
  m.dim = dim;
  m.label = "quadratic";
  m.box = WorkBox::cube(dim, -12.0, 12.0);
  m.evaluate = [](const Vec& x, const Vec& y) {
    return 0.5 * (x - y).squaredNorm();
  };
  m.grad_x = [](const Vec& x, const Vec& y) { return Vec(x - y); };
  m.grad_y = [](const Vec& x, const Vec& y) { return Vec(y - x); };
  m.mixed_hessian = [dim](const Vec&, const Vec&) {
    return Mat(-Mat::Identity(dim, dim));
  };
  return m;
}

// c(x,y) = e^{x1+y1} cos(x2-y2) + e^{2x1}/2 + e^{2y1}/2.
// Non-degenerate everywhere (det = e^{2(x1+y1)}) but not twisted: the x
// gradient is 2*pi periodic in x2-y2.
CostModel make_example31() {
  CostModel m;
  m.dim = 2;
  m.label = "example31";
  Eigen::Vector2d lo(0.0, 0.0), hi(1.0, 9.0 * M_PI);
  m.box = WorkBox(lo, hi);
  m.evaluate = [](const Vec& x, const Vec& y) {
    double d = x[1] - y[1];
    return std::exp(x[0] + y[0]) * std::cos(d) + 0.5 * std::exp(2.0 * x[0]) +
           0.5 * std::exp(2.0 * y[0]);
  };
  m.grad_x = [](const Vec& x, const Vec& y) {
    double e = std::exp(x[0] + y[0]), d = x[1] - y[1];
    Vec g(2);
    g << e * std::cos(d) + std::exp(2.0 * x[0]), -e * std::sin(d);
    return g;
  };
  m.grad_y = [](const Vec& x, const Vec& y) {
    double e = std::exp(x[0] + y[0]), d = x[1] - y[1];
    Vec g(2);
    g << e * std::cos(d) + std::exp(2.0 * y[0]), e * std::sin(d);
    return g;
  };
  m.mixed_hessian = [](const Vec& x, const Vec& y) {
    double e = std::exp(x[0] + y[0]), d = x[1] - y[1];
    double c = std::cos(d), s = std::sin(d);
    Mat h(2, 2);
    h << e * c, e * s, -e * s, e * c;
    return h;
  };
  return m;
}

// c(x,y) = -(x1 cos y1 + x2 sin y1) e^{y2} + e^{2y2}/2 + |x|^2/2.
// det D2xy c = -e^{2y2} < 0; x -> D_y c(x,y) is injective (affine in x with
// invertible linear part) while y -> D_x c(x,y) is 2*pi periodic in y1.
CostModel make_example32() {
  CostModel m;
  m.dim = 2;
  m.label = "example32";
  // first coordinate reaches past 2*pi + pi/2 so the non-invertibility
  // witnesses (y1 shifted by a full period) stay inside
  Eigen::Vector2d lo(-3.5, -2.0), hi(8.0, 2.0);
  m.box = WorkBox(lo, hi);
  m.evaluate = [](const Vec& x, const Vec& y) {
    double e = std::exp(y[1]);
    return -(x[0] * std::cos(y[0]) + x[1] * std::sin(y[0])) * e +
           0.5 * std::exp(2.0 * y[1]) + 0.5 * x.squaredNorm();
  };
  m.grad_x = [](const Vec& x, const Vec& y) {
    double e = std::exp(y[1]);
    Vec g(2);
    g << -std::cos(y[0]) * e + x[0], -std::sin(y[0]) * e + x[1];
    return g;
  };
  m.grad_y = [](const Vec& x, const Vec& y) {
    double e = std::exp(y[1]);
    double proj = x[0] * std::cos(y[0]) + x[1] * std::sin(y[0]);
    Vec g(2);
    g << (x[0] * std::sin(y[0]) - x[1] * std::cos(y[0])) * e,
        -proj * e + std::exp(2.0 * y[1]);
    return g;
  };
  m.mixed_hessian = [](const Vec&, const Vec& y) {
    double e = std::exp(y[1]);
    double c = std::cos(y[0]), s = std::sin(y[0]);
    Mat h(2, 2);
    h << s * e, -c * e, -c * e, -s * e;
    return h;
  };
  return m;
}

}  // namespace

const std::vector<std::string>& builtin_cost_names() {
  static const std::vector<std::string> names = {"bilinear", "quadratic",
                                                 "example31", "example32"};
  return names;
}

CostModel builtin_cost(const std::string& name, int dim) {
  if (dim < 1) throw input_error("builtin_cost: dim must be >= 1");
  if (name == "bilinear") return make_bilinear(dim);
  if (name == "quadratic") return make_quadratic(dim);
  if (name == "example31" || name == "example32") {
    if (dim != 2)
      throw input_error("builtin_cost: '" + name + "' is a dim-2 cost");
    return name == "example31" ? make_example31() : make_example32();
  }
  std::string msg = "builtin_cost: unknown cost '" + name + "'; available:";
  for (const auto& n : builtin_cost_names()) msg += " " + n;
  throw input_error(msg);
}

}  // namespace otcert
