#pragma once

#include <memory>
#include <random>
#include <vector>

#include "otcert/cost_model.hpp"
#include "otcert/measures.hpp"

namespace otcert::testing {

/// Uniform random point in the box, inset by `margin` from the walls.
inline Vec random_point(std::mt19937_64& rng, const WorkBox& box,
                        double margin = 0.0) {
  Vec p(box.dim());
  for (int d = 0; d < box.dim(); ++d) {
    std::uniform_real_distribution<double> dist(box.lower[d] + margin,
                                                box.upper[d] - margin);
    p[d] = dist(rng);
  }
  return p;
}

inline MeasurePtr random_uniform_measure(std::mt19937_64& rng,
                                         const WorkBox& box, int n,
                                         double margin = 0.0) {
  std::vector<Vec> pts;
  pts.reserve(n);
  for (int k = 0; k < n; ++k) pts.push_back(random_point(rng, box, margin));
  return std::make_shared<DiscreteMeasure>(DiscreteMeasure::uniform(pts));
}

inline MeasurePtr measure_1d(std::vector<double> xs,
                             std::vector<double> ws = {}) {
  std::vector<Vec> pts;
  for (double x : xs) {
    Vec p(1);
    p << x;
    pts.push_back(std::move(p));
  }
  if (ws.empty())
    return std::make_shared<DiscreteMeasure>(DiscreteMeasure::uniform(pts));
  return std::make_shared<DiscreteMeasure>(std::move(pts), std::move(ws));
}

inline Vec v1(double x) {
  Vec p(1);
  p << x;
  return p;
}

inline Vec v2(double x, double y) {
  Vec p(2);
  p << x, y;
  return p;
}

/// 1D cost c(x,y) = (x-y)^2 (no 1/2), for tests that need that scaling.
inline CostModel squared_distance_1d() {
  CostModel m;
  m.dim = 1;
  m.label = "squared_distance";
  m.box = WorkBox::cube(1, -100.0, 100.0);
  m.evaluate = [](const Vec& x, const Vec& y) {
    double d = x[0] - y[0];
    return d * d;
  };
  m.grad_x = [](const Vec& x, const Vec& y) {
    return Vec(v1(2.0 * (x[0] - y[0])));
  };
  m.grad_y = [](const Vec& x, const Vec& y) {
    return Vec(v1(2.0 * (y[0] - x[0])));
  };
  m.mixed_hessian = [](const Vec&, const Vec&) {
    Mat h(1, 1);
    h << -2.0;
    return h;
  };
  return m;
}

/// b(x,y) = (1+delta) x.y as a cost model (c = -b), 1D.
inline CostModel perturbed_bilinear_1d(double delta) {
  CostModel m;
  m.dim = 1;
  m.label = "perturbed_bilinear";
  m.box = WorkBox::cube(1, -10.0, 10.0);
  double scale = 1.0 + delta;
  m.evaluate = [scale](const Vec& x, const Vec& y) {
    return -scale * x[0] * y[0];
  };
  m.mixed_hessian = [scale](const Vec&, const Vec&) {
    Mat h(1, 1);
    h << -scale;
    return h;
  };
  return m;
}

}  // namespace otcert::testing
