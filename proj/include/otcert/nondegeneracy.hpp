#pragma once

#include <cstdint>
#include <vector>

#include "otcert/cost_model.hpp"

namespace otcert {

/// Singular-value classification of the mixed Hessian at one point.
/// Degenerate iff sigma_min <= threshold * sigma_max (scale invariant).
struct HessianClassification {
  Vec x, y;
  Mat matrix;
  double determinant = 0.0;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  double threshold = 0.0;
  bool degenerate = false;
};

HessianClassification classify_point(const CostModel& model, const Vec& x,
                                     const Vec& y, double threshold = 1e-10);

enum class TwistDirection { XtoY, YtoX };

TwistDirection parse_twist_direction(const std::string& s);
const char* to_string(TwistDirection d);

/// Two samples whose relevant cost gradients coincide within tolerance while
/// the arguments are separated: an injectivity counterexample on the sample.
struct TwistCollision {
  int index_a = 0, index_b = 0;
  Vec a, b;
  double gradient_distance = 0.0;
  double argument_distance = 0.0;
};

struct TwistReport {
  TwistDirection direction = TwistDirection::XtoY;
  Vec fixed_point;
  std::vector<TwistCollision> collisions;
  bool injective_on_sample = true;
  double collision_tol = 0.0;
  double separation_floor = 0.0;
  std::int64_t pairs_checked = 0;
  int samples = 0;
};

/// Sampling-based injectivity scan. Direction XtoY fixes x and compares
/// D_x c(x, y_k) across the samples y_k; YtoX fixes y and compares
/// D_y c(x_k, y). A finding is evidence on the sample only, never a proof of
/// global injectivity.
TwistReport twist_scan(const CostModel& model, TwistDirection direction,
                       const Vec& fixed_point,
                       const std::vector<Vec>& sample_set,
                       double collision_tol = 1e-9,
                       double separation_floor = 1e-6);

}  // namespace otcert
