#include "otcert/nondegeneracy.hpp"

#include <algorithm>
#include <cmath>

#include "otcert/errors.hpp"
#include "otcert/parallel.hpp"

namespace otcert {

HessianClassification classify_point(const CostModel& model, const Vec& x,
                                     const Vec& y, double threshold) {
  if (!model.inside(x, y))
    throw domain_error("classify_point: point outside the working box");
  HessianClassification out;
  out.x = x;
  out.y = y;
  out.threshold = threshold;
  out.matrix = mixed_hessian(
      model, x, y,
      model.mixed_hessian ? DerivativeMethod::Analytic
                          : DerivativeMethod::FiniteDifference);
  out.determinant = out.matrix.determinant();
  Eigen::JacobiSVD<Mat> svd(out.matrix);
  out.sigma_max = svd.singularValues()(0);
  out.sigma_min = svd.singularValues()(model.dim - 1);
  out.degenerate = out.sigma_min <= threshold * out.sigma_max;
  return out;
}

TwistDirection parse_twist_direction(const std::string& s) {
  if (s == "x-to-y" || s == "xy") return TwistDirection::XtoY;
  if (s == "y-to-x" || s == "yx") return TwistDirection::YtoX;
  throw input_error("twist direction must be 'x-to-y' or 'y-to-x', got '" +
                    s + "'");
}

const char* to_string(TwistDirection d) {
  return d == TwistDirection::XtoY ? "x-to-y" : "y-to-x";
}

TwistReport twist_scan(const CostModel& model, TwistDirection direction,
                       const Vec& fixed_point,
                       const std::vector<Vec>& sample_set, double collision_tol,
                       double separation_floor) {
  if (!(separation_floor > 0.0))
    throw input_error("twist_scan: separation_floor must be positive");
  if (sample_set.empty()) throw input_error("twist_scan: empty sample set");

  const int m = int(sample_set.size());
  TwistReport rep;
  rep.direction = direction;
  rep.fixed_point = fixed_point;
  rep.collision_tol = collision_tol;
  rep.separation_floor = separation_floor;
  rep.samples = m;

  for (const Vec& s : sample_set) {
    bool ok = direction == TwistDirection::XtoY ? model.inside(fixed_point, s)
                                                : model.inside(s, fixed_point);
    if (!ok)
      throw domain_error("twist_scan: sample outside the working box");
  }

  // Gradient of c at the fixed point against every sample.
  std::vector<Vec> grads(m);
  parallel_chunks(m, [&](std::int64_t b, std::int64_t e, int) {
    for (std::int64_t k = b; k < e; ++k) {
      const Vec& s = sample_set[k];
      grads[k] = direction == TwistDirection::XtoY
                     ? cost_grad_x(model, fixed_point, s)
                     : cost_grad_y(model, s, fixed_point);
    }
  });

  std::vector<std::vector<TwistCollision>> found(
      std::max(1, effective_threads()));
  parallel_chunks(m, [&](std::int64_t b, std::int64_t e, int chunk) {
    auto& out = found[chunk];
    for (std::int64_t i = b; i < e; ++i)
      for (int j = int(i) + 1; j < m; ++j) {
        double sep = (sample_set[i] - sample_set[j]).norm();
        if (sep < separation_floor) continue;
        double gd = (grads[i] - grads[j]).norm();
        if (gd <= collision_tol)
          out.push_back({int(i), j, sample_set[i], sample_set[j], gd, sep});
      }
  });
  for (auto& chunk : found)
    rep.collisions.insert(rep.collisions.end(), chunk.begin(), chunk.end());
  std::sort(rep.collisions.begin(), rep.collisions.end(),
            [](const TwistCollision& a, const TwistCollision& b) {
              if (a.index_a != b.index_a) return a.index_a < b.index_a;
              return a.index_b < b.index_b;
            });
  rep.pairs_checked = std::int64_t(m) * (m - 1) / 2;
  rep.injective_on_sample = rep.collisions.empty();
  return rep;
}

}  // namespace otcert
