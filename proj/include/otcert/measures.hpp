#pragma once

#include <memory>
#include <vector>

#include "otcert/cost_model.hpp"

namespace otcert {

/// Weighted point cloud representing a discrete probability measure.
/// Weights are nonnegative and sum to 1 within 1e-12 (checked on
/// construction). Immutable by convention after construction.
struct DiscreteMeasure {
  std::vector<Vec> points;
  std::vector<double> weights;

  DiscreteMeasure() = default;
  DiscreteMeasure(std::vector<Vec> pts, std::vector<double> w);

  int size() const { return int(points.size()); }
  int dim() const { return points.empty() ? 0 : int(points[0].size()); }

  static DiscreteMeasure uniform(std::vector<Vec> pts);

  /// Throws input_error if any point lies outside `box`.
  void require_inside(const WorkBox& box, const std::string& context) const;
};

using MeasurePtr = std::shared_ptr<const DiscreteMeasure>;

struct PlanEntry {
  int i;        // source index
  int j;        // target index
  double mass;  // strictly positive
};

/// Sparse coupling between two discrete measures. Entries are the plan's
/// working support; zero-mass entries are never stored.
struct TransportPlan {
  MeasurePtr source;
  MeasurePtr target;
  std::vector<PlanEntry> entries;

  TransportPlan() = default;
  TransportPlan(MeasurePtr src, MeasurePtr tgt, std::vector<PlanEntry> e);

  /// Independence coupling: mass(i,j) = w_i * w'_j.
  static TransportPlan product(MeasurePtr src, MeasurePtr tgt);

  /// Plan pairing point i of `src` with point perm[i] of `tgt`, carrying the
  /// source weights. Requires matching weights on both sides.
  static TransportPlan from_permutation(MeasurePtr src, MeasurePtr tgt,
                                        const std::vector<int>& perm);
};

/// Raw pair set: the support of a plan, or any externally supplied set of
/// (x, y) pairs. Mass annotations are optional (1 when absent) and only used
/// for weighting (e.g. centroid selection).
struct SupportPair {
  Vec x;
  Vec y;
  double mass = 1.0;
};

struct SupportSample {
  std::vector<SupportPair> pairs;
  int dim() const { return pairs.empty() ? 0 : int(pairs[0].x.size()); }
  int size() const { return int(pairs.size()); }
};

/// Push-forwards of the plan under the two projections. Computed with
/// compensated sums so conservation holds to ~1 ulp.
std::pair<DiscreteMeasure, DiscreteMeasure> marginals(const TransportPlan& plan);

/// Maximum absolute deviation between the computed marginals and the plan's
/// declared source/target weights (feasibility residual).
double marginal_residual(const TransportPlan& plan);

/// Pairs with mass strictly above `mass_floor`. Throws input_error when the
/// floor is negative and degenerate_input_error when nothing survives.
SupportSample support(const TransportPlan& plan, double mass_floor = 1e-12);

/// Transport cost sum(mass * c(x_i, y_j)).
double kantorovich_cost(const TransportPlan& plan, const CostModel& model);

/// t*a + (1-t)*b for plans over the same measures; entries merged by (i,j).
TransportPlan convex_combination(const TransportPlan& a, const TransportPlan& b,
                                 double t);

/// Default floor separating genuine support from LP round-off dust.
inline constexpr double kDefaultMassFloor = 1e-12;

}  // namespace otcert
