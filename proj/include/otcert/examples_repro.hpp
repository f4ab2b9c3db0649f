#pragma once

#include "otcert/measures.hpp"

namespace otcert {

/// The two distinct optimal plans of the three-sheet construction, built on
/// a shared midpoint grid over S = [0,1] x [0,4*pi]. gamma spreads each grid
/// atom equally over the three sheets y = x + (0, k*pi), k in {1,3,5};
/// gamma_bar uses the first half of sheet 1, double mass on sheet 2, and the
/// second half of sheet 3. Both reference the same measure objects, and
/// their marginals agree atom by atom to machine precision.
///
/// grid_m must be even: the sheet images then land on a common target grid
/// (2*pi is exactly m/2 grid steps), which is what makes the marginals of
/// the two plans coincide exactly. Odd grids leave the sheets interleaved
/// and the construction genuinely loses marginal equality.
struct Example31Plans {
  MeasurePtr source;
  MeasurePtr target;
  TransportPlan gamma;
  TransportPlan gamma_bar;
  int grid_m = 0;
};

Example31Plans build_example31_plans(int grid_m);

/// Support-wise residual of c(x,y) against the lower bound
/// (e^{x1} - e^{y1})^2 / 2. The bound itself makes min_residual >= -1e-12
/// for any plan over this cost; plans supported on the sheets additionally
/// have max_residual ~ 0, certifying optimality without running the LP.
struct LowerBoundReport {
  double max_residual = 0.0;
  double min_residual = 0.0;
};

LowerBoundReport verify_lower_bound(const TransportPlan& plan);

/// Samples of the equality surface of the second cost: x determined by y via
/// x = e^{y2} (cos y1, sin y1). Consecutive even/odd entries share x while
/// their y1 differ by 2*pi, witnessing the non-invertible graph of x over y.
SupportSample build_example32_surface(int samples);

}  // namespace otcert
