#pragma once

#include <cstdint>
#include <vector>

#include "otcert/measures.hpp"

namespace otcert {

/// One improving reassignment found in a pair set. `indices` lists the
/// support pairs of the cycle in order (two entries for the pairwise check);
/// `defect` is how much the reassignment undercuts the current pairing:
///   defect = sum_t c(x_t, y_t) - sum_t c(x_t, y_{t+1 mod k}).
/// Positive defect beyond tolerance violates b-monotonicity for b = -c.
struct MonotonicityViolation {
  std::vector<int> indices;
  double defect;
};

struct MonotonicityReport {
  std::int64_t checked = 0;
  std::vector<MonotonicityViolation> violations;  // sorted by defect, desc
  double max_defect = 0.0;  // over everything checked (may be negative)
  double tolerance = 0.0;
  int max_cycle = 2;
  bool sampled = false;

  bool pass() const { return max_defect <= tolerance; }
};

struct PairwiseOptions {
  /// When > 0 and the exhaustive pair count exceeds it, check a seeded
  /// random subset of this size instead (for supports beyond ~1e4 pairs).
  std::int64_t max_pairs = 0;
  std::uint64_t seed = 0;
};

/// Two-point b-monotonicity (Def 2.1 shape): for every unordered pair of
/// support points, swapping targets must not lower the cost by more than
/// `tolerance`.
MonotonicityReport check_pairwise(const SupportSample& support,
                                  const CostModel& model,
                                  double tolerance = 1e-9,
                                  const PairwiseOptions& opts = {});

/// Cyclical strengthening: every reassignment cycle of length k <= max_cycle
/// over distinct support pairs. k = 2 reproduces check_pairwise exactly.
/// max_cycle must lie in [2, 6]; enumeration is guarded against
/// combinatorial blowup.
MonotonicityReport check_cyclical(const SupportSample& support,
                                  const CostModel& model, int max_cycle,
                                  double tolerance = 1e-9);

}  // namespace otcert
