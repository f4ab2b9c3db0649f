#pragma once

#include <cstdint>

#include "otcert/measures.hpp"

namespace otcert {

/// Dual certificate for a transport plan: phi_i + psi_j <= c(x_i, y_j)
/// everywhere with equality on every support pair. Normalized by phi[0] = 0.
struct DualPotentials {
  Vec phi;
  Vec psi;
  double dual_value = 0.0;
  double max_support_residual = 0.0;      // |phi+psi-c| over support pairs
  double max_feasibility_violation = 0.0; // max(phi+psi-c, 0) over all pairs
};

struct SolveResult {
  TransportPlan plan;
  DualPotentials duals;
  double value = 0.0;
  std::int64_t pivots = 0;
};

/// Exact Kantorovich solve by network simplex. The returned plan is a vertex
/// of the transportation polytope (<= N+M-1 entries) and is certified
/// optimal by recomputed dual potentials at tolerance 1e-9 before returning.
SolveResult solve_exact(MeasurePtr source, MeasurePtr target,
                        const CostModel& model);

/// Independent oracle: exhaustive search over all N! permutation matchings.
/// Requires equal point counts N <= 8 and uniform weights on both sides
/// (a minimal-cost vertex is then a permutation). Ties resolve to the
/// lexicographically smallest permutation.
TransportPlan brute_force(MeasurePtr source, MeasurePtr target,
                          const CostModel& model);

inline constexpr int kBruteForceMaxN = 8;

/// Reconstructs certifying dual potentials from a plan's support: equality
/// propagation over support components, difference-constraint offsets
/// between components, then a full feasibility sweep. Throws
/// certification_failure when no potentials exist within tolerance, i.e.
/// when the plan is not optimal.
DualPotentials dual_potentials(const TransportPlan& plan,
                               const CostModel& model, double tol = 1e-9);

}  // namespace otcert
