#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "otcert/measures.hpp"
#include "otcert/monotonicity.hpp"

namespace otcert {

/// Coordinate normalization at a base pair: M is the mixed derivative of the
/// surplus b = -c there, and `transformed` is the cost re-expressed in
/// y-coordinates y~ = M*y, so that D2xy b~ = I at the base point. The
/// transformed model checks its domain through the original box (x as-is,
/// y~ pulled back by M^-1).
struct NormalizedFrame {
  Mat M;
  Mat M_inv;
  CostModel transformed;
  Vec x0, y0;
};

/// Throws degeneracy_error when D2xy c(x0,y0) is singular at relative
/// threshold 1e-10 (sigma_min <= 1e-10 * sigma_max).
NormalizedFrame normalize_frame(const CostModel& model, const Vec& x0,
                                const Vec& y0);

/// Diagonal rotation of a pair set already expressed in normalized
/// coordinates: u = (x + y)/sqrt(2), v = (y - x)/sqrt(2).
struct UvPair {
  Vec u;
  Vec v;
};
std::vector<UvPair> rotate_diagonal(const SupportSample& pairs);

/// Sampled estimate of sup || D2xy b - I ||_2 over the product of balls of
/// `radius` around x0 and y0, intersected with the model's domain
/// (low-discrepancy Halton sampling; `seed` offsets the sequence). The
/// estimate is a lower bound of the true sup; the maximizing sample is
/// reported. Throws domain_error when the radius exceeds the working box
/// diameter or the base point is outside the domain.
struct EpsilonEstimate {
  double value = 0.0;
  Vec at_x, at_y;       // sample achieving the max
  int samples_used = 0;
};
EpsilonEstimate estimate_epsilon(const CostModel& transformed, const Vec& x0,
                                 const Vec& y0, double radius, int samples,
                                 std::uint64_t seed = 0);

struct RectifiabilityCertificate {
  enum class Verdict { Certified, Failed, Degenerate };

  Vec base_x, base_y;
  Mat normalization;             // M applied to y-coordinates
  double neighborhood_radius = 0.0;
  double epsilon = 0.0;          // empirical sup estimate (see above)
  double lipschitz_bound = 0.0;  // sqrt((1+eps)/(1-eps))
  int pairs_checked = 0;         // uv pairs inside the neighborhood
  double max_ratio = 0.0;        // max |dv|/|du| over pair-pairs
  Verdict verdict = Verdict::Failed;
  std::string reason;
  std::int64_t comparisons = 0;
  int inequality_violations = 0;
  int hard_failures = 0;  // du = 0 with dv != 0: no graph over the diagonal
  bool conservative = false;
};

const char* to_string(RectifiabilityCertificate::Verdict v);

/// Checks (1+eps)|du|^2 >= (1-eps)|dv|^2 - tolerance for every pair of uv
/// samples. Fills the uv-dependent certificate fields; the caller supplies
/// base point / normalization / radius. Requires >= 2 pairs.
RectifiabilityCertificate certify_lipschitz(const std::vector<UvPair>& uv,
                                            double epsilon,
                                            double tolerance = 1e-9);

/// Nearest-neighbor interpolant of v over u built from certified samples.
/// This is deliberately not a Kirszbraun extension: queries return the value
/// at the nearest sample u (ties to the lexicographically smaller sample).
class GraphMap {
 public:
  /// Throws consistency_error when two samples share u (within 1e-12) but
  /// disagree in v.
  explicit GraphMap(std::vector<UvPair> samples);

  Vec query(const Vec& u) const;
  double lipschitz_on_samples() const;
  int size() const { return int(samples_.size()); }

 private:
  std::vector<UvPair> samples_;
};

inline GraphMap fit_graph(std::vector<UvPair> uv) {
  return GraphMap(std::move(uv));
}

/// Neighborhood search policy for rectify(): start at initial_fraction of
/// the box diameter and halve until the epsilon estimate drops below
/// eps_target, giving up below min_fraction. Conservative mode inflates the
/// epsilon estimate by 1.25 before use.
struct RadiusPolicy {
  double initial_fraction = 0.25;
  double min_fraction = 1e-3;
  double eps_target = 0.5;
  int samples = 2048;
  bool conservative = false;
  std::uint64_t seed = 0;
};

struct RectifyResult {
  MonotonicityReport precheck;
  std::optional<RectifiabilityCertificate> certificate;
  std::vector<UvPair> uv;  // rotated pairs inside the certified neighborhood

  bool certified() const {
    return certificate && certificate->verdict ==
                              RectifiabilityCertificate::Verdict::Certified;
  }
};

/// Full pipeline: b-monotonicity precheck, base-point selection (nearest
/// support pair to the mass centroid unless overridden), frame
/// normalization, neighborhood search, diagonal rotation, Lipschitz
/// certification. Neighborhoods are products of balls in the original
/// coordinates; u/v live in the normalized ones.
///
/// When the precheck fails, no certificate is attempted (the report is
/// returned in `precheck`). When every candidate base point is degenerate,
/// throws no_certificate_error; an explicitly supplied degenerate base
/// yields a certificate with verdict Degenerate instead.
RectifyResult rectify(const SupportSample& pairs, const CostModel& model,
                      std::optional<std::pair<Vec, Vec>> base = std::nullopt,
                      const RadiusPolicy& policy = {});

RectifyResult rectify(const TransportPlan& plan, const CostModel& model,
                      std::optional<std::pair<Vec, Vec>> base = std::nullopt,
                      const RadiusPolicy& policy = {},
                      double mass_floor = kDefaultMassFloor);

}  // namespace otcert
