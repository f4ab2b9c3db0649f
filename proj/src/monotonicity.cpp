#include "otcert/monotonicity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "otcert/errors.hpp"
#include "otcert/parallel.hpp"

namespace otcert {

namespace {

void sort_violations(MonotonicityReport& rep) {
  std::sort(rep.violations.begin(), rep.violations.end(),
            [](const MonotonicityViolation& a, const MonotonicityViolation& b) {
              if (a.defect != b.defect) return a.defect > b.defect;
              return a.indices < b.indices;
            });
}

}  // namespace

namespace {

void require_pairs_in_domain(const SupportSample& support,
                             const CostModel& model, const char* who) {
  for (int k = 0; k < support.size(); ++k)
    if (!model.inside(support.pairs[k].x, support.pairs[k].y))
      throw domain_error(std::string(who) + ": pair " + std::to_string(k) +
                         " lies outside the working box");
}

}  // namespace

MonotonicityReport check_pairwise(const SupportSample& support,
                                  const CostModel& model, double tolerance,
                                  const PairwiseOptions& opts) {
  const int m = support.size();
  if (m < 2)
    throw degenerate_input_error(
        "check_pairwise: need at least 2 support pairs");
  require_pairs_in_domain(support, model, "check_pairwise");

  MonotonicityReport rep;
  rep.tolerance = tolerance;
  rep.max_cycle = 2;
  rep.max_defect = -std::numeric_limits<double>::infinity();

  std::vector<double> diag(m);
  for (int i = 0; i < m; ++i)
    diag[i] = model.evaluate(support.pairs[i].x, support.pairs[i].y);

  auto defect_of = [&](int i, int j) {
    // c-diagonal minus c-cross; positive means swapping improves.
    return diag[i] + diag[j] -
           model.evaluate(support.pairs[i].x, support.pairs[j].y) -
           model.evaluate(support.pairs[j].x, support.pairs[i].y);
  };

  const std::int64_t total = std::int64_t(m) * (m - 1) / 2;
  if (opts.max_pairs > 0 && total > opts.max_pairs) {
    rep.sampled = true;
    std::mt19937_64 rng(opts.seed);
    std::uniform_int_distribution<int> pick(0, m - 1);
    for (std::int64_t k = 0; k < opts.max_pairs; ++k) {
      int i = pick(rng), j = pick(rng);
      if (i == j) continue;
      double d = defect_of(std::min(i, j), std::max(i, j));
      ++rep.checked;
      rep.max_defect = std::max(rep.max_defect, d);
      if (d > tolerance)
        rep.violations.push_back({{std::min(i, j), std::max(i, j)}, d});
    }
    sort_violations(rep);
    return rep;
  }

  struct ChunkOut {
    double max_defect = -std::numeric_limits<double>::infinity();
    std::vector<MonotonicityViolation> violations;
  };
  std::vector<ChunkOut> outs(std::max(1, effective_threads()));
  parallel_chunks(m, [&](std::int64_t b, std::int64_t e, int chunk) {
    ChunkOut& o = outs[chunk];
    for (std::int64_t i = b; i < e; ++i)
      for (int j = int(i) + 1; j < m; ++j) {
        double d = defect_of(int(i), j);
        o.max_defect = std::max(o.max_defect, d);
        if (d > tolerance) o.violations.push_back({{int(i), j}, d});
      }
  });
  rep.checked = total;
  for (auto& o : outs) {
    rep.max_defect = std::max(rep.max_defect, o.max_defect);
    rep.violations.insert(rep.violations.end(), o.violations.begin(),
                          o.violations.end());
  }
  sort_violations(rep);
  return rep;
}

MonotonicityReport check_cyclical(const SupportSample& support,
                                  const CostModel& model, int max_cycle,
                                  double tolerance) {
  if (max_cycle < 2 || max_cycle > 6)
    throw input_error("check_cyclical: max_cycle must lie in [2, 6]");
  const int m = support.size();
  if (m < 2)
    throw degenerate_input_error(
        "check_cyclical: need at least 2 support pairs");
  require_pairs_in_domain(support, model, "check_cyclical");

  // Work estimate: sum_k C(m,k) * (k-1)! cycles.
  double work = 0.0;
  for (int k = 2; k <= std::min(max_cycle, m); ++k) {
    double comb = 1.0;
    for (int t = 0; t < k; ++t) comb *= double(m - t) / (t + 1);
    double fact = 1.0;
    for (int t = 2; t < k; ++t) fact *= t;
    work += comb * fact;
  }
  if (work > 2e7)
    throw input_error(
        "check_cyclical: cycle enumeration too large for this support; "
        "reduce max_cycle or use check_pairwise with sampling");

  std::vector<double> cmat(std::size_t(m) * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      cmat[std::size_t(i) * m + j] =
          model.evaluate(support.pairs[i].x, support.pairs[j].y);
  auto cost = [&](int i, int j) { return cmat[std::size_t(i) * m + j]; };

  MonotonicityReport rep;
  rep.tolerance = tolerance;
  rep.max_cycle = max_cycle;
  rep.max_defect = -std::numeric_limits<double>::infinity();

  std::vector<int> subset;
  std::vector<int> rest;
  // Enumerate index subsets of size k; the first element stays fixed and the
  // remainder permutes, visiting each directed cycle exactly once.
  auto visit_subset = [&](int k) {
    rest.assign(subset.begin() + 1, subset.end());
    std::sort(rest.begin(), rest.end());
    do {
      double ident = cost(subset[0], subset[0]);
      double shifted = 0.0;
      int prev = subset[0];
      for (int t = 0; t < k - 1; ++t) {
        ident += cost(rest[t], rest[t]);
        shifted += cost(prev, rest[t]);
        prev = rest[t];
      }
      shifted += cost(prev, subset[0]);
      double d = ident - shifted;
      ++rep.checked;
      rep.max_defect = std::max(rep.max_defect, d);
      if (d > tolerance) {
        MonotonicityViolation v;
        v.indices.push_back(subset[0]);
        v.indices.insert(v.indices.end(), rest.begin(), rest.end());
        v.defect = d;
        rep.violations.push_back(std::move(v));
      }
    } while (std::next_permutation(rest.begin(), rest.end()));
  };

  for (int k = 2; k <= std::min(max_cycle, m); ++k) {
    subset.assign(k, 0);
    // iterative combination enumeration
    for (int t = 0; t < k; ++t) subset[t] = t;
    while (true) {
      visit_subset(k);
      int t = k - 1;
      while (t >= 0 && subset[t] == m - k + t) --t;
      if (t < 0) break;
      ++subset[t];
      for (int s = t + 1; s < k; ++s) subset[s] = subset[s - 1] + 1;
    }
  }
  sort_violations(rep);
  return rep;
}

}  // namespace otcert
