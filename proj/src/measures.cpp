#include "otcert/measures.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "otcert/errors.hpp"
#include "otcert/numeric.hpp"

namespace otcert {

namespace {
constexpr double kWeightTol = 1e-12;
}

DiscreteMeasure::DiscreteMeasure(std::vector<Vec> pts, std::vector<double> w)
    : points(std::move(pts)), weights(std::move(w)) {
  if (points.size() != weights.size())
    throw input_error("DiscreteMeasure: points/weights size mismatch");
  if (points.empty()) throw input_error("DiscreteMeasure: empty measure");
  const auto d = points[0].size();
  KahanSum total;
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (points[k].size() != d)
      throw input_error("DiscreteMeasure: inconsistent point dimensions");
    if (weights[k] < 0.0)
      throw input_error("DiscreteMeasure: negative weight at index " +
                        std::to_string(k));
    total.add(weights[k]);
  }
  if (std::abs(total.value() - 1.0) > kWeightTol)
    throw input_error("DiscreteMeasure: weights sum to " +
                      std::to_string(total.value()) +
                      ", expected 1 within 1e-12");
}

DiscreteMeasure DiscreteMeasure::uniform(std::vector<Vec> pts) {
  if (pts.empty()) throw input_error("DiscreteMeasure: empty measure");
  std::vector<double> w(pts.size(), 1.0 / double(pts.size()));
  // Kill the last-ulp normalization slack so strict checks see exactly 1.
  KahanSum s;
  for (std::size_t k = 0; k + 1 < w.size(); ++k) s.add(w[k]);
  w.back() = 1.0 - s.value();
  return DiscreteMeasure(std::move(pts), std::move(w));
}

void DiscreteMeasure::require_inside(const WorkBox& box,
                                     const std::string& context) const {
  for (std::size_t k = 0; k < points.size(); ++k)
    if (!box.contains(points[k]))
      throw input_error(context + ": point " + std::to_string(k) +
                        " lies outside the working box");
}

TransportPlan::TransportPlan(MeasurePtr src, MeasurePtr tgt,
                             std::vector<PlanEntry> e)
    : source(std::move(src)), target(std::move(tgt)), entries(std::move(e)) {
  if (!source || !target) throw input_error("TransportPlan: null measure");
  for (const auto& en : entries) {
    if (en.i < 0 || en.i >= source->size() || en.j < 0 ||
        en.j >= target->size())
      throw input_error("TransportPlan: entry index out of range");
    if (!(en.mass > 0.0))
      throw input_error("TransportPlan: entry masses must be positive");
  }
}

TransportPlan TransportPlan::product(MeasurePtr src, MeasurePtr tgt) {
  std::vector<PlanEntry> entries;
  entries.reserve(std::size_t(src->size()) * tgt->size());
  for (int i = 0; i < src->size(); ++i)
    for (int j = 0; j < tgt->size(); ++j) {
      double m = src->weights[i] * tgt->weights[j];
      if (m > 0.0) entries.push_back({i, j, m});
    }
  return TransportPlan(std::move(src), std::move(tgt), std::move(entries));
}

TransportPlan TransportPlan::from_permutation(MeasurePtr src, MeasurePtr tgt,
                                              const std::vector<int>& perm) {
  if (int(perm.size()) != src->size() || src->size() != tgt->size())
    throw input_error("from_permutation: size mismatch");
  std::vector<PlanEntry> entries;
  entries.reserve(perm.size());
  for (int i = 0; i < src->size(); ++i) {
    int j = perm[i];
    if (j < 0 || j >= tgt->size())
      throw input_error("from_permutation: invalid permutation");
    if (std::abs(src->weights[i] - tgt->weights[j]) > kWeightTol)
      throw input_error("from_permutation: weight mismatch at pair " +
                        std::to_string(i));
    if (src->weights[i] > 0.0) entries.push_back({i, j, src->weights[i]});
  }
  return TransportPlan(std::move(src), std::move(tgt), std::move(entries));
}

std::pair<DiscreteMeasure, DiscreteMeasure> marginals(
    const TransportPlan& plan) {
  std::vector<KahanSum> row(plan.source->size()), col(plan.target->size());
  for (const auto& e : plan.entries) {
    row[e.i].add(e.mass);
    col[e.j].add(e.mass);
  }
  std::vector<double> rw(row.size()), cw(col.size());
  for (std::size_t i = 0; i < row.size(); ++i) rw[i] = row[i].value();
  for (std::size_t j = 0; j < col.size(); ++j) cw[j] = col[j].value();
  return {DiscreteMeasure(plan.source->points, std::move(rw)),
          DiscreteMeasure(plan.target->points, std::move(cw))};
}

double marginal_residual(const TransportPlan& plan) {
  std::vector<KahanSum> row(plan.source->size()), col(plan.target->size());
  for (const auto& e : plan.entries) {
    row[e.i].add(e.mass);
    col[e.j].add(e.mass);
  }
  double r = 0.0;
  for (int i = 0; i < plan.source->size(); ++i)
    r = std::max(r, std::abs(row[i].value() - plan.source->weights[i]));
  for (int j = 0; j < plan.target->size(); ++j)
    r = std::max(r, std::abs(col[j].value() - plan.target->weights[j]));
  return r;
}

SupportSample support(const TransportPlan& plan, double mass_floor) {
  if (mass_floor < 0.0) throw input_error("support: mass_floor must be >= 0");
  SupportSample s;
  for (const auto& e : plan.entries)
    if (e.mass > mass_floor)
      s.pairs.push_back(
          {plan.source->points[e.i], plan.target->points[e.j], e.mass});
  if (s.pairs.empty())
    throw degenerate_input_error(
        "support: no entries above the mass floor; a probability plan must "
        "have support");
  return s;
}

double kantorovich_cost(const TransportPlan& plan, const CostModel& model) {
  KahanSum total;
  for (const auto& e : plan.entries)
    total.add(e.mass * model.evaluate(plan.source->points[e.i],
                                      plan.target->points[e.j]));
  return total.value();
}

TransportPlan convex_combination(const TransportPlan& a,
                                 const TransportPlan& b, double t) {
  if (t < 0.0 || t > 1.0)
    throw input_error("convex_combination: t must lie in [0,1]");
  if (a.source != b.source || a.target != b.target)
    throw input_error(
        "convex_combination: plans must share source and target measures");
  std::map<std::pair<int, int>, double> merged;
  for (const auto& e : a.entries) merged[{e.i, e.j}] += t * e.mass;
  for (const auto& e : b.entries) merged[{e.i, e.j}] += (1.0 - t) * e.mass;
  std::vector<PlanEntry> entries;
  entries.reserve(merged.size());
  for (const auto& [ij, m] : merged)
    if (m > 0.0) entries.push_back({ij.first, ij.second, m});
  return TransportPlan(a.source, a.target, std::move(entries));
}

}  // namespace otcert
