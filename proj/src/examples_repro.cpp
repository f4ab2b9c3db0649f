#include "otcert/examples_repro.hpp"

#include <cmath>
#include <limits>

#include "otcert/errors.hpp"
#include "otcert/numeric.hpp"

namespace otcert {

Example31Plans build_example31_plans(int grid_m) {
  if (grid_m < 2) throw input_error("build_example31_plans: grid_m must be >= 2");
  if (grid_m % 2 != 0)
    throw input_error(
        "build_example31_plans: grid_m must be even so the sheet images land "
        "on a common target grid");

  const int m = grid_m;
  const double dx1 = 1.0 / m;
  const double dx2 = 4.0 * M_PI / m;
  const double a = 1.0 / (3.0 * double(m) * double(m));

  // Source atoms: midpoints of the m x m grid over S. Index s = i*m + j.
  std::vector<Vec> src_pts;
  src_pts.reserve(std::size_t(m) * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      Vec p(2);
      p << (i + 0.5) * dx1, (j + 0.5) * dx2;
      src_pts.push_back(std::move(p));
    }

  // Target atoms: per x1 column, 2m values of y2 = (t+0.5)*dx2 + pi covering
  // the union of the three sheet images. Index g = i*2m + t. Sheets shift by
  // t += {0, m/2, m} in index units, so atom identity is integer arithmetic,
  // never a float comparison.
  std::vector<Vec> tgt_pts;
  tgt_pts.reserve(std::size_t(m) * 2 * m);
  for (int i = 0; i < m; ++i)
    for (int t = 0; t < 2 * m; ++t) {
      Vec p(2);
      p << (i + 0.5) * dx1, (t + 0.5) * dx2 + M_PI;
      tgt_pts.push_back(std::move(p));
    }

  const int shift[3] = {0, m / 2, m};
  std::vector<PlanEntry> gamma_entries;
  gamma_entries.reserve(std::size_t(m) * m * 3);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      int s = i * m + j;
      for (int k = 0; k < 3; ++k)
        gamma_entries.push_back({s, i * 2 * m + j + shift[k], a});
    }

  // gamma_bar: first half of sheet 1 (closed-left at x2 = 2*pi, i.e. the
  // rows with j < m/2 on the midpoint grid), double mass on sheet 2,
  // second half of sheet 3.
  std::vector<PlanEntry> bar_entries;
  bar_entries.reserve(std::size_t(m) * m * 2);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      int s = i * m + j;
      if (j < m / 2) bar_entries.push_back({s, i * 2 * m + j, a});
      bar_entries.push_back({s, i * 2 * m + j + m / 2, 2.0 * a});
      if (j >= m / 2) bar_entries.push_back({s, i * 2 * m + j + m, a});
    }

  // Measures carry exactly the marginals of gamma, so both plans are
  // feasible against the same atoms by construction.
  std::vector<KahanSum> row(src_pts.size()), col(tgt_pts.size());
  for (const auto& e : gamma_entries) {
    row[e.i].add(e.mass);
    col[e.j].add(e.mass);
  }
  std::vector<double> src_w(src_pts.size()), tgt_w(tgt_pts.size());
  for (std::size_t k = 0; k < src_w.size(); ++k) src_w[k] = row[k].value();
  for (std::size_t k = 0; k < tgt_w.size(); ++k) tgt_w[k] = col[k].value();

  Example31Plans out;
  out.grid_m = m;
  out.source = std::make_shared<DiscreteMeasure>(std::move(src_pts),
                                                 std::move(src_w));
  out.target = std::make_shared<DiscreteMeasure>(std::move(tgt_pts),
                                                 std::move(tgt_w));
  out.gamma = TransportPlan(out.source, out.target, std::move(gamma_entries));
  out.gamma_bar = TransportPlan(out.source, out.target, std::move(bar_entries));
  return out;
}

LowerBoundReport verify_lower_bound(const TransportPlan& plan) {
  CostModel model = builtin_cost("example31");
  LowerBoundReport rep;
  rep.max_residual = -std::numeric_limits<double>::infinity();
  rep.min_residual = std::numeric_limits<double>::infinity();
  for (const auto& e : plan.entries) {
    const Vec& x = plan.source->points[e.i];
    const Vec& y = plan.target->points[e.j];
    double gap = std::exp(x[0]) - std::exp(y[0]);
    double r = model.evaluate(x, y) - 0.5 * gap * gap;
    rep.max_residual = std::max(rep.max_residual, r);
    rep.min_residual = std::min(rep.min_residual, r);
  }
  return rep;
}

SupportSample build_example32_surface(int samples) {
  if (samples < 1)
    throw input_error("build_example32_surface: samples must be >= 1");
  // Base angles in [0, pi/2]; odd entries repeat the previous angle shifted
  // by 2*pi, landing on the same x. log-radii cycle through a few values.
  static const double y2_cycle[3] = {0.0, -0.5, 0.4};
  SupportSample s;
  s.pairs.reserve(samples);
  for (int idx = 0; idx < samples; ++idx) {
    int pair_idx = idx / 2;
    bool shifted = idx % 2 == 1;
    double y1 = (pair_idx % 9) * (M_PI / 16.0) + (shifted ? 2.0 * M_PI : 0.0);
    double y2 = y2_cycle[(pair_idx / 9) % 3];
    Vec y(2), x(2);
    y << y1, y2;
    x << std::exp(y2) * std::cos(y1), std::exp(y2) * std::sin(y1);
    s.pairs.push_back({std::move(x), std::move(y), 1.0});
  }
  return s;
}

}  // namespace otcert
