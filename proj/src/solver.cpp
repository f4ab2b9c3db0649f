#include "otcert/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "otcert/detail/network_simplex.hpp"
#include "otcert/errors.hpp"
#include "otcert/numeric.hpp"
#include "otcert/parallel.hpp"

namespace otcert {

namespace {

std::vector<double> cost_matrix(const DiscreteMeasure& src,
                                const DiscreteMeasure& tgt,
                                const CostModel& model) {
  const int n = src.size(), m = tgt.size();
  std::vector<double> c(std::size_t(n) * m);
  bool bad = false;
  parallel_chunks(n, [&](std::int64_t b, std::int64_t e, int) {
    for (std::int64_t i = b; i < e; ++i)
      for (int j = 0; j < m; ++j) {
        double v = model.evaluate(src.points[i], tgt.points[j]);
        if (!std::isfinite(v)) bad = true;
        c[std::size_t(i) * m + j] = v;
      }
  });
  if (bad)
    throw input_error("solve_exact: cost is not finite on all point pairs");
  return c;
}

void validate_instance(const DiscreteMeasure& src, const DiscreteMeasure& tgt,
                       const CostModel& model) {
  if (src.dim() != model.dim || tgt.dim() != model.dim)
    throw input_error("solve_exact: measure dimension does not match cost '" +
                      model.label + "'");
  src.require_inside(model.box, "solve_exact(source)");
  tgt.require_inside(model.box, "solve_exact(target)");
  double sw = kahan_sum(src.weights), tw = kahan_sum(tgt.weights);
  if (std::abs(sw - tw) > 1e-9)
    throw input_error("solve_exact: weight sums differ by " +
                      std::to_string(std::abs(sw - tw)) +
                      " (infeasible beyond 1e-9)");
}

}  // namespace

SolveResult solve_exact(MeasurePtr source, MeasurePtr target,
                        const CostModel& model) {
  validate_instance(*source, *target, model);
  const int n = source->size(), m = target->size();

  detail::NetworkSimplex simplex(n, m);
  simplex.costs() = cost_matrix(*source, *target, model);
  auto res = simplex.solve(source->weights, target->weights);

  using Status = detail::NetworkSimplex::Status;
  switch (res.status) {
    case Status::Optimal:
      break;
    case Status::CyclingGuard:
      throw solver_failure("solve_exact: LP cycling guard exceeded after " +
                           std::to_string(res.pivots) + " pivots");
    case Status::Infeasible:
      throw solver_failure(
          "solve_exact: basis infeasible at extraction (artificial residual " +
          std::to_string(res.artificial_residual) + ")");
    case Status::Unbounded:
      throw solver_failure("solve_exact: unbounded pivot (corrupt instance)");
  }

  std::sort(res.entries.begin(), res.entries.end(),
            [](const auto& a, const auto& b) {
              return a.i != b.i ? a.i < b.i : a.j < b.j;
            });
  std::vector<PlanEntry> entries;
  entries.reserve(res.entries.size());
  for (const auto& e : res.entries) entries.push_back({e.i, e.j, e.mass});

  SolveResult out;
  out.plan = TransportPlan(std::move(source), std::move(target),
                           std::move(entries));
  out.pivots = res.pivots;
  try {
    out.duals = dual_potentials(out.plan, model, 1e-9);
  } catch (const certification_failure& e) {
    throw solver_failure(std::string("solve_exact: optimality certificate "
                                     "failed: ") +
                         e.what());
  }
  out.value = kantorovich_cost(out.plan, model);
  return out;
}

TransportPlan brute_force(MeasurePtr source, MeasurePtr target,
                          const CostModel& model) {
  const int n = source->size();
  if (target->size() != n)
    throw unsupported_error("brute_force: point counts must match");
  if (n > kBruteForceMaxN)
    throw unsupported_error("brute_force: N must be <= " +
                            std::to_string(kBruteForceMaxN));
  const double u = 1.0 / n;
  for (int i = 0; i < n; ++i)
    if (std::abs(source->weights[i] - u) > 1e-12 ||
        std::abs(target->weights[i] - u) > 1e-12)
      throw unsupported_error("brute_force: weights must be uniform");
  source->require_inside(model.box, "brute_force(source)");
  target->require_inside(model.box, "brute_force(target)");

  std::vector<double> c(std::size_t(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      c[std::size_t(i) * n + j] =
          model.evaluate(source->points[i], target->points[j]);

  std::vector<int> perm(n), best(n);
  std::iota(perm.begin(), perm.end(), 0);
  best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += c[std::size_t(i) * n + perm[i]];
    if (total < best_cost) {  // lexicographic enumeration: ties keep first
      best_cost = total;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  return TransportPlan::from_permutation(std::move(source), std::move(target),
                                         best);
}

DualPotentials dual_potentials(const TransportPlan& plan,
                               const CostModel& model, double tol) {
  const int n = plan.source->size(), m = plan.target->size();
  if (plan.entries.empty())
    throw input_error("dual_potentials: plan has no entries");

  std::vector<double> c = cost_matrix(*plan.source, *plan.target, model);
  auto cost = [&](int i, int j) { return c[std::size_t(i) * m + j]; };

  // Equality propagation over the support graph. Sources are nodes
  // 0..n-1, targets n..n+m-1.
  std::vector<std::vector<std::pair<int, double>>> adj(n + m);
  for (const auto& e : plan.entries) {
    adj[e.i].push_back({n + e.j, cost(e.i, e.j)});
    adj[n + e.j].push_back({e.i, cost(e.i, e.j)});
  }
  std::vector<double> potential(n + m, 0.0);  // phi on sources, psi on targets
  std::vector<int> comp(n + m, -1);
  int n_comp = 0;
  for (int s = 0; s < n + m; ++s) {
    if (comp[s] >= 0 || adj[s].empty()) continue;
    comp[s] = n_comp;
    potential[s] = 0.0;
    std::queue<int> bfs;
    bfs.push(s);
    while (!bfs.empty()) {
      int u = bfs.front();
      bfs.pop();
      for (auto [v, cuv] : adj[u]) {
        double pv = cuv - potential[u];
        if (comp[v] < 0) {
          comp[v] = n_comp;
          potential[v] = pv;
          bfs.push(v);
        } else if (std::abs(potential[v] - pv) > tol) {
          throw certification_failure(
              "dual_potentials: support cycle with inconsistent potentials "
              "(plan not optimal)");
        }
      }
    }
    ++n_comp;
  }
  // Inter-component offsets t_a: each component may shift phi += t, psi -= t.
  // Feasibility across components a != b requires
  //   t_a - t_b <= min over cross pairs of (c_ij - phi_i - psi_j).
  // Isolated nodes (zero-weight atoms, comp -1) are assigned afterwards.
  std::vector<double> t(n_comp, 0.0);
  if (n_comp > 1) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    double cscale = 1.0;
    for (double v : c) cscale = std::max(cscale, std::abs(v));
    std::vector<double> w(std::size_t(n_comp) * n_comp, inf);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) {
        int a = comp[i], b = comp[n + j];
        if (a < 0 || b < 0 || a == b) continue;
        double slack = cost(i, j) - potential[i] - potential[n + j];
        double& ref = w[std::size_t(a) * n_comp + b];
        ref = std::min(ref, slack);
      }
    // Bellman-Ford on the difference-constraint graph (edge b->a, weight w_ab).
    bool changed = true;
    for (int round = 0; round < n_comp && changed; ++round) {
      changed = false;
      for (int a = 0; a < n_comp; ++a)
        for (int b = 0; b < n_comp; ++b) {
          double wab = w[std::size_t(a) * n_comp + b];
          if (wab == inf) continue;
          if (t[a] > t[b] + wab + 1e-14 * cscale) {
            t[a] = t[b] + wab;
            changed = true;
          }
        }
    }
    if (changed)
      throw certification_failure(
          "dual_potentials: negative offset cycle between support components "
          "(plan not optimal)");
  }

  DualPotentials out;
  out.phi = Vec(n);
  out.psi = Vec(m);
  for (int i = 0; i < n; ++i)
    out.phi[i] = comp[i] >= 0 ? potential[i] + t[comp[i]] : 0.0;
  for (int j = 0; j < m; ++j)
    out.psi[j] = comp[n + j] >= 0 ? potential[n + j] - t[comp[n + j]] : 0.0;

  // Zero-weight atoms never constrain optimality; give them the largest
  // feasible potential. Targets first (against connected sources), then
  // sources against everything.
  for (int j = 0; j < m; ++j) {
    if (comp[n + j] >= 0) continue;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
      if (comp[i] >= 0) best = std::min(best, cost(i, j) - out.phi[i]);
    out.psi[j] = best;
  }
  for (int i = 0; i < n; ++i) {
    if (comp[i] >= 0) continue;
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < m; ++j) best = std::min(best, cost(i, j) - out.psi[j]);
    out.phi[i] = best;
  }

  // Normalize phi[0] = 0.
  double shift = out.phi[0];
  out.phi.array() -= shift;
  out.psi.array() += shift;

  // Certify: equality on support, feasibility everywhere.
  for (const auto& e : plan.entries)
    out.max_support_residual =
        std::max(out.max_support_residual,
                 std::abs(out.phi[e.i] + out.psi[e.j] - cost(e.i, e.j)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      out.max_feasibility_violation =
          std::max(out.max_feasibility_violation,
                   out.phi[i] + out.psi[j] - cost(i, j));
  out.max_feasibility_violation = std::max(out.max_feasibility_violation, 0.0);
  if (out.max_support_residual > tol || out.max_feasibility_violation > tol)
    throw certification_failure(
        "dual_potentials: no feasible potentials within tolerance (support "
        "residual " +
        std::to_string(out.max_support_residual) + ", violation " +
        std::to_string(out.max_feasibility_violation) + ")");

  KahanSum dv;
  for (int i = 0; i < n; ++i) dv.add(out.phi[i] * plan.source->weights[i]);
  for (int j = 0; j < m; ++j) dv.add(out.psi[j] * plan.target->weights[j]);
  out.dual_value = dv.value();
  return out;
}

}  // namespace otcert
