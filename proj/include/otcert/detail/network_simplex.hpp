#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace otcert::detail {

/// Primal network simplex specialized to the dense bipartite transportation
/// problem min sum c_ij x_ij s.t. row sums = supply, column sums = demand,
/// x >= 0. Spanning-tree basis rooted at an artificial node, block-search
/// pricing with a Bland's-rule fallback after long degenerate streaks.
///
/// Supplies are perturbed internally by index-dependent offsets (~1e-15
/// relative) to break degenerate ties; the returned flows are re-derived
/// from the final basis tree with the exact input weights, so the output is
/// feasible to accumulation precision, not perturbation precision.
class NetworkSimplex {
 public:
  struct Entry {
    int i, j;
    double mass;
  };

  enum class Status { Optimal, CyclingGuard, Infeasible, Unbounded };

  struct Result {
    Status status = Status::Optimal;
    std::vector<Entry> entries;
    std::int64_t pivots = 0;
    double artificial_residual = 0.0;
  };

  struct Options {
    std::int64_t max_pivots = 0;  // 0 = automatic guard
    double perturbation = 1e-15;  // relative supply jitter, 0 disables
  };

  NetworkSimplex(int n_source, int n_target)
      : n0_(n_source),
        n1_(n_target),
        nodes_(n_source + n_target),
        root_(n_source + n_target),
        n_arcs_(std::int64_t(n_source) * n_target),
        cost_(std::size_t(n_arcs_)) {}

  /// Row-major cost buffer, entry (i,j) at i*n_target + j.
  std::vector<double>& costs() { return cost_; }

  Result solve(const std::vector<double>& supply,
               const std::vector<double>& demand, const Options& opt);
  Result solve(const std::vector<double>& supply,
               const std::vector<double>& demand) {
    return solve(supply, demand, Options{});
  }

 private:
  using Arc = std::int64_t;
  static constexpr Arc kNoArc = -1;
  static constexpr char kStateTree = 0;
  static constexpr char kStateLower = 1;

  int n0_, n1_, nodes_, root_;
  Arc n_arcs_;
  std::vector<double> cost_;      // bipartite then artificial arcs
  std::vector<char> state_;
  std::vector<double> pi_;
  std::vector<int> parent_;
  std::vector<Arc> pred_arc_;
  std::vector<char> pred_fwd_;    // pred arc oriented child -> parent
  std::vector<int> depth_;
  std::vector<int> child_head_, child_next_, order_;  // rebuilt per pivot
  std::vector<char> art_to_root_;  // artificial arc orientation per node
  std::vector<double> flow_;       // working flows during pivoting

  Arc next_arc_ = 0;
  Arc in_arc_ = kNoArc;
  int block_size_ = 0;
  bool bland_ = false;

  int arc_src(Arc a) const {
    return a < n_arcs_ ? int(a / n1_)
                       : (art_to_root_[int(a - n_arcs_)] ? int(a - n_arcs_)
                                                         : root_);
  }
  int arc_dst(Arc a) const {
    return a < n_arcs_ ? n0_ + int(a % n1_)
                       : (art_to_root_[int(a - n_arcs_)] ? root_
                                                         : int(a - n_arcs_));
  }
  double reduced_cost(Arc a) const {
    return cost_[std::size_t(a)] + pi_[arc_src(a)] - pi_[arc_dst(a)];
  }

  void init_basis(const std::vector<double>& balance);
  void rebuild_tree();
  bool find_entering();
  int find_join(int u, int v) const;
  bool pivot(std::int64_t& degenerate_streak);
  Result extract(const std::vector<double>& supply,
                 const std::vector<double>& demand, std::int64_t pivots);
};

inline void NetworkSimplex::init_basis(const std::vector<double>& balance) {
  const std::size_t total_arcs = std::size_t(n_arcs_) + nodes_;
  cost_.resize(total_arcs, 0.0);
  flow_.assign(total_arcs, 0.0);
  state_.assign(total_arcs, kStateLower);
  pi_.assign(nodes_ + 1, 0.0);
  parent_.assign(nodes_ + 1, -1);
  pred_arc_.assign(nodes_ + 1, kNoArc);
  pred_fwd_.assign(nodes_ + 1, 1);
  depth_.assign(nodes_ + 1, 0);
  art_to_root_.assign(nodes_, 1);

  double max_cost = 0.0;
  for (Arc a = 0; a < n_arcs_; ++a)
    max_cost = std::max(max_cost, std::abs(cost_[std::size_t(a)]));
  const double art_cost = (max_cost + 1.0) * (nodes_ + 1);

  for (int u = 0; u < nodes_; ++u) {
    Arc a = n_arcs_ + u;
    parent_[u] = root_;
    pred_arc_[u] = a;
    state_[std::size_t(a)] = kStateTree;
    if (balance[u] >= 0.0) {
      art_to_root_[u] = 1;  // u -> root, cost 0
      pred_fwd_[u] = 1;
      cost_[std::size_t(a)] = 0.0;
      flow_[std::size_t(a)] = balance[u];
      pi_[u] = 0.0;
    } else {
      art_to_root_[u] = 0;  // root -> u, big-M cost
      pred_fwd_[u] = 0;
      cost_[std::size_t(a)] = art_cost;
      flow_[std::size_t(a)] = -balance[u];
      pi_[u] = art_cost;
    }
  }
  rebuild_tree();
  next_arc_ = 0;
  in_arc_ = kNoArc;
  bland_ = false;
  block_size_ = std::max(10, int(std::sqrt(double(n_arcs_))));
}

inline void NetworkSimplex::rebuild_tree() {
  child_head_.assign(nodes_ + 1, -1);
  child_next_.assign(nodes_ + 1, -1);
  for (int u = nodes_ - 1; u >= 0; --u) {  // reversed so lists run ascending
    int p = parent_[u];
    child_next_[u] = child_head_[p];
    child_head_[p] = u;
  }
  order_.clear();
  order_.reserve(nodes_ + 1);
  order_.push_back(root_);
  depth_[root_] = 0;
  pi_[root_] = 0.0;
  for (std::size_t k = 0; k < order_.size(); ++k) {
    int u = order_[k];
    for (int c = child_head_[u]; c != -1; c = child_next_[c]) {
      depth_[c] = depth_[u] + 1;
      double ca = cost_[std::size_t(pred_arc_[c])];
      pi_[c] = pred_fwd_[c] ? pi_[u] - ca : pi_[u] + ca;
      order_.push_back(c);
    }
  }
}

inline bool NetworkSimplex::find_entering() {
  const double eps = 100.0 * std::numeric_limits<double>::epsilon();
  auto tolerance = [&](Arc a) {
    double m = std::max({std::abs(pi_[arc_src(a)]), std::abs(pi_[arc_dst(a)]),
                         std::abs(cost_[std::size_t(a)]), 1.0});
    return eps * m;
  };
  if (bland_) {
    for (Arc a = 0; a < n_arcs_; ++a) {
      if (state_[std::size_t(a)] != kStateLower) continue;
      if (reduced_cost(a) < -tolerance(a)) {
        in_arc_ = a;
        return true;
      }
    }
    return false;
  }
  double best = 0.0;
  Arc e = next_arc_;
  int countdown = block_size_;
  in_arc_ = kNoArc;
  for (Arc scanned = 0; scanned < n_arcs_; ++scanned, ++e) {
    if (e == n_arcs_) e = 0;
    if (state_[std::size_t(e)] == kStateLower) {
      double rc = reduced_cost(e);
      if (rc < best) {
        best = rc;
        in_arc_ = e;
      }
    }
    if (--countdown == 0) {
      if (in_arc_ != kNoArc && best < -tolerance(in_arc_)) {
        next_arc_ = e + 1 == n_arcs_ ? 0 : e + 1;
        return true;
      }
      countdown = block_size_;
    }
  }
  if (in_arc_ != kNoArc && best < -tolerance(in_arc_)) {
    next_arc_ = 0;
    return true;
  }
  return false;
}

inline int NetworkSimplex::find_join(int u, int v) const {
  while (u != v) {
    if (depth_[u] >= depth_[v])
      u = parent_[u];
    else
      v = parent_[v];
  }
  return u;
}

inline bool NetworkSimplex::pivot(std::int64_t& degenerate_streak) {
  const double inf = std::numeric_limits<double>::infinity();
  const int src = arc_src(in_arc_), dst = arc_dst(in_arc_);
  const int join = find_join(src, dst);

  // Pushing mass along the entering arc src->dst is balanced by a flow from
  // dst back to src through the tree. Arcs whose flow decreases bound the
  // step.
  double delta = inf;
  int u_out = -1;
  bool out_on_src_side = true;
  for (int u = src; u != join; u = parent_[u]) {
    if (pred_fwd_[u]) {  // arc u->parent carries flow against the cycle
      double f = flow_[std::size_t(pred_arc_[u])];
      if (f < delta) {
        delta = f;
        u_out = u;
        out_on_src_side = true;
      }
    }
  }
  for (int u = dst; u != join; u = parent_[u]) {
    if (!pred_fwd_[u]) {
      double f = flow_[std::size_t(pred_arc_[u])];
      if (f <= delta) {
        delta = f;
        u_out = u;
        out_on_src_side = false;
      }
    }
  }
  if (u_out < 0) return false;  // unbounded: no arc limits the cycle

  if (delta > 0.0) {
    flow_[std::size_t(in_arc_)] += delta;
    for (int u = src; u != join; u = parent_[u])
      flow_[std::size_t(pred_arc_[u])] += pred_fwd_[u] ? -delta : delta;
    for (int u = dst; u != join; u = parent_[u])
      flow_[std::size_t(pred_arc_[u])] += pred_fwd_[u] ? delta : -delta;
    degenerate_streak = 0;
  } else {
    ++degenerate_streak;
  }

  // Basis exchange: detach the subtree under u_out and re-hang it from the
  // entering arc. Parent links along the path from the entering endpoint
  // inside the subtree up to u_out are reversed.
  const Arc leaving = pred_arc_[u_out];
  state_[std::size_t(leaving)] = kStateLower;
  state_[std::size_t(in_arc_)] = kStateTree;

  int q = out_on_src_side ? src : dst;  // endpoint inside detached subtree
  int p = out_on_src_side ? dst : src;

  int cur = q;
  int walk_parent = parent_[q];
  Arc walk_arc = pred_arc_[q];
  bool walk_fwd = pred_fwd_[q];
  parent_[q] = p;
  pred_arc_[q] = in_arc_;
  pred_fwd_[q] = (q == arc_src(in_arc_));
  while (cur != u_out) {
    int nxt = walk_parent;
    int nxt_parent = parent_[nxt];
    Arc nxt_arc = pred_arc_[nxt];
    bool nxt_fwd = pred_fwd_[nxt];
    parent_[nxt] = cur;
    pred_arc_[nxt] = walk_arc;
    pred_fwd_[nxt] = !walk_fwd;
    cur = nxt;
    walk_parent = nxt_parent;
    walk_arc = nxt_arc;
    walk_fwd = nxt_fwd;
  }

  rebuild_tree();
  return true;
}

inline NetworkSimplex::Result NetworkSimplex::extract(
    const std::vector<double>& supply, const std::vector<double>& demand,
    std::int64_t pivots) {
  Result res;
  res.pivots = pivots;

  // Exact balances: sources positive, targets negative, root absorbs the
  // (tiny) global imbalance.
  std::vector<double> balance(nodes_ + 1, 0.0);
  double acc = 0.0, comp = 0.0;  // Neumaier
  auto add = [&](double x) {
    double t = acc + x;
    if (std::abs(acc) >= std::abs(x))
      comp += (acc - t) + x;
    else
      comp += (x - t) + acc;
    acc = t;
  };
  for (int i = 0; i < n0_; ++i) {
    balance[i] = supply[i];
    add(supply[i]);
  }
  for (int j = 0; j < n1_; ++j) {
    balance[n0_ + j] = -demand[j];
    add(-demand[j]);
  }
  balance[root_] = -(acc + comp);

  // Peel leaves: in reverse DFS order every node sees its children already
  // resolved, so its pred arc carries exactly the remaining balance.
  const double scale = std::max(1.0, *std::max_element(supply.begin(), supply.end()));
  double art_residual = 0.0;
  for (std::size_t k = order_.size(); k-- > 1;) {
    int u = order_[k];
    Arc a = pred_arc_[u];
    double f = pred_fwd_[u] ? balance[u] : -balance[u];
    balance[parent_[u]] += balance[u];
    if (a >= n_arcs_) {
      art_residual = std::max(art_residual, std::abs(f));
      continue;
    }
    if (f < -1e-9 * scale) {
      res.status = Status::Infeasible;
      return res;
    }
    if (f > 0.0)
      res.entries.push_back({int(a / n1_), int(a % n1_), f});
  }
  res.artificial_residual = art_residual;
  if (art_residual > 1e-9 * scale) {
    res.status = Status::Infeasible;
    return res;
  }
  res.status = Status::Optimal;
  return res;
}

inline NetworkSimplex::Result NetworkSimplex::solve(
    const std::vector<double>& supply, const std::vector<double>& demand,
    const Options& opt) {
  std::vector<double> balance(nodes_, 0.0);
  double wscale = 0.0;
  for (int i = 0; i < n0_; ++i) wscale = std::max(wscale, std::abs(supply[i]));
  for (int j = 0; j < n1_; ++j) wscale = std::max(wscale, std::abs(demand[j]));
  if (wscale == 0.0) wscale = 1.0;
  // Index-dependent jitter: breaks ties between degenerate vertices without
  // moving the basis away from an exact optimum (see extract()).
  const double jitter = opt.perturbation * wscale;
  for (int i = 0; i < n0_; ++i) balance[i] = supply[i] + jitter * (i + 1);
  for (int j = 0; j < n1_; ++j)
    balance[n0_ + j] = -(demand[j] + jitter * (j + 1.5));

  init_basis(balance);

  // Warm start: cheapest incoming arc per target column.
  for (int j = 0; j < n1_; ++j) {
    Arc best = kNoArc;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n0_; ++i) {
      Arc a = Arc(i) * n1_ + j;
      if (cost_[std::size_t(a)] < best_cost) {
        best_cost = cost_[std::size_t(a)];
        best = a;
      }
    }
    if (best == kNoArc) continue;
    in_arc_ = best;
    if (state_[std::size_t(best)] == kStateLower &&
        reduced_cost(best) < 0.0) {
      std::int64_t streak = 0;
      if (!pivot(streak)) {
        Result r;
        r.status = Status::Unbounded;
        return r;
      }
    }
  }

  const std::int64_t guard =
      opt.max_pivots > 0 ? opt.max_pivots
                         : std::max<std::int64_t>(100000, 400LL * nodes_);
  std::int64_t pivots = 0, degenerate_streak = 0;
  while (find_entering()) {
    if (++pivots > guard) {
      Result r;
      r.status = Status::CyclingGuard;
      r.pivots = pivots;
      return r;
    }
    if (!pivot(degenerate_streak)) {
      Result r;
      r.status = Status::Unbounded;
      r.pivots = pivots;
      return r;
    }
    if (degenerate_streak > 1000) bland_ = true;  // anti-cycling fallback
  }
  return extract(supply, demand, pivots);
}

}  // namespace otcert::detail
