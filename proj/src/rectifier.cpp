#include "otcert/rectifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "otcert/errors.hpp"
#include "otcert/numeric.hpp"
#include "otcert/parallel.hpp"

namespace otcert {

namespace {

constexpr double kDegeneracyThreshold = 1e-10;
constexpr double kDuplicateTol = 1e-12;
constexpr double kConservativeFactor = 1.25;
const double kSqrt2 = std::sqrt(2.0);

bool lex_less(const Vec& a, const Vec& b) {
  for (int i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

/// Max of ||-H_c(x,y) * R - I||_2 over Halton samples of the product ball
/// around (x0,y0), clipped to the model domain. R = identity when null.
EpsilonEstimate epsilon_scan(const CostModel& model, const Vec& x0,
                             const Vec& y0, double radius, int samples,
                             std::uint64_t seed, const Mat* right_factor) {
  const int n = model.dim;
  if (!(radius > 0.0)) throw input_error("estimate_epsilon: radius must be > 0");
  if (radius > model.box.diameter())
    throw domain_error("estimate_epsilon: radius exceeds the working box");
  if (!model.inside(x0, y0))
    throw domain_error("estimate_epsilon: base point outside the domain");
  if (samples < 1) throw input_error("estimate_epsilon: samples must be >= 1");

  const Mat eye = Mat::Identity(n, n);
  auto local_eps = [&](const Vec& x, const Vec& y) {
    Mat h = model.mixed_hessian ? model.mixed_hessian(x, y)
                                : mixed_hessian(model, x, y,
                                                DerivativeMethod::FiniteDifference);
    Mat a = right_factor ? Mat(-h * (*right_factor)) : Mat(-h);
    return spectral_norm(a - eye);
  };

  // Collect accepted sample points first (cheap), then evaluate in parallel.
  std::vector<Vec> xs, ys;
  xs.reserve(samples + 1);
  ys.reserve(samples + 1);
  xs.push_back(x0);
  ys.push_back(y0);
  const std::uint64_t budget = 64ull * std::uint64_t(samples) + 1024;
  std::uint64_t index = 1 + seed;
  while (int(xs.size()) < samples + 1 && index < 1 + seed + budget) {
    auto h = halton_point(index++, 2 * n);
    Vec dx(n), dy(n);
    for (int i = 0; i < n; ++i) dx[i] = (2.0 * h[i] - 1.0) * radius;
    for (int i = 0; i < n; ++i) dy[i] = (2.0 * h[n + i] - 1.0) * radius;
    if (dx.norm() > radius || dy.norm() > radius) continue;
    Vec x = x0 + dx, y = y0 + dy;
    if (!model.inside(x, y)) continue;
    xs.push_back(std::move(x));
    ys.push_back(std::move(y));
  }

  const int count = int(xs.size());
  std::vector<double> vals(count);
  parallel_chunks(count, [&](std::int64_t b, std::int64_t e, int) {
    for (std::int64_t k = b; k < e; ++k) {
      try {
        vals[k] = local_eps(xs[k], ys[k]);
      } catch (const std::exception&) {
        vals[k] = -1.0;  // e.g. FD margin at the box edge: skip the sample
      }
    }
  });

  EpsilonEstimate est;
  est.samples_used = count;
  int arg = 0;
  for (int k = 0; k < count; ++k)
    if (vals[k] > vals[arg]) arg = k;
  est.value = std::max(vals[arg], 0.0);
  est.at_x = xs[arg];
  est.at_y = ys[arg];
  return est;
}

}  // namespace

NormalizedFrame normalize_frame(const CostModel& model, const Vec& x0,
                                const Vec& y0) {
  if (!model.inside(x0, y0))
    throw domain_error("normalize_frame: base point outside the domain");
  Mat h = mixed_hessian(model, x0, y0,
                        model.mixed_hessian ? DerivativeMethod::Analytic
                                            : DerivativeMethod::FiniteDifference);
  Eigen::JacobiSVD<Mat> svd(h);
  double smax = svd.singularValues()(0);
  double smin = svd.singularValues()(model.dim - 1);
  if (smin <= kDegeneracyThreshold * smax) {
    std::string pt = "(";
    for (int d = 0; d < model.dim; ++d)
      pt += std::to_string(x0[d]) + (d + 1 < model.dim ? "," : ");(");
    for (int d = 0; d < model.dim; ++d)
      pt += std::to_string(y0[d]) + (d + 1 < model.dim ? "," : ")");
    throw degeneracy_error(
        "normalize_frame: singular mixed Hessian at " + pt +
        " (sigma_min/sigma_max = " +
        std::to_string(smax > 0 ? smin / smax : 0.0) + ")");
  }

  NormalizedFrame frame;
  frame.M = -h;  // D2xy b with b = -c
  frame.M_inv = frame.M.inverse();
  frame.x0 = x0;
  frame.y0 = y0;

  CostModel base = model;  // capture by value: immutable snapshot
  Mat minv = frame.M_inv;
  CostModel t;
  t.dim = model.dim;
  t.label = model.label + "#normalized";
  t.box = model.box;
  t.in_domain = [base, minv](const Vec& x, const Vec& yt) {
    return base.inside(x, Vec(minv * yt));
  };
  t.evaluate = [base, minv](const Vec& x, const Vec& yt) {
    return base.evaluate(x, Vec(minv * yt));
  };
  if (base.grad_x)
    t.grad_x = [base, minv](const Vec& x, const Vec& yt) {
      return base.grad_x(x, Vec(minv * yt));
    };
  if (base.grad_y)
    t.grad_y = [base, minv](const Vec& x, const Vec& yt) {
      return Vec(minv.transpose() * base.grad_y(x, Vec(minv * yt)));
    };
  if (base.mixed_hessian)
    t.mixed_hessian = [base, minv](const Vec& x, const Vec& yt) {
      return Mat(base.mixed_hessian(x, Vec(minv * yt)) * minv);
    };
  frame.transformed = std::move(t);

  // The rotation that the rest of the pipeline relies on: D2xy b~ = I at the
  // base, i.e. the transformed c-Hessian is -I.
  Mat check = h * frame.M_inv + Mat::Identity(model.dim, model.dim);
  if (check.cwiseAbs().maxCoeff() > 1e-10)
    throw degeneracy_error(
        "normalize_frame: normalization did not reach the identity (residual " +
        std::to_string(check.cwiseAbs().maxCoeff()) + ")");
  return frame;
}

std::vector<UvPair> rotate_diagonal(const SupportSample& pairs) {
  std::vector<UvPair> uv;
  uv.reserve(pairs.pairs.size());
  for (const auto& p : pairs.pairs)
    uv.push_back({Vec((p.x + p.y) / kSqrt2), Vec((p.y - p.x) / kSqrt2)});
  return uv;
}

EpsilonEstimate estimate_epsilon(const CostModel& transformed, const Vec& x0,
                                 const Vec& y0, double radius, int samples,
                                 std::uint64_t seed) {
  return epsilon_scan(transformed, x0, y0, radius, samples, seed, nullptr);
}

const char* to_string(RectifiabilityCertificate::Verdict v) {
  switch (v) {
    case RectifiabilityCertificate::Verdict::Certified:
      return "certified";
    case RectifiabilityCertificate::Verdict::Failed:
      return "failed";
    case RectifiabilityCertificate::Verdict::Degenerate:
      return "degenerate";
  }
  return "unknown";
}

RectifiabilityCertificate certify_lipschitz(const std::vector<UvPair>& uv,
                                            double epsilon, double tolerance) {
  if (uv.size() < 2)
    throw degenerate_input_error("certify_lipschitz: need at least 2 pairs");
  RectifiabilityCertificate cert;
  cert.epsilon = epsilon;
  cert.pairs_checked = int(uv.size());
  if (epsilon >= 1.0) {
    cert.verdict = RectifiabilityCertificate::Verdict::Failed;
    cert.reason = "epsilon >= 1: bound vacuous";
    cert.lipschitz_bound = std::numeric_limits<double>::infinity();
    return cert;
  }
  cert.lipschitz_bound = std::sqrt((1.0 + epsilon) / (1.0 - epsilon));

  const int m = int(uv.size());
  struct ChunkOut {
    double max_ratio = 0.0;
    int violations = 0;
    int hard = 0;
  };
  std::vector<ChunkOut> outs(std::max(1, effective_threads()));
  parallel_chunks(m, [&](std::int64_t b, std::int64_t e, int chunk) {
    ChunkOut& o = outs[chunk];
    for (std::int64_t i = b; i < e; ++i)
      for (int j = int(i) + 1; j < m; ++j) {
        double du2 = (uv[j].u - uv[i].u).squaredNorm();
        double dv2 = (uv[j].v - uv[i].v).squaredNorm();
        double du = std::sqrt(du2), dv = std::sqrt(dv2);
        if (du <= kDuplicateTol) {
          if (dv > kDuplicateTol) ++o.hard;  // vertical segment
          continue;
        }
        o.max_ratio = std::max(o.max_ratio, dv / du);
        if ((1.0 + epsilon) * du2 < (1.0 - epsilon) * dv2 - tolerance)
          ++o.violations;
      }
  });
  for (const auto& o : outs) {
    cert.max_ratio = std::max(cert.max_ratio, o.max_ratio);
    cert.inequality_violations += o.violations;
    cert.hard_failures += o.hard;
  }
  cert.comparisons = std::int64_t(m) * (m - 1) / 2;

  if (cert.hard_failures > 0) {
    cert.verdict = RectifiabilityCertificate::Verdict::Failed;
    cert.reason = "pairs with du = 0 but dv != 0: support is not a graph "
                  "over the diagonal here";
  } else if (cert.inequality_violations > 0) {
    cert.verdict = RectifiabilityCertificate::Verdict::Failed;
    cert.reason = "Minty inequality violated";
  } else if (cert.max_ratio > cert.lipschitz_bound * (1.0 + 1e-9)) {
    cert.verdict = RectifiabilityCertificate::Verdict::Failed;
    cert.reason = "max ratio exceeds the Lipschitz bound";
  } else {
    cert.verdict = RectifiabilityCertificate::Verdict::Certified;
  }
  return cert;
}

GraphMap::GraphMap(std::vector<UvPair> samples) : samples_(std::move(samples)) {
  if (samples_.empty()) throw input_error("fit_graph: no samples");
  std::sort(samples_.begin(), samples_.end(),
            [](const UvPair& a, const UvPair& b) {
              if (lex_less(a.u, b.u)) return true;
              if (lex_less(b.u, a.u)) return false;
              return lex_less(a.v, b.v);
            });
  std::vector<UvPair> dedup;
  dedup.reserve(samples_.size());
  for (auto& s : samples_) {
    if (!dedup.empty()) {
      const auto& prev = dedup.back();
      if ((s.u - prev.u).norm() <= kDuplicateTol) {
        if ((s.v - prev.v).norm() > kDuplicateTol)
          throw consistency_error(
              "fit_graph: duplicate u with distinct v; input is not a graph");
        continue;
      }
    }
    dedup.push_back(std::move(s));
  }
  samples_ = std::move(dedup);
}

Vec GraphMap::query(const Vec& u) const {
  int best = 0;
  double best_d = (samples_[0].u - u).norm();
  for (int k = 1; k < int(samples_.size()); ++k) {
    double d = (samples_[k].u - u).norm();
    // ties resolve to the lexicographically smaller sample (sorted order)
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return samples_[best].v;
}

double GraphMap::lipschitz_on_samples() const {
  double r = 0.0;
  for (int i = 0; i < int(samples_.size()); ++i)
    for (int j = i + 1; j < int(samples_.size()); ++j) {
      double du = (samples_[j].u - samples_[i].u).norm();
      if (du <= kDuplicateTol) continue;
      r = std::max(r, (samples_[j].v - samples_[i].v).norm() / du);
    }
  return r;
}

namespace {

Vec support_centroid(const SupportSample& pairs, int n) {
  Vec c = Vec::Zero(2 * n);
  double total = 0.0;
  for (const auto& p : pairs.pairs) {
    double w = p.mass > 0 ? p.mass : 1.0;
    c.head(n) += w * p.x;
    c.tail(n) += w * p.y;
    total += w;
  }
  return Vec(c / total);
}

std::vector<int> by_distance_to(const SupportSample& pairs, const Vec& target,
                                int n) {
  std::vector<int> order(pairs.size());
  for (int i = 0; i < pairs.size(); ++i) order[i] = i;
  std::vector<double> dist(pairs.size());
  for (int i = 0; i < pairs.size(); ++i)
    dist[i] = (pairs.pairs[i].x - target.head(n)).squaredNorm() +
              (pairs.pairs[i].y - target.tail(n)).squaredNorm();
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return dist[a] < dist[b]; });
  return order;
}

}  // namespace

RectifyResult rectify(const SupportSample& pairs, const CostModel& model,
                      std::optional<std::pair<Vec, Vec>> base,
                      const RadiusPolicy& policy) {
  const int n = model.dim;
  if (pairs.size() < 2)
    throw degenerate_input_error("rectify: need at least 2 support pairs");
  if (pairs.dim() != n)
    throw input_error("rectify: pair dimension does not match the cost");

  RectifyResult result;
  // Monotonicity gate. Sampled for very large supports.
  PairwiseOptions mono_opts;
  if (std::int64_t(pairs.size()) * (pairs.size() - 1) / 2 > 20'000'000)
    mono_opts.max_pairs = 2'000'000, mono_opts.seed = policy.seed;
  result.precheck = check_pairwise(pairs, model, 1e-9, mono_opts);
  if (!result.precheck.pass()) return result;  // refused: no certificate

  // Base point: explicit override, or nearest support pair to the centroid.
  std::optional<NormalizedFrame> frame;
  bool explicit_base = base.has_value();
  Vec bx, by;
  if (explicit_base) {
    bx = base->first;
    by = base->second;
    try {
      frame = normalize_frame(model, bx, by);
    } catch (const degeneracy_error& e) {
      RectifiabilityCertificate cert;
      cert.base_x = bx;
      cert.base_y = by;
      cert.verdict = RectifiabilityCertificate::Verdict::Degenerate;
      cert.reason = e.what();
      result.certificate = std::move(cert);
      return result;
    }
  } else {
    Vec centroid = support_centroid(pairs, n);
    for (int idx : by_distance_to(pairs, centroid, n)) {
      bx = pairs.pairs[idx].x;
      by = pairs.pairs[idx].y;
      try {
        frame = normalize_frame(model, bx, by);
        break;
      } catch (const degeneracy_error&) {
        continue;
      }
    }
    if (!frame)
      throw no_certificate_error(
          "rectify: the mixed Hessian is singular at every candidate base "
          "point");
  }

  // Radius ladder in original coordinates.
  const double diam = model.box.diameter();
  double radius = policy.initial_fraction * diam;
  const double min_radius = policy.min_fraction * diam;
  double eps = std::numeric_limits<double>::infinity();
  EpsilonEstimate est;
  bool found = false;
  while (radius >= min_radius) {
    est = epsilon_scan(model, bx, by, radius, policy.samples, policy.seed,
                       &frame->M_inv);
    eps = est.value * (policy.conservative ? kConservativeFactor : 1.0);
    if (eps <= policy.eps_target) {
      found = true;
      break;
    }
    radius *= 0.5;
  }

  RectifiabilityCertificate cert;
  cert.base_x = bx;
  cert.base_y = by;
  cert.normalization = frame->M;
  cert.neighborhood_radius = radius;
  cert.epsilon = eps;
  cert.conservative = policy.conservative;
  if (!found) {
    cert.verdict = RectifiabilityCertificate::Verdict::Failed;
    cert.reason = "no neighborhood reached the epsilon target above the "
                  "minimum radius";
    cert.lipschitz_bound =
        eps < 1.0 ? std::sqrt((1.0 + eps) / (1.0 - eps))
                  : std::numeric_limits<double>::infinity();
    result.certificate = std::move(cert);
    return result;
  }

  // Restrict to the neighborhood, switch to normalized coordinates, rotate.
  SupportSample local;
  for (const auto& p : pairs.pairs)
    if ((p.x - bx).norm() <= radius && (p.y - by).norm() <= radius) {
      SupportPair q = p;
      q.y = frame->M * p.y;
      local.pairs.push_back(std::move(q));
    }
  if (local.size() < 2) {
    cert.verdict = RectifiabilityCertificate::Verdict::Failed;
    cert.reason = "fewer than 2 support pairs inside the neighborhood";
    cert.pairs_checked = local.size();
    result.certificate = std::move(cert);
    return result;
  }
  std::vector<UvPair> uv = rotate_diagonal(local);

  // Deduplicate coincident pairs.
  std::sort(uv.begin(), uv.end(), [](const UvPair& a, const UvPair& b) {
    if (lex_less(a.u, b.u)) return true;
    if (lex_less(b.u, a.u)) return false;
    return lex_less(a.v, b.v);
  });
  std::vector<UvPair> unique_uv;
  unique_uv.reserve(uv.size());
  for (auto& p : uv) {
    if (!unique_uv.empty() &&
        (p.u - unique_uv.back().u).norm() <= kDuplicateTol &&
        (p.v - unique_uv.back().v).norm() <= kDuplicateTol)
      continue;
    unique_uv.push_back(std::move(p));
  }

  RectifiabilityCertificate checked = certify_lipschitz(unique_uv, eps, 1e-9);
  checked.base_x = cert.base_x;
  checked.base_y = cert.base_y;
  checked.normalization = cert.normalization;
  checked.neighborhood_radius = cert.neighborhood_radius;
  checked.conservative = cert.conservative;
  result.certificate = std::move(checked);
  result.uv = std::move(unique_uv);
  return result;
}

RectifyResult rectify(const TransportPlan& plan, const CostModel& model,
                      std::optional<std::pair<Vec, Vec>> base,
                      const RadiusPolicy& policy, double mass_floor) {
  return rectify(support(plan, mass_floor), model, std::move(base), policy);
}

}  // namespace otcert
