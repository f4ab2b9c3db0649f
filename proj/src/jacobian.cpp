#include "otcert/jacobian.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "otcert/errors.hpp"
#include "otcert/numeric.hpp"
#include "otcert/parallel.hpp"

namespace otcert {

namespace {

double median_nn_distance(const std::vector<Vec>& pts) {
  const int m = int(pts.size());
  if (m < 2) return 1.0;
  std::vector<double> nn(m, std::numeric_limits<double>::infinity());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      nn[i] = std::min(nn[i], (pts[i] - pts[j]).norm());
    }
  std::nth_element(nn.begin(), nn.begin() + m / 2, nn.end());
  return nn[m / 2];
}

}  // namespace

std::vector<MapSample> estimate_map(const TransportPlan& plan,
                                    double grid_scale) {
  if (grid_scale <= 0.0)
    grid_scale = 2.0 * median_nn_distance(plan.target->points);

  const int n_src = plan.source->size();
  std::vector<std::vector<const PlanEntry*>> by_source(n_src);
  for (const auto& e : plan.entries) by_source[e.i].push_back(&e);

  std::vector<MapSample> samples;
  samples.reserve(n_src);
  for (int i = 0; i < n_src; ++i) {
    if (by_source[i].empty()) continue;  // zero-weight atom
    MapSample s;
    s.x = plan.source->points[i];
    s.matched_targets = int(by_source[i].size());
    KahanSum mass;
    Vec acc = Vec::Zero(plan.target->dim());
    for (const PlanEntry* e : by_source[i]) {
      mass.add(e->mass);
      acc += e->mass * plan.target->points[e->j];
    }
    s.mass = mass.value();
    s.tx = acc / s.mass;
    double span = 0.0;
    for (std::size_t a = 0; a < by_source[i].size(); ++a)
      for (std::size_t b = a + 1; b < by_source[i].size(); ++b)
        span = std::max(span, (plan.target->points[by_source[i][a]->j] -
                               plan.target->points[by_source[i][b]->j])
                                  .norm());
    s.target_span = span;
    s.split_flag = span > grid_scale;
    samples.push_back(std::move(s));
  }
  return samples;
}

std::optional<Mat> local_jacobian(const std::vector<MapSample>& samples,
                                  int index, int k_neighbors) {
  const int n = int(samples[index].x.size());
  if (k_neighbors < n + 1) k_neighbors = n + 1;

  std::vector<std::pair<double, int>> order;
  order.reserve(samples.size());
  for (int k = 0; k < int(samples.size()); ++k) {
    if (samples[k].split_flag) continue;
    order.push_back({(samples[k].x - samples[index].x).squaredNorm(), k});
  }
  if (int(order.size()) < n + 1) return std::nullopt;
  int take = std::min<int>(k_neighbors, int(order.size()));
  std::partial_sort(order.begin(), order.begin() + take, order.end());

  Vec x_mean = Vec::Zero(n), t_mean = Vec::Zero(n);
  for (int k = 0; k < take; ++k) {
    x_mean += samples[order[k].second].x;
    t_mean += samples[order[k].second].tx;
  }
  x_mean /= take;
  t_mean /= take;

  Mat X(take, n), T(take, n);
  for (int k = 0; k < take; ++k) {
    X.row(k) = (samples[order[k].second].x - x_mean).transpose();
    T.row(k) = (samples[order[k].second].tx - t_mean).transpose();
  }
  auto qr = X.colPivHouseholderQr();
  qr.setThreshold(1e-10);
  if (qr.rank() < n) return std::nullopt;  // collinear neighborhood
  return Mat(qr.solve(T).transpose());
}

JacobianReport jacobian_residual(const std::vector<MapSample>& samples,
                                 const Density& f_plus, const Density& f_minus,
                                 int k_neighbors) {
  JacobianReport rep;
  rep.k_neighbors = k_neighbors;

  std::vector<int> active;
  for (int k = 0; k < int(samples.size()); ++k) {
    if (samples[k].split_flag) {
      ++rep.flagged;
      continue;
    }
    active.push_back(k);
  }

  std::vector<std::optional<Mat>> fits(active.size());
  parallel_chunks(int(active.size()), [&](std::int64_t b, std::int64_t e, int) {
    for (std::int64_t k = b; k < e; ++k)
      fits[k] = local_jacobian(samples, active[k], k_neighbors);
  });

  KahanSum weighted, total_mass;
  for (std::size_t k = 0; k < active.size(); ++k) {
    const MapSample& s = samples[active[k]];
    if (!fits[k]) {
      ++rep.skipped;
      continue;
    }
    double fp = f_plus(s.x);
    double fm = f_minus(s.tx);
    if (fp < 0.0 || fm < 0.0)
      throw input_error("jacobian_residual: density evaluated negative");
    double det = fits[k]->determinant();
    double r = std::abs(fp - std::abs(det) * fm);
    rep.residuals.push_back({active[k], det, r});
    rep.max_residual = std::max(rep.max_residual, r);
    weighted.add(s.mass * r);
    total_mass.add(s.mass);
    ++rep.used;
  }
  if (rep.used > 0)
    rep.weighted_mean_residual = weighted.value() / total_mass.value();
  return rep;
}

GridPartition GridPartition::uniform(const WorkBox& box, int cells_per_dim) {
  if (cells_per_dim < 1)
    throw input_error("GridPartition: need at least one cell per dimension");
  GridPartition p;
  p.box = box;
  p.cells_per_dim.assign(box.dim(), cells_per_dim);
  return p;
}

std::int64_t GridPartition::cell_count() const {
  if (cells_per_dim.empty()) throw input_error("GridPartition: empty partition");
  std::int64_t c = 1;
  for (int k : cells_per_dim) {
    if (k < 1) throw input_error("GridPartition: empty partition");
    c *= k;
  }
  return c;
}

std::int64_t GridPartition::cell_of(const Vec& p) const {
  std::int64_t idx = 0;
  for (int d = 0; d < int(cells_per_dim.size()); ++d) {
    double span = box.upper[d] - box.lower[d];
    int c = int(std::floor((p[d] - box.lower[d]) / span * cells_per_dim[d]));
    c = std::clamp(c, 0, cells_per_dim[d] - 1);
    idx = idx * cells_per_dim[d] + c;
  }
  return idx;
}

double pushforward_check(const std::vector<MapSample>& samples,
                         const DiscreteMeasure& source,
                         const DiscreteMeasure& target,
                         const GridPartition& cells) {
  (void)source;  // sample masses already carry the source weights
  std::int64_t nc = cells.cell_count();
  std::vector<KahanSum> pushed(nc), expected(nc);
  for (const auto& s : samples) pushed[cells.cell_of(s.tx)].add(s.mass);
  for (int j = 0; j < target.size(); ++j)
    expected[cells.cell_of(target.points[j])].add(target.weights[j]);
  double worst = 0.0;
  for (std::int64_t c = 0; c < nc; ++c)
    worst = std::max(worst,
                     std::abs(pushed[c].value() - expected[c].value()));
  return worst;
}

Density uniform_density(const WorkBox& box) {
  double vol = 1.0;
  for (int d = 0; d < box.dim(); ++d) vol *= box.upper[d] - box.lower[d];
  double height = 1.0 / vol;
  return [box, height](const Vec& p) {
    return box.contains(p) ? height : 0.0;
  };
}

Density gaussian_density(const Vec& mean, double sigma) {
  if (!(sigma > 0.0)) throw input_error("gaussian_density: sigma must be > 0");
  const double norm =
      std::pow(sigma * std::sqrt(2.0 * M_PI), -double(mean.size()));
  return [mean, sigma, norm](const Vec& p) {
    return norm * std::exp(-(p - mean).squaredNorm() / (2.0 * sigma * sigma));
  };
}

namespace {

std::vector<double> parse_components(const std::string& s, int expect,
                                     const std::string& what) {
  std::vector<double> vals;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      vals.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw input_error("density spec: bad number '" + tok + "' in " + what);
    }
  }
  if (int(vals.size()) == 1 && expect > 1) vals.assign(expect, vals[0]);
  if (int(vals.size()) != expect)
    throw input_error("density spec: " + what + " needs " +
                      std::to_string(expect) + " components");
  return vals;
}

Density csv_density(const std::string& path, int dim) {
  std::ifstream in(path);
  if (!in) throw input_error("density spec: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line))
    throw input_error("density spec: empty CSV '" + path + "'");
  std::vector<Vec> pts;
  std::vector<double> vals;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::stringstream ss(line);
    std::string tok;
    std::vector<double> row;
    while (std::getline(ss, tok, ',')) row.push_back(std::stod(tok));
    if (int(row.size()) != dim + 1)
      throw input_error("density CSV rows need n coords + value");
    Vec p(dim);
    for (int d = 0; d < dim; ++d) p[d] = row[d];
    pts.push_back(std::move(p));
    vals.push_back(row[dim]);
  }
  if (pts.empty()) throw input_error("density CSV has no rows");
  return [pts, vals](const Vec& q) {
    int best = 0;
    double bd = (pts[0] - q).squaredNorm();
    for (int k = 1; k < int(pts.size()); ++k) {
      double d = (pts[k] - q).squaredNorm();
      if (d < bd) {
        bd = d;
        best = k;
      }
    }
    return vals[best];
  };
}

}  // namespace

Density parse_density_spec(const std::string& spec, int dim) {
  if (spec.size() > 4 && spec.substr(spec.size() - 4) == ".csv")
    return csv_density(spec, dim);
  auto colon = spec.find(':');
  std::string kind = spec.substr(0, colon == std::string::npos ? spec.size()
                                                               : colon);
  if (kind == "uniform") {
    auto rest = spec.substr(colon + 1);
    auto second = rest.find(':');
    if (colon == std::string::npos || second == std::string::npos)
      throw input_error("density spec: uniform:lo1,..:hi1,..");
    auto lo = parse_components(rest.substr(0, second), dim, "uniform lower");
    auto hi = parse_components(rest.substr(second + 1), dim, "uniform upper");
    Vec l(dim), h(dim);
    for (int d = 0; d < dim; ++d) l[d] = lo[d], h[d] = hi[d];
    return uniform_density(WorkBox(l, h));
  }
  if (kind == "gaussian") {
    auto rest = spec.substr(colon + 1);
    auto second = rest.find(':');
    if (colon == std::string::npos || second == std::string::npos)
      throw input_error("density spec: gaussian:m1,..:sigma");
    auto mu = parse_components(rest.substr(0, second), dim, "gaussian mean");
    auto sg = parse_components(rest.substr(second + 1), 1, "gaussian sigma");
    Vec m(dim);
    for (int d = 0; d < dim; ++d) m[d] = mu[d];
    return gaussian_density(m, sg[0]);
  }
  throw input_error(
      "density spec must be uniform:lo:hi, gaussian:mean:sigma, or a .csv "
      "path, got '" +
      spec + "'");
}

}  // namespace otcert
