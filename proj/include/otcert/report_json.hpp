#pragma once

#include <json.hpp>

#include "otcert/jacobian.hpp"
#include "otcert/monotonicity.hpp"
#include "otcert/nondegeneracy.hpp"
#include "otcert/rectifier.hpp"
#include "otcert/solver.hpp"

namespace otcert {

using json = nlohmann::json;

inline json to_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline json to_json(const Mat& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json to_json(const MonotonicityReport& r) {
  json j;
  j["checked"] = r.checked;
  j["max_defect"] = r.max_defect;
  j["tolerance"] = r.tolerance;
  j["max_cycle"] = r.max_cycle;
  j["sampled"] = r.sampled;
  j["pass"] = r.pass();
  json vs = json::array();
  for (const auto& v : r.violations) {
    json e;
    e["indices"] = v.indices;
    e["defect"] = v.defect;
    vs.push_back(std::move(e));
  }
  j["violations"] = std::move(vs);
  return j;
}

inline json to_json(const RectifiabilityCertificate& c) {
  json j;
  j["verdict"] = to_string(c.verdict);
  j["reason"] = c.reason;
  j["base_x"] = to_json(c.base_x);
  j["base_y"] = to_json(c.base_y);
  j["normalization"] = to_json(c.normalization);
  j["neighborhood_radius"] = c.neighborhood_radius;
  j["epsilon"] = c.epsilon;
  j["epsilon_status"] = "empirical";  // sampled lower bound of the true sup
  j["lipschitz_bound"] = c.lipschitz_bound;
  j["pairs_checked"] = c.pairs_checked;
  j["max_ratio"] = c.max_ratio;
  j["comparisons"] = c.comparisons;
  j["inequality_violations"] = c.inequality_violations;
  j["hard_failures"] = c.hard_failures;
  j["conservative"] = c.conservative;
  return j;
}

inline json to_json(const HessianClassification& c) {
  json j;
  j["x"] = to_json(c.x);
  j["y"] = to_json(c.y);
  j["matrix"] = to_json(c.matrix);
  j["determinant"] = c.determinant;
  j["sigma_min"] = c.sigma_min;
  j["sigma_max"] = c.sigma_max;
  j["threshold"] = c.threshold;
  j["degenerate"] = c.degenerate;
  return j;
}

inline json to_json(const TwistReport& r) {
  json j;
  j["direction"] = to_string(r.direction);
  j["fixed_point"] = to_json(r.fixed_point);
  j["collision_tol"] = r.collision_tol;
  j["separation_floor"] = r.separation_floor;
  j["samples"] = r.samples;
  j["pairs_checked"] = r.pairs_checked;
  j["injective_on_sample"] = r.injective_on_sample;
  j["scope"] = "on sample";  // sampling evidence, not a proof
  json cs = json::array();
  for (const auto& c : r.collisions) {
    json e;
    e["index_a"] = c.index_a;
    e["index_b"] = c.index_b;
    e["a"] = to_json(c.a);
    e["b"] = to_json(c.b);
    e["gradient_distance"] = c.gradient_distance;
    e["argument_distance"] = c.argument_distance;
    cs.push_back(std::move(e));
  }
  j["collisions"] = std::move(cs);
  return j;
}

inline json to_json(const JacobianReport& r) {
  json j;
  j["weighted_mean_residual"] = r.weighted_mean_residual;
  j["max_residual"] = r.max_residual;
  j["used"] = r.used;
  j["skipped"] = r.skipped;
  j["flagged"] = r.flagged;
  j["grid_scale"] = r.grid_scale;
  j["k_neighbors"] = r.k_neighbors;
  json rs = json::array();
  for (const auto& s : r.residuals) {
    json e;
    e["index"] = s.index;
    e["det"] = s.det_estimate;
    e["residual"] = s.residual;
    rs.push_back(std::move(e));
  }
  j["residuals"] = std::move(rs);
  return j;
}

inline json to_json(const DualPotentials& d) {
  json j;
  j["phi"] = to_json(d.phi);
  j["psi"] = to_json(d.psi);
  j["dual_value"] = d.dual_value;
  j["max_support_residual"] = d.max_support_residual;
  j["max_feasibility_violation"] = d.max_feasibility_violation;
  return j;
}

}  // namespace otcert
