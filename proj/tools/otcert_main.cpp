// otcert: exact discrete optimal transport with structural certificates.
//
// Subcommands: solve, check-monotone, rectify, analyze-cost, jacobian,
// reproduce. JSON reports everywhere, CSV for point/pair data. Exit codes:
// 0 success, 1 verification failure, 2 input/usage error.

#include <CLI11.hpp>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "otcert/errors.hpp"
#include "otcert/examples_repro.hpp"
#include "otcert/io.hpp"
#include "otcert/parallel.hpp"
#include "otcert/report_json.hpp"

namespace fs = std::filesystem;
using namespace otcert;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string iso_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%FT%TZ", std::gmtime(&t));
  return buf;
}

json report_header(const std::string& kind) {
  json j;
  j["tool"] = "otcert";
  j["version"] = kVersion;
  j["kind"] = kind;
  j["timestamp"] = iso_timestamp();
  return j;
}

void write_report(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot write '" + path.string() + "'");
  out << j.dump(2) << "\n";
}

Vec parse_vec(const std::string& s, int expect_dim = -1) {
  std::vector<double> vals;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      vals.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw input_error("cannot parse coordinate '" + tok + "'");
    }
  }
  if (expect_dim > 0 && int(vals.size()) != expect_dim)
    throw input_error("expected " + std::to_string(expect_dim) +
                      " coordinates in '" + s + "'");
  Vec v(int(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i) v[i] = vals[i];
  return v;
}

std::pair<int, int> parse_grid_spec(const std::string& s) {
  auto xpos = s.find('x');
  if (xpos == std::string::npos)
    throw input_error("grid spec must look like 50x50, got '" + s + "'");
  try {
    int a = std::stoi(s.substr(0, xpos));
    int b = std::stoi(s.substr(xpos + 1));
    if (a < 2 || b < 2) throw input_error("grid must be at least 2x2");
    return {a, b};
  } catch (const input_error&) {
    throw;
  } catch (const std::exception&) {
    throw input_error("grid spec must look like 50x50, got '" + s + "'");
  }
}

/// JSON config files: top-level keys are global flags, one nested object per
/// subcommand. Command-line flags override config values.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool,
                        std::string) const override {
    return "{}\n";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json j;
    try {
      input >> j;
    } catch (const std::exception& e) {
      throw CLI::FileError(std::string("invalid JSON config: ") + e.what());
    }
    std::vector<CLI::ConfigItem> items;
    flatten(j, {}, items);
    return items;
  }

 private:
  static void flatten(const json& j, std::vector<std::string> parents,
                      std::vector<CLI::ConfigItem>& out) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (it.value().is_object()) {
        auto p = parents;
        p.push_back(it.key());
        flatten(it.value(), std::move(p), out);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = it.key();
      if (it.value().is_array()) {
        for (const auto& v : it.value())
          item.inputs.push_back(v.is_string() ? v.get<std::string>()
                                              : v.dump());
      } else if (it.value().is_string()) {
        item.inputs.push_back(it.value().get<std::string>());
      } else {
        item.inputs.push_back(it.value().dump());
      }
      out.push_back(std::move(item));
    }
  }
};

struct GlobalOptions {
  std::uint64_t seed = 0;
  int threads = 0;
};

// ---------------------------------------------------------------- solve --

int cmd_solve(const std::string& source_file, const std::string& target_file,
              const std::string& cost_name, const std::string& out_file,
              const std::string& dual_file) {
  auto src = std::make_shared<DiscreteMeasure>(read_measure_csv(source_file));
  auto tgt = std::make_shared<DiscreteMeasure>(read_measure_csv(target_file));
  if (src->dim() != tgt->dim())
    throw input_error("source and target dimensions differ");
  auto model = builtin_cost(cost_name, src->dim());

  auto res = solve_exact(src, tgt, model);
  std::cout << "solve: cost " << model.label << ", " << src->size() << " x "
            << tgt->size() << " atoms\n"
            << "  optimal value   " << res.value << "\n"
            << "  support entries " << res.plan.entries.size() << "\n"
            << "  dual gap        " << std::abs(res.value - res.duals.dual_value)
            << "\n  pivots          " << res.pivots << "\n";

  if (!out_file.empty()) {
    write_plan_json(out_file, res.plan, source_file, target_file);
    std::cout << "  plan -> " << out_file << "\n";
  }
  if (!dual_file.empty()) {
    json j = report_header("dual-potentials");
    j["cost"] = model.label;
    j["value"] = res.value;
    j["duals"] = to_json(res.duals);
    write_report(dual_file, j);
    std::cout << "  duals -> " << dual_file << "\n";
  }
  return 0;
}

// ------------------------------------------------------- check-monotone --

int cmd_check_monotone(const std::string& plan_file,
                       const std::string& pairs_file,
                       const std::string& cost_name, int cycles, double tol,
                       std::int64_t max_pairs, std::uint64_t seed,
                       const std::string& out_file) {
  SupportSample pairs;
  int dim = 0;
  if (!plan_file.empty()) {
    auto plan = read_plan_json(plan_file);
    pairs = support(plan);
    dim = plan.source->dim();
  } else if (!pairs_file.empty()) {
    pairs = read_pairs_csv(pairs_file);
    dim = pairs.dim();
  } else {
    throw input_error("check-monotone needs --plan or --pairs");
  }
  auto model = builtin_cost(cost_name, dim);

  MonotonicityReport rep;
  if (cycles <= 2) {
    PairwiseOptions opts;
    opts.max_pairs = max_pairs;
    opts.seed = seed;
    rep = check_pairwise(pairs, model, tol, opts);
  } else {
    rep = check_cyclical(pairs, model, cycles, tol);
  }

  std::cout << "check-monotone: " << pairs.size() << " pairs, cycles <= "
            << rep.max_cycle << ", tolerance " << tol << "\n"
            << "  checked    " << rep.checked << "\n"
            << "  max defect " << rep.max_defect << "\n"
            << "  verdict    " << (rep.pass() ? "pass" : "FAIL") << "\n";
  for (std::size_t k = 0; k < rep.violations.size() && k < 10; ++k) {
    std::cout << "  violation: pairs";
    for (int idx : rep.violations[k].indices) std::cout << " " << idx;
    std::cout << " defect " << rep.violations[k].defect << "\n";
  }
  if (rep.violations.size() > 10)
    std::cout << "  ... " << rep.violations.size() - 10 << " more\n";

  if (!out_file.empty()) {
    json j = report_header("monotonicity");
    j["cost"] = model.label;
    j["report"] = to_json(rep);
    write_report(out_file, j);
  }
  return rep.pass() ? 0 : 1;
}

// ---------------------------------------------------------------- rectify --

int cmd_rectify(const std::string& plan_file, const std::string& pairs_file,
                const std::string& cost_name, const std::string& base_spec,
                const RadiusPolicy& policy, const std::string& out_file,
                const std::string& uv_csv) {
  SupportSample pairs;
  int dim = 0;
  if (!plan_file.empty()) {
    auto plan = read_plan_json(plan_file);
    pairs = support(plan);
    dim = plan.source->dim();
  } else if (!pairs_file.empty()) {
    pairs = read_pairs_csv(pairs_file);
    dim = pairs.dim();
  } else {
    throw input_error("rectify needs --plan or --pairs");
  }
  auto model = builtin_cost(cost_name, dim);

  std::optional<std::pair<Vec, Vec>> base;
  if (!base_spec.empty()) {
    auto semi = base_spec.find(';');
    if (semi == std::string::npos)
      throw input_error("--base must look like x1,x2;y1,y2");
    base = std::make_pair(parse_vec(base_spec.substr(0, semi), dim),
                          parse_vec(base_spec.substr(semi + 1), dim));
  }

  auto res = rectify(pairs, model, base, policy);

  json j = report_header("rectifiability");
  j["cost"] = model.label;
  j["pairs_total"] = pairs.size();
  j["monotonicity_precheck"] = to_json(res.precheck);
  if (res.certificate) j["certificate"] = to_json(*res.certificate);

  if (!res.precheck.pass()) {
    std::cout << "rectify: refused, input is not b-monotone (max defect "
              << res.precheck.max_defect << ")\n";
    if (!out_file.empty()) write_report(out_file, j);
    return 1;
  }
  const auto& cert = *res.certificate;
  std::cout << "rectify: " << pairs.size() << " pairs, cost " << model.label
            << "\n"
            << "  verdict    " << to_string(cert.verdict) << "\n"
            << "  base x     " << cert.base_x.transpose() << "\n"
            << "  base y     " << cert.base_y.transpose() << "\n"
            << "  radius     " << cert.neighborhood_radius << "\n"
            << "  epsilon    " << cert.epsilon << " (empirical)\n"
            << "  bound      " << cert.lipschitz_bound << "\n"
            << "  max ratio  " << cert.max_ratio << "\n"
            << "  pairs used " << cert.pairs_checked << "\n";
  if (!cert.reason.empty()) std::cout << "  reason     " << cert.reason << "\n";

  if (!out_file.empty()) write_report(out_file, j);
  if (!uv_csv.empty() && !res.uv.empty()) {
    std::ofstream out(uv_csv);
    if (!out) throw input_error("cannot write '" + uv_csv + "'");
    out.precision(17);
    for (int d = 0; d < dim; ++d) out << "u" << (d + 1) << ",";
    for (int d = 0; d < dim; ++d) out << "v" << (d + 1) << ",";
    out << "ratio_to_base\n";
    const auto& base_uv = res.uv.front();
    for (const auto& p : res.uv) {
      double du = (p.u - base_uv.u).norm();
      double dv = (p.v - base_uv.v).norm();
      for (int d = 0; d < dim; ++d) out << p.u[d] << ",";
      for (int d = 0; d < dim; ++d) out << p.v[d] << ",";
      out << (du > 1e-12 ? dv / du : 0.0) << "\n";
    }
    std::cout << "  uv samples -> " << uv_csv << "\n";
  }
  return cert.verdict == RectifiabilityCertificate::Verdict::Certified ? 0 : 1;
}

// ------------------------------------------------------------ analyze-cost --

int cmd_analyze_cost(const std::string& cost_name, const std::string& grid_spec,
                     const std::string& direction_str,
                     const std::string& fixed_spec, const std::string& box_spec,
                     double collision_tol, double separation_floor,
                     const std::string& out_prefix) {
  auto model = builtin_cost(cost_name, 2);
  auto [ga, gb] = parse_grid_spec(grid_spec);
  auto direction = parse_twist_direction(direction_str);

  WorkBox box = model.box;
  if (!box_spec.empty()) {
    auto colon = box_spec.find(':');
    if (colon == std::string::npos)
      throw input_error("--box must look like lo1,lo2:hi1,hi2");
    box = WorkBox(parse_vec(box_spec.substr(0, colon), model.dim),
                  parse_vec(box_spec.substr(colon + 1), model.dim));
  }
  Vec fixed = fixed_spec.empty() ? Vec(box.center())
                                 : parse_vec(fixed_spec, model.dim);

  std::vector<Vec> samples;
  samples.reserve(std::size_t(ga) * gb);
  for (int a = 0; a < ga; ++a)
    for (int b = 0; b < gb; ++b) {
      Vec p(2);
      p << box.lower[0] + (box.upper[0] - box.lower[0]) * a / (ga - 1),
          box.lower[1] + (box.upper[1] - box.lower[1]) * b / (gb - 1);
      samples.push_back(std::move(p));
    }

  // Classification CSV over the sample grid (the fixed point supplies the
  // other argument).
  fs::path cls_path = out_prefix + ".classification.csv";
  {
    std::ofstream out(cls_path);
    if (!out) throw input_error("cannot write '" + cls_path.string() + "'");
    out.precision(17);
    out << "p1,p2,determinant,sigma_min,sigma_max,degenerate\n";
    for (const auto& s : samples) {
      auto cls = direction == TwistDirection::XtoY
                     ? classify_point(model, fixed, s)
                     : classify_point(model, s, fixed);
      out << s[0] << "," << s[1] << "," << cls.determinant << ","
          << cls.sigma_min << "," << cls.sigma_max << ","
          << (cls.degenerate ? 1 : 0) << "\n";
    }
  }

  auto rep = twist_scan(model, direction, fixed, samples, collision_tol,
                        separation_floor);
  fs::path twist_path = out_prefix + ".twist.json";
  json j = report_header("twist-scan");
  j["cost"] = model.label;
  j["grid"] = grid_spec;
  j["report"] = to_json(rep);
  write_report(twist_path, j);

  std::cout << "analyze-cost: " << model.label << ", " << samples.size()
            << " samples, direction " << to_string(direction) << "\n"
            << "  collisions " << rep.collisions.size() << "\n"
            << "  injective on sample: " << (rep.injective_on_sample ? "yes"
                                                                     : "no")
            << "\n  classification -> " << cls_path.string() << "\n"
            << "  twist report   -> " << twist_path.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- jacobian --

int cmd_jacobian(const std::string& plan_file, const std::string& f_plus_spec,
                 const std::string& f_minus_spec, int neighbors,
                 double grid_scale, int cells, double max_residual,
                 const std::string& out_file, const std::string& samples_csv) {
  auto plan = read_plan_json(plan_file);
  const int dim = plan.source->dim();
  auto f_plus = parse_density_spec(f_plus_spec, dim);
  auto f_minus = parse_density_spec(f_minus_spec, dim);
  if (neighbors <= 0) neighbors = default_jacobian_neighbors(dim);

  auto samples = estimate_map(plan, grid_scale);
  auto rep = jacobian_residual(samples, f_plus, f_minus, neighbors);
  rep.grid_scale = grid_scale;

  double push_gap = 0.0;
  if (cells > 0) {
    Vec lo = plan.target->points[0], hi = plan.target->points[0];
    for (const auto& p : plan.target->points) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    for (int d = 0; d < dim; ++d) hi[d] += 1e-9 + 1e-9 * std::abs(hi[d]);
    auto part = GridPartition::uniform(WorkBox(lo, hi), cells);
    push_gap = pushforward_check(samples, *plan.source, *plan.target, part);
  }

  std::cout << "jacobian: " << samples.size() << " map samples, k="
            << neighbors << "\n"
            << "  used / skipped / flagged  " << rep.used << " / "
            << rep.skipped << " / " << rep.flagged << "\n"
            << "  max residual              " << rep.max_residual << "\n"
            << "  mass-weighted mean        " << rep.weighted_mean_residual
            << "\n";
  if (cells > 0)
    std::cout << "  pushforward cell gap      " << push_gap << " (" << cells
              << " cells/dim)\n";

  if (!out_file.empty()) {
    json j = report_header("jacobian");
    j["plan"] = plan_file;
    j["f_plus"] = f_plus_spec;
    j["f_minus"] = f_minus_spec;
    j["report"] = to_json(rep);
    if (cells > 0) {
      j["pushforward_cells_per_dim"] = cells;
      j["pushforward_max_gap"] = push_gap;
    }
    write_report(out_file, j);
  }
  if (!samples_csv.empty()) {
    std::ofstream out(samples_csv);
    if (!out) throw input_error("cannot write '" + samples_csv + "'");
    out.precision(17);
    for (int d = 0; d < dim; ++d) out << "x" << (d + 1) << ",";
    for (int d = 0; d < dim; ++d) out << "tx" << (d + 1) << ",";
    out << "mass,split,target_span\n";
    for (const auto& s : samples) {
      for (int d = 0; d < dim; ++d) out << s.x[d] << ",";
      for (int d = 0; d < dim; ++d) out << s.tx[d] << ",";
      out << s.mass << "," << (s.split_flag ? 1 : 0) << "," << s.target_span
          << "\n";
    }
  }
  if (max_residual > 0.0 && rep.max_residual > max_residual) {
    std::cout << "  FAIL: max residual above " << max_residual << "\n";
    return 1;
  }
  return 0;
}

// --------------------------------------------------------------- reproduce --

int cmd_reproduce_31(int grid_m, const fs::path& dir, std::uint64_t seed) {
  auto plans = build_example31_plans(grid_m);
  auto model = builtin_cost("example31");
  json summary = report_header("reproduce-3.1");
  summary["grid_m"] = grid_m;
  bool all_ok = true;
  auto record = [&](const std::string& key, bool ok, double value) {
    summary["checks"][key]["pass"] = ok;
    summary["checks"][key]["value"] = value;
    all_ok = all_ok && ok;
  };

  write_measure_csv(dir / "source.csv", *plans.source);
  write_measure_csv(dir / "target.csv", *plans.target);
  write_plan_json(dir / "gamma.json", plans.gamma, "source.csv", "target.csv");
  write_plan_json(dir / "gamma_bar.json", plans.gamma_bar, "source.csv",
                  "target.csv");

  auto [gs, gt] = marginals(plans.gamma);
  auto [bs, bt] = marginals(plans.gamma_bar);
  double atom_gap = 0.0;
  for (int i = 0; i < gs.size(); ++i)
    atom_gap = std::max(atom_gap, std::abs(gs.weights[i] - bs.weights[i]));
  for (int j = 0; j < gt.size(); ++j)
    atom_gap = std::max(atom_gap, std::abs(gt.weights[j] - bt.weights[j]));
  record("marginals_equal_per_atom", atom_gap <= 1e-12, atom_gap);

  double cg = kantorovich_cost(plans.gamma, model);
  double cb = kantorovich_cost(plans.gamma_bar, model);
  record("gamma_cost_zero", std::abs(cg) <= 1e-9, cg);
  record("gamma_bar_cost_zero", std::abs(cb) <= 1e-9, cb);

  auto lb = verify_lower_bound(plans.gamma);
  record("lower_bound_valid", lb.min_residual >= -1e-12, lb.min_residual);
  record("lower_bound_tight_on_sheets", lb.max_residual <= 1e-9,
         lb.max_residual);

  auto lp = solve_exact(plans.source, plans.target, model);
  record("solver_attains_same_value", std::abs(lp.value - cg) <= 1e-9,
         lp.value);

  auto mix = convex_combination(plans.gamma, plans.gamma_bar, 0.5);
  record("convex_combination_optimal",
         std::abs(kantorovich_cost(mix, model) - cg) <= 1e-9 &&
             marginal_residual(mix) <= 1e-12,
         kantorovich_cost(mix, model));

  RadiusPolicy policy;
  policy.seed = seed;
  auto rect = rectify(plans.gamma, model, std::nullopt, policy);
  record("rectifiability_certificate", rect.certified(),
         rect.certificate ? rect.certificate->epsilon : -1.0);
  if (rect.certificate) {
    json cert_json = report_header("rectifiability");
    cert_json["cost"] = model.label;
    cert_json["certificate"] = to_json(*rect.certificate);
    write_report(dir / "certificate.json", cert_json);
  }

  summary["all_pass"] = all_ok;
  write_report(dir / "summary.json", summary);

  std::cout << "reproduce 3.1 on a " << grid_m << "x" << grid_m << " grid\n"
            << "  marginal atom gap      " << atom_gap << "\n"
            << "  gamma / gamma_bar cost " << cg << " / " << cb << "\n"
            << "  solver value           " << lp.value << "\n"
            << "  certificate            "
            << (rect.certificate ? to_string(rect.certificate->verdict)
                                 : "none")
            << "\n  all checks             " << (all_ok ? "pass" : "FAIL")
            << "\n  outputs -> " << dir.string() << "\n";
  return all_ok ? 0 : 1;
}

int cmd_reproduce_32(int samples, const fs::path& dir) {
  auto model = builtin_cost("example32");
  auto surf = build_example32_surface(samples);
  write_pairs_csv(dir / "surface.csv", surf);

  json summary = report_header("reproduce-3.2");
  summary["samples"] = samples;
  bool all_ok = true;
  auto record = [&](const std::string& key, bool ok, double value) {
    summary["checks"][key]["pass"] = ok;
    summary["checks"][key]["value"] = value;
    all_ok = all_ok && ok;
  };

  double max_cost = 0.0;
  for (const auto& p : surf.pairs)
    max_cost = std::max(max_cost, std::abs(model.evaluate(p.x, p.y)));
  record("cost_vanishes_on_surface", max_cost <= 1e-9, max_cost);

  if (surf.size() >= 2) {
    auto rep = check_pairwise(surf, model);
    record("surface_is_b_monotone", rep.pass(), rep.max_defect);
    double witness = (surf.pairs[0].x - surf.pairs[1].x).norm();
    record("noninvertibility_witness", witness <= 1e-9, witness);
  }

  // the reverse fibration is injective: y -> D_y c(x, y) over a sample grid
  std::vector<Vec> grid;
  for (int a = 0; a < 30; ++a)
    for (int b = 0; b < 30; ++b) {
      Vec p(2);
      p << -3.0 + 6.0 * a / 29.0, -1.9 + 3.8 * b / 29.0;
      grid.push_back(std::move(p));
    }
  Vec fixed(2);
  fixed << 1.0, 0.5;
  auto twist = twist_scan(model, TwistDirection::YtoX, fixed, grid);
  record("y_to_x_injective_on_sample", twist.injective_on_sample,
         double(twist.collisions.size()));

  summary["all_pass"] = all_ok;
  write_report(dir / "summary.json", summary);

  std::cout << "reproduce 3.2 with " << samples << " surface samples\n"
            << "  max |c| on surface " << max_cost << "\n"
            << "  y-to-x collisions  " << twist.collisions.size() << "\n"
            << "  all checks         " << (all_ok ? "pass" : "FAIL") << "\n"
            << "  outputs -> " << dir.string() << "\n";
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact optimal transport with monotonicity, rectifiability "
               "and Jacobian certificates"};
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON config file (flags override it)");
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  GlobalOptions global;
  app.add_option("--seed", global.seed, "seed for all sampling paths");
  app.add_option("--threads", global.threads,
                 "worker thread cap (default: all cores)");

  std::string source_file, target_file, cost_name = "quadratic";
  std::string out_file, dual_file;
  auto* solve = app.add_subcommand("solve", "solve the Kantorovich LP exactly");
  solve->add_option("--source", source_file, "source measure CSV")->required();
  solve->add_option("--target", target_file, "target measure CSV")->required();
  solve->add_option("--cost", cost_name, "built-in cost name");
  solve->add_option("--out", out_file, "write the plan JSON here");
  solve->add_option("--dual", dual_file, "write dual potentials JSON here");

  std::string plan_file, pairs_file, mono_out;
  int cycles = 2;
  double tol = 1e-9;
  std::int64_t max_pairs = 0;
  auto* mono = app.add_subcommand("check-monotone",
                                  "verify b-monotonicity of a pair set");
  mono->add_option("--plan", plan_file, "plan JSON (support is checked)");
  mono->add_option("--pairs", pairs_file, "pair CSV (x1..xn,y1..yn[,mass])");
  mono->add_option("--cost", cost_name, "built-in cost name");
  mono->add_option("--cycles", cycles, "max reassignment cycle length")
      ->check(CLI::Range(2, 6));
  mono->add_option("--tol", tol, "violation tolerance");
  mono->add_option("--max-pairs", max_pairs,
                   "sample this many pairs instead of all (0 = exhaustive)");
  mono->add_option("--out", mono_out, "report JSON path");

  std::string rect_plan, rect_pairs, rect_base, rect_out, rect_uv;
  RadiusPolicy policy;
  auto* rect = app.add_subcommand(
      "rectify", "certify the support as a local Lipschitz graph");
  rect->add_option("--plan", rect_plan, "plan JSON");
  rect->add_option("--pairs", rect_pairs, "pair CSV");
  rect->add_option("--cost", cost_name, "built-in cost name");
  rect->add_option("--base", rect_base, "base point x1,..;y1,.. (default: "
                                        "nearest support pair to centroid)");
  rect->add_option("--eps-target", policy.eps_target,
                   "epsilon target for the radius search");
  rect->add_option("--radius-fraction", policy.initial_fraction,
                   "initial radius as a fraction of the box diameter");
  rect->add_option("--min-radius-fraction", policy.min_fraction,
                   "give up below this fraction");
  rect->add_option("--samples", policy.samples, "epsilon scan sample count");
  rect->add_flag("--conservative", policy.conservative,
                 "inflate the epsilon estimate by 1.25");
  rect->add_option("--out", rect_out, "certificate JSON path");
  rect->add_option("--uv-csv", rect_uv, "rotated (u,v,ratio) CSV path");

  std::string grid_spec = "50x50", direction_str = "x-to-y";
  std::string fixed_spec, box_spec, out_prefix = "analysis";
  double collision_tol = 1e-9, separation_floor = 1e-6;
  auto* analyze = app.add_subcommand(
      "analyze-cost", "classify non-degeneracy and scan for twist failures");
  analyze->add_option("--cost", cost_name, "built-in cost name");
  analyze->add_option("--grid", grid_spec, "sample grid, e.g. 50x50");
  analyze->add_option("--direction", direction_str, "x-to-y or y-to-x");
  analyze->add_option("--fixed", fixed_spec,
                      "fixed point (default: box center)");
  analyze->add_option("--box", box_spec,
                      "sample box lo1,lo2:hi1,hi2 (default: working box)");
  analyze->add_option("--collision-tol", collision_tol,
                      "gradient collision tolerance");
  analyze->add_option("--separation-floor", separation_floor,
                      "minimum argument separation");
  analyze->add_option("--out-prefix", out_prefix, "output path prefix");

  std::string jac_plan, f_plus_spec, f_minus_spec, jac_out, jac_csv;
  int neighbors = 0, cells = 0;
  double grid_scale = 0.0, jac_max_residual = 0.0;
  auto* jac = app.add_subcommand(
      "jacobian", "verify the change-of-variables equation for a plan");
  jac->add_option("--plan", jac_plan, "plan JSON")->required();
  jac->add_option("--f-plus", f_plus_spec, "source density spec")->required();
  jac->add_option("--f-minus", f_minus_spec, "target density spec")
      ->required();
  jac->add_option("--neighbors", neighbors,
                  "least-squares neighbors (default 2n+2)");
  jac->add_option("--grid-scale", grid_scale,
                  "split-mass span threshold (default: 2x median target "
                  "spacing)");
  jac->add_option("--cells", cells,
                  "also run a pushforward check on this many cells per dim");
  jac->add_option("--max-residual", jac_max_residual,
                  "exit 1 when the max residual exceeds this");
  jac->add_option("--out", jac_out, "report JSON path");
  jac->add_option("--samples-csv", jac_csv, "map samples CSV path");

  std::string example = "3.1";
  int grid_m = 16, surf_samples = 64;
  std::string out_dir = "reproduce-out";
  auto* repro = app.add_subcommand("reproduce",
                                   "rebuild the worked examples end to end");
  repro->add_option("--example", example, "3.1 or 3.2");
  repro->add_option("--grid", grid_m, "grid size per axis (3.1)");
  repro->add_option("--samples", surf_samples, "surface samples (3.2)");
  repro->add_option("--out-dir", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  thread_limit() = global.threads;

  try {
    if (*solve)
      return cmd_solve(source_file, target_file, cost_name, out_file,
                       dual_file);
    if (*mono)
      return cmd_check_monotone(plan_file, pairs_file, cost_name, cycles, tol,
                                max_pairs, global.seed, mono_out);
    if (*rect) {
      policy.seed = global.seed;
      return cmd_rectify(rect_plan, rect_pairs, cost_name, rect_base, policy,
                         rect_out, rect_uv);
    }
    if (*analyze)
      return cmd_analyze_cost(cost_name, grid_spec, direction_str, fixed_spec,
                              box_spec, collision_tol, separation_floor,
                              out_prefix);
    if (*jac)
      return cmd_jacobian(jac_plan, f_plus_spec, f_minus_spec, neighbors,
                          grid_scale, cells, jac_max_residual, jac_out,
                          jac_csv);
    if (*repro) {
      fs::create_directories(out_dir);
      if (example == "3.1") return cmd_reproduce_31(grid_m, out_dir, global.seed);
      if (example == "3.2") return cmd_reproduce_32(surf_samples, out_dir);
      throw input_error("--example must be 3.1 or 3.2");
    }
  } catch (const usage_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const verification_error& e) {
    std::cerr << "verification failure: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
