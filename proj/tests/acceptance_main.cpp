// Acceptance suite: one criterion per section, one PASS/FAIL line each.
// Exit code is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "otcert/examples_repro.hpp"
#include "otcert/jacobian.hpp"
#include "otcert/monotonicity.hpp"
#include "otcert/nondegeneracy.hpp"
#include "otcert/numeric.hpp"
#include "otcert/rectifier.hpp"
#include "otcert/solver.hpp"

using namespace otcert;

namespace {

int failures = 0;

struct Criterion {
  const char* name;
  bool ok = true;
  std::string detail;
  std::chrono::steady_clock::time_point start;

  explicit Criterion(const char* n)
      : name(n), start(std::chrono::steady_clock::now()) {}

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    } else if (!cond) {
      detail += "; " + what;
    }
  }

  ~Criterion() {
    double secs = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    std::printf("%s %-28s (%.1fs)%s%s\n", ok ? "PASS" : "FAIL", name, secs,
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
};

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Vec vec1(double a) {
  Vec v(1);
  v << a;
  return v;
}

MeasurePtr random_uniform(std::mt19937_64& rng, const WorkBox& box, int n) {
  std::vector<Vec> pts;
  for (int k = 0; k < n; ++k) {
    Vec p(box.dim());
    for (int d = 0; d < box.dim(); ++d) {
      std::uniform_real_distribution<double> dist(box.lower[d] + 1e-3,
                                                  box.upper[d] - 1e-3);
      p[d] = dist(rng);
    }
    pts.push_back(std::move(p));
  }
  return std::make_shared<DiscreteMeasure>(DiscreteMeasure::uniform(pts));
}

struct OracleInstance {
  std::string cost;
  MeasurePtr source, target;
  TransportPlan lp_plan;
};

std::vector<OracleInstance> oracle_suite_outputs;

// Criterion 1: solve_exact matches brute_force within 1e-9 on 100 seeded
// random uniform instances per built-in cost, N in 2..7, n in {1,2}.
void oracle_equivalence() {
  Criterion crit("oracle-equivalence");
  std::mt19937_64 rng(20240601);
  for (const auto& name : builtin_cost_names()) {
    for (int trial = 0; trial < 100; ++trial) {
      int n_pts = 2 + trial % 6;
      int dim = (name == "example31" || name == "example32")
                    ? 2
                    : 1 + (trial % 2);
      auto model = builtin_cost(name, dim);
      auto src = random_uniform(rng, model.box, n_pts);
      auto tgt = random_uniform(rng, model.box, n_pts);
      try {
        auto lp = solve_exact(src, tgt, model);
        auto oracle = brute_force(src, tgt, model);
        double gap = std::abs(lp.value - kantorovich_cost(oracle, model));
        crit.require(gap <= 1e-9, name + " trial " + std::to_string(trial) +
                                      ": |lp - brute| = " +
                                      std::to_string(gap));
        crit.require(marginal_residual(lp.plan) <= 1e-12,
                     name + ": marginal residual above 1e-12");
        crit.require(
            int(lp.plan.entries.size()) <= src->size() + tgt->size() - 1,
            name + ": support not vertex-sparse");
        oracle_suite_outputs.push_back({name, src, tgt, lp.plan});
      } catch (const std::exception& e) {
        crit.require(false, name + " trial " + std::to_string(trial) +
                                ": exception: " + e.what());
      }
    }
  }
}

// Criterion 2: every solver output above passes pairwise and cyclical
// (k <= 4) monotonicity with zero violations at 1e-9.
void optimizer_monotonicity() {
  Criterion crit("optimizer-monotonicity");
  crit.require(oracle_suite_outputs.size() == 400,
               "expected 400 oracle instances, have " +
                   std::to_string(oracle_suite_outputs.size()));
  for (const auto& inst : oracle_suite_outputs) {
    auto model = builtin_cost(inst.cost, inst.source->dim());
    try {
      auto sup = support(inst.lp_plan);
      if (sup.size() < 2) continue;
      auto pw = check_pairwise(sup, model, 1e-9);
      crit.require(pw.pass() && pw.violations.empty(),
                   inst.cost + ": pairwise violation, defect " +
                       std::to_string(pw.max_defect));
      auto cy = check_cyclical(sup, model, 4, 1e-9);
      crit.require(cy.pass() && cy.violations.empty(),
                   inst.cost + ": cyclical violation, defect " +
                       std::to_string(cy.max_defect));
    } catch (const std::exception& e) {
      crit.require(false, inst.cost + std::string(": exception: ") + e.what());
    }
  }
}

// Criterion 3: 16x16 grid reproduction of the three-sheet example.
void example31_reproduction() {
  Criterion crit("example31-reproduction");
  try {
    auto plans = build_example31_plans(16);
    auto model = builtin_cost("example31");

    auto [gs, gt] = marginals(plans.gamma);
    auto [bs, bt] = marginals(plans.gamma_bar);
    double atom_gap = 0.0;
    for (int i = 0; i < gs.size(); ++i)
      atom_gap = std::max(atom_gap, std::abs(gs.weights[i] - bs.weights[i]));
    for (int j = 0; j < gt.size(); ++j)
      atom_gap = std::max(atom_gap, std::abs(gt.weights[j] - bt.weights[j]));
    crit.require(atom_gap <= 1e-12, "marginals differ per atom by " +
                                        std::to_string(atom_gap));

    double cg = kantorovich_cost(plans.gamma, model);
    double cb = kantorovich_cost(plans.gamma_bar, model);
    crit.require(std::abs(cg) <= 1e-9, "gamma cost " + std::to_string(cg));
    crit.require(std::abs(cb) <= 1e-9, "gamma_bar cost " + std::to_string(cb));

    auto lp = solve_exact(plans.source, plans.target, model);
    crit.require(std::abs(lp.value - cg) <= 1e-9,
                 "solver value " + std::to_string(lp.value));

    auto mix = convex_combination(plans.gamma, plans.gamma_bar, 0.5);
    crit.require(std::abs(kantorovich_cost(mix, model) - cg) <= 1e-9,
                 "t=0.5 combination cost mismatch");
    crit.require(marginal_residual(mix) <= 1e-12,
                 "t=0.5 combination infeasible");
  } catch (const std::exception& e) {
    crit.require(false, std::string("exception: ") + e.what());
  }
}

// Criterion 4: rectifiability certificates. The three-sheet support
// certifies around a base point on the middle sheet with eps <= 0.5; the
// bilinear baseline certifies with eps = 0 and ratio <= 1 + 1e-9.
void rectifiability_certificates() {
  Criterion crit("rectifiability-certificate");
  try {
    auto plans = build_example31_plans(16);
    auto model = builtin_cost("example31");
    // base point on G2: the grid pair nearest the centroid column
    Vec bx = vec2(0.46875, 2.0 * M_PI - M_PI / 8.0);
    Vec by = vec2(0.46875, 2.0 * M_PI - M_PI / 8.0 + 3.0 * M_PI);
    auto rect = rectify(plans.gamma, model, std::make_pair(bx, by));
    crit.require(rect.precheck.pass(), "gamma support failed monotonicity");
    crit.require(rect.certificate.has_value(), "no certificate produced");
    if (rect.certificate) {
      const auto& c = *rect.certificate;
      crit.require(c.verdict == RectifiabilityCertificate::Verdict::Certified,
                   std::string("verdict: ") + to_string(c.verdict) + " (" +
                       c.reason + ")");
      crit.require(c.epsilon <= 0.5,
                   "epsilon " + std::to_string(c.epsilon) + " > 0.5");
      double bound = std::sqrt((1.0 + c.epsilon) / (1.0 - c.epsilon));
      crit.require(c.max_ratio <= bound + 1e-9,
                   "ratio " + std::to_string(c.max_ratio) + " above bound " +
                       std::to_string(bound));
      // the input genuinely spans three sheets
      std::set<int> sheets;
      for (const auto& p : support(plans.gamma).pairs)
        sheets.insert(int(std::round((p.y[1] - p.x[1]) / M_PI)));
      crit.require(sheets.size() == 3, "support does not span 3 sheets");
    }

    // bilinear baseline: identical clouds, optimal matching is the identity
    std::mt19937_64 rng(7);
    auto bil = builtin_cost("bilinear", 2);
    auto cloud = random_uniform(rng, WorkBox::cube(2, -1.0, 1.0), 30);
    auto res = solve_exact(cloud, cloud, bil);
    auto rect2 = rectify(res.plan, bil);
    crit.require(rect2.certified(), "bilinear baseline not certified");
    if (rect2.certificate) {
      crit.require(rect2.certificate->epsilon == 0.0,
                   "bilinear epsilon nonzero");
      crit.require(rect2.certificate->max_ratio <= 1.0 + 1e-9,
                   "bilinear ratio above 1");
    }
  } catch (const std::exception& e) {
    crit.require(false, std::string("exception: ") + e.what());
  }
}

// Criterion 5: determinants match the closed forms; twist scans show the
// periodicity collisions for the first cost and none for the second.
void nondegeneracy_and_twist() {
  Criterion crit("nondegeneracy-twist");
  try {
    std::mt19937_64 rng(99);
    auto e31 = builtin_cost("example31");
    auto e32 = builtin_cost("example32");
    for (int k = 0; k < 40; ++k) {
      Vec x(2), y(2);
      for (int d = 0; d < 2; ++d) {
        std::uniform_real_distribution<double> dx(e31.box.lower[d] + 1e-3,
                                                  e31.box.upper[d] - 1e-3);
        x[d] = dx(rng);
        y[d] = dx(rng);
      }
      auto cls = classify_point(e31, x, y);
      crit.require(
          rel_err(cls.determinant, std::exp(2.0 * (x[0] + y[0]))) <= 1e-9,
          "example31 determinant mismatch");
      double fd_det = mixed_hessian(e31, x, y,
                                    DerivativeMethod::FiniteDifference)
                          .determinant();
      crit.require(rel_err(fd_det, cls.determinant) <= 1e-5,
                   "example31 FD determinant mismatch");
      crit.require(!cls.degenerate, "example31 flagged degenerate");

      Vec x2(2), y2(2);
      for (int d = 0; d < 2; ++d) {
        std::uniform_real_distribution<double> dx(e32.box.lower[d] + 1e-3,
                                                  e32.box.upper[d] - 1e-3);
        x2[d] = dx(rng);
        y2[d] = dx(rng);
      }
      auto cls2 = classify_point(e32, x2, y2);
      crit.require(rel_err(cls2.determinant, -std::exp(2.0 * y2[1])) <= 1e-9,
                   "example32 determinant mismatch");
      double fd_det2 = mixed_hessian(e32, x2, y2,
                                     DerivativeMethod::FiniteDifference)
                           .determinant();
      crit.require(rel_err(fd_det2, cls2.determinant) <= 1e-5,
                   "example32 FD determinant mismatch");
      crit.require(!cls2.degenerate, "example32 flagged degenerate");
    }

    // 50x50 sample grid with y2 spacing pi/7: 2*pi is exactly 14 steps
    std::vector<Vec> grid31;
    for (int a = 0; a < 50; ++a)
      for (int b = 0; b < 50; ++b)
        grid31.push_back(vec2(a / 49.0, b * (M_PI / 7.0)));
    auto rep31 = twist_scan(e31, TwistDirection::XtoY, vec2(0.0, 0.0), grid31);
    crit.require(!rep31.injective_on_sample,
                 "example31 scan found no collisions");
    bool shifts_ok = !rep31.collisions.empty();
    for (const auto& col : rep31.collisions) {
      double dy = std::abs(col.a[1] - col.b[1]);
      double k = std::round(dy / (2.0 * M_PI));
      if (std::abs(col.a[0] - col.b[0]) > 1e-12 || k < 1 ||
          std::abs(dy - 2.0 * M_PI * k) > 1e-9)
        shifts_ok = false;
    }
    crit.require(shifts_ok, "collisions not all at (0, 2*pi*k) shifts");

    std::vector<Vec> grid32;
    for (int a = 0; a < 50; ++a)
      for (int b = 0; b < 50; ++b)
        grid32.push_back(
            vec2(-3.0 + 6.0 * a / 49.0, -1.9 + 3.8 * b / 49.0));
    auto rep32 =
        twist_scan(e32, TwistDirection::YtoX, vec2(1.0, 0.5), grid32);
    crit.require(rep32.injective_on_sample && rep32.collisions.empty(),
                 "example32 y-to-x scan collided");
  } catch (const std::exception& e) {
    crit.require(false, std::string("exception: ") + e.what());
  }
}

// Criterion 6: change-of-variables residuals. Affine cases vanish to
// round-off; the Gaussian N(0,1) -> N(0,4) ladder decreases monotonically
// and ends at or below 0.05.
void jacobian_equation() {
  Criterion crit("jacobian-equation");
  try {
    // translation and scaling on exact sample sets
    std::vector<double> xs;
    for (int k = 0; k <= 40; ++k) xs.push_back(0.025 * k);
    auto mk = [&](double (*T)(double)) {
      std::vector<MapSample> out;
      for (double x : xs) {
        MapSample s;
        s.x = vec1(x);
        s.tx = vec1(T(x));
        s.mass = 1.0 / xs.size();
        out.push_back(std::move(s));
      }
      return out;
    };
    auto f_unit = uniform_density(WorkBox::cube(1, 0.0, 1.0));
    auto rep_t = jacobian_residual(
        mk([](double x) { return x + 0.25; }), f_unit,
        uniform_density(WorkBox::cube(1, 0.25, 1.25)), 4);
    crit.require(rep_t.max_residual <= 1e-12,
                 "translation residual " + std::to_string(rep_t.max_residual));
    auto rep_s = jacobian_residual(
        mk([](double x) { return 2.0 * x; }), f_unit,
        uniform_density(WorkBox::cube(1, 0.0, 2.0)), 4);
    crit.require(rep_s.max_residual <= 1e-12,
                 "scaling residual " + std::to_string(rep_s.max_residual));

    // Gaussian ladder
    auto model = builtin_cost("quadratic", 1);
    auto f_plus = gaussian_density(vec1(0.0), 1.0);
    auto f_minus = gaussian_density(vec1(0.0), 2.0);
    double prev = std::numeric_limits<double>::infinity();
    double last = prev;
    for (double h : {0.1, 0.05, 0.025}) {
      std::vector<Vec> spts, tpts;
      std::vector<double> sw, tw;
      for (double x = -4.0; x <= 4.0 + 1e-12; x += h) {
        spts.push_back(vec1(x));
        sw.push_back(f_plus(vec1(x)));
      }
      for (double y = -8.0; y <= 8.0 + 1e-12; y += h) {
        tpts.push_back(vec1(y));
        tw.push_back(f_minus(vec1(y)));
      }
      double stot = kahan_sum(sw), ttot = kahan_sum(tw);
      for (auto& w : sw) w /= stot;
      for (auto& w : tw) w /= ttot;
      auto src = std::make_shared<DiscreteMeasure>(spts, sw);
      auto tgt = std::make_shared<DiscreteMeasure>(tpts, tw);
      auto res = solve_exact(src, tgt, model);
      auto samples = estimate_map(res.plan, 2.5 * h);
      auto rep = jacobian_residual(samples, f_plus, f_minus, 4);
      crit.require(rep.used > 0, "no usable samples at h=" + std::to_string(h));
      crit.require(rep.max_residual < prev,
                   "residual not decreasing at h=" + std::to_string(h) +
                       " (" + std::to_string(rep.max_residual) + " vs " +
                       std::to_string(prev) + ")");
      prev = rep.max_residual;
      last = rep.max_residual;
    }
    crit.require(last <= 0.05,
                 "final residual " + std::to_string(last) + " > 0.05");
  } catch (const std::exception& e) {
    crit.require(false, std::string("exception: ") + e.what());
  }
}

// Criterion 7: analytic vs central-difference mixed Hessians at h = 1e-4,
// 100 random points per builtin, matrix-scale relative error <= 1e-5.
void hessian_fd_validation() {
  Criterion crit("hessian-fd-validation");
  std::mt19937_64 rng(31415);
  for (const auto& name : builtin_cost_names()) {
    auto m = builtin_cost(name, 2);
    for (int k = 0; k < 100; ++k) {
      Vec x(2), y(2);
      for (int d = 0; d < 2; ++d) {
        std::uniform_real_distribution<double> dist(m.box.lower[d] + 2e-4,
                                                    m.box.upper[d] - 2e-4);
        x[d] = dist(rng);
        y[d] = dist(rng);
      }
      Mat ha = mixed_hessian(m, x, y, DerivativeMethod::Analytic);
      Mat hf = mixed_hessian(m, x, y, DerivativeMethod::FiniteDifference,
                             1e-4);
      double scale = std::max(1e-12, ha.cwiseAbs().maxCoeff());
      double err = (ha - hf).cwiseAbs().maxCoeff() / scale;
      crit.require(err <= 1e-5, name + ": FD relative error " +
                                    std::to_string(err));
    }
  }
}

}  // namespace

int main() {
  oracle_equivalence();
  optimizer_monotonicity();
  example31_reproduction();
  rectifiability_certificates();
  nondegeneracy_and_twist();
  jacobian_equation();
  hessian_fd_validation();
  std::printf("%d criteria failed\n", failures);
  return failures;
}
