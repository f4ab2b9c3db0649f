#include <doctest.h>

#include <cmath>
#include <set>

#include "otcert/errors.hpp"
#include "otcert/examples_repro.hpp"
#include "otcert/monotonicity.hpp"
#include "otcert/numeric.hpp"
#include "otcert/rectifier.hpp"
#include "otcert/solver.hpp"
#include "test_helpers.hpp"

using namespace otcert;
using namespace otcert::testing;

TEST_CASE("grid preconditions") {
  CHECK_THROWS_AS(build_example31_plans(1), input_error);
  CHECK_THROWS_AS(build_example31_plans(5), input_error);
  CHECK_NOTHROW(build_example31_plans(2));
}

TEST_CASE("gamma and gamma_bar share marginals atom by atom") {
  auto plans = build_example31_plans(8);
  CHECK(marginal_residual(plans.gamma) <= 1e-12);
  CHECK(marginal_residual(plans.gamma_bar) <= 1e-12);
  auto [gs, gt] = marginals(plans.gamma);
  auto [bs, bt] = marginals(plans.gamma_bar);
  for (int i = 0; i < gs.size(); ++i)
    CHECK(std::abs(gs.weights[i] - bs.weights[i]) <= 1e-12);
  for (int j = 0; j < gt.size(); ++j)
    CHECK(std::abs(gt.weights[j] - bt.weights[j]) <= 1e-12);
}

TEST_CASE("the two plans are genuinely different") {
  auto plans = build_example31_plans(8);
  std::set<std::pair<int, int>> a, b;
  for (const auto& e : plans.gamma.entries) a.insert({e.i, e.j});
  for (const auto& e : plans.gamma_bar.entries) b.insert({e.i, e.j});
  CHECK(a != b);
}

TEST_CASE("both plans and their convex combinations cost zero") {
  auto plans = build_example31_plans(8);
  auto model = builtin_cost("example31");
  double cg = kantorovich_cost(plans.gamma, model);
  double cb = kantorovich_cost(plans.gamma_bar, model);
  CHECK(std::abs(cg) <= 1e-9);
  CHECK(std::abs(cb) <= 1e-9);
  auto mix = convex_combination(plans.gamma, plans.gamma_bar, 0.5);
  CHECK(std::abs(kantorovich_cost(mix, model)) <= 1e-9);
  CHECK(marginal_residual(mix) <= 1e-12);
}

TEST_CASE("lower bound residuals") {
  auto plans = build_example31_plans(8);
  auto rep = verify_lower_bound(plans.gamma);
  CHECK(rep.min_residual >= -1e-12);
  CHECK(rep.max_residual <= 1e-9);

  // off-sheet pairs have strictly positive residual: the product coupling
  // puts mass at e.g. x = y where c - 0 = 2
  auto prod = TransportPlan::product(plans.source, plans.target);
  auto rep2 = verify_lower_bound(prod);
  CHECK(rep2.min_residual >= -1e-12);
  CHECK(rep2.max_residual > 1.0);
}

TEST_CASE("solver attains the same zero value on the shared marginals") {
  auto plans = build_example31_plans(6);
  auto model = builtin_cost("example31");
  auto res = solve_exact(plans.source, plans.target, model);
  CHECK(std::abs(res.value - kantorovich_cost(plans.gamma, model)) <= 1e-9);
  CHECK(std::abs(res.value) <= 1e-9);
}

TEST_CASE("gamma support is b-monotone and rectifiable despite 3 sheets") {
  auto plans = build_example31_plans(16);
  auto model = builtin_cost("example31");
  auto sup = support(plans.gamma);
  CHECK(check_pairwise(sup, model).pass());

  auto rect = rectify(plans.gamma, model);
  CHECK(rect.certified());
  // support genuinely spans three sheets
  std::set<int> sheets;
  for (const auto& p : sup.pairs)
    sheets.insert(int(std::round((p.y[1] - p.x[1]) / M_PI)));
  CHECK(sheets == std::set<int>{1, 3, 5});
}

TEST_CASE("example32 surface solves the equality equations") {
  auto surf = build_example32_surface(24);
  REQUIRE(surf.size() == 24);
  auto model = builtin_cost("example32");
  for (const auto& p : surf.pairs) {
    // equality set: cos(y1) = x1/|x|, sin(y1) = x2/|x|, |x| = e^{y2}
    double r = p.x.norm();
    CHECK(rel_err(r, std::exp(p.y[1])) <= 1e-12);
    CHECK(std::abs(std::cos(p.y[0]) - p.x[0] / r) <= 1e-12);
    CHECK(std::abs(std::sin(p.y[0]) - p.x[1] / r) <= 1e-12);
    // cost vanishes on the surface
    CHECK(std::abs(model.evaluate(p.x, p.y)) <= 1e-12);
  }
}

TEST_CASE("example32 surface witnesses non-invertibility") {
  auto surf = build_example32_surface(2);
  REQUIRE(surf.size() == 2);
  // consecutive entries: same x, y1 differing by 2*pi
  CHECK((surf.pairs[0].x - surf.pairs[1].x).norm() <= 1e-12);
  CHECK(std::abs(surf.pairs[1].y[0] - surf.pairs[0].y[0] - 2 * M_PI) <= 1e-12);

  // y = (0,0) maps to x = (1,0); the 2*pi twin shares it
  CHECK(surf.pairs[0].y[0] == 0.0);
  CHECK(surf.pairs[0].y[1] == 0.0);
  CHECK(surf.pairs[0].x[0] == doctest::Approx(1.0));
  CHECK(std::abs(surf.pairs[0].x[1]) <= 1e-12);
}

TEST_CASE("example32 surface pairs are b-monotone for the example32 cost") {
  auto surf = build_example32_surface(30);
  auto model = builtin_cost("example32");
  auto rep = check_pairwise(surf, model);
  CHECK(rep.pass());
}

TEST_CASE("gamma admits certifying dual potentials across components") {
  // gamma is optimal but far from a basis: its support graph splits into
  // many components, exercising the offset reconciliation
  auto plans = build_example31_plans(8);
  auto model = builtin_cost("example31");
  auto duals = dual_potentials(plans.gamma, model);
  CHECK(duals.max_support_residual <= 1e-9);
  CHECK(duals.max_feasibility_violation <= 1e-9);
  CHECK(std::abs(duals.dual_value -
                 kantorovich_cost(plans.gamma, model)) <= 1e-9);
}
