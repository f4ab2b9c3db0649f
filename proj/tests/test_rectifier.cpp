#include <doctest.h>

#include <cmath>
#include <random>

#include "otcert/errors.hpp"
#include "otcert/examples_repro.hpp"
#include "otcert/rectifier.hpp"
#include "otcert/solver.hpp"
#include "test_helpers.hpp"

using namespace otcert;
using namespace otcert::testing;

TEST_CASE("normalize_frame leaves bilinear costs alone") {
  auto m = builtin_cost("bilinear", 2);
  auto frame = normalize_frame(m, v2(0.1, -0.2), v2(0.3, 0.4));
  CHECK((frame.M - Mat::Identity(2, 2)).norm() <= 1e-14);
  // cost unchanged under the identity normalization
  CHECK(frame.transformed.evaluate(v2(1, 0), v2(0, 1)) ==
        doctest::Approx(m.evaluate(v2(1, 0), v2(0, 1))));
}

TEST_CASE("normalize_frame at the example31 G1 point gives the identity") {
  auto m = builtin_cost("example31");
  auto frame = normalize_frame(m, v2(0, 0), v2(0, M_PI));
  CHECK((frame.M - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-12);
  Mat h = frame.transformed.mixed_hessian(v2(0, 0), v2(0, M_PI));
  CHECK((h + Mat::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("normalize_frame rescales b = 2xy to the identity") {
  CostModel m;
  m.dim = 1;
  m.label = "double_bilinear";
  m.box = WorkBox::cube(1, -3, 3);
  m.evaluate = [](const Vec& x, const Vec& y) { return -2.0 * x[0] * y[0]; };
  m.mixed_hessian = [](const Vec&, const Vec&) {
    Mat h(1, 1);
    h << -2.0;
    return h;
  };
  auto frame = normalize_frame(m, v1(0), v1(0));
  CHECK(frame.M(0, 0) == doctest::Approx(2.0));
  Mat h = frame.transformed.mixed_hessian(v1(0.5), v1(0.5));
  CHECK(h(0, 0) == doctest::Approx(-1.0));
}

TEST_CASE("normalize_frame rejects singular mixed Hessians") {
  CostModel m;  // c = x1*y1 only: rank-1 in 2D
  m.dim = 2;
  m.label = "rank1";
  m.box = WorkBox::cube(2, -1, 1);
  m.evaluate = [](const Vec& x, const Vec& y) { return x[0] * y[0]; };
  m.mixed_hessian = [](const Vec&, const Vec&) {
    Mat h = Mat::Zero(2, 2);
    h(0, 0) = 1.0;
    return h;
  };
  CHECK_THROWS_AS(normalize_frame(m, v2(0, 0), v2(0, 0)), degeneracy_error);
}

TEST_CASE("rotate_diagonal arithmetic") {
  SupportSample s;
  s.pairs.push_back({v1(0), v1(0), 1.0});
  s.pairs.push_back({v1(1), v1(1), 1.0});
  s.pairs.push_back({v1(0), v1(2), 1.0});
  auto uv = rotate_diagonal(s);
  CHECK(uv[0].u[0] == doctest::Approx(0.0));
  CHECK(uv[0].v[0] == doctest::Approx(0.0));
  CHECK(uv[1].u[0] == doctest::Approx(std::sqrt(2.0)));
  CHECK(uv[1].v[0] == doctest::Approx(0.0));
  CHECK(uv[2].u[0] == doctest::Approx(std::sqrt(2.0)));
  CHECK(uv[2].v[0] == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("estimate_epsilon is zero for bilinear and delta for (1+d)xy") {
  auto bil = builtin_cost("bilinear", 2);
  auto est = estimate_epsilon(bil, v2(0, 0), v2(0, 0), 0.5, 256);
  CHECK(est.value == 0.0);

  auto pert = perturbed_bilinear_1d(0.1);
  auto est2 = estimate_epsilon(pert, v1(0), v1(0), 1.0, 128);
  CHECK(est2.value == doctest::Approx(0.1));
}

TEST_CASE("estimate_epsilon domain errors") {
  auto bil = builtin_cost("bilinear", 2);
  CHECK_THROWS_AS(estimate_epsilon(bil, v2(0, 0), v2(0, 0), 100.0, 16),
                  domain_error);
  CHECK_THROWS_AS(estimate_epsilon(bil, v2(6, 6), v2(0, 0), 0.1, 16),
                  domain_error);
  CHECK_THROWS_AS(estimate_epsilon(bil, v2(0, 0), v2(0, 0), -1.0, 16),
                  input_error);
}

TEST_CASE("epsilon estimate on normalized example31 shrinks with the radius") {
  auto m = builtin_cost("example31");
  auto frame = normalize_frame(m, v2(0, 0), v2(0, M_PI));
  Vec y0 = frame.M * v2(0, M_PI);  // base in normalized coordinates
  double prev = 1e9;
  for (double r : {0.2, 0.1, 0.05}) {
    auto est = estimate_epsilon(frame.transformed, v2(0, 0), y0, r, 1000);
    CHECK(est.value < 1.0);
    CHECK(est.value < prev);
    prev = est.value;
  }
}

TEST_CASE("certify_lipschitz on the identity map") {
  std::vector<UvPair> uv;
  for (int k = 0; k < 5; ++k) uv.push_back({v2(k, -k), v2(0, 0)});
  auto cert = certify_lipschitz(uv, 0.0);
  CHECK(cert.verdict == RectifiabilityCertificate::Verdict::Certified);
  CHECK(cert.max_ratio == 0.0);
  CHECK(cert.lipschitz_bound == doctest::Approx(1.0));
}

TEST_CASE("certify_lipschitz flags vertical segments as hard failures") {
  // anti-monotone 1D pairs (0,1),(1,0): same u, different v
  SupportSample s;
  s.pairs.push_back({v1(0), v1(1), 1.0});
  s.pairs.push_back({v1(1), v1(0), 1.0});
  auto uv = rotate_diagonal(s);
  auto cert = certify_lipschitz(uv, 0.0);
  CHECK(cert.verdict == RectifiabilityCertificate::Verdict::Failed);
  CHECK(cert.hard_failures == 1);
}

TEST_CASE("certify_lipschitz epsilon >= 1 is vacuous") {
  std::vector<UvPair> uv = {{v1(0), v1(0)}, {v1(1), v1(0)}};
  auto cert = certify_lipschitz(uv, 1.0);
  CHECK(cert.verdict == RectifiabilityCertificate::Verdict::Failed);
  CHECK(cert.reason.find("vacuous") != std::string::npos);
}

TEST_CASE("certify_lipschitz ratio on a monotone 1D matching") {
  // pairs {(0,0),(1,2),(2,3)} at eps = 0: ratios 1/3, 1/5, 1/2... computed
  // pairwise; max is 1/2? gaps: (0,0)-(1,2): du=3/sqrt2, dv=1/sqrt2 -> 1/3;
  // (0,0)-(2,3): du=5/sqrt2, dv=3... dv=(3-0-(2-0))/sqrt2=1/sqrt2... -> 1/5;
  // (1,2)-(2,3): du=2/sqrt2, dv=0 -> 0. max = 1/3.
  SupportSample s;
  s.pairs.push_back({v1(0), v1(0), 1.0});
  s.pairs.push_back({v1(1), v1(2), 1.0});
  s.pairs.push_back({v1(2), v1(3), 1.0});
  auto cert = certify_lipschitz(rotate_diagonal(s), 0.0);
  CHECK(cert.verdict == RectifiabilityCertificate::Verdict::Certified);
  CHECK(cert.max_ratio == doctest::Approx(1.0 / 3.0));
  CHECK(cert.max_ratio <= 1.0 + 1e-9);
}

TEST_CASE("certify_lipschitz needs two pairs") {
  std::vector<UvPair> uv = {{v1(0), v1(0)}};
  CHECK_THROWS_AS(certify_lipschitz(uv, 0.0), degenerate_input_error);
}

TEST_CASE("fit_graph nearest-neighbor behavior") {
  std::vector<UvPair> uv = {{v1(0), v1(1)}, {v1(2), v1(3)}};
  auto g = fit_graph(uv);
  CHECK(g.query(v1(0))[0] == 1.0);       // exact sample
  CHECK(g.query(v1(0.4))[0] == 1.0);     // nearest
  CHECK(g.query(v1(1.9))[0] == 3.0);
  CHECK(g.query(v1(1.0))[0] == 1.0);     // tie -> lexicographically lower u
  CHECK(g.lipschitz_on_samples() == doctest::Approx(1.0));

  auto single = fit_graph({{v1(5), v1(7)}});
  CHECK(single.query(v1(-100))[0] == 7.0);  // constant map
}

TEST_CASE("fit_graph rejects duplicate u with distinct v") {
  std::vector<UvPair> uv = {{v1(0), v1(1)}, {v1(0), v1(2)}};
  CHECK_THROWS_AS(fit_graph(uv), consistency_error);
}

TEST_CASE("rectify certifies a 1D quadratic optimizer") {
  auto model = builtin_cost("quadratic", 1);
  auto src = measure_1d({0.0, 0.15, 0.3, 0.45, 0.6});
  auto tgt = measure_1d({0.05, 0.2, 0.35, 0.5, 0.65});
  auto res = solve_exact(src, tgt, model);
  auto rect = rectify(res.plan, model);
  REQUIRE(rect.certificate.has_value());
  CHECK(rect.certified());
  // quadratic cost is exactly bilinear after normalization: eps = 0,
  // Minty case with bound 1
  CHECK(rect.certificate->epsilon == 0.0);
  CHECK(rect.certificate->lipschitz_bound == doctest::Approx(1.0));
  CHECK(rect.certificate->max_ratio <= 1.0 + 1e-9);
}

TEST_CASE("rectify refuses non-monotone inputs") {
  SupportSample s;
  s.pairs.push_back({v1(0), v1(1), 1.0});
  s.pairs.push_back({v1(1), v1(0), 1.0});
  auto rect = rectify(s, builtin_cost("bilinear", 1));
  CHECK_FALSE(rect.precheck.pass());
  CHECK_FALSE(rect.certificate.has_value());
}

TEST_CASE("explicit degenerate base yields a degenerate certificate") {
  CostModel m;  // c = x1*y1: singular mixed Hessian in 2D
  m.dim = 2;
  m.label = "rank1";
  m.box = WorkBox::cube(2, -1, 1);
  m.evaluate = [](const Vec& x, const Vec& y) { return x[0] * y[0]; };
  m.mixed_hessian = [](const Vec&, const Vec&) {
    Mat h = Mat::Zero(2, 2);
    h(0, 0) = 1.0;
    return h;
  };
  SupportSample s;  // monotone for this cost (b = -x1*y1 ... pairs chosen flat)
  s.pairs.push_back({v2(0, 0), v2(0, 0), 1.0});
  s.pairs.push_back({v2(-0.5, 0.2), v2(0.5, -0.1), 1.0});
  auto rect = rectify(s, m, std::make_pair(v2(0, 0), v2(0, 0)));
  if (rect.precheck.pass()) {
    REQUIRE(rect.certificate.has_value());
    CHECK(rect.certificate->verdict ==
          RectifiabilityCertificate::Verdict::Degenerate);
  }
  // default base selection: every candidate degenerate -> error
  if (rect.precheck.pass())
    CHECK_THROWS_AS(rectify(s, m), no_certificate_error);
}

TEST_CASE("rectify on example31 gamma support certifies on sheet G2") {
  auto plans = build_example31_plans(16);
  auto model = builtin_cost("example31");
  auto rect = rectify(plans.gamma, model);
  REQUIRE(rect.certificate.has_value());
  CHECK(rect.certified());
  const auto& cert = *rect.certificate;
  // default base point: support pair nearest the mass centroid lies on the
  // middle sheet (y2 = x2 + 3*pi)
  CHECK(cert.base_y[1] - cert.base_x[1] == doctest::Approx(3.0 * M_PI));
  CHECK(cert.epsilon <= 0.5);
  CHECK(cert.max_ratio <=
        std::sqrt((1.0 + cert.epsilon) / (1.0 - cert.epsilon)) + 1e-9);
}

TEST_CASE("radius monotonicity of the epsilon estimate on nested balls") {
  auto m = builtin_cost("example31");
  auto frame = normalize_frame(m, v2(0.5, 2.0), v2(0.5, 2.0 + 3 * M_PI));
  double prev = -1.0;
  for (double r : {0.05, 0.1, 0.2, 0.4}) {
    auto est = estimate_epsilon(frame.transformed, v2(0.5, 2.0),
                                Vec(frame.M * v2(0.5, 2.0 + 3 * M_PI)), r,
                                2000);
    CHECK(est.value >= prev - 1e-6);  // sup over nested sets grows
    prev = est.value;
  }
}

TEST_CASE("lipschitz bound grows with epsilon from exactly 1") {
  std::vector<UvPair> uv = {{v1(0), v1(0)}, {v1(1), v1(0.1)}};
  double prev = 0.0;
  for (double eps : {0.0, 0.1, 0.3, 0.6, 0.9}) {
    auto cert = certify_lipschitz(uv, eps);
    if (eps == 0.0) CHECK(cert.lipschitz_bound == 1.0);
    CHECK(cert.lipschitz_bound >= prev);
    prev = cert.lipschitz_bound;
  }
}
