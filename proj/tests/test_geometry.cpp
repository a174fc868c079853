#include <doctest.h>

#include <cmath>

#include "finsler/geometry.hpp"
#include "support.hpp"

using namespace finsler;

TEST_CASE("scalar function and tangent classification on the flat model") {
  auto mink = build_model(testkit::kMinkowski);
  TangentPoint p;

  p.y = Vec4(1, 0, 0, 0);
  CHECK(finsler_function(mink, p) == doctest::Approx(1.0).epsilon(1e-15));
  p.y = Vec4(1, 1, 0, 0);
  CHECK(finsler_function(mink, p) == 0.0);

  p.y = Vec4(2, 0, 0, 0);
  auto c = classify(mink, p);
  CHECK(c.sign_L == -1);
  CHECK(!c.degenerate);
  CHECK(!c.in_shell_Omega);
  CHECK(c.in_observer_cone);

  p.y = Vec4(1, 0, 0, 0);
  c = classify(mink, p);
  CHECK(c.in_shell_Omega);
  CHECK(c.in_observer_cone);

  // the full unit shell keeps its past branch, the cone does not
  p.y = Vec4(-1, 0, 0, 0);
  c = classify(mink, p);
  CHECK(!c.in_observer_cone);
  CHECK(c.in_shell_Omega);

  p.y = Vec4(0, 2, 0, 0);
  c = classify(mink, p);
  CHECK(c.sign_L == 1);
  CHECK(!c.in_shell_Omega);
  CHECK(!c.in_observer_cone);
}

TEST_CASE("shell normalization scales onto the unit level set") {
  auto mink = build_model(testkit::kMinkowski);
  TangentPoint p;
  p.y = Vec4(2, 1, 0, 0);
  auto np = normalize_to_shell(mink, p);
  CHECK(np.y[0] == doctest::Approx(2 / std::sqrt(3.0)).epsilon(1e-14));
  CHECK(classify(mink, np).in_shell_Omega);
}

TEST_CASE("induced metric flips sign across the light cone") {
  auto mink = build_model(testkit::kMinkowski);
  TangentPoint p;
  p.y = Vec4(1, 0.2, 0, 0);
  auto gf = finsler_metric_gF(mink, p);
  CHECK(gf.at(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(gf.at(1, 1) == doctest::Approx(-1.0).epsilon(1e-12));
  p.y = Vec4(0.2, 1, 0, 0);
  gf = finsler_metric_gF(mink, p);
  CHECK(gf.at(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(gf.at(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("product model distinguishes the inner cone from the gap") {
  auto bim = build_model(testkit::kBimetric);
  TangentPoint q;

  // timelike for the first factor only: negative product, outside the cone
  q.y = Vec4(1.0, 0.8, 0, 0);
  auto cb = classify(bim, q);
  CHECK(cb.sign_L == -1);
  CHECK(!cb.in_observer_cone);

  // timelike for both factors
  q.y = Vec4(1.0, 0.3, 0, 0);
  cb = classify(bim, q);
  CHECK(cb.sign_L == 1);
  CHECK(cb.in_observer_cone);
  auto nq = normalize_to_shell(bim, q);
  CHECK(classify(bim, nq).in_shell_Omega);

  auto g1 = finsler_metric_gF(bim, q);
  TangentPoint q3 = q;
  q3.y *= 3.0;
  auto g3 = finsler_metric_gF(bim, q3);
  CHECK((g1.matrix() - g3.matrix()).cwiseAbs().maxCoeff() < 1e-10);

  double gyy = q.y.transpose() * g1.matrix() * q.y;
  double F = finsler_function(bim, q);
  CHECK(std::abs(std::abs(gyy) - F * F) < 1e-9);
  CHECK(gyy > 0);
}

TEST_CASE("segment probes confirm cone convexity, reject disjoint cones") {
  auto mink = build_model(testkit::kMinkowski);
  auto repm = cone_convexity_check(mink, Vec4::Zero(), 40, 7);
  CHECK(repm.failures.empty());
  CHECK(repm.pairs_checked == 40);

  auto bim = build_model(testkit::kBimetric);
  auto repb = cone_convexity_check(bim, Vec4::Zero(), 40, 7);
  CHECK(repb.failures.empty());

  // factor cones that share no timelike direction leave nothing to find
  auto bad = build_model(
      R"({"kind":"bimetric-product","params":{"h":"minkowski","k":[[1,0,0,0],[0,-1,0,0],[0,0,4,0],[0,0,0,4]]}})");
  CHECK_THROWS_AS(cone_convexity_check(bad, Vec4::Zero(), 10, 3), NoConeFound);
}

TEST_CASE("quartic model without timelike directions reports no cone") {
  auto quartic = build_model(testkit::kQuarticNoCone);
  CHECK_THROWS_AS(ConeProbe(quartic, Vec4::Zero(), 5), NoConeFound);
}
