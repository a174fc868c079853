#include <doctest.h>

#include <cmath>

#include "finsler/detail/pipeline.hpp"
#include "finsler/model.hpp"
#include "support.hpp"

using namespace finsler;
using namespace finsler::detail;

TEST_CASE("flat metric model: value, metrics and connection all collapse") {
  auto mink = build_model(testkit::kMinkowski);
  TangentPoint p;
  p.x = Vec4(0.1, -0.2, 0.3, 0.05);
  p.y = Vec4(2.0, 1.0, 0.0, 0.0);
  auto t = table_for(mink, p, 2, 4);

  CHECK(eval_L<double>(t) == doctest::Approx(-3.0).epsilon(1e-15));
  auto gL = eval_gL<double>(t);
  CHECK(gL[0][0] == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(gL[1][1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(gL[0][1]) < 1e-15);

  auto N = eval_N<double>(t);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) CHECK(std::abs(N[a][b]) < 1e-15);

  // timelike leaf: the Finsler metric is the reversed input metric
  auto gF = eval_gF<double>(t);
  CHECK(gF[0][0] == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(gF[1][1] == doctest::Approx(-1.0).epsilon(1e-13));

  auto conn = eval_conn<double>(t);
  for (int c = 0; c < 4; ++c)
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        CHECK(std::abs(conn.F[c][a][b]) < 1e-13);
        CHECK(std::abs(conn.C[c][a][b]) < 1e-13);
      }
}

TEST_CASE("expanding metric model reproduces the Christoffel structure") {
  auto flrw = build_model(testkit::kDiagScale);
  TangentPoint q;
  q.x = Vec4(0.3, 0.0, 0.0, 0.0);
  q.y = Vec4(1.0, 0.2, -0.1, 0.4);
  double a = 1.03, adot = 0.1;
  auto t = table_for(flrw, q, 2, 4);

  double Lexp = -1.0 + a * a * (0.04 + 0.01 + 0.16);
  CHECK(eval_L<double>(t) == doctest::Approx(Lexp).epsilon(1e-14));

  auto N = eval_N<double>(t);
  CHECK(std::abs(N[0][0]) < 1e-12);
  for (int al = 1; al < 4; ++al) {
    CHECK(N[0][al] == doctest::Approx(a * adot * q.y[al]).epsilon(1e-12));
    CHECK(N[al][0] == doctest::Approx(adot / a * q.y[al]).epsilon(1e-12));
    for (int be = 1; be < 4; ++be) {
      double expv = (al == be) ? adot / a * q.y[0] : 0.0;
      CHECK(N[al][be] == doctest::Approx(expv).epsilon(1e-12));
    }
  }

  auto c = eval_conn<double>(t);
  CHECK(c.gF[0][0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c.gF[1][1] == doctest::Approx(-a * a).epsilon(1e-12));
  CHECK(c.F[0][1][1] == doctest::Approx(a * adot).epsilon(1e-12));
  CHECK(c.F[1][0][1] == doctest::Approx(adot / a).epsilon(1e-12));
  CHECK(c.F[1][1][0] == doctest::Approx(adot / a).epsilon(1e-12));
  CHECK(std::abs(c.F[0][0][0]) < 1e-12);
  for (int d = 0; d < 4; ++d)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) CHECK(std::abs(c.C[d][i][j]) < 1e-12);

  // the linear pieces contract back onto the nonlinear connection
  for (int d = 0; d < 4; ++d)
    for (int b = 0; b < 4; ++b) {
      double fy = 0, cy = 0;
      for (int e = 0; e < 4; ++e) {
        fy += c.F[d][b][e] * q.y[e];
        cy += c.C[d][b][e] * q.y[e];
      }
      CHECK(fy == doctest::Approx(N[d][b]).epsilon(1e-12));
      CHECK(std::abs(cy) < 1e-12);
    }
}

TEST_CASE("product model: homogeneity contractions and vertical tensor") {
  auto bim = build_model(testkit::kBimetric);
  TangentPoint r;
  r.y = Vec4(1.0, 0.3, 0.1, -0.2);
  auto t = table_for(bim, r, 2, 4);

  double hyy = -1.0 + 0.09 + 0.01 + 0.04;
  double kyy = -1.0 + 4 * (0.09 + 0.01 + 0.04);
  CHECK(eval_L<double>(t) == doctest::Approx(hyy * kyy).epsilon(1e-14));

  double ydL = 0;
  for (int i = 0; i < 4; ++i) ydL += r.y[i] * t.at(mi_zero(), mi_unit(i));
  CHECK(ydL == doctest::Approx(4 * hyy * kyy).epsilon(1e-13));

  auto g = eval_gL<double>(t);
  double gyy = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) gyy += g[i][j] * r.y[i] * r.y[j];
  CHECK(gyy == doctest::Approx(6 * hyy * kyy).epsilon(1e-13));

  // constant coefficients: no base dependence, but a genuine vertical tensor
  auto c = eval_conn<double>(t);
  double maxN = 0, maxF = 0, maxC = 0, maxCy = 0;
  for (int d = 0; d < 4; ++d)
    for (int i = 0; i < 4; ++i) {
      maxN = std::max(maxN, std::abs(c.N[d][i]));
      double cy = 0;
      for (int j = 0; j < 4; ++j) {
        maxF = std::max(maxF, std::abs(c.F[d][i][j]));
        maxC = std::max(maxC, std::abs(c.C[d][i][j]));
        cy += c.C[d][i][j] * r.y[j];
      }
      maxCy = std::max(maxCy, std::abs(cy));
    }
  CHECK(maxN < 1e-13);
  CHECK(maxF < 1e-12);
  CHECK(maxC > 1e-3);
  CHECK(maxCy < 1e-12);

  auto gF = eval_gF<double>(t);
  double gFyy = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) gFyy += gF[i][j] * r.y[i] * r.y[j];
  CHECK(gFyy ==
        doctest::Approx(std::sqrt(std::abs(hyy * kyy))).epsilon(1e-12));
}

TEST_CASE("closed-form jets agree with Richardson finite differences") {
  auto bim = build_model(testkit::kBimetric);
  TangentPoint r;
  r.y = Vec4(1.0, 0.3, 0.1, -0.2);

  auto jv = evaluate_jet(bim, r, 1, 2);
  FdJetOptions fine;
  fine.step = 1e-4;
  fine.richardson_levels = 2;
  auto fd = finite_difference_jet(bim, r, 1, 2, fine);
  double worst = 0;
  for (const auto& kv : jv.partials) {
    double ref = kv.second, got = fd.at(kv.first.first, kv.first.second);
    worst = std::max(worst, std::abs(got - ref) / std::max(1.0, std::abs(ref)));
  }
  CHECK(worst < 1e-6);

  // polynomial fiber dependence: a coarse step has zero truncation error
  FdJetOptions coarse;
  coarse.step = 0.05;
  coarse.richardson_levels = 2;
  double worst2 = 0;
  for (auto [xo, yo] : {std::pair{2, 2}, std::pair{1, 3}, std::pair{0, 4}}) {
    auto jv2 = evaluate_jet(bim, r, xo, yo);
    auto fd2 = finite_difference_jet(bim, r, xo, yo, coarse);
    for (const auto& kv : jv2.partials)
      worst2 = std::max(worst2,
                        std::abs(fd2.at(kv.first.first, kv.first.second) -
                                 kv.second) /
                            std::max(1.0, std::abs(kv.second)));
  }
  CHECK(worst2 < 1e-6);
}

TEST_CASE("dual-number derivative slots match finite differences") {
  auto curved = build_model(testkit::kBimetricCurved);
  TangentPoint s;
  s.x = Vec4(0.2, 0.1, -0.3, 0.0);
  s.y = Vec4(1.0, 0.25, -0.15, 0.3);
  auto t = table_for(curved, s, 2, 4);
  double h = 1e-6;

  auto N8 = eval_N<Dual8>(t);
  double worstN = 0;
  for (int dir = 0; dir < 8; ++dir) {
    TangentPoint sp = s, sm = s;
    if (dir < 4) {
      sp.x[dir] += h;
      sm.x[dir] -= h;
    } else {
      sp.y[dir - 4] += h;
      sm.y[dir - 4] -= h;
    }
    auto Np = eval_N<double>(table_for(curved, sp, 1, 3));
    auto Nm = eval_N<double>(table_for(curved, sm, 1, 3));
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        double fd = (Np[a][b] - Nm[a][b]) / (2 * h);
        worstN = std::max(
            worstN, std::abs(N8[a][b].d[static_cast<size_t>(dir)] - fd));
      }
  }
  CHECK(worstN < 1e-8);

  auto c8 = eval_conn<Dual8>(t);
  double worstC = 0;
  for (int dir = 0; dir < 8; ++dir) {
    TangentPoint sp = s, sm = s;
    if (dir < 4) {
      sp.x[dir] += h;
      sm.x[dir] -= h;
    } else {
      sp.y[dir - 4] += h;
      sm.y[dir - 4] -= h;
    }
    auto cp = eval_conn<double>(table_for(curved, sp, 2, 4));
    auto cm = eval_conn<double>(table_for(curved, sm, 2, 4));
    for (int d = 0; d < 4; ++d)
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
          double fd = (cp.F[d][i][j] - cm.F[d][i][j]) / (2 * h);
          worstC = std::max(
              worstC, std::abs(c8.F[d][i][j].d[static_cast<size_t>(dir)] - fd));
          fd = (cp.C[d][i][j] - cm.C[d][i][j]) / (2 * h);
          worstC = std::max(
              worstC, std::abs(c8.C[d][i][j].d[static_cast<size_t>(dir)] - fd));
        }
  }
  CHECK(worstC < 1e-7);
}

TEST_CASE("model construction rejects malformed specs") {
  CHECK_THROWS_AS(build_model("not json"), ConfigError);
  CHECK_THROWS_AS(build_model(R"({"nokind":1})"), ConfigError);
  CHECK_THROWS_AS(build_model(R"({"kind":"warp-drive"})"), UnknownKind);
  CHECK_THROWS_AS(
      build_model(
          R"({"kind":"custom-polynomial","degree":1,"params":{"terms":[{"powers":[1,0,0,0]}]}})"),
      DegreeOutOfRange);
  CHECK_THROWS_AS(
      build_model(
          R"({"kind":"custom-polynomial","degree":4,"params":{"terms":[{"powers":[1,0,0,0]}]}})"),
      DegreeOutOfRange);
  CHECK_THROWS_AS(
      build_model(
          R"({"kind":"metric-induced","params":{"metric":[[1,0],[0,1]]}})"),
      ConfigError);
}
