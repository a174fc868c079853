#include <doctest.h>

#include <cmath>

#include "finsler/connection.hpp"
#include "finsler/geodesic.hpp"
#include "finsler/geometry.hpp"
#include "finsler/transport.hpp"
#include "support.hpp"

using namespace finsler;

TEST_CASE("flat geodesics are straight lines with constant velocity") {
  auto mink = build_model(testkit::kMinkowski);
  TangentPoint p0;
  p0.y = Vec4(1, 0.3, 0, 0);
  auto tr = integrate_geodesic(mink, p0, 0, 10, 1e-9);
  CHECK(tr.status == TrajectoryStatus::Ok);
  const auto& last = tr.points.back();
  CHECK(last.x[0] == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(last.x[1] == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(last.y[1] == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("expanding-metric geodesic matches an independent Christoffel RK4") {
  auto flrw = build_model(testkit::kDiagScale);
  TangentPoint q0;
  q0.y = Vec4(1.0, 0.2, 0.1, -0.05);
  auto traj = integrate_geodesic(flrw, q0, 0, 2, 1e-10);
  REQUIRE(traj.status == TrajectoryStatus::Ok);

  // fixed-step RK4 on x'' = -Gamma(x) x' x' with the closed-form symbols
  auto gamma_rhs = [](const Eigen::VectorXd& z) {
    double t = z[0];
    double a = 1 + 0.1 * t, ad = 0.1;
    Eigen::VectorXd o(8);
    o.head<4>() = z.tail<4>();
    Vec4 y = z.tail<4>();
    double acc0 = 0;
    for (int al = 1; al < 4; ++al) acc0 += a * ad * y[al] * y[al];
    o[4] = -acc0;
    for (int al = 1; al < 4; ++al) o[4 + al] = -2.0 * (ad / a) * y[0] * y[al];
    return o;
  };
  Eigen::VectorXd z(8);
  z << q0.x, q0.y;
  int nsteps = 20000;
  double h = 2.0 / nsteps;
  for (int i = 0; i < nsteps; ++i) {
    Eigen::VectorXd k1 = gamma_rhs(z), k2 = gamma_rhs(z + h / 2 * k1),
                    k3 = gamma_rhs(z + h / 2 * k2), k4 = gamma_rhs(z + h * k3);
    z += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  double dx = 0;
  for (int i = 0; i < 4; ++i)
    dx = std::max(dx, std::abs(traj.points.back().x[i] - z[i]));
  CHECK(dx < 1e-6);

  double f0 = traj.F.front(), fdrift = 0;
  for (double f : traj.F) fdrift = std::max(fdrift, std::abs(f - f0));
  CHECK(fdrift <= 10 * 1e-10);
}

TEST_CASE("norm stays conserved along a long curved-product geodesic") {
  auto bimc = build_model(testkit::kBimetricCurved);
  TangentPoint q0;
  q0.y = Vec4(1.0, 0.15, -0.1, 0.05);
  auto traj = integrate_geodesic(bimc, q0, 0, 10, 1e-9);
  REQUIRE(traj.status == TrajectoryStatus::Ok);
  double f0 = traj.F.front(), fd = 0;
  for (double f : traj.F) fd = std::max(fd, std::abs(f - f0));
  CHECK(fd <= 1e-7);
}

TEST_CASE("proper time: unit clock, reparametrization invariance, null rays") {
  auto mink = build_model(testkit::kMinkowski);
  TangentPoint q0;
  q0.y = Vec4(1, 0, 0, 0);
  auto traj = integrate_geodesic(mink, q0, 0, 5, 1e-9);
  CHECK(proper_time(mink, traj) == doctest::Approx(5.0).epsilon(1e-10));

  // same worldline traversed at quadratic parameter speed
  Trajectory re;
  int ns = 101;
  for (int i = 0; i < ns; ++i) {
    double s = 5.0 * i / (ns - 1);
    TangentPoint q;
    q.x = Vec4((s * s + 5 * s) / 10.0, 0, 0, 0);
    q.y = Vec4((2 * s + 5) / 10.0, 0, 0, 0);
    re.tau.push_back(s);
    re.points.push_back(q);
    re.F.push_back(finsler_function(mink, q));
  }
  CHECK(proper_time(mink, re) == doctest::Approx(5.0).epsilon(1e-8));

  TangentPoint n0;
  n0.y = Vec4(1, 1, 0, 0);
  auto trn = integrate_geodesic(mink, n0, 0, 5, 1e-9);
  CHECK(std::abs(proper_time(mink, trn)) < 1e-10);
}

TEST_CASE("fiber autoparallels: straight in the metric case, reversible") {
  auto flrw = build_model(testkit::kDiagScale);
  auto bimc = build_model(testkit::kBimetricCurved);
  Vec4 x = Vec4::Zero();
  Vec4 y0(1, 0.2, 0, 0), y1(1.1, 0.1, 0.05, 0);

  auto c = vertical_autoparallel(flrw, x, y0, y1);
  CHECK(c.newton_iterations == 0);
  double worst = 0;
  for (size_t i = 0; i < c.s.size(); ++i) {
    Vec4 expect = y0 + c.s[i] * (y1 - y0);
    worst = std::max(worst, (c.y[i] - expect).norm());
  }
  CHECK(worst < 1e-10);

  auto c2 = vertical_autoparallel(bimc, x, y0, y0);
  CHECK(c2.newton_iterations == 0);
  CHECK(c2.residual == 0.0);

  Vec4 yb(1.02, 0.14, 0.03, -0.02);
  auto cf = vertical_autoparallel(bimc, x, y0, yb);
  auto cb = vertical_autoparallel(bimc, x, yb, y0);
  auto interp = [](const FiberCurve& fc, double s) {
    size_t i = 0;
    while (i + 2 < fc.s.size() && fc.s[i + 1] < s) ++i;
    double t = (s - fc.s[i]) / (fc.s[i + 1] - fc.s[i]);
    return Vec4((1 - t) * fc.y[i] + t * fc.y[i + 1]);
  };
  CHECK((interp(cf, 0.5) - interp(cb, 0.5)).norm() < 1e-6);
}

TEST_CASE("observer maps on the flat model reduce to ordinary boosts") {
  auto mink = build_model(testkit::kMinkowski);
  Vec4 x = Vec4::Zero();
  FrameAtPoint f;
  double chi = 0.3;
  FrameAtPoint fp;
  fp.f = Mat4::Identity();
  fp.f(0, 0) = std::cosh(chi);
  fp.f(1, 0) = std::sinh(chi);
  fp.f(0, 1) = std::sinh(chi);
  fp.f(1, 1) = std::cosh(chi);
  fp.finv = fp.f.inverse();

  auto gl = generalized_lorentz(mink, x, f, fp);
  Mat4 boost = Mat4::Identity();
  boost(0, 0) = std::cosh(chi);
  boost(1, 0) = std::sinh(chi);
  boost(0, 1) = std::sinh(chi);
  boost(1, 1) = std::cosh(chi);
  CHECK((gl.lambda - boost).cwiseAbs().maxCoeff() < 1e-8);

  auto gid = generalized_lorentz(mink, x, f, f);
  CHECK((gid.lambda - Mat4::Identity()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("observer map between curved-product frames is an isometry") {
  auto bimc = build_model(testkit::kBimetricCurved);
  Vec4 x = Vec4::Zero();
  auto mk_frame = [&](const Vec4& yobs) {
    TangentPoint p{x, yobs};
    auto pn = normalize_to_shell(bimc, p);
    Mat4 G = finsler_metric_gF(bimc, pn).matrix();
    FrameAtPoint fr;
    fr.x = x;
    Mat4 cols;
    cols.col(0) = pn.y;
    cols.col(1) = Vec4(0, 1, 0, 0);
    cols.col(2) = Vec4(0, 0, 1, 0);
    cols.col(3) = Vec4(0, 0, 0, 1);
    for (int i = 0; i < 4; ++i) {
      Vec4 v = cols.col(i);
      for (int j = 0; j < i; ++j) {
        double num = v.transpose() * G * cols.col(j);
        double den = cols.col(j).transpose() * G * cols.col(j);
        v -= (num / den) * cols.col(j);
      }
      double q = v.transpose() * G * v;
      v /= std::sqrt(i == 0 ? q : -q);
      cols.col(i) = v;
    }
    fr.f = cols;
    fr.finv = cols.inverse();
    return fr;
  };
  auto f = mk_frame(Vec4(1, 0.05, 0, 0));
  auto fp = mk_frame(Vec4(1, 0.15, 0.05, 0));
  auto gl = generalized_lorentz(bimc, x, f, fp);
  CHECK(gl.orthonormality_residual <= 1e-7);
  CHECK(gl.eta_residual <= 1e-7);
}

TEST_CASE("linear connection coefficients satisfy metric compatibility") {
  auto bimc = build_model(testkit::kBimetricCurved);
  TangentPoint p;
  p.x = Vec4(0.1, 0.2, -0.1, 0.05);
  p.y = Vec4(1.0, 0.2, -0.1, 0.15);
  auto conn = linear_connection(bimc, p);
  SplitVector X;
  X.h = Vec4(0.3, -0.2, 0.5, 0.1);
  X.v = Vec4(-0.1, 0.4, 0.2, -0.3);
  Mat4 N = nonlinear_connection(bimc, p).N;

  // derivative of the metric along the adapted lift of X, minus the
  // connection terms, must vanish
  Vec4 dx = X.h, dy = X.v - N * X.h;
  double h = 1e-6;
  TangentPoint pp{p.x + h * dx, p.y + h * dy}, pm{p.x - h * dx, p.y - h * dy};
  Mat4 dG = (finsler_metric_gF(bimc, pp).matrix() -
             finsler_metric_gF(bimc, pm).matrix()) /
            (2 * h);
  Mat4 G = finsler_metric_gF(bimc, p).matrix();
  Mat4 res = dG;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int d = 0; d < 4; ++d) {
        double gam_da = 0, gam_db = 0;
        for (int c = 0; c < 4; ++c) {
          gam_da += X.h[c] * conn.Fc[d](c, a) + X.v[c] * conn.Cc[d](c, a);
          gam_db += X.h[c] * conn.Fc[d](c, b) + X.v[c] * conn.Cc[d](c, b);
        }
        res(a, b) -= gam_da * G(d, b) + gam_db * G(a, d);
      }
  CHECK(res.cwiseAbs().maxCoeff() < 1e-8);
}
