#include "finsler/transport.hpp"

#include <cmath>

#include "finsler/detail/ode.hpp"
#include "finsler/detail/pipeline.hpp"
#include "finsler/geometry.hpp"

namespace finsler {

namespace {

constexpr double kFrameTol = 1e-7;

// C-coefficients at (x, y), guarding the null set where g^F blows up.
detail::ST3<double> vertical_coeffs(const FundamentalModel& m, const Vec4& x,
                                    const Vec4& y) {
  auto t = detail::build_jet_table(m, x, y, 0, 3);
  double L = detail::eval_L<double>(t);
  if (std::abs(L) < kEpsNull * detail::null_scale(y, m.degree))
    throw NullCrossing("fiber curve reached the null set");
  return detail::eval_C<double>(t);
}

// Integrates the autoparallel equation from (y0, v) over s in [0,1].
detail::OdeSolution shoot(const FundamentalModel& m, const Vec4& x,
                          const Vec4& y0, const Vec4& v) {
  auto rhs = [&](double, const Eigen::VectorXd& z) {
    Vec4 y = z.head<4>(), yd = z.tail<4>();
    auto C = vertical_coeffs(m, x, y);
    Eigen::VectorXd out(8);
    out.head<4>() = yd;
    for (int c = 0; c < 4; ++c) {
      double acc = 0.0;
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) acc += C[c][a][b] * yd[a] * yd[b];
      out[4 + c] = -acc;
    }
    return out;
  };
  Eigen::VectorXd z0(8);
  z0 << y0, v;
  detail::OdeOptions opt;
  opt.tol = 1e-11;
  opt.hmax = 1.0 / 16.0;
  return detail::integrate_ode(rhs, z0, 0.0, 1.0, opt);
}

Vec4 endpoint(const detail::OdeSolution& sol) {
  if (sol.status != detail::OdeStatus::Ok)
    throw ShootingDiverged("fiber integration failed: " + sol.message);
  return sol.z.back().head<4>();
}

void check_fiber_point(const FundamentalModel& m, const Vec4& x, const Vec4& y,
                       const char* which) {
  auto t = detail::build_jet_table(m, x, y, 0, 2);
  double L = detail::eval_L<double>(t);
  if (std::abs(L) < kEpsNull * detail::null_scale(y, m.degree))
    throw NullVectorError(std::string(which) + " endpoint lies on the null set");
  auto g = detail::eval_gL<double>(t);
  Mat4 gm;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) gm(a, b) = g[a][b];
  if (is_degenerate(gm, kEpsDet))
    throw DegenerateHessian(std::string(which) +
                            " endpoint has a degenerate Hessian");
}

}  // namespace

FiberCurve vertical_autoparallel(const FundamentalModel& m, const Vec4& x,
                                 const Vec4& y0, const Vec4& y1) {
  check_fiber_point(m, x, y0, "start");
  check_fiber_point(m, x, y1, "target");

  const double target_res = 1e-9 * y1.norm();
  Vec4 v = y1 - y0;
  auto sol = shoot(m, x, y0, v);
  Vec4 G = endpoint(sol) - y1;
  int iters = 0;

  while (G.norm() > target_res) {
    if (iters >= 50)
      throw ShootingDiverged("no convergence within the iteration budget");
    ++iters;
    // finite-difference Jacobian dG/dv
    Mat4 J;
    double step = 1e-6 * std::max(1.0, v.norm());
    for (int j = 0; j < 4; ++j) {
      Vec4 vp = v, vm = v;
      vp[j] += step;
      vm[j] -= step;
      J.col(j) = (endpoint(shoot(m, x, y0, vp)) - endpoint(shoot(m, x, y0, vm))) /
                 (2.0 * step);
    }
    Vec4 dv = J.fullPivLu().solve(G);
    double damp = 1.0;
    for (int half = 0;; ++half) {
      auto trial = shoot(m, x, y0, v - damp * dv);
      Vec4 Gt = endpoint(trial) - y1;
      if (Gt.norm() < G.norm() || Gt.norm() <= target_res) {
        v -= damp * dv;
        sol = std::move(trial);
        G = Gt;
        break;
      }
      if (half >= 10)
        throw ShootingDiverged("damping failed to reduce the residual");
      damp *= 0.5;
    }
  }

  FiberCurve out;
  out.s = sol.t;
  for (const auto& z : sol.z) {
    out.y.push_back(z.head<4>());
    out.ydot.push_back(z.tail<4>());
  }
  out.newton_iterations = iters;
  out.residual = G.norm();
  return out;
}

Mat4 transport_along(const FundamentalModel& m, const Vec4& x,
                     const FiberCurve& curve, const Mat4& w) {
  auto rhs = [&](double, const Eigen::VectorXd& z) {
    Vec4 y = z.head<4>(), yd = z.segment<4>(4);
    auto C = vertical_coeffs(m, x, y);
    Eigen::VectorXd out(24);
    out.head<4>() = yd;
    for (int c = 0; c < 4; ++c) {
      double acc = 0.0;
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) acc += C[c][a][b] * yd[a] * yd[b];
      out[4 + c] = -acc;
    }
    for (int col = 0; col < 4; ++col)
      for (int c = 0; c < 4; ++c) {
        double acc = 0.0;
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b)
            acc += C[c][a][b] * yd[a] * z[8 + 4 * col + b];
        out[8 + 4 * col + c] = -acc;
      }
    return out;
  };
  Eigen::VectorXd z0(24);
  z0.head<4>() = curve.y.front();
  z0.segment<4>(4) = curve.ydot.front();
  for (int col = 0; col < 4; ++col) z0.segment<4>(8 + 4 * col) = w.col(col);
  detail::OdeOptions opt;
  opt.tol = 1e-11;
  opt.hmax = 1.0 / 16.0;
  auto sol = detail::integrate_ode(rhs, z0, 0.0, 1.0, opt);
  if (sol.status != detail::OdeStatus::Ok)
    throw ShootingDiverged("transport integration failed: " + sol.message);
  Mat4 out;
  for (int col = 0; col < 4; ++col)
    out.col(col) = sol.z.back().segment<4>(8 + 4 * col);
  return out;
}

namespace {

// Residual of the orthonormality relation g^F(x, anchor)(f_i, f_j) = -eta_ij.
Mat4 gram_residual_frame(const FundamentalModel& m, const Vec4& x,
                         const Vec4& anchor, const Mat4& f) {
  TangentPoint p{x, anchor};
  Mat4 G = finsler_metric_gF(m, p).matrix();
  return f.transpose() * G * f + minkowski_eta();
}

}  // namespace

GeneralizedLorentz generalized_lorentz(const FundamentalModel& m,
                                       const Vec4& x, const FrameAtPoint& f,
                                       const FrameAtPoint& f_prime) {
  if (gram_residual_frame(m, x, f.f.col(0), f.f).cwiseAbs().maxCoeff() >
      kFrameTol)
    throw FrameNotOrthonormal("input frame f is not g^F-orthonormal");
  if (gram_residual_frame(m, x, f_prime.f.col(0), f_prime.f)
          .cwiseAbs()
          .maxCoeff() > kFrameTol)
    throw FrameNotOrthonormal("input frame f' is not g^F-orthonormal");

  FiberCurve curve = vertical_autoparallel(m, x, f.f.col(0), f_prime.f.col(0));
  Mat4 transported = transport_along(m, x, curve, f.f);

  GeneralizedLorentz out;
  out.transported.x = x;
  out.transported.f = transported;
  out.transported.finv = transported.inverse();
  out.lambda = out.transported.finv * f_prime.f;
  out.orthonormality_residual =
      gram_residual_frame(m, x, f_prime.f.col(0), transported)
          .cwiseAbs()
          .maxCoeff();
  out.eta_residual = (out.lambda.transpose() * minkowski_eta() * out.lambda -
                      minkowski_eta())
                         .cwiseAbs()
                         .maxCoeff();
  out.shooting_iterations = curve.newton_iterations;
  return out;
}

}  // namespace finsler
