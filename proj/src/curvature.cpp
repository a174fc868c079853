#include "finsler/curvature.hpp"

#include <cmath>

#include "finsler/detail/pipeline.hpp"
#include "finsler/geometry.hpp"

namespace finsler {

using detail::table_for;

namespace {

// delta_b applied to a quantity whose x/y-derivatives sit in the dual slots:
// slot b is d/dx^b, slot 4+e is d/dy^e.
double berwald_slot(const Dual8& q, const detail::SM<Dual8>& N, int b) {
  double v = q.d[static_cast<size_t>(b)];
  for (int e = 0; e < 4; ++e)
    v -= N[e][b].v * q.d[static_cast<size_t>(4 + e)];
  return v;
}

}  // namespace

NonlinearCurvatureValue nonlinear_curvature(const FundamentalModel& m,
                                            const TangentPoint& p) {
  auto t = table_for(m, p, 2, 4);
  auto N = detail::eval_N<Dual8>(t);
  NonlinearCurvatureValue out;
  for (int c = 0; c < 4; ++c)
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) {
        double v = berwald_slot(N[c][a], N, b) - berwald_slot(N[c][b], N, a);
        out.R[c][a][b] = v;
        out.R[c][b][a] = -v;
      }
  return out;
}

LinearCurvatureValue linear_curvature(const FundamentalModel& m,
                                      const TangentPoint& p) {
  auto t = table_for(m, p, 2, 4);
  double L = detail::eval_L<double>(t);
  if (std::abs(L) < kEpsNull * detail::null_scale(p.y, m.degree))
    throw NullVectorError("curvature is undefined on the null set");
  auto conn = detail::eval_conn<Dual8>(t);
  const auto& N = conn.N;
  const auto& F = conn.F;
  const auto& C = conn.C;

  // R^e_ab of the nonlinear connection, reused in the R and P coefficients.
  Tensor3 Rnl{};
  for (int e = 0; e < 4; ++e)
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        Rnl[e][a][b] =
            berwald_slot(N[e][a], N, b) - berwald_slot(N[e][b], N, a);

  LinearCurvatureValue out;
  for (int d = 0; d < 4; ++d)
    for (int c = 0; c < 4; ++c)
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
          double r = berwald_slot(F[d][c][a], N, b) -
                     berwald_slot(F[d][c][b], N, a);
          double pp = F[d][c][a].d[static_cast<size_t>(4 + b)] -
                      berwald_slot(C[d][c][b], N, a);
          double s = C[d][c][a].d[static_cast<size_t>(4 + b)] -
                     C[d][c][b].d[static_cast<size_t>(4 + a)];
          for (int e = 0; e < 4; ++e) {
            r += F[e][c][a].v * F[d][e][b].v - F[e][c][b].v * F[d][e][a].v +
                 C[d][c][e].v * Rnl[e][a][b];
            pp += F[e][c][a].v * C[d][e][b].v - C[e][c][b].v * F[d][e][a].v +
                  C[d][c][e].v * N[e][a].d[static_cast<size_t>(4 + b)];
            s += C[e][c][a].v * C[d][e][b].v - C[e][c][b].v * C[d][e][a].v;
          }
          out.Rlin[d][c][a][b] = r;
          out.Plin[d][c][a][b] = pp;
          out.Slin[d][c][a][b] = s;
        }
  return out;
}

double gravity_action_density(const FundamentalModel& m,
                              const TangentPoint& p) {
  auto R = nonlinear_curvature(m, p).R;
  double v = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) v += R[a][a][b] * p.y[b];
  return v;
}

namespace {

// Richardson-extrapolated central difference of a matrix-valued function.
template <class Fn>
Mat4 fd_matrix(const Fn& fn, const Vec4& x, int axis, double h) {
  auto diff = [&](double step) {
    Vec4 xp = x, xm = x;
    xp[axis] += step;
    xm[axis] -= step;
    return Mat4((fn(xp) - fn(xm)) / (2.0 * step));
  };
  Mat4 d1 = diff(h), d2 = diff(h / 2.0);
  return (4.0 * d2 - d1) / 3.0;
}

std::array<Mat4, 4> christoffels_at(const MetricFunction& metric_fn,
                                    const Vec4& x, double h) {
  Mat4 g = metric_fn(x);
  Mat4 ginv = g.inverse();
  std::array<Mat4, 4> dg;
  for (int a = 0; a < 4; ++a) dg[static_cast<size_t>(a)] = fd_matrix(metric_fn, x, a, h);
  std::array<Mat4, 4> gamma;
  for (int c = 0; c < 4; ++c) {
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        double acc = 0.0;
        for (int d = 0; d < 4; ++d)
          acc += ginv(c, d) * (dg[static_cast<size_t>(a)](b, d) +
                               dg[static_cast<size_t>(b)](a, d) -
                               dg[static_cast<size_t>(d)](a, b));
        gamma[static_cast<size_t>(c)](a, b) = 0.5 * acc;
      }
  }
  return gamma;
}

}  // namespace

RiemannOracle riemann_oracle(const MetricFunction& metric_fn, const Vec4& x) {
  const double h_inner = 1e-5;  // metric differences
  const double h_outer = 2e-4;  // Christoffel differences
  RiemannOracle out;
  out.christoffel = christoffels_at(metric_fn, x, h_inner);

  // d_a Gamma by Richardson central differences of the Christoffel field
  std::array<std::array<Mat4, 4>, 4> dgamma;  // dgamma[a][c] = d_a Gamma^c
  for (int a = 0; a < 4; ++a) {
    auto diff = [&](double step) {
      Vec4 xp = x, xm = x;
      xp[a] += step;
      xm[a] -= step;
      auto gp = christoffels_at(metric_fn, xp, h_inner);
      auto gm = christoffels_at(metric_fn, xm, h_inner);
      std::array<Mat4, 4> d;
      for (int c = 0; c < 4; ++c)
        d[static_cast<size_t>(c)] =
            (gp[static_cast<size_t>(c)] - gm[static_cast<size_t>(c)]) /
            (2.0 * step);
      return d;
    };
    auto d1 = diff(h_outer), d2 = diff(h_outer / 2.0);
    for (int c = 0; c < 4; ++c)
      dgamma[static_cast<size_t>(a)][static_cast<size_t>(c)] =
          (4.0 * d2[static_cast<size_t>(c)] - d1[static_cast<size_t>(c)]) /
          3.0;
  }

  const auto& gam = out.christoffel;
  double scale = 1.0;
  for (int c = 0; c < 4; ++c)
    scale = std::max(scale, gam[static_cast<size_t>(c)].cwiseAbs().maxCoeff());
  for (int d = 0; d < 4; ++d)
    for (int c = 0; c < 4; ++c)
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
          double v = dgamma[static_cast<size_t>(b)][static_cast<size_t>(d)](c, a) -
                     dgamma[static_cast<size_t>(a)][static_cast<size_t>(d)](c, b);
          for (int e = 0; e < 4; ++e)
            v += gam[static_cast<size_t>(e)](c, a) * gam[static_cast<size_t>(d)](e, b) -
                 gam[static_cast<size_t>(e)](c, b) * gam[static_cast<size_t>(d)](e, a);
          out.riemann[d][c][a][b] = v;
        }

  // Self-consistency: the first Bianchi identity (cyclic sum over the lower
  // indices) and the antisymmetry of the lowered first pair.
  Mat4 g = metric_fn(x);
  double worst = 0.0;
  for (int d = 0; d < 4; ++d)
    for (int c = 0; c < 4; ++c)
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
          worst = std::max(worst,
                           std::abs(out.riemann[d][c][a][b] +
                                    out.riemann[d][a][b][c] +
                                    out.riemann[d][b][c][a]));
          double low_dc = 0.0, low_cd = 0.0;
          for (int e = 0; e < 4; ++e) {
            low_dc += g(d, e) * out.riemann[e][c][a][b];
            low_cd += g(c, e) * out.riemann[e][d][a][b];
          }
          worst = std::max(worst, std::abs(low_dc + low_cd));
        }
  if (worst > 1e-6 * std::max(1.0, scale * scale))
    throw OracleInconsistent("curvature oracle violates the Bianchi checks");

  for (int d = 0; d < 4; ++d)
    for (int b = 0; b < 4; ++b) {
      double acc = 0.0;
      for (int a = 0; a < 4; ++a) acc += out.riemann[a][d][a][b];
      out.ric(d, b) = acc;
    }
  return out;
}

}  // namespace finsler
