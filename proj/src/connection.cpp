#include "finsler/connection.hpp"

#include "finsler/detail/pipeline.hpp"

namespace finsler {

using detail::table_for;

namespace {

Mat4 to_mat(const detail::SM<double>& a) {
  Mat4 m;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m(i, j) = a[i][j];
  return m;
}

void require_gL_nondegenerate(const detail::JetTable& t) {
  auto g = detail::eval_gL<double>(t);
  Mat4 gm;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) gm(a, b) = g[a][b];
  if (is_degenerate(gm, kEpsDet))
    throw DegenerateHessian("Hessian metric is degenerate at this point");
}

}  // namespace

NonlinearConnectionValue nonlinear_connection(const FundamentalModel& m,
                                              const TangentPoint& p) {
  auto t = table_for(m, p, 1, 3);
  require_gL_nondegenerate(t);
  return {to_mat(detail::eval_N<double>(t))};
}

Vec4 berwald_delta_apply(const FundamentalModel& m, const TangentPoint& p,
                         const JetValue& scalar_jet) {
  Mat4 N = nonlinear_connection(m, p).N;
  Vec4 out;
  for (int a = 0; a < 4; ++a) {
    MultiIndex ua{0, 0, 0, 0};
    ua[static_cast<size_t>(a)] = 1;
    double v = scalar_jet.at(ua, {0, 0, 0, 0});
    for (int b = 0; b < 4; ++b) {
      MultiIndex ub{0, 0, 0, 0};
      ub[static_cast<size_t>(b)] = 1;
      v -= N(b, a) * scalar_jet.at({0, 0, 0, 0}, ub);
    }
    out[a] = v;
  }
  return out;
}

LinearConnectionValue linear_connection(const FundamentalModel& m,
                                        const TangentPoint& p) {
  auto t = table_for(m, p, 1, 3);
  double L = detail::eval_L<double>(t);
  if (std::abs(L) < kEpsNull * detail::null_scale(p.y, m.degree))
    throw NullVectorError("linear connection is undefined on the null set");
  require_gL_nondegenerate(t);
  auto conn = detail::eval_conn<double>(t);
  LinearConnectionValue out;
  for (int c = 0; c < 4; ++c) {
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        out.Fc[static_cast<size_t>(c)](a, b) = conn.F[c][a][b];
        out.Cc[static_cast<size_t>(c)](a, b) = conn.C[c][a][b];
      }
  }
  return out;
}

SplitVector covariant_derivative(const FundamentalModel& m,
                                 const TangentPoint& p,
                                 const SplitVector& direction,
                                 const VectorFieldJet& field) {
  auto t = table_for(m, p, 1, 3);
  double L = detail::eval_L<double>(t);
  if (std::abs(L) < kEpsNull * detail::null_scale(p.y, m.degree))
    throw NullVectorError("covariant derivative is undefined on the null set");
  require_gL_nondegenerate(t);
  auto conn = detail::eval_conn<double>(t);

  // gamma^c_b = direction contracted into the connection coefficients
  Mat4 gamma = Mat4::Zero();
  for (int c = 0; c < 4; ++c)
    for (int b = 0; b < 4; ++b)
      for (int a = 0; a < 4; ++a)
        gamma(c, b) += direction.h[a] * conn.F[c][a][b] +
                       direction.v[a] * conn.C[c][a][b];

  auto derive = [&](const Vec4& w, const Mat4& dw_dx, const Mat4& dw_dy) {
    Vec4 r = Vec4::Zero();
    for (int c = 0; c < 4; ++c) {
      double v = 0.0;
      for (int a = 0; a < 4; ++a) {
        double delta_a = dw_dx(c, a);
        for (int b = 0; b < 4; ++b) delta_a -= conn.N[b][a] * dw_dy(c, b);
        v += direction.h[a] * delta_a + direction.v[a] * dw_dy(c, a);
      }
      for (int b = 0; b < 4; ++b) v += gamma(c, b) * w[b];
      r[c] = v;
    }
    return r;
  };

  SplitVector out;
  out.h = derive(field.h, field.dh_dx, field.dh_dy);
  out.v = derive(field.v, field.dv_dx, field.dv_dy);
  return out;
}

}  // namespace finsler
