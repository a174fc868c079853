#include "finsler/cartan.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "finsler/curvature.hpp"
#include "finsler/detail/parallel.hpp"
#include "finsler/detail/pipeline.hpp"
#include "finsler/errors.hpp"
#include "finsler/geometry.hpp"

namespace finsler {

namespace {

constexpr double kFrameGramTol = 1e-7;

Mat4 to_mat(const detail::SM<double>& a) {
  Mat4 m;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m(i, j) = a[i][j];
  return m;
}

// Connection data at the time axis of a frame point, plus first partials of
// the linear coefficients: dF[c][a][b][k] holds the derivative of F^c_ab in
// x^k for k = 0..3 and in y^(k-4) for k = 4..7, likewise dC.
struct ConnDerivs {
  double F[4][4][4];
  double C[4][4][4];
  double dF[4][4][4][8];
  double dC[4][4][4][8];
};

void require_nonnull(const FundamentalModel& m, const detail::JetTable& t,
                     const Vec4& y) {
  double L = detail::eval_L<double>(t);
  if (std::abs(L) < kEpsNull * detail::null_scale(y, m.degree))
    throw NullVectorError(
        "frame-bundle connection is undefined for a null time axis");
}

detail::ConnCoeffs<double> conn_at(const FundamentalModel& m,
                                   const TangentPoint& p) {
  auto t = detail::table_for(m, p, 1, 3);
  require_nonnull(m, t, p.y);
  return detail::eval_conn<double>(t);
}

ConnDerivs conn_derivs(const FundamentalModel& m, const TangentPoint& p) {
  using D8 = Dual<double, 8>;
  auto t = detail::table_for(m, p, 2, 4);
  require_nonnull(m, t, p.y);
  auto c8 = detail::eval_conn<D8>(t);
  ConnDerivs out;
  for (int c = 0; c < 4; ++c)
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        out.F[c][a][b] = c8.F[c][a][b].v;
        out.C[c][a][b] = c8.C[c][a][b].v;
        for (int k = 0; k < 8; ++k) {
          out.dF[c][a][b][k] = c8.F[c][a][b].d[static_cast<size_t>(k)];
          out.dC[c][a][b][k] = c8.C[c][a][b].d[static_cast<size_t>(k)];
        }
      }
  return out;
}

void require_bundle_frame(const detail::ConnCoeffs<double>& conn,
                          const FrameAtPoint& fr) {
  Mat4 gram = fr.f.transpose() * to_mat(conn.gF) * fr.f + minkowski_eta();
  if (!(gram.norm() <= kFrameGramTol))
    throw FrameNotOrthonormal("frame is not orthonormal for g^F at its point");
  if (!((fr.finv * fr.f - Mat4::Identity()).norm() <= 1e-9))
    throw FrameNotOrthonormal("coframe does not invert the frame");
}

// A(v) from precomputed coefficients; skips all validation so it can also be
// evaluated on frames that drift off the orthonormal bundle.
AlgebraElement connection_value(const detail::ConnCoeffs<double>& conn,
                                const Mat4& f, const Mat4& finv,
                                const Vec20& v) {
  Vec4 dx = bundle_dx(v);
  Mat4 df = bundle_df(v);
  AlgebraElement a;
  a.z = finv * dx;
  // Motion of the time axis against the nonlinear connection.
  Vec4 dyc = df.col(0);
  for (int c = 0; c < 4; ++c)
    for (int d = 0; d < 4; ++d) dyc[c] += conn.N[c][d] * dx[d];
  Mat4 coeff;  // coeff(a, b) = F^a_bc dx^c + C^a_bc dyc^c
  for (int au = 0; au < 4; ++au)
    for (int b = 0; b < 4; ++b) {
      double acc = 0.0;
      for (int c = 0; c < 4; ++c)
        acc += conn.F[au][b][c] * dx[c] + conn.C[au][b][c] * dyc[c];
      coeff(au, b) = acc;
    }
  a.h = finv * df + finv * coeff * f;
  return a;
}

// Field components of the generated vector field at an arbitrary frame:
// dx^a = z^i f_i^a, df_j^a = h^i_j f_i^a - h^i_0 f_i^b f_j^c C^a_bc
// - z^i f_i^b f_j^c F^a_bc.
Vec20 field_value(const detail::ConnCoeffs<double>& conn, const Mat4& f,
                  const AlgebraElement& a) {
  Vec4 u = f * a.z;        // translation push, z^i f_i^a
  Vec4 w = f * a.h.col(0);  // time-axis part of the Lorentz action
  Mat4 corr;  // corr(c, b) = C^c_db w^d + F^c_db u^d
  for (int c = 0; c < 4; ++c)
    for (int b = 0; b < 4; ++b) {
      double acc = 0.0;
      for (int d = 0; d < 4; ++d)
        acc += conn.C[c][d][b] * w[d] + conn.F[c][d][b] * u[d];
      corr(c, b) = acc;
    }
  Mat4 df = f * a.h - corr * f;
  return pack_bundle_tangent(u, df);
}

// 20x20 Jacobian of field_value in the ambient coordinates (x, f), with the
// coefficient derivatives entering through x directly and through y = f_0.
Mat20 field_jacobian(const ConnDerivs& cd, const Mat4& f,
                     const AlgebraElement& a) {
  Mat20 J = Mat20::Zero();
  Vec4 u = f * a.z;
  Vec4 w = f * a.h.col(0);
  for (int ac = 0; ac < 4; ++ac)
    for (int k = 0; k < 4; ++k) J(ac, 4 + 4 * k + ac) = a.z[k];
  for (int j = 0; j < 4; ++j)
    for (int c = 0; c < 4; ++c) {
      int row = 4 + 4 * j + c;
      for (int d = 0; d < 4; ++d) {
        double acc = 0.0;
        for (int b = 0; b < 4; ++b)
          for (int e = 0; e < 4; ++e)
            acc -= w[b] * f(e, j) * cd.dC[c][b][e][d] +
                   u[b] * f(e, j) * cd.dF[c][b][e][d];
        J(row, d) = acc;
      }
      for (int mm = 0; mm < 4; ++mm)
        for (int e = 0; e < 4; ++e) {
          double acc = 0.0;
          if (c == e) acc += a.h(mm, j);
          for (int d = 0; d < 4; ++d)
            acc -= a.h(mm, 0) * f(d, j) * cd.C[c][e][d] +
                   a.z[mm] * f(d, j) * cd.F[c][e][d];
          if (mm == j)
            for (int b = 0; b < 4; ++b)
              acc -= w[b] * cd.C[c][b][e] + u[b] * cd.F[c][b][e];
          if (mm == 0)
            for (int b = 0; b < 4; ++b)
              for (int d = 0; d < 4; ++d)
                acc -= w[b] * f(d, j) * cd.dC[c][b][d][4 + e] +
                       u[b] * f(d, j) * cd.dF[c][b][d][4 + e];
          J(row, 4 + 4 * mm + e) = acc;
        }
    }
  return J;
}

Vec20 field_value_at(const FundamentalModel& m, const Vec4& x, const Mat4& f,
                     const AlgebraElement& a) {
  return field_value(conn_at(m, {x, f.col(0)}), f, a);
}

// [field(a), field(b)] by directional central differences along the field
// values themselves, one Richardson pass.
Vec20 commutator_fd(const FundamentalModel& m, const FrameAtPoint& fr,
                    const detail::ConnCoeffs<double>& conn,
                    const AlgebraElement& a, const AlgebraElement& b,
                    Vec20* fd_error) {
  Vec20 wa = field_value(conn, fr.f, a);
  Vec20 wb = field_value(conn, fr.f, b);
  double scale = std::max(1.0, std::max(fr.x.norm(), fr.f.norm()));
  auto directional = [&](const Vec20& dir, const AlgebraElement& field,
                         Vec20* err) {
    double h0 = 1e-5 * scale / std::max(1.0, dir.norm());
    if (!(h0 > 0.0) || !std::isfinite(h0))
      throw StepFailure("difference step underflow in field commutator");
    std::array<Vec20, 2> d;
    for (int k = 0; k < 2; ++k) {
      double h = h0 / (1 << k);
      Vec4 xp = fr.x + h * bundle_dx(dir);
      Vec4 xm = fr.x - h * bundle_dx(dir);
      Mat4 fp = fr.f + h * bundle_df(dir);
      Mat4 fm = fr.f - h * bundle_df(dir);
      d[static_cast<size_t>(k)] =
          (field_value_at(m, xp, fp, field) - field_value_at(m, xm, fm, field)) /
          (2.0 * h);
    }
    if (err) *err += (d[1] - d[0]).cwiseAbs() / 3.0;
    return ((4.0 * d[1] - d[0]) / 3.0).eval();
  };
  if (fd_error) fd_error->setZero();
  Vec20 dab = directional(wa, b, fd_error);  // derivative of field(b) along a
  Vec20 dba = directional(wb, a, fd_error);
  return dab - dba;
}

Vec20 commutator_analytic(const FundamentalModel& m, const FrameAtPoint& fr,
                          const detail::ConnCoeffs<double>& conn,
                          const AlgebraElement& a, const AlgebraElement& b) {
  ConnDerivs cd = conn_derivs(m, {fr.x, fr.column(0)});
  Vec20 wa = field_value(conn, fr.f, a);
  Vec20 wb = field_value(conn, fr.f, b);
  return field_jacobian(cd, fr.f, b) * wa - field_jacobian(cd, fr.f, a) * wb;
}

int eps4(int a, int b, int c, int d) {
  int idx[4] = {a, b, c, d};
  int sign = 1;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      if (idx[i] == idx[j]) return 0;
      if (idx[i] > idx[j]) sign = -sign;
    }
  return sign;
}

}  // namespace

Vec20 pack_bundle_tangent(const Vec4& dx, const Mat4& df) {
  Vec20 v;
  v.head<4>() = dx;
  Eigen::Map<Mat4>(v.data() + 4) = df;
  return v;
}

Vec4 bundle_dx(const Vec20& v) { return v.head<4>(); }

Mat4 bundle_df(const Vec20& v) {
  return Eigen::Map<const Mat4>(v.data() + 4);
}

AlgebraElement cartan_connection(const FundamentalModel& m,
                                 const FrameAtPoint& fr, const Vec20& v) {
  auto conn = conn_at(m, {fr.x, fr.column(0)});
  require_bundle_frame(conn, fr);
  return connection_value(conn, fr.f, fr.finv, v);
}

Vec20 fundamental_vector_field(const FundamentalModel& m,
                               const FrameAtPoint& fr,
                               const AlgebraElement& a) {
  require_algebra_element(a);
  auto conn = conn_at(m, {fr.x, fr.column(0)});
  require_bundle_frame(conn, fr);
  return field_value(conn, fr.f, a);
}

Vec20 fundamental_field_commutator(const FundamentalModel& m,
                                   const FrameAtPoint& fr,
                                   const AlgebraElement& a,
                                   const AlgebraElement& b,
                                   DerivativeMode mode, Vec20* fd_error) {
  require_algebra_element(a);
  require_algebra_element(b);
  auto conn = conn_at(m, {fr.x, fr.column(0)});
  require_bundle_frame(conn, fr);
  if (mode == DerivativeMode::Analytic) {
    if (fd_error) fd_error->setZero();
    return commutator_analytic(m, fr, conn, a, b);
  }
  return commutator_fd(m, fr, conn, a, b, fd_error);
}

CartanConditionReport verify_cartan_conditions(const FundamentalModel& m,
                                               const FrameAtPoint& fr,
                                               const ModelGroup& grp,
                                               int n_samples,
                                               double omega_scale,
                                               std::uint64_t seed) {
  auto conn = conn_at(m, {fr.x, fr.column(0)});
  require_bundle_frame(conn, fr);
  CartanConditionReport rep;
  rep.samples = n_samples;
  rep.sign_lambda = grp.sign_lambda;
  rep.omega_scale = omega_scale;

  auto eval = [&](const Mat4& f, const Mat4& finv, const Vec20& v) {
    AlgebraElement r = connection_value(conn, f, finv, v);
    r.h *= omega_scale;
    return r;
  };

  std::vector<double> c1(static_cast<size_t>(n_samples), 0.0);
  std::vector<double> c2(static_cast<size_t>(n_samples), 0.0);
  std::vector<double> c3(static_cast<size_t>(n_samples), 0.0);
  // Draws are precomputed so results do not depend on the thread count.
  std::mt19937_64 rng(seed * 2025 + 11);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  struct Draw {
    AlgebraElement a;
    AlgebraElement rot;
    Mat4 k;
    Vec20 v;
  };
  std::vector<Draw> draws(static_cast<size_t>(n_samples));
  for (auto& d : draws) {
    AlgebraSplit s;
    for (int i = 0; i < 3; ++i) {
      s.rot[i] = uni(rng);
      s.boost[i] = uni(rng);
      s.spatial[i] = uni(rng);
    }
    s.temporal = uni(rng);
    d.a = assemble_components(s);
    AlgebraSplit sr;
    for (int i = 0; i < 3; ++i) sr.rot[i] = uni(rng);
    d.rot = assemble_components(sr);
    Vec3 axis(uni(rng), uni(rng), uni(rng));
    if (axis.norm() < 1e-3) axis = Vec3(0, 0, 1);
    d.k = spatial_rotation(axis, 0.1 + 1.4 * std::abs(uni(rng)));
    for (int i = 0; i < 20; ++i) d.v[i] = uni(rng);
  }

  detail::parallel_for(n_samples, [&](int i) {
    const Draw& d = draws[static_cast<size_t>(i)];
    // C1: reconstruct a random element from its field.
    Vec20 va = field_value(conn, fr.f, d.a);
    c1[static_cast<size_t>(i)] =
        (eval(fr.f, fr.finv, va) - d.a).norm() / std::max(1.0, d.a.norm());
    // C2: rotate the frame, push the direction, conjugate back.
    Mat4 kinv = d.k.transpose();
    Mat4 fk = fr.f * d.k;
    Mat4 fkinv = kinv * fr.finv;
    Vec20 vk = pack_bundle_tangent(bundle_dx(d.v), bundle_df(d.v) * d.k);
    AlgebraElement lhs = eval(fk, fkinv, vk);
    AlgebraElement base = eval(fr.f, fr.finv, d.v);
    AlgebraElement rhs = adjoint_action(kinv, base);
    c2[static_cast<size_t>(i)] =
        (lhs - rhs).norm() / std::max(1.0, base.norm());
    // C3: fiber rotation directions return their generator.
    Vec20 vr = field_value(conn, fr.f, d.rot);
    c3[static_cast<size_t>(i)] = (eval(fr.f, fr.finv, vr) - d.rot).norm();
  });

  for (int i = 0; i < n_samples; ++i) {
    rep.c1_max = std::max(rep.c1_max, c1[static_cast<size_t>(i)]);
    rep.c2_max = std::max(rep.c2_max, c2[static_cast<size_t>(i)]);
    rep.c3_max = std::max(rep.c3_max, c3[static_cast<size_t>(i)]);
  }
  rep.c1_pass = rep.c1_max <= kConditionOneTol;
  rep.c2_pass = rep.c2_max <= kConditionTwoTol;
  rep.c3_pass = rep.c3_max <= kConditionThreeTol;
  return rep;
}

AlgebraElement cartan_curvature(const FundamentalModel& m,
                                const FrameAtPoint& fr,
                                const AlgebraElement& a,
                                const AlgebraElement& b, const ModelGroup& grp,
                                DerivativeMode mode) {
  Vec20 br = fundamental_field_commutator(m, fr, a, b, mode);
  auto conn = conn_at(m, {fr.x, fr.column(0)});
  AlgebraElement through = connection_value(conn, fr.f, fr.finv, br);
  return algebra_bracket(a, b, grp) - through;
}

double boost_curvature_density(const FundamentalModel& m,
                               const FrameAtPoint& fr) {
  auto conn = conn_at(m, {fr.x, fr.column(0)});
  require_bundle_frame(conn, fr);
  ConnDerivs cd = conn_derivs(m, {fr.x, fr.column(0)});
  AlgebraElement e0 = translation_generator(0);
  Vec20 w0 = field_value(conn, fr.f, e0);
  Mat20 j0 = field_jacobian(cd, fr.f, e0);
  double density = 0.0;
  for (int al = 1; al <= 3; ++al) {
    AlgebraElement ea = translation_generator(al);
    Vec20 wa = field_value(conn, fr.f, ea);
    Mat20 ja = field_jacobian(cd, fr.f, ea);
    Vec20 br = j0 * wa - ja * w0;
    AlgebraElement through = connection_value(conn, fr.f, fr.finv, br);
    density += split_components(through).boost[al - 1];
  }
  return density;
}

MmDensityValue mm_density(const FundamentalModel& m, const FrameAtPoint& fr,
                          const ModelGroup& grp) {
  auto conn = conn_at(m, {fr.x, fr.column(0)});
  require_bundle_frame(conn, fr);
  TangentPoint p{fr.x, fr.column(0)};
  LinearCurvatureValue lc = linear_curvature(m, p);
  Mat4 gF = to_mat(conn.gF);
  Mat4 gFi = to_mat(conn.gFi);

  MmDensityValue out;
  out.cosmological = -static_cast<double>(grp.sign_lambda * grp.sign_lambda);

  double trace = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c) trace += gFi(a, b) * lc.Rlin[c][a][c][b];
  out.curvature_term = grp.sign_lambda / 6.0 * trace;

  double low[4][4][4][4];
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) {
          double acc = 0.0;
          for (int e = 0; e < 4; ++e) acc += gF(a, e) * lc.Rlin[e][b][c][d];
          low[a][b][c][d] = acc;
        }
  // Double epsilon contraction over the 24 x 24 nonzero index choices.
  std::array<std::array<int, 4>, 24> perms;
  std::array<int, 24> signs;
  {
    std::array<int, 4> idx{0, 1, 2, 3};
    int n = 0;
    do {
      perms[static_cast<size_t>(n)] = idx;
      signs[static_cast<size_t>(n)] = eps4(idx[0], idx[1], idx[2], idx[3]);
      ++n;
    } while (std::next_permutation(idx.begin(), idx.end()));
  }
  double gb = 0.0;
  for (int p1 = 0; p1 < 24; ++p1)
    for (int p2 = 0; p2 < 24; ++p2) {
      const auto& u = perms[static_cast<size_t>(p1)];
      const auto& v = perms[static_cast<size_t>(p2)];
      gb += signs[static_cast<size_t>(p1)] * signs[static_cast<size_t>(p2)] *
            low[u[0]][u[1]][v[0]][v[1]] * low[u[2]][u[3]][v[2]][v[3]];
    }
  out.gauss_bonnet = -gb / 96.0;
  return out;
}

IntegrabilityReport integrability_check(const FundamentalModel& m,
                                        const Vec4& x, int n_samples,
                                        std::uint64_t seed,
                                        const VerticalPerturbation& perturb) {
  ConeProbe probe(m, x, seed);
  std::mt19937_64 rng(seed * 6359 + 17);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double base = std::max(1.0, probe.seed_direction().norm());
  std::vector<Vec4> ys(static_cast<size_t>(n_samples));
  for (auto& y : ys) {
    double radius = 0.2;
    y = probe.seed_direction();
    for (int attempt = 0; attempt < 50; ++attempt) {
      Vec4 cand = probe.seed_direction();
      for (int i = 0; i < 4; ++i) cand[i] += radius * base * gauss(rng);
      if (probe.contains(cand)) {
        y = cand;
        break;
      }
      radius *= 0.5;
    }
    y = normalize_to_shell(m, {x, y}).y;
  }

  std::vector<double> frob(static_cast<size_t>(n_samples), 0.0);
  std::vector<double> emb(static_cast<size_t>(n_samples), 0.0);
  detail::parallel_for(n_samples, [&](int i) {
    TangentPoint center{x, ys[static_cast<size_t>(i)]};
    ObserverPoint op = make_observer_point(m, center, probe);

    // The three fiber-tangent frame fields, extended off the shell by
    // normalizing first; smooth in (x, y) away from seed degeneracies.
    auto fields = [&](const Vec4& xx,
                      const Vec4& yy) -> Eigen::Matrix<double, 8, 3> {
      TangentPoint q = normalize_to_shell(m, {xx, yy});
      FrameAtPoint fq = build_orthonormal_frame(m, make_observer_point(m, q, probe));
      Eigen::Matrix<double, 8, 3> w = Eigen::Matrix<double, 8, 3>::Zero();
      for (int al = 1; al <= 3; ++al) w.block<4, 1>(4, al - 1) = fq.f.col(al);
      if (perturb) w += perturb(q);
      return w;
    };

    Eigen::Matrix<double, 8, 3> w0 = fields(center.x, center.y);
    std::array<Mat8, 3> jac;
    for (auto& jm : jac) jm.setZero();
    double h0 = 1e-5 * std::max(1.0, center.x.norm() + center.y.norm());
    for (int dir = 0; dir < 8; ++dir) {
      Eigen::Matrix<double, 8, 3> d[2];
      for (int k = 0; k < 2; ++k) {
        double h = h0 / (1 << k);
        Vec4 xp = center.x, xm = center.x, yp = center.y, ym = center.y;
        if (dir < 4) {
          xp[dir] += h;
          xm[dir] -= h;
        } else {
          yp[dir - 4] += h;
          ym[dir - 4] -= h;
        }
        d[k] = (fields(xp, yp) - fields(xm, ym)) / (2.0 * h);
      }
      Eigen::Matrix<double, 8, 3> rich = (4.0 * d[1] - d[0]) / 3.0;
      for (int al = 0; al < 3; ++al)
        jac[static_cast<size_t>(al)].col(dir) = rich.col(al);
    }

    FrameAtPoint fc = build_orthonormal_frame(m, op);
    TangentSplit split = tangent_split(m, op, fc);
    Mat8 horizontal = Mat8::Identity() - split.P_V;
    double worst = 0.0;
    for (int al = 0; al < 3; ++al)
      for (int be = al + 1; be < 3; ++be) {
        Vec8 br = jac[static_cast<size_t>(be)] * w0.col(al) -
                  jac[static_cast<size_t>(al)] * w0.col(be);
        worst = std::max(worst, (horizontal * br).norm());
      }
    frob[static_cast<size_t>(i)] = worst;

    ReebContact rc = reeb_and_contact(m, op);
    emb[static_cast<size_t>(i)] = (rc.r.head<4>() - op.p.y).norm();
  });

  IntegrabilityReport rep;
  rep.samples = n_samples;
  for (int i = 0; i < n_samples; ++i) {
    rep.max_frobenius = std::max(rep.max_frobenius, frob[static_cast<size_t>(i)]);
    rep.max_embedding = std::max(rep.max_embedding, emb[static_cast<size_t>(i)]);
  }
  return rep;
}

}  // namespace finsler
