#include "finsler/observer.hpp"

#include <algorithm>
#include <cmath>

#include "finsler/detail/ode.hpp"
#include "finsler/detail/pipeline.hpp"

namespace finsler {

using detail::table_for;

namespace {

constexpr double kFrameTol = 1e-7;       // orthonormality gate for inputs
constexpr double kShellDriftTol = 1e-6;  // allowed | |L| - 1 | along curves

struct PointData {
  Mat4 gF = Mat4::Zero();
  Mat4 N = Mat4::Zero();
  double F2 = 0.0;
};

PointData point_data(const FundamentalModel& m, const TangentPoint& p) {
  auto t = table_for(m, p, 1, 3);
  double L = detail::eval_L<double>(t);
  if (std::abs(L) < kEpsNull * detail::null_scale(p.y, m.degree))
    throw NullVectorError("observer-space data undefined on the null set");
  auto gL = detail::eval_gL<double>(t);
  Mat4 gLm;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) gLm(a, b) = gL[a][b];
  if (is_degenerate(gLm, kEpsDet))
    throw DegenerateHessian("Hessian metric is degenerate at this point");
  auto gF = detail::eval_gF<double>(t);
  auto N = detail::eval_N<double>(t);
  PointData d;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      d.gF(a, b) = gF[a][b];
      d.N(a, b) = N[a][b];
    }
  if (is_degenerate(d.gF, kEpsDet))
    throw DegenerateHessian("Finsler metric is degenerate at this point");
  d.F2 = p.y.dot(d.gF * p.y);
  return d;
}

void require_observer(const CausalClass& c) {
  if (!c.in_shell_Omega)
    throw NotObserverPoint("point is not on the unit shell");
  if (!c.in_observer_cone)
    throw NotObserverPoint("point is outside the future cone");
}

// Core Gram-Schmidt step shared by the validated frame builder and the
// per-sample frames of the trajectory check.
FrameAtPoint gs_frame(const FundamentalModel& m, const TangentPoint& p,
                      const std::array<Vec4, 3>& seeds) {
  PointData d = point_data(m, p);
  double gscale = d.gF.cwiseAbs().maxCoeff();
  Mat4 f;
  f.col(0) = p.y;
  for (int k = 1; k < 4; ++k) {
    Vec4 v = seeds[static_cast<size_t>(k - 1)];
    double seed2 = v.squaredNorm();
    for (int j = 0; j < k; ++j) {
      Vec4 fj = f.col(j);
      v -= (fj.dot(d.gF * v) / fj.dot(d.gF * fj)) * fj;
    }
    if (!(v.squaredNorm() > 1e-20 * seed2))
      throw SeedDegenerate("seed vector collapses under projection");
    double q = v.dot(d.gF * v);
    if (!(-q > 1e-12 * gscale * v.squaredNorm()))
      throw SeedDegenerate("projected seed is not spacelike");
    f.col(k) = v / std::sqrt(-q);
  }
  FrameAtPoint out;
  out.x = p.x;
  out.f = f;
  out.finv = f.inverse();
  return out;
}

std::array<Vec4, 3> axis_seeds() {
  return {Vec4::Unit(1), Vec4::Unit(2), Vec4::Unit(3)};
}

void require_frame(const PointData& d, const TangentPoint& p,
                   const FrameAtPoint& frame) {
  if ((frame.column(0) - p.y).norm() > kFrameTol * p.y.norm())
    throw FrameNotOrthonormal("frame vector f_0 must equal y");
  Mat4 gram = frame.f.transpose() * d.gF * frame.f + minkowski_eta();
  if (gram.cwiseAbs().maxCoeff() > kFrameTol)
    throw FrameNotOrthonormal("frame fails the -eta orthonormality test");
}

// Derivative weights at node t[k] of the polynomial through all nodes.
std::array<double, 5> deriv_weights(const std::array<double, 5>& t, int k) {
  std::array<double, 5> w{};
  for (int j = 0; j < 5; ++j) {
    if (j == k) {
      double s = 0.0;
      for (int l = 0; l < 5; ++l)
        if (l != k) s += 1.0 / (t[static_cast<size_t>(k)] - t[static_cast<size_t>(l)]);
      w[static_cast<size_t>(j)] = s;
    } else {
      double num = 1.0, den = 1.0;
      for (int l = 0; l < 5; ++l) {
        if (l == j) continue;
        if (l != k) num *= t[static_cast<size_t>(k)] - t[static_cast<size_t>(l)];
        den *= t[static_cast<size_t>(j)] - t[static_cast<size_t>(l)];
      }
      w[static_cast<size_t>(j)] = num / den;
    }
  }
  return w;
}

// Augmented geodesic flow: base point plus the 8x8 variational matrix,
// with the connection linearization supplied by dual arithmetic.
Eigen::VectorXd flow_rhs(const FundamentalModel& m, const Eigen::VectorXd& z) {
  TangentPoint p{z.segment<4>(0), z.segment<4>(4)};
  auto t = table_for(m, p, 2, 4);
  auto N8 = detail::eval_N<Dual8>(t);
  Mat8 M = Mat8::Zero();
  M.topRightCorner<4, 4>() = Mat4::Identity();
  Mat4 N;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      N(a, b) = N8[a][b].v;
      double mx = 0.0, my = 0.0;
      for (int c = 0; c < 4; ++c) {
        mx += N8[a][c].d[static_cast<size_t>(b)] * p.y[c];
        my += N8[a][c].d[static_cast<size_t>(4 + b)] * p.y[c];
      }
      M(4 + a, b) = -mx;
      M(4 + a, 4 + b) = -(N8[a][b].v + my);
    }
  Eigen::VectorXd out(72);
  out.segment<4>(0) = p.y;
  out.segment<4>(4) = -N * p.y;
  Eigen::Map<const Mat8> J(z.data() + 8);
  Eigen::Map<Mat8> Jdot(out.data() + 8);
  Jdot = M * J;
  return out;
}

// Pullback of the contact form through the time-s geodesic flow, expressed
// at the starting point: J(s)^T alpha(z(s)).
Vec8 pullback_contact(const FundamentalModel& m, const TangentPoint& p0,
                      double s) {
  Eigen::VectorXd z0 = Eigen::VectorXd::Zero(72);
  z0.segment<4>(0) = p0.x;
  z0.segment<4>(4) = p0.y;
  Eigen::Map<Mat8>(z0.data() + 8) = Mat8::Identity();
  detail::OdeOptions opt;
  opt.tol = 1e-12;
  auto rhs = [&m](double, const Eigen::VectorXd& z) { return flow_rhs(m, z); };
  auto sol = detail::integrate_ode(rhs, z0, 0.0, s, opt);
  if (sol.status != detail::OdeStatus::Ok)
    throw StepFailure("contact flow integration failed: " + sol.message);
  const Eigen::VectorXd& z = sol.z.back();
  TangentPoint pe{z.segment<4>(0), z.segment<4>(4)};
  auto t = table_for(m, pe, 0, 2);
  auto gF = detail::eval_gF<double>(t);
  Vec8 alpha = Vec8::Zero();
  for (int b = 0; b < 4; ++b) {
    double v = 0.0;
    for (int a = 0; a < 4; ++a) v += gF[a][b] * pe.y[a];
    alpha[b] = v;
  }
  Eigen::Map<const Mat8> J(z.data() + 8);
  return J.transpose() * alpha;
}

// Value of a 1-form wedge three copies of a 2-form on seven vectors, with
// the determinant normalization (unit value on a dual basis).
double seven_form(const std::array<double, 7>& a,
                  const Eigen::Matrix<double, 7, 7>& da) {
  std::array<int, 7> idx{0, 1, 2, 3, 4, 5, 6};
  double total = 0.0;
  do {
    int inversions = 0;
    for (int i = 0; i < 7; ++i)
      for (int j = i + 1; j < 7; ++j)
        if (idx[static_cast<size_t>(i)] > idx[static_cast<size_t>(j)]) ++inversions;
    double term = a[static_cast<size_t>(idx[0])] * da(idx[1], idx[2]) *
                  da(idx[3], idx[4]) * da(idx[5], idx[6]);
    total += (inversions % 2 ? -1.0 : 1.0) * term;
  } while (std::next_permutation(idx.begin(), idx.end()));
  return total / 8.0;  // block sizes 1,2,2,2 -> 1! 2! 2! 2!
}

}  // namespace

ObserverPoint make_observer_point(const FundamentalModel& m,
                                  const TangentPoint& p) {
  require_observer(classify(m, p));
  return {p};
}

ObserverPoint make_observer_point(const FundamentalModel& m,
                                  const TangentPoint& p,
                                  const ConeProbe& probe) {
  require_observer(classify(m, p, probe));
  return {p};
}

Mat8 SasakiValue::blocks() const {
  Mat8 G = Mat8::Zero();
  G.topLeftCorner<4, 4>() = g_horizontal;
  G.bottomRightCorner<4, 4>() = g_vertical;
  return G;
}

Mat8 SasakiValue::coordinate() const {
  // Berwald components of a coordinate vector: (h, w) -> (h, w + N h).
  Mat8 T = Mat8::Identity();
  T.bottomLeftCorner<4, 4>() = N;
  return T.transpose() * blocks() * T;
}

double SasakiValue::pair(const Vec8& u, const Vec8& v) const {
  return u.dot(coordinate() * v);
}

SasakiValue sasaki_metric(const FundamentalModel& m, const TangentPoint& p) {
  PointData d = point_data(m, p);
  SasakiValue s;
  s.g_horizontal = -d.gF;
  s.g_vertical = -d.gF / d.F2;
  s.N = d.N;
  s.F2 = d.F2;

  // Horizontal lifts span the first four columns outright. The fiber block
  // is cut down to the kernel of dF: w with (g^F y) . w = 0, built by
  // solving for the component with the largest gradient entry.
  for (int a = 0; a < 4; ++a) s.basis(a, a) = 1.0;
  Vec4 c = d.gF * p.y;
  int drop = 0;
  for (int a = 1; a < 4; ++a)
    if (std::abs(c[a]) > std::abs(c[drop])) drop = a;
  int col = 4;
  for (int b = 0; b < 4; ++b) {
    if (b == drop) continue;
    s.basis(4 + b, col) = 1.0;
    s.basis(4 + drop, col) = -c[b] / c[drop];
    ++col;
  }

  Eigen::Matrix<double, 7, 7> r = s.basis.transpose() * s.blocks() * s.basis;
  s.restricted = 0.5 * (r + r.transpose());
  s.signature = eigen_signature(s.restricted, kEpsSig);
  return s;
}

ReebContact reeb_and_contact(const FundamentalModel& m,
                             const ObserverPoint& p) {
  PointData d = point_data(m, p.p);
  ReebContact rc;
  rc.r.head<4>() = p.p.y;
  rc.r.tail<4>() = -d.N * p.p.y;
  rc.alpha.head<4>() = d.gF * p.p.y;
  rc.alpha_of_r = rc.alpha.head<4>().dot(p.p.y);
  return rc;
}

Vec8 lie_derivative_contact(const FundamentalModel& m, const ObserverPoint& p,
                            double h_flow) {
  if (!(h_flow > 0.0))
    throw ConfigError("lie_derivative_contact requires a positive flow step");
  auto central = [&](double h) -> Vec8 {
    return (pullback_contact(m, p.p, h) - pullback_contact(m, p.p, -h)) /
           (2.0 * h);
  };
  Vec8 full = central(h_flow);
  Vec8 half = central(0.5 * h_flow);
  Vec8 rho = (4.0 * half - full) / 3.0;

  // The ambient flow difference carries an exact component along d(F^2/2),
  // which annihilates the tangent space of the shell bundle; remove it so
  // the result is the derivative of the restricted form.
  auto t = table_for(m, p.p, 1, 3);
  double L = detail::eval_L<double>(t);
  double c = 2.0 / m.degree;
  double fac = (c / 2.0) * std::pow(std::abs(L), c - 1.0) * (L < 0 ? -1.0 : 1.0);
  auto gF = detail::eval_gF<double>(t);
  Vec8 kappa = Vec8::Zero();
  for (int a = 0; a < 4; ++a) {
    kappa[a] = fac * detail::jet<double>(t, detail::mi_unit(a), detail::mi_zero());
    double v = 0.0;
    for (int b = 0; b < 4; ++b) v += gF[b][a] * p.p.y[b];
    kappa[4 + a] = v;
  }
  double radial = rho.tail<4>().dot(p.p.y);
  double scale = kappa.tail<4>().dot(p.p.y);  // = F^2
  return rho - (radial / scale) * kappa;
}

TangentSplit tangent_split(const FundamentalModel& m, const ObserverPoint& p,
                           const FrameAtPoint& frame) {
  PointData d = point_data(m, p.p);
  require_frame(d, p.p, frame);

  TangentSplit out;
  for (int al = 1; al < 4; ++al) {
    Vec4 fa = frame.column(al);
    // vertical pair: b_al = f_al^a dbar_a, dual row (w N, w)
    Vec8 bvec = Vec8::Zero();
    bvec.tail<4>() = fa;
    Vec4 w = -(d.gF * fa);
    Vec8 bco = Vec8::Zero();
    bco.head<4>() = d.N.transpose() * w;
    bco.tail<4>() = w;
    out.P_V += bvec * bco.transpose();

    // spatial horizontal pair: e_al = lift of f_al, dual (f^{-1 al}, 0)
    Vec8 evec = Vec8::Zero();
    evec.head<4>() = fa;
    evec.tail<4>() = -d.N * fa;
    Vec8 eco = Vec8::Zero();
    eco.head<4>() = frame.finv.row(al);
    out.P_vecH += evec * eco.transpose();
  }
  Vec8 rvec = Vec8::Zero();
  rvec.head<4>() = frame.column(0);
  rvec.tail<4>() = -d.N * frame.column(0);
  Vec8 rco = Vec8::Zero();
  rco.head<4>() = frame.finv.row(0);
  out.P_H0 = rvec * rco.transpose();
  return out;
}

FrameAtPoint build_orthonormal_frame(const FundamentalModel& m,
                                     const ObserverPoint& p,
                                     const std::array<Vec4, 3>& seed_spatial) {
  return gs_frame(m, p.p, seed_spatial);
}

FrameAtPoint build_orthonormal_frame(const FundamentalModel& m,
                                     const ObserverPoint& p) {
  return gs_frame(m, p.p, axis_seeds());
}

Eigen::Matrix<double, 7, 8> adapted_coframe(const FundamentalModel& m,
                                            const TangentPoint& p,
                                            const FrameAtPoint& frame) {
  PointData d = point_data(m, p);
  require_frame(d, p, frame);
  Eigen::Matrix<double, 7, 8> co = Eigen::Matrix<double, 7, 8>::Zero();
  for (int i = 0; i < 4; ++i) co.row(i).head<4>() = frame.finv.row(i);
  for (int al = 1; al < 4; ++al) {
    Vec4 w = -(d.gF * frame.column(al));
    co.row(3 + al).head<4>() = (d.N.transpose() * w).transpose();
    co.row(3 + al).tail<4>() = w.transpose();
  }
  return co;
}

const char* to_string(ObserverVerdict v) {
  switch (v) {
    case ObserverVerdict::NotObserver:
      return "not-observer";
    case ObserverVerdict::Observer:
      return "observer";
    case ObserverVerdict::Inertial:
      return "inertial";
  }
  return "?";
}

ObserverCheckReport check_observer_trajectory(const FundamentalModel& m,
                                              const Trajectory& traj,
                                              const FrameSection& frame_section,
                                              double tol) {
  const size_t n = traj.points.size();
  if (n < 5 || traj.tau.size() != n)
    throw InsufficientSamples(
        "trajectory check needs at least five aligned samples");

  ObserverCheckReport rep;
  rep.tol = tol;
  rep.samples_used = static_cast<int>(n);

  // Shell drift and the pointwise signature conditions are verified at every
  // sample; cone membership is verified at the first sample and carried
  // along the curve by continuity, since a component change would cross one
  // of the pointwise checks below.
  for (size_t k = 0; k < n; ++k) {
    const TangentPoint& s = traj.points[k];
    double L = m.partial({0, 0, 0, 0}, {0, 0, 0, 0}, s.x, s.y);
    rep.max_shell_drift =
        std::max(rep.max_shell_drift, std::abs(std::abs(L) - 1.0));
    int sign_L = L > 0.0 ? 1 : -1;
    Mat4 gL = hessian_metric_gL(m, s).matrix();
    if (is_degenerate(gL, kEpsDet) || !shell_signature_ok(gL, sign_L, kEpsSig))
      throw TrajectoryLeftObserverSpace(
          "sample " + std::to_string(k) + " violates the signature conditions");
  }
  if (rep.max_shell_drift > kShellDriftTol)
    throw TrajectoryLeftObserverSpace(
        "unit-shell drift " + std::to_string(rep.max_shell_drift) +
        " exceeds " + std::to_string(kShellDriftTol));
  try {
    make_observer_point(m, normalize_to_shell(m, traj.points.front()));
  } catch (const NotObserverPoint& e) {
    throw TrajectoryLeftObserverSpace(std::string("first sample: ") + e.what());
  }

  for (size_t k = 0; k < n; ++k) {
    size_t lo = k >= 2 ? std::min(k - 2, n - 5) : 0;
    std::array<double, 5> ts;
    for (int i = 0; i < 5; ++i) ts[static_cast<size_t>(i)] = traj.tau[lo + static_cast<size_t>(i)];
    auto w = deriv_weights(ts, static_cast<int>(k - lo));
    Vec4 xdot = Vec4::Zero(), ydot = Vec4::Zero();
    for (int i = 0; i < 5; ++i) {
      xdot += w[static_cast<size_t>(i)] * traj.points[lo + static_cast<size_t>(i)].x;
      ydot += w[static_cast<size_t>(i)] * traj.points[lo + static_cast<size_t>(i)].y;
    }
    TangentPoint q = normalize_to_shell(m, traj.points[k]);
    FrameAtPoint fr = frame_section ? frame_section(q) : gs_frame(m, q, axis_seeds());
    auto co = adapted_coframe(m, q, fr);
    Vec8 gdot;
    gdot << xdot, ydot;
    for (int i = 0; i < 4; ++i) {
      double r = co.row(i).dot(gdot) - (i == 0 ? 1.0 : 0.0);
      rep.max_frame_residual = std::max(rep.max_frame_residual, std::abs(r));
    }
    for (int al = 4; al < 7; ++al)
      rep.max_boost_residual =
          std::max(rep.max_boost_residual, std::abs(co.row(al).dot(gdot)));
  }

  if (rep.max_frame_residual > tol)
    rep.verdict = ObserverVerdict::NotObserver;
  else if (rep.max_boost_residual > tol)
    rep.verdict = ObserverVerdict::Observer;
  else
    rep.verdict = ObserverVerdict::Inertial;
  return rep;
}

double contact_volume_ratio(const FundamentalModel& m, const ObserverPoint& p,
                            const FrameAtPoint& frame) {
  PointData d = point_data(m, p.p);
  require_frame(d, p.p, frame);

  // d(alpha) in coordinate components, from the exact x- and y-derivatives
  // of alpha_b = g^F_ab y^a.
  auto t = table_for(m, p.p, 1, 3);
  auto gF8 = detail::eval_gF<Dual8>(t);
  Mat8 dal = Mat8::Zero();  // dal(mu, b) = d alpha_b / d z^mu
  for (int b = 0; b < 4; ++b)
    for (int c = 0; c < 4; ++c) {
      double dx = 0.0, dy = 0.0;
      for (int a = 0; a < 4; ++a) {
        dx += gF8[a][b].d[static_cast<size_t>(c)] * p.p.y[a];
        dy += gF8[a][b].d[static_cast<size_t>(4 + c)] * p.p.y[a];
      }
      dal(c, b) = dx;
      dal(4 + c, b) = dy + gF8[c][b].v;
    }
  Mat8 A = dal - dal.transpose();  // d alpha (u, v) = u^mu v^nu A_mu_nu

  // Adapted basis in coordinate components: Reeb, spatial horizontal lifts,
  // vertical frame vectors.
  std::array<Vec8, 7> B;
  for (int i = 0; i < 4; ++i) {
    B[static_cast<size_t>(i)] = Vec8::Zero();
    B[static_cast<size_t>(i)].head<4>() = frame.column(i);
    B[static_cast<size_t>(i)].tail<4>() = -d.N * frame.column(i);
  }
  for (int al = 1; al < 4; ++al) {
    B[static_cast<size_t>(3 + al)] = Vec8::Zero();
    B[static_cast<size_t>(3 + al)].tail<4>() = frame.column(al);
  }

  Vec8 alpha = Vec8::Zero();
  alpha.head<4>() = d.gF * p.p.y;
  std::array<double, 7> av{};
  Eigen::Matrix<double, 7, 7> da;
  for (int i = 0; i < 7; ++i) {
    av[static_cast<size_t>(i)] = alpha.dot(B[static_cast<size_t>(i)]);
    for (int j = 0; j < 7; ++j)
      da(i, j) = B[static_cast<size_t>(i)].dot(A * B[static_cast<size_t>(j)]);
  }
  double omega = seven_form(av, da);

  SasakiValue sas = sasaki_metric(m, p.p);
  Mat8 G = sas.coordinate();
  Eigen::Matrix<double, 7, 7> gram;
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j)
      gram(i, j) = B[static_cast<size_t>(i)].dot(G * B[static_cast<size_t>(j)]);
  double density = std::sqrt(std::abs(gram.determinant()));
  if (!(density > 0.0))
    throw DegenerateHessian("adapted basis has zero metric volume");
  return omega / density;
}

}  // namespace finsler
