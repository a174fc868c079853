#include "finsler/geometry.hpp"

#include <cmath>
#include <random>

#include "finsler/detail/pipeline.hpp"

namespace finsler {

using detail::build_jet_table;
using detail::null_scale;
using detail::table_for;

const char* to_string(MetricKind k) {
  switch (k) {
    case MetricKind::gL: return "gL";
    case MetricKind::gF: return "gF";
    case MetricKind::InputLorentzian: return "input-lorentzian";
  }
  return "?";
}

namespace {

constexpr int kUpperIdx[4][4] = {{0, 1, 2, 3},
                                 {1, 4, 5, 6},
                                 {2, 5, 7, 8},
                                 {3, 6, 8, 9}};

Mat4 gL_matrix(const FundamentalModel& m, const TangentPoint& p) {
  auto t = table_for(m, p, 0, 2);
  auto g = detail::eval_gL<double>(t);
  Mat4 out;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) out(a, b) = g[a][b];
  return out;
}

}  // namespace

MetricValue MetricValue::from_matrix(const Mat4& m, MetricKind kind,
                                     double eps_sig) {
  MetricValue v;
  v.kind = kind;
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j)
      v.upper[static_cast<size_t>(kUpperIdx[i][j])] = 0.5 * (m(i, j) + m(j, i));
  v.signature = eigen_signature(v.matrix(), eps_sig);
  return v;
}

double MetricValue::at(int i, int j) const {
  return upper[static_cast<size_t>(kUpperIdx[i][j])];
}

Mat4 MetricValue::matrix() const {
  Mat4 m;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m(i, j) = at(i, j);
  return m;
}

double finsler_function(const FundamentalModel& m, const TangentPoint& p) {
  auto t = table_for(m, p, 0, 0);
  return std::pow(std::abs(detail::eval_L<double>(t)), 1.0 / m.degree);
}

MetricValue hessian_metric_gL(const FundamentalModel& m,
                              const TangentPoint& p) {
  return MetricValue::from_matrix(gL_matrix(m, p), MetricKind::gL);
}

MetricValue finsler_metric_gF(const FundamentalModel& m,
                              const TangentPoint& p) {
  auto t = table_for(m, p, 0, 2);
  double L = detail::eval_L<double>(t);
  if (std::abs(L) < kEpsNull * null_scale(p.y, m.degree))
    throw NullVectorError("the Finsler metric is undefined on the null set");
  auto g = detail::eval_gF<double>(t);
  Mat4 out;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) out(a, b) = g[a][b];
  if (is_degenerate(out, kEpsDet))
    throw DegenerateHessian("Finsler metric is degenerate at this point");
  return MetricValue::from_matrix(out, MetricKind::gF);
}

TangentPoint normalize_to_shell(const FundamentalModel& m,
                                const TangentPoint& p) {
  auto t = table_for(m, p, 0, 0);
  double L = detail::eval_L<double>(t);
  if (std::abs(L) < kEpsNull * null_scale(p.y, m.degree))
    throw NullVectorError("cannot normalize a null vector onto the shell");
  TangentPoint out = p;
  out.y = p.y * std::pow(std::abs(L), -1.0 / m.degree);
  return out;
}

ConeProbe::ConeProbe(const FundamentalModel& m, const Vec4& x,
                     std::uint64_t seed, int max_samples)
    : model_(&m), x_(x), coeffs_(m.term_coefficients(x)) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::normal_distribution<double> gauss(0.0, 1.0);
  // Candidates are scored by y^0 / |y| so the retained seed points as far
  // into the chart future as the batch allows.
  const int batch = 4096;
  double best_score = -2.0;
  Vec4 best = Vec4::Zero();
  int best_sign = 0;
  int taken = 0;
  while (taken < max_samples) {
    int this_batch = std::min(batch, max_samples - taken);
    for (int i = 0; i < this_batch; ++i, ++taken) {
      Vec4 dir(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
      double nrm = dir.norm();
      if (nrm < 1e-12) continue;
      dir /= nrm;
      auto t = build_jet_table(m, coeffs_, x_, dir, 0, 2);
      double L = detail::eval_L<double>(t);
      if (std::abs(L) < kEpsNull) continue;
      int s = L > 0 ? 1 : -1;
      auto g = detail::eval_gL<double>(t);
      Mat4 gm;
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) gm(a, b) = g[a][b];
      if (is_degenerate(gm, kEpsDet)) continue;
      if (!shell_signature_ok(gm, s, kEpsSig)) continue;
      double score = dir[0];
      if (score > best_score) {
        best_score = score;
        best = dir;
        best_sign = s;
      }
    }
    if (best_sign != 0) break;  // a full batch scanned, a seed exists
  }
  if (best_sign == 0)
    throw NoConeFound("no direction with the unit-timelike signature found");
  seed_dir_ = best;
  sign_ = best_sign;
}

bool ConeProbe::pointwise_ok(const Vec4& y, int expected_sign) const {
  auto t = build_jet_table(*model_, coeffs_, x_, y, 0, 2);
  double L = detail::eval_L<double>(t);
  if (std::abs(L) < kEpsNull * null_scale(y, model_->degree)) return false;
  if ((L > 0 ? 1 : -1) != expected_sign) return false;
  auto g = detail::eval_gL<double>(t);
  Mat4 gm;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) gm(a, b) = g[a][b];
  // One eigensolve covers the degeneracy rule and the signature pattern;
  // this runs on every segment checkpoint, so it is kept lean.
  Eigen::SelfAdjointEigenSolver<Mat4> es(gm, Eigen::EigenvaluesOnly);
  Vec4 ev = es.eigenvalues();
  Vec4 abs_ev = ev.cwiseAbs();
  double gmean = std::pow(abs_ev.prod(), 0.25);
  if (!(abs_ev.minCoeff() > kEpsDet * gmean)) return false;
  double mx = abs_ev.maxCoeff();
  int with = 0, against = 0;
  for (int i = 0; i < 4; ++i) {
    if (std::abs(ev[i]) <= kEpsSig * mx) continue;
    if ((ev[i] > 0 ? 1 : -1) == expected_sign)
      ++with;
    else
      ++against;
  }
  return with == 1 && against == 3;
}

bool ConeProbe::contains(const Vec4& y) const {
  double nrm = y.norm();
  if (!(nrm > 0.0)) return false;
  Vec4 dir = y / nrm;
  for (int k = 0; k <= kSegmentChecks; ++k) {
    double t = static_cast<double>(k) / kSegmentChecks;
    Vec4 z = (1.0 - t) * dir + t * seed_dir_;
    double zn = z.norm();
    if (zn < 1e-8) return false;  // segment pinched at the origin
    if (!pointwise_ok(z / zn, sign_)) return false;
  }
  return true;
}

namespace {

CausalClass classify_impl(const FundamentalModel& m, const TangentPoint& p,
                          const ConeProbe* probe) {
  auto t = table_for(m, p, 0, 2);
  double L = detail::eval_L<double>(t);
  CausalClass c;
  double scale = null_scale(p.y, m.degree);
  if (std::abs(L) >= kEpsNull * scale) c.sign_L = L > 0 ? 1 : -1;

  auto g = detail::eval_gL<double>(t);
  Mat4 gm;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) gm(a, b) = g[a][b];
  c.degenerate = is_degenerate(gm, kEpsDet);
  c.hessian_signature = eigen_signature(gm, kEpsSig);

  bool sig_ok = c.sign_L != 0 && !c.degenerate &&
                shell_signature_ok(gm, c.sign_L, kEpsSig);
  c.in_shell_Omega = sig_ok && std::abs(std::abs(L) - 1.0) <= kEpsShell;

  if (sig_ok) {
    if (probe) {
      c.in_observer_cone =
          c.sign_L == probe->cone_sign() && probe->contains(p.y);
    } else {
      try {
        ConeProbe local(m, p.x);
        c.in_observer_cone =
            c.sign_L == local.cone_sign() && local.contains(p.y);
      } catch (const NoConeFound&) {
        c.in_observer_cone = false;
      }
    }
  }
  return c;
}

}  // namespace

CausalClass classify(const FundamentalModel& m, const TangentPoint& p) {
  return classify_impl(m, p, nullptr);
}

CausalClass classify(const FundamentalModel& m, const TangentPoint& p,
                     const ConeProbe& probe) {
  return classify_impl(m, p, &probe);
}

ConvexityReport cone_convexity_check(const FundamentalModel& m, const Vec4& x,
                                     int n_samples, std::uint64_t seed) {
  ConeProbe probe(m, x, seed);
  ConvexityReport rep;
  rep.seed_direction = probe.seed_direction();

  std::mt19937_64 rng(seed * 0x2545f4914f6cdd1dull + 1);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto draw_in_cone = [&]() {
    // Rejection sampling from the chart sphere with a mixing fallback so
    // narrow cones still terminate.
    for (int tries = 0; tries < 20000; ++tries) {
      Vec4 dir(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
      double nrm = dir.norm();
      if (nrm < 1e-12) continue;
      dir /= nrm;
      if (tries >= 1000) {
        dir = (0.75 * probe.seed_direction() + 0.25 * dir).normalized();
      }
      if (probe.contains(dir)) return dir;
    }
    throw NoConeFound("could not sample the detected cone interior");
  };

  for (int i = 0; i < n_samples; ++i) {
    Vec4 u = draw_in_cone();
    Vec4 v = draw_in_cone();
    for (double t : {0.25, 0.5, 0.75}) {
      Vec4 w = t * u + (1.0 - t) * v;
      if (!probe.contains(w)) rep.failures.push_back({u, v, t});
    }
    ++rep.pairs_checked;
  }
  return rep;
}

}  // namespace finsler
