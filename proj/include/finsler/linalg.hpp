#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <vector>

namespace finsler {

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

struct TangentPoint {
  Vec4 x = Vec4::Zero();
  Vec4 y = Vec4::Zero();
};

inline Mat4 minkowski_eta() {
  Mat4 eta = Mat4::Identity();
  eta(0, 0) = -1.0;
  return eta;
}

// Eigenvalue signs of a symmetric matrix, ordered by ascending eigenvalue.
// An eigenvalue counts as zero when |lambda| < eps_rel * max|lambda|.
inline std::vector<int> eigen_signature(const Eigen::MatrixXd& sym,
                                        double eps_rel = 1e-8) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  const auto& ev = es.eigenvalues();
  double scale = ev.cwiseAbs().maxCoeff();
  std::vector<int> signs(static_cast<size_t>(ev.size()), 0);
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev[i]) > eps_rel * scale)
      signs[static_cast<size_t>(i)] = ev[i] > 0 ? 1 : -1;
  }
  return signs;
}

// Degeneracy test used everywhere a Hessian must be invertible: the smallest
// |eigenvalue| measured against the geometric mean of all |eigenvalues|.
inline bool is_degenerate(const Mat4& sym, double eps_det = 1e-10) {
  Eigen::SelfAdjointEigenSolver<Mat4> es(sym);
  Eigen::Vector4d a = es.eigenvalues().cwiseAbs();
  double mn = a.minCoeff();
  double gm = std::pow(a.prod(), 0.25);
  return !(mn > eps_det * gm);  // catches NaN as degenerate too
}

// L5 signature condition: eigenvalue signs form (eps, -eps, -eps, -eps)
// as a multiset, where eps is the sign of L.
inline bool shell_signature_ok(const Mat4& gL, int sign_L,
                               double eps_rel = 1e-8) {
  if (sign_L == 0) return false;
  std::vector<int> s = eigen_signature(gL, eps_rel);
  int with = 0, against = 0;
  for (int v : s) {
    if (v == sign_L) ++with;
    if (v == -sign_L) ++against;
  }
  return with == 1 && against == 3;
}

}  // namespace finsler
