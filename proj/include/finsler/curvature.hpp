#pragma once

#include <functional>

#include "finsler/model.hpp"

namespace finsler {

using Tensor3 = std::array<std::array<std::array<double, 4>, 4>, 4>;
using Tensor4 = std::array<Tensor3, 4>;

inline double tensor_norm(const Tensor3& t) {
  double s = 0;
  for (const auto& a : t)
    for (const auto& b : a)
      for (double v : b) s += v * v;
  return std::sqrt(s);
}
inline double tensor_norm(const Tensor4& t) {
  double s = 0;
  for (const auto& a : t) {
    double n = tensor_norm(a);
    s += n * n;
  }
  return std::sqrt(s);
}

struct NonlinearCurvatureValue {
  Tensor3 R{};  // R[c][a][b] = R^c_ab, antisymmetric in (a, b)
};

struct LinearCurvatureValue {
  Tensor4 Rlin{}, Plin{}, Slin{};  // X[d][c][a][b] = X^d_cab
};

NonlinearCurvatureValue nonlinear_curvature(const FundamentalModel& m,
                                            const TangentPoint& p);

LinearCurvatureValue linear_curvature(const FundamentalModel& m,
                                      const TangentPoint& p);

// R^a_ab y^b, the scalar under the Finsler gravity action integral.
double gravity_action_density(const FundamentalModel& m,
                              const TangentPoint& p);

// Independent finite-difference curvature of a plain Lorentzian metric, used
// to validate the metric limit of everything above.
//
// Index conventions of this oracle (fixed once, relied on by the tests):
//   riemann[d][c][a][b] = d_b Gamma^d_ca - d_a Gamma^d_cb
//                         + Gamma^e_ca Gamma^d_eb - Gamma^e_cb Gamma^d_ea
//   ric(d, b)           = sum_a riemann[a][d][a][b]
// With these choices, the metric limit satisfies exactly
//   nonlinear R^c_ab      = riemann[c][d][a][b] y^d
//   linear   Rlin^d_cab   = riemann[d][c][a][b]
//   action density        = ric(d, b) y^d y^b
struct RiemannOracle {
  std::array<Mat4, 4> christoffel{};  // christoffel[c](a, b) = Gamma^c_ab
  Tensor4 riemann{};
  Mat4 ric = Mat4::Zero();
};

using MetricFunction = std::function<Mat4(const Vec4&)>;

RiemannOracle riemann_oracle(const MetricFunction& metric_fn, const Vec4& x);

}  // namespace finsler
