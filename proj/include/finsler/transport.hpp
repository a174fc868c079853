#pragma once

#include <vector>

#include "finsler/frame.hpp"
#include "finsler/model.hpp"

namespace finsler {

// Solution of the fiber boundary-value problem: an autoparallel of the
// vertical connection from y0 to y1 inside one tangent space.
struct FiberCurve {
  std::vector<double> s;
  std::vector<Vec4> y;
  std::vector<Vec4> ydot;
  int newton_iterations = 0;
  double residual = 0.0;
};

FiberCurve vertical_autoparallel(const FundamentalModel& m, const Vec4& x,
                                 const Vec4& y0, const Vec4& y1);

// Parallel transport of the columns of w along an already-solved fiber curve.
Mat4 transport_along(const FundamentalModel& m, const Vec4& x,
                     const FiberCurve& curve, const Mat4& w);

struct GeneralizedLorentz {
  FrameAtPoint transported;  // P_v f, expressed at (x, f'_0)
  Mat4 lambda = Mat4::Identity();
  double orthonormality_residual = 0.0;
  double eta_residual = 0.0;  // || lambda^T eta lambda - eta ||
  int shooting_iterations = 0;
};

GeneralizedLorentz generalized_lorentz(const FundamentalModel& m,
                                       const Vec4& x, const FrameAtPoint& f,
                                       const FrameAtPoint& f_prime);

}  // namespace finsler
