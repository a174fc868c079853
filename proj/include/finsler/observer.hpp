#pragma once

#include <functional>
#include <string>
#include <vector>

#include "finsler/connection.hpp"
#include "finsler/frame.hpp"
#include "finsler/geodesic.hpp"
#include "finsler/geometry.hpp"

namespace finsler {

using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat8 = Eigen::Matrix<double, 8, 8>;

// A point of observer space: on the unit shell, inside the future cone.
// Construction validates both conditions, so holding an ObserverPoint is the
// proof of membership the downstream operations rely on.
struct ObserverPoint {
  TangentPoint p;
};

ObserverPoint make_observer_point(const FundamentalModel& m,
                                  const TangentPoint& p);
ObserverPoint make_observer_point(const FundamentalModel& m,
                                  const TangentPoint& p,
                                  const ConeProbe& probe);

// Sasaki metric at a tangent point, stored as its two Berwald-basis blocks
// together with the restriction to the tangent space of the unit shell
// bundle. Vectors split as (h; w) with v = h^a delta_a + w^a dbar_a; the
// coordinate-component form (d, dbar) is exposed separately for callers that
// work with flow data.
struct SasakiValue {
  Mat4 g_horizontal = Mat4::Zero();  // block on dx (x) dx: -g^F
  Mat4 g_vertical = Mat4::Zero();    // block on dy+N dx, squared: -g^F / F^2
  Mat4 N = Mat4::Zero();
  double F2 = 0.0;

  // Columns 0..3: horizontal lifts of the coordinate directions; columns
  // 4..6: fiber vectors tangent to the shell (kernel of dF), Berwald split.
  Eigen::Matrix<double, 8, 7> basis = Eigen::Matrix<double, 8, 7>::Zero();
  Eigen::Matrix<double, 7, 7> restricted = Eigen::Matrix<double, 7, 7>::Zero();
  std::vector<int> signature;

  Mat8 blocks() const;      // 8x8 in the Berwald co-basis (dx, delta-y)
  Mat8 coordinate() const;  // 8x8 in the coordinate co-basis (dx, dy)
  // Pairing of two vectors given in coordinate components (d, dbar).
  double pair(const Vec8& u, const Vec8& v) const;
};

SasakiValue sasaki_metric(const FundamentalModel& m, const TangentPoint& p);

// Reeb vector field and contact form, both in coordinate components:
// r = (y, -N y) against (d_a, dbar_a), alpha = (g^F y, 0) against (dx, dy).
struct ReebContact {
  Vec8 r = Vec8::Zero();
  Vec8 alpha = Vec8::Zero();
  double alpha_of_r = 0.0;
};

ReebContact reeb_and_contact(const FundamentalModel& m, const ObserverPoint& p);

// Finite-difference Lie derivative of the contact form along the Reeb flow:
// pull alpha back through the flow at parameters +-h and +-h/2, difference
// centrally, extrapolate. The flow Jacobian rides along as a variational
// equation, so the only discretization is in the flow parameter itself.
// The ambient difference contains an exact multiple of d(F^2/2), which acts
// only on the fiber-radial direction discarded by the shell restriction;
// that component is removed, so the returned coordinate-component 8-covector
// vanishes for an exact computation.
Vec8 lie_derivative_contact(const FundamentalModel& m, const ObserverPoint& p,
                            double h_flow = 1e-4);

// Projectors onto the vertical, spatial-horizontal and Reeb subspaces,
// returned as 8x8 matrices acting on coordinate components. Their sum is the
// identity on the seven-dimensional tangent space of the shell bundle (it
// annihilates the fiber-radial direction).
struct TangentSplit {
  Mat8 P_V = Mat8::Zero();
  Mat8 P_vecH = Mat8::Zero();
  Mat8 P_H0 = Mat8::Zero();
};

TangentSplit tangent_split(const FundamentalModel& m, const ObserverPoint& p,
                           const FrameAtPoint& frame);

// Gram-Schmidt frame construction: f_0 = y, the seeds are orthogonalized in
// order against g^F(x, y) with target g^F(f_i, f_j) = -eta_ij.
FrameAtPoint build_orthonormal_frame(const FundamentalModel& m,
                                     const ObserverPoint& p,
                                     const std::array<Vec4, 3>& seed_spatial);
FrameAtPoint build_orthonormal_frame(const FundamentalModel& m,
                                     const ObserverPoint& p);

// Coframe rows dual to an orthonormal frame, as coordinate-component
// 8-covectors: rows 0..3 are e~^i = f^{-1 i}_a dx^a, rows 4..6 are the
// vertical duals b~^alpha. Used by the trajectory check and the split tests.
Eigen::Matrix<double, 7, 8> adapted_coframe(const FundamentalModel& m,
                                            const TangentPoint& p,
                                            const FrameAtPoint& frame);

enum class ObserverVerdict { NotObserver, Observer, Inertial };

const char* to_string(ObserverVerdict v);

struct ObserverCheckReport {
  ObserverVerdict verdict = ObserverVerdict::NotObserver;
  // max over interior samples of |e~^i(Gamma-dot) - delta^i_0|
  double max_frame_residual = 0.0;
  // max over interior samples of |b~^alpha(Gamma-dot)|
  double max_boost_residual = 0.0;
  double max_shell_drift = 0.0;  // max | |L| - 1 | over all samples
  int samples_used = 0;
  double tol = 0.0;
};

using FrameSection = std::function<FrameAtPoint(const TangentPoint&)>;

// Classifies a sampled curve in the shell bundle. Gamma-dot is recovered by
// local polynomial differentiation of the samples; the verdict compares the
// adapted-coframe components against the observer conditions at tolerance
// tol. An empty frame_section means axis-seeded orthonormal frames.
ObserverCheckReport check_observer_trajectory(const FundamentalModel& m,
                                              const Trajectory& traj,
                                              const FrameSection& frame_section,
                                              double tol = 1e-6);

// Ratio between the contact volume form alpha ^ (d alpha)^3 evaluated on the
// frame-adapted basis and the metric volume density of the restricted Sasaki
// metric on the same basis. Model-independent; the measured value is pinned
// in the regression tests.
double contact_volume_ratio(const FundamentalModel& m, const ObserverPoint& p,
                            const FrameAtPoint& frame);

}  // namespace finsler
