#pragma once

#include <cstdint>
#include <vector>

#include "finsler/model.hpp"

namespace finsler {

// Tolerances shared by the causal-structure operations. Exact jets leave
// roughly 1e-13 of floating-point noise, so these sit well above it.
inline constexpr double kEpsNull = 1e-10;   // |L| vs ||y||^n for null tests
inline constexpr double kEpsDet = 1e-10;    // Hessian degeneracy
inline constexpr double kEpsSig = 1e-8;     // eigenvalue sign threshold
inline constexpr double kEpsShell = 1e-9;   // | |L| - 1 | on the unit shell

enum class MetricKind { gL, gF, InputLorentzian };

const char* to_string(MetricKind k);

// Symmetric 4x4 metric evaluated at a tangent point. Only the upper triangle
// is stored, so symmetry holds exactly by construction.
struct MetricValue {
  std::array<double, 10> upper{};
  MetricKind kind = MetricKind::gL;
  std::vector<int> signature;  // eigenvalue signs, ascending eigenvalue

  static MetricValue from_matrix(const Mat4& m, MetricKind kind,
                                 double eps_sig = kEpsSig);
  double at(int i, int j) const;
  Mat4 matrix() const;
};

struct CausalClass {
  int sign_L = 0;  // -1, 0, +1 (0 means |L| below the null threshold)
  bool degenerate = false;
  std::vector<int> hessian_signature;
  bool in_shell_Omega = false;
  bool in_observer_cone = false;
};

double finsler_function(const FundamentalModel& m, const TangentPoint& p);

MetricValue hessian_metric_gL(const FundamentalModel& m,
                              const TangentPoint& p);

MetricValue finsler_metric_gF(const FundamentalModel& m,
                              const TangentPoint& p);

TangentPoint normalize_to_shell(const FundamentalModel& m,
                                const TangentPoint& p);

// Membership oracle for the observer cone at a fixed base point. A seed
// direction is found by sampling the chart sphere for vectors whose Hessian
// carries the (eps,-eps,-eps,-eps) signature, preferring the largest y^0
// component (chart stand-in for the future time orientation). A candidate
// belongs to the cone when it passes the same pointwise tests and the
// straight fiber segment towards the seed passes them at every checkpoint;
// for a convex cone this is exact up to the checkpoint resolution.
class ConeProbe {
 public:
  ConeProbe(const FundamentalModel& m, const Vec4& x, std::uint64_t seed = 0,
            int max_samples = 100000);

  const Vec4& seed_direction() const { return seed_dir_; }
  int cone_sign() const { return sign_; }
  bool contains(const Vec4& y) const;

 private:
  bool pointwise_ok(const Vec4& y, int expected_sign) const;

  const FundamentalModel* model_;
  Vec4 x_;
  std::vector<Coeff2> coeffs_;  // fiber jets at x_ reuse one coefficient pass
  Vec4 seed_dir_;
  int sign_ = 0;
  static constexpr int kSegmentChecks = 8;
};

CausalClass classify(const FundamentalModel& m, const TangentPoint& p);
CausalClass classify(const FundamentalModel& m, const TangentPoint& p,
                     const ConeProbe& probe);

struct ConvexityReport {
  struct Failure {
    Vec4 u, v;
    double t;
  };
  int pairs_checked = 0;
  Vec4 seed_direction = Vec4::Zero();
  std::vector<Failure> failures;
};

ConvexityReport cone_convexity_check(const FundamentalModel& m, const Vec4& x,
                                     int n_samples, std::uint64_t seed);

}  // namespace finsler
