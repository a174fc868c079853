#include "finsler/detail/ode.hpp"

#include <algorithm>
#include <cmath>

namespace finsler::detail {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
constexpr double kC[7] = {0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kB5[7] = {35.0 / 384,      0.0,         500.0 / 1113,
                           125.0 / 192,     -2187.0 / 6784, 11.0 / 84, 0.0};
constexpr double kB4[7] = {5179.0 / 57600,  0.0,          7571.0 / 16695,
                           393.0 / 640,     -92097.0 / 339200,
                           187.0 / 2100,    1.0 / 40};

}  // namespace

OdeSolution integrate_ode(const OdeRhs& rhs, const Eigen::VectorXd& z0,
                          double t0, double t1, const OdeOptions& opt,
                          const OdeMonitor& monitor) {
  OdeSolution sol;
  const double dir = t1 >= t0 ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);
  Eigen::VectorXd z = z0;
  double t = t0;
  sol.t.push_back(t);
  sol.z.push_back(z);
  if (monitor && !monitor(t, z)) {
    sol.status = OdeStatus::Stopped;
    return sol;
  }
  if (span == 0.0) return sol;

  Eigen::VectorXd k[7];
  try {
    k[0] = rhs(t, z);
  } catch (const std::exception& e) {
    if (!opt.capture_rhs_errors) throw;
    sol.status = OdeStatus::RhsError;
    sol.message = e.what();
    return sol;
  }
  double h = std::min(span / 100.0, opt.hmax);
  const double hmin = span * 1e-14;

  while (dir * (t1 - t) > 0) {
    if (sol.steps + sol.rejected >= opt.max_steps) {
      sol.status = OdeStatus::StepFailure;
      sol.message = "step budget exhausted";
      return sol;
    }
    h = std::min(h, std::abs(t1 - t));
    try {
      for (int s = 1; s < 7; ++s) {
        Eigen::VectorXd zs = z;
        for (int j = 0; j < s; ++j)
          if (kA[s][j] != 0.0) zs += (dir * h * kA[s][j]) * k[j];
        k[s] = rhs(t + dir * h * kC[s], zs);
      }
    } catch (const std::exception& e) {
      if (!opt.capture_rhs_errors) throw;
      sol.status = OdeStatus::RhsError;
      sol.message = e.what();
      return sol;
    }
    Eigen::VectorXd z5 = z, err = Eigen::VectorXd::Zero(z.size());
    for (int s = 0; s < 7; ++s) {
      if (kB5[s] != 0.0) z5 += (dir * h * kB5[s]) * k[s];
      double db = kB5[s] - kB4[s];
      if (db != 0.0) err += (h * db) * k[s];
    }
    double enorm = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      double sc = opt.tol * (1.0 + std::max(std::abs(z[i]), std::abs(z5[i])));
      enorm = std::max(enorm, std::abs(err[i]) / sc);
    }
    if (!(enorm <= 1.0) || !z5.allFinite()) {
      ++sol.rejected;
      double fac = std::isfinite(enorm) && enorm > 0.0
                       ? std::max(0.2, 0.9 * std::pow(enorm, -0.2))
                       : 0.2;
      h *= fac;
      if (h < hmin) {
        sol.status = OdeStatus::StepFailure;
        sol.message = "step size underflow";
        return sol;
      }
      continue;
    }
    t += dir * h;
    z = z5;
    k[0] = k[6];  // first-same-as-last
    ++sol.steps;
    sol.t.push_back(t);
    sol.z.push_back(z);
    if (monitor && !monitor(t, z)) {
      sol.status = OdeStatus::Stopped;
      return sol;
    }
    double fac = enorm > 0.0 ? std::min(5.0, 0.9 * std::pow(enorm, -0.2)) : 5.0;
    h = std::min(h * fac, opt.hmax);
    if (h < hmin) h = hmin;
  }
  return sol;
}

}  // namespace finsler::detail
