#pragma once

// Adaptive embedded Runge-Kutta 5(4) (Dormand-Prince) shared by geodesic
// integration, fiber transport and the flow computations on observer space.

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace finsler::detail {

enum class OdeStatus { Ok, StepFailure, Stopped, RhsError };

struct OdeOptions {
  double tol = 1e-9;
  double hmax = std::numeric_limits<double>::infinity();
  long max_steps = 1000000;
  // When set, exceptions thrown by the right-hand side end the run with
  // status RhsError and the samples collected so far instead of propagating.
  bool capture_rhs_errors = false;
};

struct OdeSolution {
  std::vector<double> t;
  std::vector<Eigen::VectorXd> z;
  OdeStatus status = OdeStatus::Ok;
  long steps = 0;
  long rejected = 0;
  std::string message;
};

using OdeRhs = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;
// Called on every accepted sample; returning false stops the integration
// (status Stopped) with the sample included.
using OdeMonitor = std::function<bool(double, const Eigen::VectorXd&)>;

OdeSolution integrate_ode(const OdeRhs& rhs, const Eigen::VectorXd& z0,
                          double t0, double t1, const OdeOptions& opt = {},
                          const OdeMonitor& monitor = {});

}  // namespace finsler::detail
