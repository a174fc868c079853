#pragma once

#include <string>
#include <utility>
#include <vector>

#include "finsler/model.hpp"

namespace finsler {

enum class TrajectoryStatus { Ok, DegeneracyEncountered, StepFailure };

const char* to_string(TrajectoryStatus s);

struct Trajectory {
  std::vector<double> tau;
  std::vector<TangentPoint> points;
  std::vector<double> F;       // Finsler function per sample
  std::vector<double> det_gL;  // Hessian determinant per sample
  long steps = 0;
  long rejected = 0;
  double tol = 0.0;
  TrajectoryStatus status = TrajectoryStatus::Ok;
  std::string message;
};

// The geodesic vector field (xdot, ydot) = (y, -N(x,y) y); the integrator
// consumes exactly this function.
std::pair<Vec4, Vec4> geodesic_spray(const FundamentalModel& m,
                                     const TangentPoint& p);

Trajectory integrate_geodesic(const FundamentalModel& m,
                              const TangentPoint& p0, double tau0, double tau1,
                              double tol = 1e-9);

double proper_time(const FundamentalModel& m, const Trajectory& traj);

}  // namespace finsler
