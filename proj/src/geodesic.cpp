#include "finsler/geodesic.hpp"

#include <cmath>

#include "finsler/detail/ode.hpp"
#include "finsler/detail/pipeline.hpp"
#include "finsler/geometry.hpp"

namespace finsler {

const char* to_string(TrajectoryStatus s) {
  switch (s) {
    case TrajectoryStatus::Ok: return "ok";
    case TrajectoryStatus::DegeneracyEncountered: return "degeneracy-encountered";
    case TrajectoryStatus::StepFailure: return "step-failure";
  }
  return "?";
}

std::pair<Vec4, Vec4> geodesic_spray(const FundamentalModel& m,
                                     const TangentPoint& p) {
  auto t = detail::table_for(m, p, 1, 3);
  auto N = detail::eval_N<double>(t);
  Vec4 ydot;
  for (int a = 0; a < 4; ++a) {
    double v = 0.0;
    for (int b = 0; b < 4; ++b) v += N[a][b] * p.y[b];
    ydot[a] = -v;
  }
  return {p.y, ydot};
}

namespace {

TangentPoint unpack(const Eigen::VectorXd& z) {
  TangentPoint p;
  for (int i = 0; i < 4; ++i) {
    p.x[i] = z[i];
    p.y[i] = z[4 + i];
  }
  return p;
}

}  // namespace

Trajectory integrate_geodesic(const FundamentalModel& m,
                              const TangentPoint& p0, double tau0, double tau1,
                              double tol) {
  check_point(p0);
  Trajectory traj;
  traj.tol = tol;

  bool degenerate_hit = false;
  auto rhs = [&](double, const Eigen::VectorXd& z) {
    TangentPoint p = unpack(z);
    auto [xd, yd] = geodesic_spray(m, p);
    Eigen::VectorXd out(8);
    out << xd, yd;
    return out;
  };
  auto monitor = [&](double, const Eigen::VectorXd& z) {
    TangentPoint p = unpack(z);
    auto t = detail::build_jet_table(m, p.x, p.y, 0, 2);
    auto g = detail::eval_gL<double>(t);
    Mat4 gm;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) gm(a, b) = g[a][b];
    traj.F.push_back(
        std::pow(std::abs(detail::eval_L<double>(t)), 1.0 / m.degree));
    traj.det_gL.push_back(gm.determinant());
    if (is_degenerate(gm, kEpsDet)) {
      degenerate_hit = true;
      return false;
    }
    return true;
  };

  Eigen::VectorXd z0(8);
  z0 << p0.x, p0.y;
  detail::OdeOptions opt;
  opt.tol = tol;
  opt.hmax = std::abs(tau1 - tau0) / 64.0;
  opt.capture_rhs_errors = true;

  auto sol = detail::integrate_ode(rhs, z0, tau0, tau1, opt, monitor);
  traj.tau = sol.t;
  for (const auto& z : sol.z) traj.points.push_back(unpack(z));
  traj.steps = sol.steps;
  traj.rejected = sol.rejected;
  traj.message = sol.message;
  switch (sol.status) {
    case detail::OdeStatus::Ok:
      traj.status = TrajectoryStatus::Ok;
      break;
    case detail::OdeStatus::Stopped:
      traj.status = degenerate_hit ? TrajectoryStatus::DegeneracyEncountered
                                   : TrajectoryStatus::StepFailure;
      if (degenerate_hit) traj.message = "Hessian degenerated mid-integration";
      break;
    case detail::OdeStatus::StepFailure:
      traj.status = TrajectoryStatus::StepFailure;
      break;
    case detail::OdeStatus::RhsError:
      traj.status = sol.message.find("DegenerateHessian") != std::string::npos
                        ? TrajectoryStatus::DegeneracyEncountered
                        : TrajectoryStatus::StepFailure;
      break;
  }
  // The monitor may have recorded one more sample than got accepted when it
  // stopped the run; keep the arrays aligned with the sample list.
  traj.F.resize(traj.tau.size());
  traj.det_gL.resize(traj.tau.size());
  return traj;
}

double proper_time(const FundamentalModel& m, const Trajectory& traj) {
  if (traj.points.size() < 2)
    throw InsufficientSamples("proper time needs at least two samples");
  double total = 0.0;
  for (size_t i = 0; i + 1 < traj.points.size(); ++i) {
    const TangentPoint& a = traj.points[i];
    const TangentPoint& b = traj.points[i + 1];
    double h = traj.tau[i + 1] - traj.tau[i];
    auto [xda, yda] = geodesic_spray(m, a);
    auto [xdb, ydb] = geodesic_spray(m, b);
    // cubic Hermite midpoint of the (x, y) state
    TangentPoint mid;
    mid.x = 0.5 * (a.x + b.x) + (h / 8.0) * (xda - xdb);
    mid.y = 0.5 * (a.y + b.y) + (h / 8.0) * (yda - ydb);
    double Fm = finsler_function(m, mid);
    total += h / 6.0 * (traj.F[i] + 4.0 * Fm + traj.F[i + 1]);
  }
  return total;
}

}  // namespace finsler
