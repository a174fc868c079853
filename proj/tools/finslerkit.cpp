#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "finsler/algebra.hpp"
#include "finsler/cartan.hpp"
#include "finsler/io.hpp"
#include "finsler/observer.hpp"
#include "finsler/scan.hpp"

namespace {

using finsler::Vec4;

struct RunConfig {
  std::string model_path;
  std::string cmd;
  std::string out_path;
  std::uint64_t seed = 0;
  double tol = 1e-9;
  int grid_nu = 201, grid_nv = 201;
  int sweep = 4096;
  std::vector<double> base_x{0, 0, 0, 0};
  std::vector<double> axis_u{1, 0, 0, 0};
  std::vector<double> axis_v{0, 1, 0, 0};
  double u_min = -2.0, u_max = 2.0;
  double v_min = -2.0, v_max = 2.0;
  std::vector<double> x{0, 0, 0, 0};
  std::vector<double> y{1, 0, 0, 0};
  std::vector<double> y2{1, 0, 0, 0};
  double tau0 = 0.0, tau1 = 10.0;
  int lambda_sign = 1;
  int samples = 50;
  double omega_scale = 1.0;
};

Vec4 to_vec(const std::vector<double>& v) {
  return Vec4(v[0], v[1], v[2], v[3]);
}

// Every run writes the fully resolved configuration, defaults included, so
// an output file alone is enough to reproduce it.
nlohmann::json config_echo(const RunConfig& c) {
  return nlohmann::json{
      {"model", c.model_path},
      {"cmd", c.cmd},
      {"out", c.out_path},
      {"seed", c.seed},
      {"tol", c.tol},
      {"grid", {c.grid_nu, c.grid_nv}},
      {"sweep", c.sweep},
      {"base_x", c.base_x},
      {"axis_u", c.axis_u},
      {"axis_v", c.axis_v},
      {"u_range", {c.u_min, c.u_max}},
      {"v_range", {c.v_min, c.v_max}},
      {"x", c.x},
      {"y", c.y},
      {"y2", c.y2},
      {"tau_range", {c.tau0, c.tau1}},
      {"lambda_sign", c.lambda_sign},
      {"samples", c.samples},
      {"omega_scale", c.omega_scale},
  };
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw finsler::IoError("cannot read file: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void emit(const RunConfig& cfg, const std::string& content) {
  if (cfg.out_path == "-")
    std::cout << content;
  else
    finsler::write_text_file(cfg.out_path, content);
}

int run_command(const RunConfig& cfg) {
  finsler::FundamentalModel model =
      finsler::build_model(read_file(cfg.model_path));
  nlohmann::json echo = config_echo(cfg);

  if (cfg.cmd == "classify-plane") {
    finsler::PlaneSpec plane;
    plane.base_x = to_vec(cfg.base_x);
    plane.axis_u = to_vec(cfg.axis_u);
    plane.axis_v = to_vec(cfg.axis_v);
    plane.u_min = cfg.u_min;
    plane.u_max = cfg.u_max;
    plane.v_min = cfg.v_min;
    plane.v_max = cfg.v_max;
    plane.nu = cfg.grid_nu;
    plane.nv = cfg.grid_nv;
    finsler::ScanResult res =
        finsler::scan_plane(model, plane, cfg.seed, cfg.sweep);
    emit(cfg, finsler::scan_csv(res, echo));
    std::string summary =
        finsler::json_to_string(finsler::scan_summary_json(res, echo));
    if (cfg.out_path == "-")
      std::cout << summary;
    else
      finsler::write_text_file(cfg.out_path + ".summary.json", summary);
    return 0;
  }

  if (cfg.cmd == "geodesic") {
    finsler::TangentPoint p0{to_vec(cfg.x), to_vec(cfg.y)};
    finsler::Trajectory traj =
        finsler::integrate_geodesic(model, p0, cfg.tau0, cfg.tau1, cfg.tol);
    emit(cfg, finsler::trajectory_csv(traj, echo));
    switch (traj.status) {
      case finsler::TrajectoryStatus::Ok:
        return 0;
      case finsler::TrajectoryStatus::DegeneracyEncountered:
        std::cerr << "geodesic: " << traj.message << "\n";
        return static_cast<int>(finsler::ErrorCategory::Domain);
      case finsler::TrajectoryStatus::StepFailure:
        std::cerr << "geodesic: " << traj.message << "\n";
        return static_cast<int>(finsler::ErrorCategory::Numerical);
    }
    return 0;
  }

  if (cfg.cmd == "transport") {
    Vec4 x = to_vec(cfg.x);
    auto frame_for = [&](const Vec4& y) {
      finsler::TangentPoint q =
          finsler::normalize_to_shell(model, {x, y});
      return finsler::build_orthonormal_frame(
          model, finsler::make_observer_point(model, q));
    };
    finsler::FrameAtPoint f = frame_for(to_vec(cfg.y));
    finsler::FrameAtPoint fp = frame_for(to_vec(cfg.y2));
    finsler::GeneralizedLorentz g =
        finsler::generalized_lorentz(model, x, f, fp);
    emit(cfg, finsler::json_to_string(
                  finsler::transport_report_json(g, x, f, fp, echo)));
    return 0;
  }

  if (cfg.cmd == "curvature") {
    finsler::TangentPoint p{to_vec(cfg.x), to_vec(cfg.y)};
    emit(cfg, finsler::json_to_string(
                  finsler::curvature_report_json(model, p, echo)));
    return 0;
  }

  if (cfg.cmd == "cartan") {
    finsler::TangentPoint p{to_vec(cfg.x), to_vec(cfg.y)};
    finsler::ModelGroup grp = finsler::model_group(cfg.lambda_sign);
    finsler::TangentPoint q = finsler::normalize_to_shell(model, p);
    finsler::FrameAtPoint fr = finsler::build_orthonormal_frame(
        model, finsler::make_observer_point(model, q));
    finsler::CartanConditionReport rep = finsler::verify_cartan_conditions(
        model, fr, grp, cfg.samples, cfg.omega_scale, cfg.seed);
    finsler::MmDensityValue mm = finsler::mm_density(model, fr, grp);
    emit(cfg, finsler::json_to_string(finsler::cartan_report_json(
                  model, p, grp, rep, mm, echo)));
    bool ok = rep.c1_pass && rep.c2_pass && rep.c3_pass;
    if (!ok) {
      std::cerr << "cartan: condition residuals exceed tolerance\n";
      return static_cast<int>(finsler::ErrorCategory::Numerical);
    }
    return 0;
  }

  if (cfg.cmd == "observer") {
    finsler::TangentPoint p{to_vec(cfg.x), to_vec(cfg.y)};
    emit(cfg, finsler::json_to_string(
                  finsler::observer_report_json(model, p, echo)));
    return 0;
  }

  throw finsler::ConfigError(
      "unknown --cmd '" + cfg.cmd +
      "' (expected classify-plane, geodesic, transport, curvature, cartan "
      "or observer)");
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  CLI::App app{
      "finslerkit: classification scans, geodesics, transport, curvature "
      "and frame-bundle diagnostics for Finsler spacetime models"};
  app.set_version_flag("--version",
                       std::string("finslerkit ") + finsler::library_version());

  app.add_option("--model", cfg.model_path, "model spec JSON file")
      ->required();
  app.add_option("--cmd", cfg.cmd,
                 "one of classify-plane, geodesic, transport, curvature, "
                 "cartan, observer")
      ->required();
  app.add_option("--out", cfg.out_path, "output file path ('-' for stdout)")
      ->required();
  app.add_option("--seed", cfg.seed, "seed for all sampling")->capture_default_str();
  app.add_option("--tol", cfg.tol, "integrator tolerance")->capture_default_str();

  std::string grid = "201x201";
  app.add_option("--grid", grid, "scan grid as NxM")->capture_default_str();
  app.add_option("--sweep", cfg.sweep, "angular sweep sample count")->capture_default_str();
  auto vec4_opt = [&](const char* name, std::vector<double>& target,
                      const char* help) {
    app.add_option(name, target, help)
        ->delimiter(',')
        ->expected(4)
        ->capture_default_str();
  };
  vec4_opt("--base-x", cfg.base_x, "scan base point");
  vec4_opt("--axis-u", cfg.axis_u, "first spanning fiber direction");
  vec4_opt("--axis-v", cfg.axis_v, "second spanning fiber direction");
  app.add_option("--u-min", cfg.u_min, "scan extent")->capture_default_str();
  app.add_option("--u-max", cfg.u_max, "scan extent")->capture_default_str();
  app.add_option("--v-min", cfg.v_min, "scan extent")->capture_default_str();
  app.add_option("--v-max", cfg.v_max, "scan extent")->capture_default_str();

  vec4_opt("--x", cfg.x, "base point");
  vec4_opt("--y", cfg.y, "fiber vector");
  vec4_opt("--y2", cfg.y2, "target fiber vector (transport)");
  app.add_option("--tau0", cfg.tau0, "trajectory parameter start")->capture_default_str();
  app.add_option("--tau1", cfg.tau1, "trajectory parameter end")->capture_default_str();
  app.add_option("--lambda-sign", cfg.lambda_sign,
                 "model group selector: +1, 0 or -1")->capture_default_str()
      ->check(CLI::Range(-1, 1));
  app.add_option("--samples", cfg.samples, "sample count for diagnostics")
      ->capture_default_str();
  app.add_option("--omega-scale", cfg.omega_scale,
                 "diagnostic scaling of the connection's algebra-valued part")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(finsler::ErrorCategory::Config);
  }

  auto cross = grid.find('x');
  if (cross == std::string::npos)
    cross = grid.find('X');
  try {
    if (cross == std::string::npos)
      throw finsler::ConfigError("--grid expects NxM, got '" + grid + "'");
    try {
      cfg.grid_nu = std::stoi(grid.substr(0, cross));
      cfg.grid_nv = std::stoi(grid.substr(cross + 1));
    } catch (const std::exception&) {
      throw finsler::ConfigError("--grid expects NxM, got '" + grid + "'");
    }
    return run_command(cfg);
  } catch (const finsler::Error& e) {
    std::cerr << "finslerkit: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "finslerkit: internal error: " << e.what() << "\n";
    return static_cast<int>(finsler::ErrorCategory::Numerical);
  }
}
