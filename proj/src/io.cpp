#include "finsler/io.hpp"

#include <charconv>
#include <fstream>

#include "finsler/algebra.hpp"

namespace finsler {

namespace {

nlohmann::json vec_json(const Vec4& v) {
  return nlohmann::json{v[0], v[1], v[2], v[3]};
}

nlohmann::json mat_json(const Mat4& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < 4; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < 4; ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json tensor3_json(const Tensor3& t) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& a : t) {
    nlohmann::json mid = nlohmann::json::array();
    for (const auto& b : a) {
      nlohmann::json row = nlohmann::json::array();
      for (double v : b) row.push_back(v);
      mid.push_back(row);
    }
    out.push_back(mid);
  }
  return out;
}

void put_header(std::string& out, const char* what,
                const nlohmann::json& config) {
  out += "# finslerkit ";
  out += library_version();
  out += " ";
  out += what;
  out += "\n# config: ";
  out += config.dump();
  out += "\n";
}

void stamp(nlohmann::json& j, const nlohmann::json& config) {
  j["version"] = library_version();
  j["config"] = config;
}

int matrix_rank(const Mat8& m, double tol = 1e-9) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  double top = s.size() ? s[0] : 0.0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > tol * std::max(1.0, top)) ++r;
  return r;
}

}  // namespace

const char* library_version() { return "0.1.0"; }

std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string scan_csv(const ScanResult& r, const nlohmann::json& config) {
  std::string out;
  out.reserve(r.nodes.size() * 48 + 256);
  put_header(out, "classification scan", config);
  out += "y1,y2,sign_L,det_sign,sig0,sig1,sig2,sig3,in_omega,in_cone\n";
  for (const ScanNode& n : r.nodes) {
    out += format_double(n.u);
    out += ',';
    out += format_double(n.v);
    out += ',';
    out += std::to_string(n.sign_L);
    out += ',';
    out += std::to_string(n.det_sign);
    for (int s : n.signature) {
      out += ',';
      out += std::to_string(s);
    }
    out += n.in_omega ? ",1" : ",0";
    out += n.in_cone ? ",1\n" : ",0\n";
  }
  return out;
}

std::string trajectory_csv(const Trajectory& t, const nlohmann::json& config) {
  std::string out;
  out.reserve(t.tau.size() * 160 + 256);
  put_header(out, "trajectory", config);
  out += "tau,x0,x1,x2,x3,y0,y1,y2,y3,F,detgL\n";
  for (size_t k = 0; k < t.tau.size(); ++k) {
    out += format_double(t.tau[k]);
    for (int a = 0; a < 4; ++a) {
      out += ',';
      out += format_double(t.points[k].x[a]);
    }
    for (int a = 0; a < 4; ++a) {
      out += ',';
      out += format_double(t.points[k].y[a]);
    }
    out += ',';
    out += format_double(t.F[k]);
    out += ',';
    out += format_double(t.det_gL[k]);
    out += '\n';
  }
  return out;
}

nlohmann::json scan_summary_json(const ScanResult& r,
                                 const nlohmann::json& config) {
  nlohmann::json j;
  stamp(j, config);
  j["grid"] = {{"nu", r.plane.nu},
               {"nv", r.plane.nv},
               {"u_range", {r.plane.u_min, r.plane.u_max}},
               {"v_range", {r.plane.v_min, r.plane.v_max}},
               {"base_x", vec_json(r.plane.base_x)},
               {"axis_u", vec_json(r.plane.axis_u)},
               {"axis_v", vec_json(r.plane.axis_v)}};
  j["sign_regions"] = {{"positive", r.summary.sign_pos_regions},
                       {"negative", r.summary.sign_neg_regions}};
  nlohmann::json sig = nlohmann::json::object();
  for (const auto& [pattern, count] : r.summary.signature_regions)
    sig[pattern] = count;
  j["signature_regions"] = sig;
  nlohmann::json comps = nlohmann::json::array();
  for (const OmegaComponent& c : r.summary.omega_components) {
    comps.push_back({{"id", c.id},
                     {"nodes", c.nodes},
                     {"future", c.future},
                     {"touches_degeneracy", c.touches_degeneracy},
                     {"touches_grid_edge", c.touches_grid_edge}});
  }
  j["omega_components"] = comps;
  j["future_component"] = r.summary.future_component;
  const RaySweep& rays = r.summary.rays;
  j["rays"] = {{"null_angles", rays.null_angles},
               {"degenerate_angles", rays.degenerate_angles},
               {"null_count", rays.null_angles.size()},
               {"degenerate_count", rays.degenerate_angles.size()},
               {"cone", {{"found", rays.cone_found},
                         {"lo", rays.cone_lo},
                         {"hi", rays.cone_hi},
                         {"extra_arcs", rays.extra_cone_arcs}}}};
  return j;
}

nlohmann::json transport_report_json(const GeneralizedLorentz& g,
                                     const Vec4& x, const FrameAtPoint& from,
                                     const FrameAtPoint& to,
                                     const nlohmann::json& config) {
  nlohmann::json j;
  stamp(j, config);
  j["inputs"] = {{"x", vec_json(x)},
                 {"frame_from", mat_json(from.f)},
                 {"frame_to", mat_json(to.f)}};
  j["lambda"] = mat_json(g.lambda);
  j["orthonormality_residual"] = g.orthonormality_residual;
  j["eta_residual"] = g.eta_residual;
  j["shooting_iterations"] = g.shooting_iterations;
  return j;
}

nlohmann::json curvature_report_json(const FundamentalModel& m,
                                     const TangentPoint& p,
                                     const nlohmann::json& config) {
  nlohmann::json j;
  stamp(j, config);
  j["point"] = {{"x", vec_json(p.x)}, {"y", vec_json(p.y)}};
  auto nl = nonlinear_connection(m, p);
  j["nonlinear_connection"] = mat_json(nl.N);
  auto R = nonlinear_curvature(m, p);
  j["nonlinear_curvature"] = tensor3_json(R.R);
  auto lin = linear_curvature(m, p);
  j["linear_curvature_norms"] = {{"R", tensor_norm(lin.Rlin)},
                                 {"P", tensor_norm(lin.Plin)},
                                 {"S", tensor_norm(lin.Slin)}};
  j["gravity_action_density"] = gravity_action_density(m, p);
  return j;
}

nlohmann::json cartan_report_json(const FundamentalModel& m,
                                  const TangentPoint& p, const ModelGroup& grp,
                                  const CartanConditionReport& conditions,
                                  const MmDensityValue& mm,
                                  const nlohmann::json& config) {
  nlohmann::json j;
  stamp(j, config);
  j["group"] = {{"name", to_string(grp)}, {"sign_lambda", grp.sign_lambda}};
  j["conditions"] = {{"c1_max", conditions.c1_max},
                     {"c2_max", conditions.c2_max},
                     {"c3_max", conditions.c3_max},
                     {"c1_pass", conditions.c1_pass},
                     {"c2_pass", conditions.c2_pass},
                     {"c3_pass", conditions.c3_pass},
                     {"samples", conditions.samples},
                     {"omega_scale", conditions.omega_scale}};
  j["mm_density"] = {{"cosmological", mm.cosmological},
                     {"curvature_term", mm.curvature_term},
                     {"gauss_bonnet", mm.gauss_bonnet}};

  TangentPoint q = normalize_to_shell(m, p);
  FrameAtPoint fr = build_orthonormal_frame(m, make_observer_point(m, q));
  struct Probe {
    const char* a;
    const char* b;
    AlgebraElement ea, eb;
  };
  const Probe probes[] = {
      {"Z0", "Z1", translation_generator(0), translation_generator(1)},
      {"L1", "Z0", boost_generator(1), translation_generator(0)},
      {"R1", "R2", rotation_generator(1), rotation_generator(2)},
  };
  nlohmann::json samples = nlohmann::json::array();
  for (const Probe& pr : probes) {
    AlgebraElement f = cartan_curvature(m, fr, pr.ea, pr.eb, grp);
    samples.push_back(
        {{"a", pr.a}, {"b", pr.b}, {"curvature_norm", f.norm()}});
  }
  j["curvature_samples"] = samples;
  return j;
}

nlohmann::json observer_report_json(const FundamentalModel& m,
                                    const TangentPoint& p,
                                    const nlohmann::json& config) {
  nlohmann::json j;
  stamp(j, config);
  TangentPoint q = normalize_to_shell(m, p);
  ObserverPoint op = make_observer_point(m, q);
  j["point"] = {{"x", vec_json(q.x)}, {"y", vec_json(q.y)}};
  auto rc = reeb_and_contact(m, op);
  j["alpha_of_reeb"] = rc.alpha_of_r;
  auto sas = sasaki_metric(m, q);
  j["sasaki_signature"] = eigen_signature(sas.restricted);
  FrameAtPoint fr = build_orthonormal_frame(m, op);
  Mat4 gram = fr.f.transpose() * finsler_metric_gF(m, q).matrix() * fr.f;
  j["frame_gram_residual"] = (gram + minkowski_eta()).norm();
  auto split = tangent_split(m, op, fr);
  j["projector_ranks"] = {{"vertical", matrix_rank(split.P_V)},
                          {"horizontal_spatial", matrix_rank(split.P_vecH)},
                          {"reeb", matrix_rank(split.P_H0)}};
  j["contact_volume_ratio"] = contact_volume_ratio(m, op, fr);
  return j;
}

std::string json_to_string(const nlohmann::json& j) { return j.dump(2) + "\n"; }

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open output file: " + path);
  os.write(content.data(), static_cast<std::streamsize>(content.size()));
  os.flush();
  if (!os) throw IoError("failed writing output file: " + path);
}

}  // namespace finsler
