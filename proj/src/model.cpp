#include "finsler/model.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace finsler {

using nlohmann::json;

const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::MetricInduced: return "metric-induced";
    case ModelKind::BimetricProduct: return "bimetric-product";
    case ModelKind::CustomPolynomial: return "custom-polynomial";
  }
  return "?";
}

namespace {

double ipow(double v, int p) {
  double r = 1.0;
  for (int k = 0; k < p; ++k) r *= v;
  return r;
}

}  // namespace

Coeff2 coeff_eval(const FieldExpr& f, const Vec4& x) {
  double u = f.c0;
  for (int i = 0; i < 4; ++i) u += f.a[i] * x[i];
  int p = f.power;
  Coeff2 c;
  c.v = ipow(u, p);
  double du = p >= 1 ? p * ipow(u, p - 1) : 0.0;
  double ddu = p >= 2 ? p * (p - 1) * ipow(u, p - 2) : 0.0;
  for (int i = 0; i < 4; ++i) {
    c.g[i] = du * f.a[i];
    for (int j = 0; j < 4; ++j) c.h[i][j] = ddu * f.a[i] * f.a[j];
  }
  return c;
}

Coeff2 coeff_mul(const Coeff2& a, const Coeff2& b) {
  Coeff2 c;
  c.v = a.v * b.v;
  for (int i = 0; i < 4; ++i) c.g[i] = a.g[i] * b.v + a.v * b.g[i];
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      c.h[i][j] = a.h[i][j] * b.v + a.g[i] * b.g[j] + a.g[j] * b.g[i] +
                  a.v * b.h[i][j];
  return c;
}

Mat4 MetricField::value_at(const Vec4& x) const {
  Mat4 g;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) g(i, j) = coeff_eval(entry[i][j], x).v;
  return g;
}

Mat4 FundamentalModel::metric_function(const Vec4& x) const {
  if (!metric_h)
    throw ConfigError("model of kind " + std::string(to_string(kind)) +
                      " has no single input metric");
  return metric_h->value_at(x);
}

void check_point(const TangentPoint& p) {
  for (int i = 0; i < 4; ++i)
    if (!std::isfinite(p.x[i]) || !std::isfinite(p.y[i]))
      throw EvaluationDomainError("non-finite tangent point component");
  double ymax = p.y.cwiseAbs().maxCoeff();
  if (ymax < 1e-300)
    throw EvaluationDomainError(
        "fiber coordinate on the zero section (|y| < 1e-300)");
}

double FundamentalModel::partial(const MultiIndex& alpha,
                                 const MultiIndex& beta, const Vec4& x,
                                 const Vec4& y) const {
  int xo = mi_order(alpha);
  if (xo > 2)
    throw OrderUnsupported("x derivatives are available up to order 2");
  double acc = 0.0;
  for (const auto& t : terms) {
    double mono = t.mult;
    bool vanish = false;
    for (int i = 0; i < 4 && !vanish; ++i) {
      int p = t.pow[i], b = beta[i];
      if (b > p) {
        vanish = true;
        break;
      }
      double fall = 1.0;
      for (int k = 0; k < b; ++k) fall *= static_cast<double>(p - k);
      mono *= fall * ipow(y[i], p - b);
    }
    if (vanish || mono == 0.0) continue;

    Coeff2 c = coeff_eval(fields[static_cast<size_t>(t.f1)], x);
    if (t.f2 >= 0)
      c = coeff_mul(c, coeff_eval(fields[static_cast<size_t>(t.f2)], x));

    double cpart;
    if (xo == 0) {
      cpart = c.v;
    } else if (xo == 1) {
      int i = 0;
      while (alpha[i] == 0) ++i;
      cpart = c.g[i];
    } else {  // xo == 2
      int i = -1, j = -1;
      for (int k = 0; k < 4; ++k) {
        if (alpha[k] == 2) { i = j = k; }
        if (alpha[k] == 1) { (i < 0 ? i : j) = k; }
      }
      cpart = c.h[i][j];
    }
    acc += mono * cpart;
  }
  return acc;
}

std::vector<Coeff2> FundamentalModel::term_coefficients(const Vec4& x) const {
  std::vector<Coeff2> coeffs;
  coeffs.reserve(terms.size());
  for (const auto& t : terms) {
    Coeff2 c = coeff_eval(fields[static_cast<size_t>(t.f1)], x);
    if (t.f2 >= 0)
      c = coeff_mul(c, coeff_eval(fields[static_cast<size_t>(t.f2)], x));
    coeffs.push_back(c);
  }
  return coeffs;
}

double FundamentalModel::partial(const MultiIndex& alpha,
                                 const MultiIndex& beta,
                                 const std::vector<Coeff2>& coeffs,
                                 const Vec4& y) const {
  int xo = mi_order(alpha);
  if (xo > 2)
    throw OrderUnsupported("x derivatives are available up to order 2");
  double acc = 0.0;
  for (size_t ti = 0; ti < terms.size(); ++ti) {
    const auto& t = terms[ti];
    double mono = t.mult;
    bool vanish = false;
    for (int i = 0; i < 4 && !vanish; ++i) {
      int p = t.pow[i], b = beta[i];
      if (b > p) {
        vanish = true;
        break;
      }
      double fall = 1.0;
      for (int k = 0; k < b; ++k) fall *= static_cast<double>(p - k);
      mono *= fall * ipow(y[i], p - b);
    }
    if (vanish || mono == 0.0) continue;

    const Coeff2& c = coeffs[ti];
    double cpart;
    if (xo == 0) {
      cpart = c.v;
    } else if (xo == 1) {
      int i = 0;
      while (alpha[i] == 0) ++i;
      cpart = c.g[i];
    } else {  // xo == 2
      int i = -1, j = -1;
      for (int k = 0; k < 4; ++k) {
        if (alpha[k] == 2) { i = j = k; }
        if (alpha[k] == 1) { (i < 0 ? i : j) = k; }
      }
      cpart = c.h[i][j];
    }
    acc += mono * cpart;
  }
  return acc;
}

namespace {

MetricField parse_metric_param(const json& jm, const char* name) {
  MetricField mf;
  auto fill_constant = [&](const Mat4& g) {
    double scale = g.cwiseAbs().maxCoeff();
    if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(scale, 1.0))
      throw NonSymmetricMetricInput(std::string(name) +
                                    " matrix is not symmetric");
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        mf.entry[i][j] = FieldExpr{g(i, j), {0, 0, 0, 0}, 1};
  };
  auto fill_diag_scale = [&](double eps) {
    mf.entry[0][0] = FieldExpr{-1.0, {0, 0, 0, 0}, 1};
    for (int i = 1; i < 4; ++i)
      mf.entry[i][i] = FieldExpr{1.0, {eps, 0, 0, 0}, 2};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        if (i != j) mf.entry[i][j] = FieldExpr{0.0, {0, 0, 0, 0}, 1};
  };

  if (jm.is_string()) {
    std::string preset = jm.get<std::string>();
    if (preset == "minkowski") {
      fill_constant(minkowski_eta());
    } else if (preset == "diag-scale") {
      fill_diag_scale(0.1);
    } else {
      throw UnknownKind("metric preset '" + preset + "'");
    }
  } else if (jm.is_object()) {
    std::string preset = jm.value("preset", "");
    if (preset == "minkowski") {
      fill_constant(minkowski_eta());
    } else if (preset == "diag-scale") {
      fill_diag_scale(jm.value("eps", 0.1));
    } else {
      throw UnknownKind("metric preset '" + preset + "'");
    }
  } else if (jm.is_array()) {
    if (jm.size() != 4) throw ConfigError("metric matrix must be 4x4");
    Mat4 g;
    for (int i = 0; i < 4; ++i) {
      if (!jm[i].is_array() || jm[i].size() != 4)
        throw ConfigError("metric matrix must be 4x4");
      for (int j = 0; j < 4; ++j) g(i, j) = jm[i][j].get<double>();
    }
    fill_constant(g);
  } else {
    throw ConfigError(std::string("unsupported value for metric param '") +
                      name + "'");
  }
  return mf;
}

int add_field(FundamentalModel& m, const FieldExpr& f) {
  m.fields.push_back(f);
  return static_cast<int>(m.fields.size()) - 1;
}

void build_metric_terms(FundamentalModel& m, const MetricField& g) {
  std::array<std::array<int, 4>, 4> id{};
  for (int a = 0; a < 4; ++a)
    for (int b = a; b < 4; ++b) id[a][b] = add_field(m, g.entry[a][b]);
  for (int a = 0; a < 4; ++a)
    for (int b = a; b < 4; ++b) {
      PolyTerm t;
      t.pow = {0, 0, 0, 0};
      t.pow[a] += 1;
      t.pow[b] += 1;
      t.mult = (a == b) ? 1.0 : 2.0;
      t.f1 = id[a][b];
      m.terms.push_back(t);
    }
}

void build_bimetric_terms(FundamentalModel& m, const MetricField& h,
                          const MetricField& k) {
  std::array<std::array<int, 4>, 4> ih{}, ik{};
  for (int a = 0; a < 4; ++a)
    for (int b = a; b < 4; ++b) {
      ih[a][b] = add_field(m, h.entry[a][b]);
      ik[a][b] = add_field(m, k.entry[a][b]);
    }
  for (int a = 0; a < 4; ++a)
    for (int b = a; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = c; d < 4; ++d) {
          PolyTerm t;
          t.pow = {0, 0, 0, 0};
          t.pow[a] += 1;
          t.pow[b] += 1;
          t.pow[c] += 1;
          t.pow[d] += 1;
          t.mult = ((a == b) ? 1.0 : 2.0) * ((c == d) ? 1.0 : 2.0);
          t.f1 = ih[a][b];
          t.f2 = ik[c][d];
          m.terms.push_back(t);
        }
}

}  // namespace

FundamentalModel build_model(const std::string& spec_json) {
  json j;
  try {
    j = json::parse(spec_json);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model spec is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("kind"))
    throw ConfigError("model spec must be an object with a 'kind' key");

  FundamentalModel m;
  std::string kind = j["kind"].get<std::string>();
  json params = j.value("params", json::object());

  if (kind == "metric-induced") {
    m.kind = ModelKind::MetricInduced;
    m.degree = 2.0;
    if (!params.contains("metric"))
      throw ConfigError("metric-induced model needs params.metric");
    m.metric_h = parse_metric_param(params["metric"], "metric");
    build_metric_terms(m, *m.metric_h);
  } else if (kind == "bimetric-product") {
    m.kind = ModelKind::BimetricProduct;
    m.degree = 4.0;
    if (!params.contains("h") || !params.contains("k"))
      throw ConfigError("bimetric-product model needs params.h and params.k");
    m.metric_h = parse_metric_param(params["h"], "h");
    m.metric_k = parse_metric_param(params["k"], "k");
    build_bimetric_terms(m, *m.metric_h, *m.metric_k);
  } else if (kind == "custom-polynomial") {
    m.kind = ModelKind::CustomPolynomial;
    if (!j.contains("degree"))
      throw ConfigError("custom-polynomial model needs a 'degree' key");
    double n = j["degree"].get<double>();
    if (!(n >= 2.0)) throw DegreeOutOfRange("degree must be >= 2");
    if (n != std::floor(n))
      throw DegreeOutOfRange(
          "only integer homogeneity degrees are constructible for the "
          "polynomial kind");
    m.degree = n;
    if (!params.contains("terms") || !params["terms"].is_array() ||
        params["terms"].empty())
      throw ConfigError("custom-polynomial model needs params.terms");
    int deg = static_cast<int>(n);
    for (const auto& jt : params["terms"]) {
      if (!jt.contains("powers") || !jt["powers"].is_array() ||
          jt["powers"].size() != 4)
        throw ConfigError("each term needs powers: [p0,p1,p2,p3]");
      PolyTerm t;
      int total = 0;
      for (int i = 0; i < 4; ++i) {
        int p = jt["powers"][i].get<int>();
        if (p < 0) throw ConfigError("term powers must be non-negative");
        t.pow[i] = p;
        total += p;
      }
      if (total != deg)
        throw DegreeOutOfRange(
            "term powers must sum to the declared degree (homogeneity is "
            "enforced by construction)");
      FieldExpr f;
      f.c0 = jt.value("coef", 1.0);
      f.power = 1;
      if (jt.contains("xlin")) {
        if (!jt["xlin"].is_array() || jt["xlin"].size() != 4)
          throw ConfigError("term xlin must be a 4-array");
        for (int i = 0; i < 4; ++i) f.a[i] = jt["xlin"][i].get<double>();
      }
      t.f1 = add_field(m, f);
      m.terms.push_back(t);
    }
  } else {
    throw UnknownKind("'" + kind + "' (expected metric-induced, "
                      "bimetric-product or custom-polynomial)");
  }

  m.jet_order_max = std::max(4, static_cast<int>(m.degree));
  if (j.contains("jet_order_max")) {
    int jo = j["jet_order_max"].get<int>();
    if (jo < 4)
      throw ConfigError("jet_order_max must be at least 4 (in y)");
    m.jet_order_max = jo;
  }
  m.source_json = j.dump();
  return m;
}

FundamentalModel build_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model spec file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return build_model(ss.str());
}

double JetValue::at(const MultiIndex& alpha, const MultiIndex& beta) const {
  auto it = partials.find({alpha, beta});
  if (it == partials.end())
    throw OrderUnsupported("requested partial is outside the evaluated jet");
  return it->second;
}

double JetValue::at_axes(const std::vector<int>& alpha_axes,
                         const std::vector<int>& beta_axes) const {
  MultiIndex a{0, 0, 0, 0}, b{0, 0, 0, 0};
  for (int i : alpha_axes) a[static_cast<size_t>(i)] += 1;
  for (int i : beta_axes) b[static_cast<size_t>(i)] += 1;
  return at(a, b);
}

namespace {

// Enumerate every multi-index with the given total order.
void enumerate(int order, std::vector<MultiIndex>& out) {
  for (int i = 0; i <= order; ++i)
    for (int jj = 0; jj <= order - i; ++jj)
      for (int k = 0; k <= order - i - jj; ++k)
        out.push_back({i, jj, k, order - i - jj - k});
}

std::vector<MultiIndex> indices_up_to(int order) {
  std::vector<MultiIndex> out;
  for (int o = 0; o <= order; ++o) enumerate(o, out);
  return out;
}

}  // namespace

JetValue evaluate_jet(const FundamentalModel& model, const TangentPoint& p,
                      int x_order, int y_order) {
  check_point(p);
  if (x_order < 0 || y_order < 0 || x_order > 2 ||
      x_order + y_order > model.jet_order_max)
    throw OrderUnsupported(
        "need 0 <= x_order <= 2 and x_order + y_order <= jet_order_max");
  JetValue out;
  out.value = model.partial({0, 0, 0, 0}, {0, 0, 0, 0}, p.x, p.y);
  for (const auto& a : indices_up_to(x_order))
    for (const auto& b : indices_up_to(y_order))
      out.partials[{a, b}] = model.partial(a, b, p.x, p.y);
  return out;
}

namespace {

// Central difference of f along axis `axis` with per-axis derivative order k,
// exact degree: stencils are the classical central ones of width k+1.
template <class F>
double central_1d(const F& f, int k, double h) {
  switch (k) {
    case 0:
      return f(0.0);
    case 1:
      return (f(h) - f(-h)) / (2 * h);
    case 2:
      return (f(h) - 2 * f(0.0) + f(-h)) / (h * h);
    case 3:
      return (f(2 * h) - 2 * f(h) + 2 * f(-h) - f(-2 * h)) / (2 * h * h * h);
    case 4:
      return (f(2 * h) - 4 * f(h) + 6 * f(0.0) - 4 * f(-h) + f(-2 * h)) /
             (h * h * h * h);
    default:
      throw OrderUnsupported("finite differences support per-axis order <= 4");
  }
}

// Nested central differences over all axes of (alpha, beta).
double fd_partial(const FundamentalModel& m, const Vec4& x, const Vec4& y,
                  MultiIndex alpha, MultiIndex beta, double h) {
  for (int i = 0; i < 4; ++i) {
    if (alpha[i] > 0) {
      int k = alpha[i];
      alpha[i] = 0;
      auto f = [&](double t) {
        Vec4 xs = x;
        xs[i] += t;
        return fd_partial(m, xs, y, alpha, beta, h);
      };
      return central_1d(f, k, h);
    }
  }
  for (int i = 0; i < 4; ++i) {
    if (beta[i] > 0) {
      int k = beta[i];
      beta[i] = 0;
      auto f = [&](double t) {
        Vec4 ys = y;
        ys[i] += t;
        return fd_partial(m, x, ys, alpha, beta, h);
      };
      return central_1d(f, k, h);
    }
  }
  return m.partial({0, 0, 0, 0}, {0, 0, 0, 0}, x, y);
}

}  // namespace

JetValue finite_difference_jet(const FundamentalModel& model,
                               const TangentPoint& p, int x_order, int y_order,
                               const FdJetOptions& opt) {
  check_point(p);
  if (opt.step <= 1e-10)
    throw StepUnderflow("finite-difference step too small to be meaningful");
  if (x_order < 0 || y_order < 0)
    throw OrderUnsupported("negative derivative order");

  JetValue out;
  out.value = model.partial({0, 0, 0, 0}, {0, 0, 0, 0}, p.x, p.y);
  for (const auto& a : indices_up_to(x_order)) {
    for (const auto& b : indices_up_to(y_order)) {
      // Richardson extrapolation ladder on the O(h^2) central estimates.
      int levels = std::max(2, opt.richardson_levels);
      std::vector<double> est(static_cast<size_t>(levels));
      double h = opt.step;
      for (int l = 0; l < levels; ++l) {
        est[static_cast<size_t>(l)] = fd_partial(model, p.x, p.y, a, b, h);
        h *= 0.5;
      }
      // one extrapolation pass: error drops from h^2 to h^4
      std::vector<double> extr(est.size() - 1);
      for (size_t l = 0; l + 1 < est.size(); ++l)
        extr[l] = (4.0 * est[l + 1] - est[l]) / 3.0;
      double result = extr.back();
      double err = extr.size() >= 2
                       ? std::abs(extr[extr.size() - 1] - extr[extr.size() - 2])
                       : std::abs(est.back() - extr.back());
      if (opt.inconsistency_tol > 0 &&
          err > opt.inconsistency_tol * std::max(1.0, std::abs(result)))
        throw OracleInconsistent(
            "Richardson levels disagree beyond the configured tolerance");
      out.partials[{a, b}] = result;
      out.error_estimates[{a, b}] = err;
    }
  }
  return out;
}

}  // namespace finsler
