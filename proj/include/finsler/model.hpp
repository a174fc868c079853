#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "finsler/errors.hpp"
#include "finsler/linalg.hpp"

namespace finsler {

enum class ModelKind { MetricInduced, BimetricProduct, CustomPolynomial };

const char* to_string(ModelKind k);

// Multi-index over the four chart axes, stored as per-axis derivative counts.
// Using counts (rather than index sequences) makes permutation symmetry of
// mixed partials hold bit-for-bit by construction.
using MultiIndex = std::array<int, 4>;

inline int mi_order(const MultiIndex& m) { return m[0] + m[1] + m[2] + m[3]; }

// One scalar coefficient of the model as a function of x: an affine form
// c0 + a.x raised to an integer power. Values and x-derivatives up to
// second order are closed-form and exact.
struct FieldExpr {
  double c0 = 0.0;
  std::array<double, 4> a{0.0, 0.0, 0.0, 0.0};
  int power = 1;

  bool constant() const {
    return a[0] == 0.0 && a[1] == 0.0 && a[2] == 0.0 && a[3] == 0.0;
  }
};

// Value, gradient and Hessian in x of a coefficient (enough for the
// second-order base derivatives the geometry needs).
struct Coeff2 {
  double v = 0.0;
  std::array<double, 4> g{};
  std::array<std::array<double, 4>, 4> h{};
};

Coeff2 coeff_eval(const FieldExpr& f, const Vec4& x);
Coeff2 coeff_mul(const Coeff2& a, const Coeff2& b);

// One monomial of L: mult * field[f1] * field[f2] * y^pow.
// f2 < 0 means the second factor is absent.
struct PolyTerm {
  std::array<int, 4> pow{};
  double mult = 1.0;
  int f1 = -1;
  int f2 = -1;
};

// Symmetric 4x4 coefficient matrix whose entries are fields; used to retain
// the Lorentzian inputs of the metric-induced and bimetric kinds.
struct MetricField {
  std::array<std::array<FieldExpr, 4>, 4> entry;
  Mat4 value_at(const Vec4& x) const;
};

class FundamentalModel {
 public:
  ModelKind kind = ModelKind::MetricInduced;
  double degree = 2.0;       // homogeneity degree n of L
  int jet_order_max = 4;     // >= 4 in y; x derivatives capped at 2

  std::vector<PolyTerm> terms;
  std::vector<FieldExpr> fields;

  // present for metric-induced (h only) and bimetric-product (h and k)
  std::optional<MetricField> metric_h;
  std::optional<MetricField> metric_k;

  std::string source_json;   // resolved spec echoed into reports

  // Plain metric evaluation for the metric-induced kind (oracle input).
  Mat4 metric_function(const Vec4& x) const;

  // L and exact mixed partials, summed over the monomial terms.
  double partial(const MultiIndex& alpha, const MultiIndex& beta,
                 const Vec4& x, const Vec4& y) const;

  // Coefficient jets of every term at a fixed base point. Feeding them into
  // the overload below gives the same values as partial() term for term,
  // but skips re-evaluating the x-dependence for every table entry.
  std::vector<Coeff2> term_coefficients(const Vec4& x) const;
  double partial(const MultiIndex& alpha, const MultiIndex& beta,
                 const std::vector<Coeff2>& coeffs, const Vec4& y) const;
};

// JetValue: L and all mixed partials up to the requested orders at a point.
struct JetValue {
  double value = 0.0;
  std::map<std::pair<MultiIndex, MultiIndex>, double> partials;
  std::map<std::pair<MultiIndex, MultiIndex>, double> error_estimates;

  double at(const MultiIndex& alpha, const MultiIndex& beta) const;
  // Lookup by derivative axis lists, e.g. ({0,1}, {2}) = d/dx0 d/dx1 d/dy2.
  double at_axes(const std::vector<int>& alpha_axes,
                 const std::vector<int>& beta_axes) const;
};

FundamentalModel build_model(const std::string& spec_json);
FundamentalModel build_model_file(const std::string& path);

JetValue evaluate_jet(const FundamentalModel& model, const TangentPoint& p,
                      int x_order, int y_order);

struct FdJetOptions {
  double step = 1e-4;
  int richardson_levels = 2;
  // When positive, entries whose Richardson levels disagree by more than
  // this (relative to the entry magnitude) raise OracleInconsistent.
  double inconsistency_tol = 0.0;
};

JetValue finite_difference_jet(const FundamentalModel& model,
                               const TangentPoint& p, int x_order, int y_order,
                               const FdJetOptions& opt = {});

// Shared guards.
void check_point(const TangentPoint& p);  // finite, y away from zero section

}  // namespace finsler
