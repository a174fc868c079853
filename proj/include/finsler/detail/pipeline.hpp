#pragma once

// Derivative pipeline shared by the geometry layers.
//
// Every registered model is polynomial in y with x-dependent coefficients,
// so all mixed partials of L on the rectangle |alpha| <= 2 (base),
// |alpha| + |beta| <= 4 (total) are closed-form. A JetTable caches them at
// one tangent point. On top of the table, evaluators are generic over a
// scalar type S: reading the partial (alpha, beta) at a dual scalar attaches
// the next-higher table entries as derivative components, so one code path
// produces values (S = double), first derivatives (S = Dual<double,8>) and
// the mixed second derivatives needed by the curvature tensors.
//
// The nonlinear connection is the delicate case: its formula already
// consumes one fiber derivative of third-order data. Taking that inner
// derivative with a fiber-only dual (Dual<S,4>) keeps every table read
// inside the rectangle even when S itself is an 8-direction dual.

#include <array>

#include "finsler/dual.hpp"
#include "finsler/errors.hpp"
#include "finsler/model.hpp"

namespace finsler::detail {

template <class S>
using SV = std::array<S, 4>;
template <class S>
using SM = std::array<std::array<S, 4>, 4>;
template <class S>
using ST3 = std::array<std::array<std::array<S, 4>, 4>, 4>;
template <class S>
using ST4 = std::array<std::array<std::array<std::array<S, 4>, 4>, 4>, 4>;

inline MultiIndex mi_zero() { return {0, 0, 0, 0}; }
inline MultiIndex mi_unit(int i) {
  MultiIndex m{0, 0, 0, 0};
  m[static_cast<size_t>(i)] = 1;
  return m;
}
inline MultiIndex mi_add(MultiIndex m, int i) {
  m[static_cast<size_t>(i)] += 1;
  return m;
}

// ranks of exponent tuples: sum <= 2 -> 15 tuples, sum <= 4 -> 70 tuples
constexpr int kNumX = 15;
constexpr int kNumY = 70;

int xrank(const MultiIndex& m);  // -1 when |m| > 2
int yrank(const MultiIndex& m);  // -1 when |m| > 4
const std::array<MultiIndex, kNumX>& xtuples();
const std::array<MultiIndex, kNumY>& ytuples();

struct JetTable {
  std::array<double, 4> x{}, y{};
  double n = 2.0;  // homogeneity degree of L
  int max_x = 2, max_tot = 4;
  std::array<std::array<double, kNumY>, kNumX> part{};

  double at(const MultiIndex& a, const MultiIndex& b) const {
    int ao = mi_order(a), bo = mi_order(b);
    if (ao > max_x || ao + bo > max_tot)
      throw OrderUnsupported("jet table read outside the built rectangle");
    return part[static_cast<size_t>(xrank(a))][static_cast<size_t>(yrank(b))];
  }
};

JetTable build_jet_table(const FundamentalModel& m, const Vec4& x,
                         const Vec4& y, int max_x = 2, int max_tot = 4);

// Same table from coefficients precomputed at a fixed base point; saves the
// coefficient pass when many fiber points share one x (cone probes, scans).
JetTable build_jet_table(const FundamentalModel& m,
                         const std::vector<Coeff2>& coeffs, const Vec4& x,
                         const Vec4& y, int max_x = 2, int max_tot = 4);

// --- seeded reads ---------------------------------------------------------

template <class S>
struct JetSeed;

template <>
struct JetSeed<double> {
  static double get(const JetTable& t, const MultiIndex& a,
                    const MultiIndex& b) {
    return t.at(a, b);
  }
  static double xc(const JetTable& t, int i) { return t.x[static_cast<size_t>(i)]; }
  static double yc(const JetTable& t, int i) { return t.y[static_cast<size_t>(i)]; }
};

// 8-direction dual: slots 0..3 differentiate in x, slots 4..7 in y.
template <class T>
struct JetSeed<Dual<T, 8>> {
  static Dual<T, 8> get(const JetTable& t, const MultiIndex& a,
                        const MultiIndex& b) {
    Dual<T, 8> r;
    r.v = JetSeed<T>::get(t, a, b);
    for (int c = 0; c < 4; ++c) {
      r.d[static_cast<size_t>(c)] = JetSeed<T>::get(t, mi_add(a, c), b);
      r.d[static_cast<size_t>(4 + c)] = JetSeed<T>::get(t, a, mi_add(b, c));
    }
    return r;
  }
  static Dual<T, 8> xc(const JetTable& t, int i) {
    Dual<T, 8> r;
    r.v = JetSeed<T>::xc(t, i);
    r.d[static_cast<size_t>(i)] = T(1.0);
    return r;
  }
  static Dual<T, 8> yc(const JetTable& t, int i) {
    Dual<T, 8> r;
    r.v = JetSeed<T>::yc(t, i);
    r.d[static_cast<size_t>(4 + i)] = T(1.0);
    return r;
  }
};

// 4-direction dual: fiber directions only.
template <class T>
struct JetSeed<Dual<T, 4>> {
  static Dual<T, 4> get(const JetTable& t, const MultiIndex& a,
                        const MultiIndex& b) {
    Dual<T, 4> r;
    r.v = JetSeed<T>::get(t, a, b);
    for (int c = 0; c < 4; ++c)
      r.d[static_cast<size_t>(c)] = JetSeed<T>::get(t, a, mi_add(b, c));
    return r;
  }
  static Dual<T, 4> xc(const JetTable& t, int i) {
    Dual<T, 4> r;
    r.v = JetSeed<T>::xc(t, i);
    return r;
  }
  static Dual<T, 4> yc(const JetTable& t, int i) {
    Dual<T, 4> r;
    r.v = JetSeed<T>::yc(t, i);
    r.d[static_cast<size_t>(i)] = T(1.0);
    return r;
  }
};

template <class S>
S jet(const JetTable& t, const MultiIndex& a, const MultiIndex& b) {
  return JetSeed<S>::get(t, a, b);
}
template <class S>
S ycoord(const JetTable& t, int i) {
  return JetSeed<S>::yc(t, i);
}

// --- generic linear algebra ------------------------------------------------

// Gauss-Jordan inverse with pivoting on leaf magnitudes. Derivatives of the
// inverse come out of the dual arithmetic itself (the analytic rule
// d(g^-1) = -g^-1 (dg) g^-1 in mechanized form).
template <class S>
SM<S> inv4(const SM<S>& g) {
  SM<S> a = g;
  SM<S> r{};
  for (int i = 0; i < 4; ++i) r[i][i] = S(1.0);
  double scale = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) scale = std::max(scale, std::abs(leaf(a[i][j])));
  for (int col = 0; col < 4; ++col) {
    int piv = col;
    double best = std::abs(leaf(a[col][col]));
    for (int rr = col + 1; rr < 4; ++rr) {
      double m = std::abs(leaf(a[rr][col]));
      if (m > best) {
        best = m;
        piv = rr;
      }
    }
    if (!(best > 1e-13 * scale))
      throw DegenerateHessian("matrix inverse pivot collapsed");
    if (piv != col) {
      std::swap(a[piv], a[col]);
      std::swap(r[piv], r[col]);
    }
    S inv_p = S(1.0) / a[col][col];
    for (int j = 0; j < 4; ++j) {
      a[col][j] = a[col][j] * inv_p;
      r[col][j] = r[col][j] * inv_p;
    }
    for (int rr = 0; rr < 4; ++rr) {
      if (rr == col) continue;
      S f = a[rr][col];
      for (int j = 0; j < 4; ++j) {
        a[rr][j] = a[rr][j] - f * a[col][j];
        r[rr][j] = r[rr][j] - f * r[col][j];
      }
    }
  }
  return r;
}

// --- geometry evaluators ----------------------------------------------------

template <class S>
S eval_L(const JetTable& t) {
  return jet<S>(t, mi_zero(), mi_zero());
}

// g^L_ab = (1/2) d/dy^a d/dy^b L
template <class S>
SM<S> eval_gL(const JetTable& t) {
  SM<S> g;
  for (int a = 0; a < 4; ++a)
    for (int b = a; b < 4; ++b) {
      g[a][b] = 0.5 * jet<S>(t, mi_zero(), mi_add(mi_unit(a), b));
      if (b != a) g[b][a] = g[a][b];
    }
  return g;
}

// Nonlinear connection N^a_b = (1/4) d/dy^b [ g^{L ac} (y^d dL_c/dx^d - dL/dx^c) ].
// The outer fiber derivative is taken with a fiber-only dual layer so the
// table reads stay inside the rectangle for any outer scalar S.
template <class S>
SM<S> eval_N(const JetTable& t) {
  using D = Dual<S, 4>;
  SM<D> gL = eval_gL<D>(t);
  SM<D> gLi = inv4(gL);
  SV<D> G;
  for (int c = 0; c < 4; ++c) {
    D acc = -jet<D>(t, mi_unit(c), mi_zero());
    for (int d = 0; d < 4; ++d)
      acc += ycoord<D>(t, d) * jet<D>(t, mi_unit(d), mi_unit(c));
    G[c] = acc;
  }
  SM<S> N;
  for (int a = 0; a < 4; ++a) {
    D B{};
    for (int c = 0; c < 4; ++c) B += gLi[a][c] * G[c];
    for (int b = 0; b < 4; ++b) N[a][b] = 0.25 * B.d[static_cast<size_t>(b)];
  }
  return N;
}

// g^F_ab = (1/2) d/dy^a d/dy^b F^2 with F^2 = |L|^{2/n}, via the chain rule
// on the L-jet. Caller guarantees L is bounded away from zero.
template <class S>
SM<S> eval_gF(const JetTable& t) {
  S L = eval_L<S>(t);
  double c = 2.0 / t.n;
  double sgn = leaf(L) < 0.0 ? -1.0 : 1.0;
  S phi1 = pow_abs(L, c - 1.0) * (c * sgn);
  S phi2 = pow_abs(L, c - 2.0) * (c * (c - 1.0));
  SV<S> dL;
  for (int a = 0; a < 4; ++a) dL[a] = jet<S>(t, mi_zero(), mi_unit(a));
  SM<S> g;
  for (int a = 0; a < 4; ++a)
    for (int b = a; b < 4; ++b) {
      S ddL = jet<S>(t, mi_zero(), mi_add(mi_unit(a), b));
      g[a][b] = 0.5 * (phi2 * dL[a] * dL[b] + phi1 * ddL);
      if (b != a) g[b][a] = g[a][b];
    }
  return g;
}

// Full connection data at scalar S: nonlinear N, Finsler metric gF and its
// inverse, and the linear-connection coefficient blocks F (horizontal,
// Christoffel-type in the Berwald basis) and C (vertical).
template <class S>
struct ConnCoeffs {
  SM<S> N;
  SM<S> gF, gFi;
  ST3<S> F, C;
};

template <class S>
ConnCoeffs<S> eval_conn(const JetTable& t) {
  using D8 = Dual<S, 8>;
  ConnCoeffs<S> out;
  out.N = eval_N<S>(t);

  SM<D8> gF8 = eval_gF<D8>(t);
  SM<S> dgx[4], dgy[4];
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      out.gF[a][b] = gF8[a][b].v;
      for (int c = 0; c < 4; ++c) {
        dgx[c][a][b] = gF8[a][b].d[static_cast<size_t>(c)];
        dgy[c][a][b] = gF8[a][b].d[static_cast<size_t>(4 + c)];
      }
    }
  out.gFi = inv4(out.gF);

  // delta_c g_ab = d/dx^c g_ab - N^e_c d/dy^e g_ab
  SM<S> dgd[4];
  for (int c = 0; c < 4; ++c)
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        S v = dgx[c][a][b];
        for (int e = 0; e < 4; ++e) v -= out.N[e][c] * dgy[e][a][b];
        dgd[c][a][b] = v;
      }

  for (int cu = 0; cu < 4; ++cu)
    for (int a = 0; a < 4; ++a)
      for (int b = a; b < 4; ++b) {
        S accF{}, accC{};
        for (int d = 0; d < 4; ++d) {
          accF += out.gFi[cu][d] *
                  (dgd[a][b][d] + dgd[b][a][d] - dgd[d][a][b]);
          accC += out.gFi[cu][d] *
                  (dgy[a][b][d] + dgy[b][a][d] - dgy[d][a][b]);
        }
        out.F[cu][a][b] = 0.5 * accF;
        out.C[cu][a][b] = 0.5 * accC;
        if (b != a) {
          out.F[cu][b][a] = out.F[cu][a][b];
          out.C[cu][b][a] = out.C[cu][a][b];
        }
      }
  return out;
}

// Vertical coefficients only (cheaper path for fiber transport).
template <class S>
ST3<S> eval_C(const JetTable& t) {
  using DY = Dual<S, 4>;
  SM<DY> gFy = eval_gF<DY>(t);
  SM<S> gF, dgy[4];
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      gF[a][b] = gFy[a][b].v;
      for (int c = 0; c < 4; ++c) dgy[c][a][b] = gFy[a][b].d[static_cast<size_t>(c)];
    }
  SM<S> gFi = inv4(gF);
  ST3<S> C;
  for (int cu = 0; cu < 4; ++cu)
    for (int a = 0; a < 4; ++a)
      for (int b = a; b < 4; ++b) {
        S acc{};
        for (int d = 0; d < 4; ++d)
          acc += gFi[cu][d] * (dgy[a][b][d] + dgy[b][a][d] - dgy[d][a][b]);
        C[cu][a][b] = 0.5 * acc;
        if (b != a) C[cu][b][a] = C[cu][a][b];
      }
  return C;
}

// Scale used by relative null tests: ||y||_2^n.
double null_scale(const Vec4& y, double n);

// Checked table builders used by the public operations.
JetTable table_for(const FundamentalModel& m, const TangentPoint& p,
                   int max_x, int max_tot);

}  // namespace finsler::detail
