#pragma once

#include <array>
#include <cmath>

namespace finsler {

// Forward-mode dual number carrying N directional derivatives over scalar T.
// T may itself be a Dual, which yields higher mixed derivatives: a value of
// type Dual<Dual<double,8>,8> tracks two derivative levels at once.
template <class T, int N>
struct Dual {
  T v{};
  std::array<T, N> d{};

  Dual() = default;
  Dual(double c) : v(c) {}  // NOLINT: implicit promotion of constants

  Dual& operator+=(const Dual& o) {
    v += o.v;
    for (int i = 0; i < N; ++i) d[i] += o.d[i];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (int i = 0; i < N; ++i) d[i] -= o.d[i];
    return *this;
  }

  friend Dual operator+(Dual a, const Dual& b) { return a += b; }
  friend Dual operator-(Dual a, const Dual& b) { return a -= b; }
  friend Dual operator-(const Dual& a) {
    Dual r;
    r.v = -a.v;
    for (int i = 0; i < N; ++i) r.d[i] = -a.d[i];
    return r;
  }
  friend Dual operator*(const Dual& a, const Dual& b) {
    Dual r;
    r.v = a.v * b.v;
    for (int i = 0; i < N; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
    return r;
  }
  friend Dual operator*(const Dual& a, double c) {
    Dual r;
    r.v = a.v * c;
    for (int i = 0; i < N; ++i) r.d[i] = a.d[i] * c;
    return r;
  }
  friend Dual operator*(double c, const Dual& a) { return a * c; }
  friend Dual operator/(const Dual& a, const Dual& b) {
    Dual r;
    r.v = a.v / b.v;
    T b2 = b.v * b.v;
    for (int i = 0; i < N; ++i) r.d[i] = (a.d[i] * b.v - a.v * b.d[i]) / b2;
    return r;
  }
  friend Dual operator/(const Dual& a, double c) { return a * (1.0 / c); }
};

inline double leaf(double x) { return x; }
template <class T, int N>
double leaf(const Dual<T, N>& x) {
  return leaf(x.v);
}

// |u|^c with the chain rule applied through all derivative levels. The sign
// of u is locally constant away from u = 0, so it enters as a constant
// factor; callers must keep u bounded away from zero.
inline double pow_abs(double u, double c) { return std::pow(std::abs(u), c); }
template <class T, int N>
Dual<T, N> pow_abs(const Dual<T, N>& u, double c) {
  Dual<T, N> r;
  r.v = pow_abs(u.v, c);
  double sgn = leaf(u.v) < 0.0 ? -1.0 : 1.0;
  T w = pow_abs(u.v, c - 1.0) * (c * sgn);
  for (int i = 0; i < N; ++i) r.d[i] = w * u.d[i];
  return r;
}

using Dual8 = Dual<double, 8>;   // 4 base directions, 4 fiber directions
using DualY = Dual<double, 4>;   // fiber directions only

}  // namespace finsler
