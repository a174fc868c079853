#pragma once

#include <cmath>

#include "finsler/linalg.hpp"

namespace finsler {

using Vec3 = Eigen::Vector3d;

// Symmetry group of the homogeneous model space, selected by the sign of its
// cosmological constant: +1 -> so(4,1), 0 -> iso(3,1), -1 -> so(3,2). The
// sign only enters the bracket of two translations.
struct ModelGroup {
  int sign_lambda = 0;
};

ModelGroup model_group(int sign_lambda);
const char* to_string(const ModelGroup& grp);

inline constexpr double kAlgebraTol = 1e-10;

// Model algebra element a = (h, z): a Lorentz part h(i, j) = h^i_j with
// eta * h antisymmetric, and a translation part z^i. The Lorentz part acts
// on translations as the plain matrix h.
struct AlgebraElement {
  Mat4 h = Mat4::Zero();
  Vec4 z = Vec4::Zero();

  double norm() const { return std::sqrt(h.squaredNorm() + z.squaredNorm()); }

  AlgebraElement& operator+=(const AlgebraElement& o) {
    h += o.h;
    z += o.z;
    return *this;
  }
  AlgebraElement& operator-=(const AlgebraElement& o) {
    h -= o.h;
    z -= o.z;
    return *this;
  }
  AlgebraElement& operator*=(double s) {
    h *= s;
    z *= s;
    return *this;
  }
  friend AlgebraElement operator+(AlgebraElement a, const AlgebraElement& b) {
    return a += b;
  }
  friend AlgebraElement operator-(AlgebraElement a, const AlgebraElement& b) {
    return a -= b;
  }
  friend AlgebraElement operator*(double s, AlgebraElement a) {
    return a *= s;
  }
};

// Throws InvalidAlgebraElement when the Lorentz part fails eta-antisymmetry
// beyond tol (relative to the size of h).
void require_algebra_element(const AlgebraElement& a, double tol = kAlgebraTol);

// Generator components of an element: rotations, boosts, and the spatial /
// temporal split of the translations. Assembly and splitting copy single
// matrix entries, so the round trip is exact.
struct AlgebraSplit {
  Vec3 rot = Vec3::Zero();
  Vec3 boost = Vec3::Zero();
  Vec3 spatial = Vec3::Zero();
  double temporal = 0.0;
};

AlgebraSplit split_components(const AlgebraElement& a);
AlgebraElement assemble_components(const AlgebraSplit& s);

// Single-generator elements; axis indices run 1..3, translation 0..3.
AlgebraElement rotation_generator(int axis);
AlgebraElement boost_generator(int axis);
AlgebraElement translation_generator(int i);

// Bracket of the model algebra: the Lorentz parts commute as matrices, a
// Lorentz part rotates a translation, and two translations close into a
// boost-rotation block weighted by sign_lambda.
AlgebraElement algebra_bracket(const AlgebraElement& a,
                               const AlgebraElement& b,
                               const ModelGroup& grp);

// Conjugation by an invertible frame transformation: (h, z) ->
// (k h k^-1, k z).
AlgebraElement adjoint_action(const Mat4& k, const AlgebraElement& a);

// Rotation about a spatial axis, embedded as a 4x4 frame transformation
// fixing the time axis.
Mat4 spatial_rotation(const Vec3& axis, double angle);

}  // namespace finsler
