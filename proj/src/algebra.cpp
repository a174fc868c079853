#include "finsler/algebra.hpp"

#include <Eigen/Geometry>

#include "finsler/errors.hpp"

namespace finsler {

ModelGroup model_group(int sign_lambda) {
  if (sign_lambda < -1 || sign_lambda > 1)
    throw ConfigError("sign_lambda must be -1, 0 or +1");
  return {sign_lambda};
}

const char* to_string(const ModelGroup& grp) {
  switch (grp.sign_lambda) {
    case 1:
      return "so(4,1)";
    case -1:
      return "so(3,2)";
    default:
      return "iso(3,1)";
  }
}

void require_algebra_element(const AlgebraElement& a, double tol) {
  Mat4 eta = minkowski_eta();
  double defect = (eta * a.h + a.h.transpose() * eta).norm();
  if (!(defect <= tol * std::max(1.0, a.h.norm())))
    throw InvalidAlgebraElement("Lorentz part is not eta-antisymmetric");
}

AlgebraSplit split_components(const AlgebraElement& a) {
  AlgebraSplit s;
  s.rot = Vec3(-a.h(2, 3), -a.h(3, 1), -a.h(1, 2));
  s.boost = Vec3(a.h(1, 0), a.h(2, 0), a.h(3, 0));
  s.spatial = a.z.tail<3>();
  s.temporal = a.z[0];
  return s;
}

AlgebraElement assemble_components(const AlgebraSplit& s) {
  AlgebraElement a;
  for (int al = 1; al <= 3; ++al) {
    a.h(al, 0) = s.boost[al - 1];
    a.h(0, al) = s.boost[al - 1];
  }
  a.h(2, 3) = -s.rot[0];
  a.h(3, 2) = s.rot[0];
  a.h(3, 1) = -s.rot[1];
  a.h(1, 3) = s.rot[1];
  a.h(1, 2) = -s.rot[2];
  a.h(2, 1) = s.rot[2];
  a.z[0] = s.temporal;
  a.z.tail<3>() = s.spatial;
  return a;
}

AlgebraElement rotation_generator(int axis) {
  if (axis < 1 || axis > 3)
    throw InvalidAlgebraElement("rotation axis index must be 1..3");
  AlgebraSplit s;
  s.rot[axis - 1] = 1.0;
  return assemble_components(s);
}

AlgebraElement boost_generator(int axis) {
  if (axis < 1 || axis > 3)
    throw InvalidAlgebraElement("boost axis index must be 1..3");
  AlgebraSplit s;
  s.boost[axis - 1] = 1.0;
  return assemble_components(s);
}

AlgebraElement translation_generator(int i) {
  if (i < 0 || i > 3)
    throw InvalidAlgebraElement("translation index must be 0..3");
  AlgebraElement a;
  a.z[i] = 1.0;
  return a;
}

AlgebraElement algebra_bracket(const AlgebraElement& a,
                               const AlgebraElement& b,
                               const ModelGroup& grp) {
  require_algebra_element(a);
  require_algebra_element(b);
  AlgebraElement out;
  out.h = a.h * b.h - b.h * a.h;
  if (grp.sign_lambda != 0) {
    Mat4 eta = minkowski_eta();
    double s = grp.sign_lambda;
    out.h += s * (b.z * (eta * a.z).transpose() -
                  a.z * (eta * b.z).transpose());
  }
  out.z = a.h * b.z - b.h * a.z;
  return out;
}

AlgebraElement adjoint_action(const Mat4& k, const AlgebraElement& a) {
  Eigen::FullPivLU<Mat4> lu(k);
  if (!lu.isInvertible())
    throw InvalidAlgebraElement("conjugating transformation is singular");
  Mat4 kinv = lu.inverse();
  return {k * a.h * kinv, k * a.z};
}

Mat4 spatial_rotation(const Vec3& axis, double angle) {
  double n = axis.norm();
  if (!(n > 0.0))
    throw InvalidAlgebraElement("rotation axis must be nonzero");
  Mat4 k = Mat4::Identity();
  k.block<3, 3>(1, 1) =
      Eigen::AngleAxisd(angle, axis / n).toRotationMatrix();
  return k;
}

}  // namespace finsler
