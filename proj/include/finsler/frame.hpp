#pragma once

#include "finsler/linalg.hpp"

namespace finsler {

// An observer frame at a base point: column i of f is the frame vector
// f_i^a, with f_0 the observer's four-velocity; finv holds the coframe,
// row i of finv is f^{-1 i}_a, so finv * f = Id.
struct FrameAtPoint {
  Vec4 x = Vec4::Zero();
  Mat4 f = Mat4::Identity();
  Mat4 finv = Mat4::Identity();

  Vec4 column(int i) const { return f.col(i); }
};

}  // namespace finsler
