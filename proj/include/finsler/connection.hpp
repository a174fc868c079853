#pragma once

#include "finsler/geometry.hpp"
#include "finsler/model.hpp"

namespace finsler {

struct NonlinearConnectionValue {
  Mat4 N = Mat4::Zero();  // N(a, b) = N^a_b
};

struct LinearConnectionValue {
  // Fc[c](a, b) = F^c_ab (horizontal block), Cc[c](a, b) = C^c_ab (vertical
  // block); both symmetric in (a, b).
  std::array<Mat4, 4> Fc{};
  std::array<Mat4, 4> Cc{};
};

// A tangent vector of TTM in the Berwald basis: X = h^a delta_a + v^a dbar_a.
struct SplitVector {
  Vec4 h = Vec4::Zero();
  Vec4 v = Vec4::Zero();
};

// First-order data of a vector field on TM near a point, in the Berwald
// split: components and their coordinate partials. d*_dx(c, a) = d W^c / dx^a,
// d*_dy(c, a) = d W^c / dy^a.
struct VectorFieldJet {
  Vec4 h = Vec4::Zero(), v = Vec4::Zero();
  Mat4 dh_dx = Mat4::Zero(), dh_dy = Mat4::Zero();
  Mat4 dv_dx = Mat4::Zero(), dv_dy = Mat4::Zero();
};

NonlinearConnectionValue nonlinear_connection(const FundamentalModel& m,
                                              const TangentPoint& p);

// delta_a f = d_a f - N^b_a dbar_b f for a scalar whose first partials are in
// scalar_jet.
Vec4 berwald_delta_apply(const FundamentalModel& m, const TangentPoint& p,
                         const JetValue& scalar_jet);

LinearConnectionValue linear_connection(const FundamentalModel& m,
                                        const TangentPoint& p);

SplitVector covariant_derivative(const FundamentalModel& m,
                                 const TangentPoint& p,
                                 const SplitVector& direction,
                                 const VectorFieldJet& field);

}  // namespace finsler
