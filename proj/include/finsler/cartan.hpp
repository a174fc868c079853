#pragma once

#include <cstdint>
#include <functional>

#include "finsler/algebra.hpp"
#include "finsler/frame.hpp"
#include "finsler/model.hpp"
#include "finsler/observer.hpp"

namespace finsler {

// Ambient tangent vector to the bundle of observer frames, packed as 20
// components: slots 0..3 hold dx^a, slot 4 + 4 i + a holds df_i^a.
using Vec20 = Eigen::Matrix<double, 20, 1>;
using Mat20 = Eigen::Matrix<double, 20, 20>;

Vec20 pack_bundle_tangent(const Vec4& dx, const Mat4& df);
Vec4 bundle_dx(const Vec20& v);
Mat4 bundle_df(const Vec20& v);  // df(a, i) = df_i^a

// Connection form on the frame bundle, evaluated on an ambient direction at
// a frame point. The translation part is the solder form finv * dx; the
// Lorentz part couples the frame differential to the linear connection
// coefficients so that directions generated by algebra elements map back to
// those elements. Directions leaving the orthonormal-frame bundle pick up an
// eta-symmetric component in the Lorentz part; it is returned as computed.
AlgebraElement cartan_connection(const FundamentalModel& m,
                                 const FrameAtPoint& fr, const Vec20& v);

// Vector field on the frame bundle generated by an algebra element:
// rotations and boosts act on the frame, boosts shear additionally through
// the vertical coefficients, and translations lift horizontally through the
// linear connection. Linear in the element.
Vec20 fundamental_vector_field(const FundamentalModel& m,
                               const FrameAtPoint& fr,
                               const AlgebraElement& a);

enum class DerivativeMode { Analytic, FiniteDifference };

// Commutator of the fields generated by a and b, evaluated at fr. Analytic
// mode differentiates the closed-form field components with exact jets of
// the connection coefficients; finite-difference mode uses central
// differences (base step 1e-5, one Richardson extrapolation) and, when
// fd_error is given, stores the per-component extrapolation estimate there.
Vec20 fundamental_field_commutator(
    const FundamentalModel& m, const FrameAtPoint& fr,
    const AlgebraElement& a, const AlgebraElement& b,
    DerivativeMode mode = DerivativeMode::Analytic, Vec20* fd_error = nullptr);

inline constexpr double kConditionOneTol = 1e-9;
inline constexpr double kConditionTwoTol = 1e-8;
inline constexpr double kConditionThreeTol = 1e-12;

struct CartanConditionReport {
  double c1_max = 0.0;  // reconstruction of random elements from their fields
  double c2_max = 0.0;  // equivariance under frame rotations
  double c3_max = 0.0;  // exactness on fiber rotation directions
  bool c1_pass = false;
  bool c2_pass = false;
  bool c3_pass = false;
  int samples = 0;
  int sign_lambda = 0;
  double omega_scale = 1.0;
};

// Checks the defining properties of the connection at one frame point. C1:
// the connection inverts the generated fields. C2: rotating the frame and
// pushing a direction through the rotation conjugates the connection value.
// C3: on fiber rotation directions the generating element is returned
// exactly. omega_scale != 1 corrupts the Lorentz part of every connection
// evaluation first, to exercise the failure path.
CartanConditionReport verify_cartan_conditions(const FundamentalModel& m,
                                               const FrameAtPoint& fr,
                                               const ModelGroup& grp,
                                               int n_samples,
                                               double omega_scale = 1.0,
                                               std::uint64_t seed = 0);

// Curvature of the connection on a pair of algebra directions: the defect
// between the algebra bracket and the connection value on the commutator of
// the generated fields, [a, b] - A([field(a), field(b)]). Antisymmetric in
// (a, b); identically zero for the flat model paired with sign_lambda = 0.
AlgebraElement cartan_curvature(const FundamentalModel& m,
                                const FrameAtPoint& fr,
                                const AlgebraElement& a,
                                const AlgebraElement& b, const ModelGroup& grp,
                                DerivativeMode mode = DerivativeMode::Analytic);

// Sum over the three boost components of the connection applied to the
// commutators of the spatial with the temporal translation fields. Equals
// the gravity action density of the underlying geometry at (x, f_0).
double boost_curvature_density(const FundamentalModel& m,
                               const FrameAtPoint& fr);

// The three scalar densities of the frame-bundle gravity action: a constant
// cosmological term -(sign_lambda)^2, the Lorentz-trace curvature term
// sign_lambda / 6 * g^F{ab} R^c_{acb}, and a Gauss-Bonnet type double
// contraction of the fully lowered curvature. Indices move with g^F; the
// orientation convention is the plain permutation symbol with
// epsilon_{0123} = +1.
struct MmDensityValue {
  double cosmological = 0.0;
  double curvature_term = 0.0;
  double gauss_bonnet = 0.0;
};

MmDensityValue mm_density(const FundamentalModel& m, const FrameAtPoint& fr,
                          const ModelGroup& grp);

// Optional deformation added to the three fiber-tangent fields before the
// bracket test below; columns are the per-field offsets at the given point.
using VerticalPerturbation =
    std::function<Eigen::Matrix<double, 8, 3>(const TangentPoint&)>;

struct IntegrabilityReport {
  double max_frobenius = 0.0;  // bracket component sticking out of the fibers
  double max_embedding = 0.0;  // base push of the Reeb field vs y itself
  int samples = 0;
};

// Samples observer points over the cone at x, brackets the fiber-tangent
// frame fields by Richardson-extrapolated central differences, and projects
// the brackets onto the complement of the vertical subspace. For the
// unperturbed fields the fibers are genuine submanifolds and the residual
// sits at the differentiation noise floor; a perturbation drives it up.
IntegrabilityReport integrability_check(
    const FundamentalModel& m, const Vec4& x, int n_samples,
    std::uint64_t seed = 0, const VerticalPerturbation& perturb = {});

}  // namespace finsler
