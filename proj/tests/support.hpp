#pragma once

// Model fixtures and sampling helpers shared across the test binaries.

#include <random>
#include <vector>

#include "finsler/geometry.hpp"
#include "finsler/model.hpp"

namespace testkit {

// Flat metric model: L quadratic, the classical special-relativity limit.
inline const char* kMinkowski =
    R"({"kind":"metric-induced","params":{"metric":"minkowski"}})";

// Spatially flat expanding metric, scale factor a(t) = 1 + 0.1 t. Linear in
// t, so its curvature is exactly the -a'^2 terms and its Gauss-Bonnet
// density vanishes identically.
inline const char* kDiagScale =
    R"({"kind":"metric-induced","params":{"metric":{"preset":"diag-scale","eps":0.1}}})";

// Product of two flat Lorentzian metrics with nested light cones; the
// standard example with four null directions per plane half and a
// degeneracy sheet between the cones.
inline const char* kBimetric =
    R"({"kind":"bimetric-product","params":{"h":"minkowski","k":[[-1,0,0,0],[0,4,0,0],[0,0,4,0],[0,0,0,4]]}})";

// Same product with a slowly expanding first factor: genuinely Finslerian
// and x-dependent, the workhorse for curvature and frame-bundle checks.
inline const char* kBimetricCurved =
    R"({"kind":"bimetric-product","params":{"h":{"preset":"diag-scale","eps":0.05},"k":[[-1,0,0,0],[0,4,0,0],[0,0,4,0],[0,0,0,4]]}})";

// Positive-definite quartic: no direction carries the observer signature,
// so cone searches must fail cleanly.
inline const char* kQuarticNoCone =
    R"({"kind":"custom-polynomial","degree":4,"params":{"terms":[
        {"powers":[4,0,0,0]},{"powers":[0,4,0,0]},
        {"powers":[0,0,4,0]},{"powers":[0,0,0,4]}]}})";

// Unit-shell observer directions near the cone axis, rejection-sampled
// against the segment probe. `radius` sets the spatial spread, `cap` keeps
// draws away from the cone boundary.
inline std::vector<finsler::TangentPoint> draw_observer_points(
    const finsler::FundamentalModel& m, const finsler::Vec4& x, int count,
    double radius, std::uint64_t seed, double cap = 1e9) {
  finsler::ConeProbe probe(m, x, seed);
  std::mt19937_64 rng(seed * 77 + 5);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<finsler::TangentPoint> out;
  while (static_cast<int>(out.size()) < count) {
    finsler::Vec4 y(1.0, radius * g(rng), radius * g(rng), radius * g(rng));
    if (y.tail<3>().norm() > cap) continue;
    if (!probe.contains(y)) continue;
    out.push_back(finsler::normalize_to_shell(m, {x, y}));
  }
  return out;
}

}  // namespace testkit
