#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "finsler/geometry.hpp"
#include "finsler/model.hpp"

namespace finsler {

// A 2-plane of fiber directions over one base point. Grid node (i, j)
// carries the vector y = u_i * axis_u + v_j * axis_v, with u_i and v_j
// evenly spaced over the extents, endpoints included.
struct PlaneSpec {
  Vec4 base_x = Vec4::Zero();
  Vec4 axis_u = Vec4(1, 0, 0, 0);
  Vec4 axis_v = Vec4(0, 1, 0, 0);
  double u_min = -2.0, u_max = 2.0;
  double v_min = -2.0, v_max = 2.0;
  int nu = 201, nv = 201;
};

// Pointwise classification of one grid node. in_omega marks nodes whose ray
// meets the unit shell with the admissible (eps,-eps,-eps,-eps) signature;
// it is a property of the direction, so it fills the solid region swept out
// by the shell rather than the measure-zero shell curve itself. in_cone
// marks membership in the future observer cone.
struct ScanNode {
  double u = 0.0, v = 0.0;
  int sign_L = 0;
  int det_sign = 0;                // sign of det g^L, 0 when degenerate
  std::array<int, 4> signature{};  // eigenvalue signs, ascending eigenvalue
  bool in_omega = false;
  bool in_cone = false;
};

// Angular structure of the plane around the origin: null directions are
// located by sign-change bisection of L between sweep samples, degenerate
// directions by jumps in the Hessian's negative-eigenvalue count (which also
// catches double zero crossings that leave the determinant sign unchanged),
// and the observer cone appears as one arc whose edges are refined by
// bisection of the segment-probe membership test, exact for a convex cone.
struct RaySweep {
  std::vector<double> null_angles;        // radians in [0, 2*pi)
  std::vector<double> degenerate_angles;  // radians in [0, 2*pi)
  bool cone_found = false;
  double cone_lo = 0.0;  // arc start, in [0, 2*pi)
  double cone_hi = 0.0;  // arc end; may exceed 2*pi when the arc wraps
  int extra_cone_arcs = 0;  // admissible arcs beyond the first (non-convex)
};

struct OmegaComponent {
  int id = 0;
  int nodes = 0;
  bool future = false;              // holds the largest sampled y^0 / |y|
  bool touches_degeneracy = false;  // borders the degenerate set
  bool touches_grid_edge = false;   // truncated by the scan window
};

struct ScanSummary {
  int sign_pos_regions = 0;
  int sign_neg_regions = 0;
  // signature pattern (e.g. "-+++") -> number of grid regions carrying it
  std::vector<std::pair<std::string, int>> signature_regions;
  std::vector<OmegaComponent> omega_components;
  int future_component = -1;  // id into omega_components, -1 when none
  RaySweep rays;
};

struct ScanResult {
  PlaneSpec plane;
  std::vector<ScanNode> nodes;       // row-major, index = i * nv + j
  std::vector<int> omega_component;  // per node, -1 outside Omega
  ScanSummary summary;
};

// Classifies every node of the plane grid, sweeps the angular structure and
// groups the admissible region into 4-neighbor connected components. Rows
// are classified in parallel (FINSLERKIT_THREADS caps the workers); results
// depend only on the grid, the model and the seed, never on worker count.
ScanResult scan_plane(const FundamentalModel& m, const PlaneSpec& plane,
                      std::uint64_t seed = 0, int sweep_samples = 4096);

}  // namespace finsler
