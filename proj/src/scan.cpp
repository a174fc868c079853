#include "finsler/scan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>

#include "finsler/detail/parallel.hpp"
#include "finsler/detail/pipeline.hpp"

namespace finsler {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

struct NodeEval {
  double L = 0.0;
  int sign_L = 0;
  int det_sign = 0;
  bool degenerate = true;
  std::array<int, 4> signature{};
  bool admissible = false;  // sign != 0, nondegenerate, L5 pattern
};

// One Hessian eigensolve serves the signature, the degeneracy rule and the
// determinant sign; thresholds match eigen_signature / is_degenerate so grid
// rows agree with classify() on every field.
NodeEval evaluate_direction(const FundamentalModel& m,
                            const std::vector<Coeff2>& coeffs, const Vec4& x,
                            const Vec4& y) {
  NodeEval out;
  auto t = detail::build_jet_table(m, coeffs, x, y, 0, 2);
  out.L = detail::eval_L<double>(t);
  double scale = detail::null_scale(y, m.degree);
  if (std::abs(out.L) >= kEpsNull * scale) out.sign_L = out.L > 0 ? 1 : -1;

  auto g = detail::eval_gL<double>(t);
  Mat4 gm;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) gm(a, b) = g[a][b];
  Eigen::SelfAdjointEigenSolver<Mat4> es(gm, Eigen::EigenvaluesOnly);
  Vec4 ev = es.eigenvalues();
  Vec4 abs_ev = ev.cwiseAbs();
  double mx = abs_ev.maxCoeff();
  double gmean = std::pow(abs_ev.prod(), 0.25);
  out.degenerate = !(abs_ev.minCoeff() > kEpsDet * gmean);

  int with = 0, against = 0, zeros = 0;
  for (int i = 0; i < 4; ++i) {
    int s = 0;
    if (std::abs(ev[i]) > kEpsSig * mx) s = ev[i] > 0 ? 1 : -1;
    out.signature[static_cast<size_t>(i)] = s;
    if (s == 0) ++zeros;
    if (s == out.sign_L) ++with;
    if (s == -out.sign_L) ++against;
  }
  if (!out.degenerate && zeros == 0) {
    int prod = 1;
    for (int s : out.signature) prod *= s;
    out.det_sign = prod;
  }
  out.admissible =
      out.sign_L != 0 && !out.degenerate && with == 1 && against == 3;
  return out;
}

double signed_L(const FundamentalModel& m, const std::vector<Coeff2>& coeffs,
                const Vec4& x, const Vec4& dir) {
  auto t = detail::build_jet_table(m, coeffs, x, dir, 0, 0);
  return detail::eval_L<double>(t);
}

// Number of negative Hessian eigenvalues. Degeneracy makes this jump, and
// unlike the determinant sign it also jumps when a double eigenvalue crosses
// zero, which leaves det g^L nonnegative-definite in sign.
int hessian_neg_count(const FundamentalModel& m,
                      const std::vector<Coeff2>& coeffs, const Vec4& x,
                      const Vec4& dir) {
  auto t = detail::build_jet_table(m, coeffs, x, dir, 0, 2);
  auto g = detail::eval_gL<double>(t);
  Mat4 gm;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) gm(a, b) = g[a][b];
  Eigen::SelfAdjointEigenSolver<Mat4> es(gm, Eigen::EigenvaluesOnly);
  int n = 0;
  for (int i = 0; i < 4; ++i)
    if (es.eigenvalues()[i] < 0.0) ++n;
  return n;
}

// Grid components by 4-neighbor connectivity, path-halving union-find with
// the smaller root kept so component ids come out in row-major order.
class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(static_cast<size_t>(n)) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  int find(int a) {
    while (parent_[static_cast<size_t>(a)] != a) {
      parent_[static_cast<size_t>(a)] =
          parent_[static_cast<size_t>(parent_[static_cast<size_t>(a)])];
      a = parent_[static_cast<size_t>(a)];
    }
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a > b) std::swap(a, b);
    parent_[static_cast<size_t>(b)] = a;
  }

 private:
  std::vector<int> parent_;
};

}  // namespace

ScanResult scan_plane(const FundamentalModel& m, const PlaneSpec& plane,
                      std::uint64_t seed, int sweep_samples) {
  if (plane.nu < 2 || plane.nv < 2)
    throw ConfigError("scan grid needs at least 2 nodes per axis");
  if (!(plane.u_max > plane.u_min) || !(plane.v_max > plane.v_min))
    throw ConfigError("scan extents must be nonempty intervals");
  if (plane.axis_u.norm() == 0.0 || plane.axis_v.norm() == 0.0)
    throw ConfigError("scan plane axes must be nonzero");
  if (sweep_samples < 16) throw ConfigError("ray sweep needs >= 16 samples");

  ScanResult res;
  res.plane = plane;
  const int nu = plane.nu, nv = plane.nv;
  const int n_nodes = nu * nv;
  res.nodes.resize(static_cast<size_t>(n_nodes));
  res.omega_component.assign(static_cast<size_t>(n_nodes), -1);

  const Vec4 x = plane.base_x;
  const std::vector<Coeff2> coeffs = m.term_coefficients(x);
  std::vector<NodeEval> evals(static_cast<size_t>(n_nodes));

  detail::parallel_for(nu, [&](int i) {
    double u = plane.u_min +
               (plane.u_max - plane.u_min) * i / static_cast<double>(nu - 1);
    for (int j = 0; j < nv; ++j) {
      double v = plane.v_min +
                 (plane.v_max - plane.v_min) * j / static_cast<double>(nv - 1);
      size_t idx = static_cast<size_t>(i * nv + j);
      ScanNode& node = res.nodes[idx];
      node.u = u;
      node.v = v;
      Vec4 y = u * plane.axis_u + v * plane.axis_v;
      if (y.norm() == 0.0) continue;  // origin carries no direction
      NodeEval e = evaluate_direction(m, coeffs, x, y);
      evals[idx] = e;
      node.sign_L = e.sign_L;
      node.det_sign = e.det_sign;
      node.signature = e.signature;
      node.in_omega = e.admissible;
    }
  });

  // Angular sweep: locate null and degenerate directions, then identify the
  // observer-cone arc among the admissible runs.
  RaySweep& rays = res.summary.rays;
  const int S = sweep_samples;
  auto direction = [&](double theta) {
    Vec4 d = std::cos(theta) * plane.axis_u + std::sin(theta) * plane.axis_v;
    return Vec4(d / d.norm());
  };
  std::vector<int> sweep_sign(static_cast<size_t>(S));
  std::vector<int> sweep_det_sign(static_cast<size_t>(S));
  std::vector<int> sweep_nneg(static_cast<size_t>(S));
  std::vector<bool> sweep_adm(static_cast<size_t>(S));
  std::vector<double> theta(static_cast<size_t>(S));
  for (int k = 0; k < S; ++k) {
    theta[static_cast<size_t>(k)] = kTwoPi * k / S;
    NodeEval e = evaluate_direction(m, coeffs, x, direction(theta[static_cast<size_t>(k)]));
    sweep_sign[static_cast<size_t>(k)] = e.sign_L;
    sweep_det_sign[static_cast<size_t>(k)] = e.degenerate ? 0 : e.det_sign;
    int nn = 0;
    for (int s : e.signature)
      if (s < 0) ++nn;
    sweep_nneg[static_cast<size_t>(k)] = nn;
    sweep_adm[static_cast<size_t>(k)] = e.admissible;
  }

  auto bisect = [&](double lo, double hi, auto&& value) {
    double flo = value(lo);
    for (int it = 0; it < 60 && hi - lo > 1e-12; ++it) {
      double mid = 0.5 * (lo + hi);
      double fm = value(mid);
      if ((flo < 0) == (fm < 0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  };

  for (int k = 0; k < S; ++k) {
    size_t ks = static_cast<size_t>(k);
    size_t kn = static_cast<size_t>((k + 1) % S);
    double t0 = theta[ks], t1 = theta[ks] + kTwoPi / S;
    if (sweep_sign[ks] == 0) {
      rays.null_angles.push_back(t0);
    } else if (sweep_sign[kn] != 0 && sweep_sign[ks] != sweep_sign[kn]) {
      rays.null_angles.push_back(bisect(
          t0, t1, [&](double th) { return signed_L(m, coeffs, x, direction(th)); }));
    }
    if (sweep_det_sign[ks] == 0) {
      rays.degenerate_angles.push_back(t0);
    } else if (sweep_det_sign[kn] != 0 && sweep_nneg[ks] != sweep_nneg[kn]) {
      // Eigenvalues crossed zero between the samples; shrink onto the jump
      // in the negative-eigenvalue count. A tangency that does not flip any
      // eigenvalue sign between two samples goes unreported.
      double lo = t0, hi = t1;
      int ref = sweep_nneg[ks];
      for (int it = 0; it < 60 && hi - lo > 1e-12; ++it) {
        double mid = 0.5 * (lo + hi);
        if (hessian_neg_count(m, coeffs, x, direction(mid)) == ref)
          lo = mid;
        else
          hi = mid;
      }
      rays.degenerate_angles.push_back(0.5 * (lo + hi));
    }
  }

  int cone_sign = 0;
  double arc_lo = 0.0, arc_hi = 0.0;
  bool have_probe = false;
  ConeProbe* probe_ptr = nullptr;
  std::optional<ConeProbe> probe;
  try {
    probe.emplace(m, x, seed);
    have_probe = true;
    probe_ptr = &*probe;
  } catch (const NoConeFound&) {
    have_probe = false;
  }

  if (have_probe) {
    cone_sign = probe_ptr->cone_sign();
    // Maximal circular runs of admissible sweep samples.
    std::vector<std::pair<int, int>> arcs;  // [first, last] inclusive indices
    bool all_adm = std::all_of(sweep_adm.begin(), sweep_adm.end(),
                               [](bool b) { return b; });
    if (all_adm) {
      arcs.emplace_back(0, S - 1);
    } else {
      int start = 0;
      while (start < S && sweep_adm[static_cast<size_t>(start)]) ++start;
      // start now sits on a non-admissible sample; walk one full circle.
      for (int off = 0; off < S;) {
        int k = (start + off) % S;
        if (!sweep_adm[static_cast<size_t>(k)]) {
          ++off;
          continue;
        }
        int len = 0;
        while (len < S &&
               sweep_adm[static_cast<size_t>((start + off + len) % S)])
          ++len;
        arcs.emplace_back((start + off) % S, (start + off + len - 1) % S);
        off += len;
      }
    }
    auto contains_theta = [&](double th) {
      return probe_ptr->contains(direction(th));
    };
    for (const auto& arc : arcs) {
      int first = arc.first, last = arc.second;
      int len = (last - first + S) % S + 1;
      double th_first = theta[static_cast<size_t>(first)];
      double th_rep = th_first + kTwoPi * (len / 2) / S;
      if (!contains_theta(th_rep)) continue;
      if (rays.cone_found) {
        ++rays.extra_cone_arcs;
        continue;
      }
      // Membership flips somewhere in the one-sample gap beyond each end
      // (the sample past the arc fails the pointwise tests already).
      auto edge = [&](double inside, double outside) {
        double lo = std::min(inside, outside), hi = std::max(inside, outside);
        bool lo_in = contains_theta(lo);
        for (int it = 0; it < 48 && hi - lo > 1e-10; ++it) {
          double mid = 0.5 * (lo + hi);
          if (contains_theta(mid) == lo_in)
            lo = mid;
          else
            hi = mid;
        }
        return 0.5 * (lo + hi);
      };
      double th_before = th_first - kTwoPi / S;
      double th_after = th_first + kTwoPi * len / S;
      arc_lo = len == S ? th_first : edge(th_first, th_before);
      arc_hi = len == S ? th_first + kTwoPi : edge(th_after - kTwoPi / S, th_after);
      rays.cone_found = true;
    }
    if (rays.cone_found) {
      arc_lo = std::fmod(std::fmod(arc_lo, kTwoPi) + kTwoPi, kTwoPi);
      double span = arc_hi - arc_lo;
      while (span < 0) span += kTwoPi;
      while (span > kTwoPi) span -= kTwoPi;
      rays.cone_lo = arc_lo;
      rays.cone_hi = arc_lo + span;
    }
  }

  // Cone membership per node: pointwise admissibility with the cone's sign
  // of L, plus the node angle falling inside the refined arc.
  if (rays.cone_found) {
    double span = rays.cone_hi - rays.cone_lo;
    for (int idx = 0; idx < n_nodes; ++idx) {
      ScanNode& node = res.nodes[static_cast<size_t>(idx)];
      if (!node.in_omega || node.sign_L != cone_sign) continue;
      double th = std::atan2(node.v, node.u);
      double rel = std::fmod(std::fmod(th - rays.cone_lo, kTwoPi) + kTwoPi,
                             kTwoPi);
      node.in_cone = rel <= span;
    }
  }

  // Connected components of the admissible region.
  UnionFind uf_omega(n_nodes), uf_sign(n_nodes), uf_sig(n_nodes);
  auto idx_of = [nv](int i, int j) { return i * nv + j; };
  for (int i = 0; i < nu; ++i) {
    for (int j = 0; j < nv; ++j) {
      int idx = idx_of(i, j);
      const ScanNode& node = res.nodes[static_cast<size_t>(idx)];
      auto link = [&](int pidx) {
        const ScanNode& prev = res.nodes[static_cast<size_t>(pidx)];
        if (node.in_omega && prev.in_omega) uf_omega.unite(idx, pidx);
        if (node.sign_L != 0 && node.sign_L == prev.sign_L)
          uf_sign.unite(idx, pidx);
        if (node.signature == prev.signature) uf_sig.unite(idx, pidx);
      };
      if (i > 0) link(idx_of(i - 1, j));
      if (j > 0) link(idx_of(i, j - 1));
    }
  }

  // Dense omega component ids in row-major first-appearance order.
  std::vector<int> root_to_id(static_cast<size_t>(n_nodes), -1);
  for (int idx = 0; idx < n_nodes; ++idx) {
    if (!res.nodes[static_cast<size_t>(idx)].in_omega) continue;
    int root = uf_omega.find(idx);
    if (root_to_id[static_cast<size_t>(root)] < 0) {
      int id = static_cast<int>(res.summary.omega_components.size());
      root_to_id[static_cast<size_t>(root)] = id;
      OmegaComponent comp;
      comp.id = id;
      res.summary.omega_components.push_back(comp);
    }
    res.omega_component[static_cast<size_t>(idx)] =
        root_to_id[static_cast<size_t>(root)];
  }

  double best_future = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < nu; ++i) {
    for (int j = 0; j < nv; ++j) {
      int idx = idx_of(i, j);
      int comp_id = res.omega_component[static_cast<size_t>(idx)];
      if (comp_id < 0) continue;
      const ScanNode& node = res.nodes[static_cast<size_t>(idx)];
      OmegaComponent& comp =
          res.summary.omega_components[static_cast<size_t>(comp_id)];
      ++comp.nodes;
      if (i == 0 || i == nu - 1 || j == 0 || j == nv - 1)
        comp.touches_grid_edge = true;
      Vec4 y = node.u * plane.axis_u + node.v * plane.axis_v;
      double score = y[0] / y.norm();
      if (score > best_future) {
        best_future = score;
        res.summary.future_component = comp_id;
      }
      auto check_neighbor = [&](int ni, int nj) {
        if (ni < 0 || ni >= nu || nj < 0 || nj >= nv) return;
        int qidx = idx_of(ni, nj);
        if (res.omega_component[static_cast<size_t>(qidx)] == comp_id) return;
        const ScanNode& q = res.nodes[static_cast<size_t>(qidx)];
        bool degenerate_neighbor = q.det_sign == 0 && (q.u != 0.0 || q.v != 0.0);
        bool signature_jump =
            q.sign_L == node.sign_L && q.signature != node.signature;
        if (degenerate_neighbor || signature_jump)
          comp.touches_degeneracy = true;
      };
      check_neighbor(i - 1, j);
      check_neighbor(i + 1, j);
      check_neighbor(i, j - 1);
      check_neighbor(i, j + 1);
    }
  }
  if (res.summary.future_component >= 0)
    res.summary
        .omega_components[static_cast<size_t>(res.summary.future_component)]
        .future = true;

  // Region counts for sign and signature patterns.
  std::vector<bool> seen_sign(static_cast<size_t>(n_nodes), false);
  std::map<std::string, int> sig_regions;
  std::vector<bool> seen_sig(static_cast<size_t>(n_nodes), false);
  for (int idx = 0; idx < n_nodes; ++idx) {
    const ScanNode& node = res.nodes[static_cast<size_t>(idx)];
    if (node.sign_L != 0) {
      int root = uf_sign.find(idx);
      if (!seen_sign[static_cast<size_t>(root)]) {
        seen_sign[static_cast<size_t>(root)] = true;
        if (node.sign_L > 0)
          ++res.summary.sign_pos_regions;
        else
          ++res.summary.sign_neg_regions;
      }
    }
    bool all_zero = node.signature == std::array<int, 4>{};
    if (!all_zero) {
      int root = uf_sig.find(idx);
      if (!seen_sig[static_cast<size_t>(root)]) {
        seen_sig[static_cast<size_t>(root)] = true;
        std::string pattern;
        for (int s : node.signature)
          pattern += s > 0 ? '+' : (s < 0 ? '-' : '0');
        ++sig_regions[pattern];
      }
    }
  }
  res.summary.signature_regions.assign(sig_regions.begin(), sig_regions.end());
  return res;
}

}  // namespace finsler
