#include "finsler/detail/pipeline.hpp"

#include <cmath>
#include <limits>

namespace finsler::detail {

namespace {

int tuple_key(const MultiIndex& m) {
  return m[0] * 125 + m[1] * 25 + m[2] * 5 + m[3];
}

struct RankTables {
  std::array<MultiIndex, kNumX> xt{};
  std::array<MultiIndex, kNumY> yt{};
  std::array<int, 625> xr{};
  std::array<int, 625> yr{};

  RankTables() {
    xr.fill(-1);
    yr.fill(-1);
    int nx = 0, ny = 0;
    for (int e0 = 0; e0 <= 4; ++e0)
      for (int e1 = 0; e1 + e0 <= 4; ++e1)
        for (int e2 = 0; e2 + e1 + e0 <= 4; ++e2)
          for (int e3 = 0; e3 + e2 + e1 + e0 <= 4; ++e3) {
            MultiIndex m{e0, e1, e2, e3};
            int s = e0 + e1 + e2 + e3;
            if (s <= 2) {
              xt[static_cast<size_t>(nx)] = m;
              xr[static_cast<size_t>(tuple_key(m))] = nx;
              ++nx;
            }
            yt[static_cast<size_t>(ny)] = m;
            yr[static_cast<size_t>(tuple_key(m))] = ny;
            ++ny;
          }
  }
};

const RankTables& ranks() {
  static const RankTables t;
  return t;
}

}  // namespace

int xrank(const MultiIndex& m) {
  if (mi_order(m) > 2) return -1;
  return ranks().xr[static_cast<size_t>(tuple_key(m))];
}

int yrank(const MultiIndex& m) {
  if (mi_order(m) > 4) return -1;
  return ranks().yr[static_cast<size_t>(tuple_key(m))];
}

const std::array<MultiIndex, kNumX>& xtuples() { return ranks().xt; }
const std::array<MultiIndex, kNumY>& ytuples() { return ranks().yt; }

JetTable build_jet_table(const FundamentalModel& m, const Vec4& x,
                         const Vec4& y, int max_x, int max_tot) {
  return build_jet_table(m, m.term_coefficients(x), x, y, max_x, max_tot);
}

JetTable build_jet_table(const FundamentalModel& m,
                         const std::vector<Coeff2>& coeffs, const Vec4& x,
                         const Vec4& y, int max_x, int max_tot) {
  JetTable t;
  for (int i = 0; i < 4; ++i) {
    t.x[static_cast<size_t>(i)] = x[i];
    t.y[static_cast<size_t>(i)] = y[i];
  }
  t.n = m.degree;
  t.max_x = max_x;
  t.max_tot = max_tot;
  double nan = std::numeric_limits<double>::quiet_NaN();
  for (auto& row : t.part) row.fill(nan);
  for (const auto& a : xtuples()) {
    int ao = mi_order(a);
    if (ao > max_x) continue;
    for (const auto& b : ytuples()) {
      if (ao + mi_order(b) > max_tot) continue;
      t.part[static_cast<size_t>(xrank(a))][static_cast<size_t>(yrank(b))] =
          m.partial(a, b, coeffs, y);
    }
  }
  return t;
}

double null_scale(const Vec4& y, double n) {
  return std::pow(y.norm(), n);
}

JetTable table_for(const FundamentalModel& m, const TangentPoint& p,
                   int max_x, int max_tot) {
  check_point(p);
  return build_jet_table(m, p.x, p.y, max_x, max_tot);
}

}  // namespace finsler::detail
