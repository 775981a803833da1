#pragma once
// Space-time L^{p,q} norms with box-midpoint quadrature in space (absorbed
// cells, so constants on boxes integrate exactly) and trapezoid weights in
// time, the #-norm, corner-pair upper surrogates for its dual and for the
// theta-scale duals, and the discrete H1 norm with forward face differences.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "spdelab/common.hpp"
#include "spdelab/field.hpp"
#include "spdelab/grid.hpp"

namespace spdelab {

inline constexpr double kInfExp = std::numeric_limits<double>::infinity();

// 2d/(d-2) above two dimensions; the sup convention in d=1 and the fixed
// admissible choice 6 in d=2
inline double two_star(int d) {
  SPDELAB_REQUIRE(d >= 1, "two_star: bad dimension");
  if (d == 1) return kInfExp;
  if (d == 2) return 6.0;
  return 2.0 * d / (d - 2.0);
}

inline double conjugate_exponent(double p) {
  if (p == kInfExp) return 1.0;
  if (p == 1.0) return kInfExp;
  return p / (p - 1.0);
}

inline double spatial_lp(const Grid& g, const double* u, double p) {
  if (p == kInfExp) {
    double m = 0.0;
    for (int id = 0; id < g.nnode; ++id) m = std::max(m, std::abs(u[id]));
    return m;
  }
  double s = 0.0;
  for (int id = 0; id < g.nnode; ++id) s += g.qw[id] * std::pow(std::abs(u[id]), p);
  return std::pow(s, 1.0 / p);
}

inline double lpq_norm(const SpaceTimeField& u, double p, double q) {
  SPDELAB_REQUIRE(p >= 1.0 && q >= 1.0, "lpq_norm: exponents must be in [1,inf]");
  const Grid& g = u.grid();
  const int K = u.steps();
  if (q == kInfExp) {
    double m = 0.0;
    for (int k = 0; k <= K; ++k) m = std::max(m, spatial_lp(g, u.slice(k), p));
    return m;
  }
  const double dt = u.dt();
  double s = 0.0;
  for (int k = 0; k <= K; ++k) {
    const double w = (k == 0 || k == K) ? 0.5 * dt : dt;
    s += w * std::pow(spatial_lp(g, u.slice(k), p), q);
  }
  return std::pow(s, 1.0 / q);
}

inline double sharp_norm(const SpaceTimeField& u) {
  const double ts = two_star(u.grid().dim);
  return std::max(lpq_norm(u, 2.0, kInfExp), lpq_norm(u, ts, 2.0));
}

// min over the one-term decompositions (2,1) and (2*',2); upper bound of the
// sum-space dual of the #-norm
inline double dual_sharp_upper(const SpaceTimeField& v) {
  const double tsc = conjugate_exponent(two_star(v.grid().dim));
  return std::min(lpq_norm(v, 2.0, 1.0), lpq_norm(v, tsc, 2.0));
}

// corners of the admissible line d/(2p) + 1/q = 1 - theta: (inf, 1/(1-theta))
// and (d/(2(1-theta)), inf); a corner with p < 1 is dropped
inline double theta_dual_upper(const SpaceTimeField& v, double theta) {
  SPDELAB_REQUIRE(theta >= 0.0 && theta < 1.0, "theta_dual_upper: theta must be in [0,1)");
  const int d = v.grid().dim;
  double best = kInfExp;
  bool any = false;
  {
    const double q = 1.0 / (1.0 - theta);
    best = lpq_norm(v, kInfExp, q);
    any = true;
  }
  {
    const double p = d / (2.0 * (1.0 - theta));
    if (p >= 1.0) {
      best = std::min(best, lpq_norm(v, p, kInfExp));
      any = true;
    }
  }
  SPDELAB_REQUIRE(any, "theta_dual_upper: no admissible corner");
  return best;
}

inline double l2_norm(const Grid& g, const NodeField& w) {
  double s = 0.0;
  for (int id = 0; id < g.nnode; ++id) s += g.qw[id] * w[id] * w[id];
  return std::sqrt(s);
}

inline double h1_norm(const Grid& g, const NodeField& w) {
  SPDELAB_REQUIRE(w.size() == static_cast<std::size_t>(g.nnode), "h1_norm: size mismatch");
  const double l2 = l2_norm(g, w);
  return std::sqrt(l2 * l2 + grad_energy_faces(g, w));
}

// ||grad u||_{2,2;T} with face differences, trapezoid in time
inline double grad_l22_norm(const SpaceTimeField& u) {
  const Grid& g = u.grid();
  const double dt = u.dt();
  double s = 0.0;
  for (int k = 0; k <= u.steps(); ++k) {
    const double w = (k == 0 || k == u.steps()) ? 0.5 * dt : dt;
    NodeField f(u.slice(k), u.slice(k) + g.nnode);
    s += w * grad_energy_faces(g, f);
  }
  return std::sqrt(s);
}

struct NormReport {
  std::string id;
  double value = 0.0;
  double p = 0.0, q = 0.0;  // exponents actually used, 0 when composite
};

// ids: "L2L2", "L2Linf", "sharp", "dual_sharp_upper", "theta_dual_upper(t)", "H1"
inline NormReport norm_by_id(const SpaceTimeField& u, const std::string& id) {
  NormReport r;
  r.id = id;
  if (id == "L2L2") {
    r.p = r.q = 2.0;
    r.value = lpq_norm(u, 2.0, 2.0);
  } else if (id == "L2Linf") {
    r.p = 2.0;
    r.q = kInfExp;
    r.value = lpq_norm(u, 2.0, kInfExp);
  } else if (id == "sharp") {
    r.value = sharp_norm(u);
  } else if (id == "dual_sharp_upper") {
    r.value = dual_sharp_upper(u);
  } else if (id == "H1") {
    const int K = u.steps();
    double m = 0.0;
    for (int k = 0; k <= K; ++k)
      m = std::max(m, h1_norm(u.grid(), NodeField(u.slice(k), u.slice(k) + u.grid().nnode)));
    r.value = m;
  } else if (id.rfind("theta_dual_upper(", 0) == 0 && id.back() == ')') {
    const double theta = std::stod(id.substr(17, id.size() - 18));
    r.value = theta_dual_upper(u, theta);
  } else {
    fail_precondition("norm_by_id: unknown norm id '" + id + "'");
  }
  return r;
}

}  // namespace spdelab
