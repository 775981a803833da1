#pragma once
// Time-dependent symmetric conductivity tensors a(t,x) with declared
// ellipticity window [lambda, Lambda] and entry bound M, sampled validation of
// those declarations, and mollified approximants.

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "spdelab/common.hpp"
#include "spdelab/field.hpp"
#include "spdelab/grid.hpp"
#include "spdelab/rng.hpp"

namespace spdelab {

struct CoefficientField {
  int dim = 1;
  double lambda = 1.0, Lambda = 1.0, M = 1.0;
  bool time_constant = true;
  std::string name = "identity";
  // fills a row-major dim x dim matrix
  std::function<void(double t, const double* x, double* a)> eval;

  void operator()(double t, const double* x, double* a) const { eval(t, x, a); }
};

inline CoefficientField coeff_identity(int dim, double scale = 1.0) {
  SPDELAB_REQUIRE(scale > 0.0, "coefficients: scale must be positive");
  CoefficientField c;
  c.dim = dim;
  c.lambda = c.Lambda = c.M = scale;
  c.name = "identity";
  c.eval = [dim, scale](double, const double*, double* a) {
    for (int i = 0; i < dim * dim; ++i) a[i] = 0.0;
    for (int i = 0; i < dim; ++i) a[i * dim + i] = scale;
  };
  return c;
}

// (1.5 + 0.5 sin(2 pi x1) cos(2 pi t)) * I, bounds [1,2]
inline CoefficientField coeff_scalar_sine(int dim) {
  CoefficientField c;
  c.dim = dim;
  c.lambda = 1.0;
  c.Lambda = 2.0;
  c.M = 2.0;
  c.time_constant = false;
  c.name = "scalar-sine";
  c.eval = [dim](double t, const double* x, double* a) {
    const double s = 1.5 + 0.5 * std::sin(2.0 * M_PI * x[0]) * std::cos(2.0 * M_PI * t);
    for (int i = 0; i < dim * dim; ++i) a[i] = 0.0;
    for (int i = 0; i < dim; ++i) a[i * dim + i] = s;
  };
  return c;
}

// 1 left of x1 = 1/2, 2 from there on
inline CoefficientField coeff_step(int dim) {
  CoefficientField c;
  c.dim = dim;
  c.lambda = 1.0;
  c.Lambda = 2.0;
  c.M = 2.0;
  c.name = "step";
  c.eval = [dim](double, const double* x, double* a) {
    const double s = x[0] < 0.5 ? 1.0 : 2.0;
    for (int i = 0; i < dim * dim; ++i) a[i] = 0.0;
    for (int i = 0; i < dim; ++i) a[i * dim + i] = s;
  };
  return c;
}

inline CoefficientField coeff_anisotropic(double ax, double ay) {
  SPDELAB_REQUIRE(ax > 0.0 && ay > 0.0, "coefficients: axis values must be positive");
  CoefficientField c;
  c.dim = 2;
  c.lambda = std::min(ax, ay);
  c.Lambda = std::max(ax, ay);
  c.M = c.Lambda;
  c.name = "anisotropic";
  c.eval = [ax, ay](double, const double*, double* a) {
    a[0] = ax; a[1] = 0.0; a[2] = 0.0; a[3] = ay;
  };
  return c;
}

// diagonal entries tabulated per grid node, nearest-node lookup in x
inline CoefficientField coeff_tabulated(const Grid& g,
                                        std::vector<NodeField> diag_per_axis) {
  SPDELAB_REQUIRE(static_cast<int>(diag_per_axis.size()) == g.dim,
                  "coeff_tabulated: one column per axis required");
  for (const auto& col : diag_per_axis)
    SPDELAB_REQUIRE(col.size() == static_cast<std::size_t>(g.nnode),
                    "coeff_tabulated: column length must match node count");
  CoefficientField c;
  c.dim = g.dim;
  c.name = "tabulated";
  double lo = 1e300, hi = -1e300;
  for (const auto& col : diag_per_axis)
    for (double v : col) {
      SPDELAB_REQUIRE(v > 0.0, "coeff_tabulated: entries must be positive");
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  c.lambda = lo;
  c.Lambda = hi;
  c.M = hi;
  const Grid* gp = &g;
  const int d = g.dim;
  c.eval = [gp, d, cols = std::move(diag_per_axis)](double, const double* x, double* a) {
    int best = 0;
    double bd = 1e300;
    for (int id = 0; id < gp->nnode; ++id) {
      const double dx = gp->x[id][0] - x[0];
      const double dy = d == 2 ? gp->x[id][1] - x[1] : 0.0;
      const double dd = dx * dx + dy * dy;
      if (dd < bd) { bd = dd; best = id; }
    }
    for (int i = 0; i < d * d; ++i) a[i] = 0.0;
    for (int i = 0; i < d; ++i) a[i * d + i] = cols[i][best];
  };
  return c;
}

struct EllipticityReport {
  bool pass = true;
  double lower_margin = 1e300;   // min of q - lambda|xi|^2
  double upper_margin = 1e300;   // min of Lambda|xi|^2 - q
  double entry_margin = 1e300;   // min of M - |a_ij|
  double worst_asymmetry = 0.0;
  double t = 0.0;
  std::array<double, 2> x{{0.0, 0.0}};
  std::array<double, 2> xi{{0.0, 0.0}};
  std::string message = "ok";
};

inline EllipticityReport validate_ellipticity(const CoefficientField& c, int samples,
                                              std::uint64_t seed) {
  SPDELAB_REQUIRE(samples >= 1, "validate_ellipticity: samples must be >= 1");
  SPDELAB_REQUIRE(static_cast<bool>(c.eval), "validate_ellipticity: missing evaluator");
  CounterRng rng(seed);
  EllipticityReport rep;
  const int d = c.dim;
  double a[4];
  for (int s = 0; s < samples; ++s) {
    const double t = rng.uniform(1, s, 0);
    double x[2] = {rng.uniform(1, s, 1), d == 2 ? rng.uniform(1, s, 2) : 0.0};
    const double ang = 2.0 * M_PI * rng.uniform(1, s, 3);
    double xi[2] = {std::cos(ang), d == 2 ? std::sin(ang) : 0.0};
    if (d == 1) xi[0] = 1.0;
    c(t, x, a);

    double asym = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j)
        asym = std::max(asym, std::abs(a[i * d + j] - a[j * d + i]));
    double q = 0.0, amax = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        q += xi[i] * a[i * d + j] * xi[j];
        amax = std::max(amax, std::abs(a[i * d + j]));
      }
    const double lo = q - c.lambda, up = c.Lambda - q, em = c.M - amax;
    const bool worse = asym > rep.worst_asymmetry || lo < rep.lower_margin ||
                       up < rep.upper_margin || em < rep.entry_margin;
    if (worse) {
      rep.t = t;
      rep.x = {x[0], x[1]};
      rep.xi = {xi[0], xi[1]};
    }
    rep.worst_asymmetry = std::max(rep.worst_asymmetry, asym);
    rep.lower_margin = std::min(rep.lower_margin, lo);
    rep.upper_margin = std::min(rep.upper_margin, up);
    rep.entry_margin = std::min(rep.entry_margin, em);
  }
  if (rep.worst_asymmetry > 1e-12) {
    rep.pass = false;
    rep.message = "non-symmetric sample at t=" + std::to_string(rep.t) + " x=(" +
                  std::to_string(rep.x[0]) + "," + std::to_string(rep.x[1]) + ")";
  } else if (rep.lower_margin < -1e-12 || rep.upper_margin < -1e-12 ||
             rep.entry_margin < -1e-12) {
    rep.pass = false;
    rep.message = "ellipticity window violated at t=" + std::to_string(rep.t) +
                  " x=(" + std::to_string(rep.x[0]) + "," + std::to_string(rep.x[1]) +
                  ") xi=(" + std::to_string(rep.xi[0]) + "," +
                  std::to_string(rep.xi[1]) + ")";
  }
  return rep;
}

// a averaged against a tensor bump of radius 1/n (even sample set, so a jump
// sitting under the centre averages its two one-sided values); preserves the
// declared window because every value is a convex combination
inline CoefficientField mollify(const CoefficientField& c, int n) {
  SPDELAB_REQUIRE(n >= 1, "mollify: n must be >= 1");
  const int d = c.dim;
  const int m = 32;
  std::vector<double> z(m), w1(m);
  for (int j = 0; j < m; ++j) {
    const double r = -1.0 + (2.0 * j + 1.0) / m;  // symmetric, never zero
    z[j] = r / n;
    const double b = 1.0 - r * r;
    w1[j] = b * b * b;
  }
  CoefficientField out = c;
  out.name = c.name + "~" + std::to_string(n);
  auto base = c.eval;
  out.eval = [base, d, z, w1](double t, const double* x, double* a) {
    double acc[4] = {0, 0, 0, 0}, tmp[4], wsum = 0.0;
    const int m1 = static_cast<int>(z.size());
    if (d == 1) {
      for (int j = 0; j < m1; ++j) {
        const double xx = x[0] + z[j];
        base(t, &xx, tmp);
        acc[0] += w1[j] * tmp[0];
        wsum += w1[j];
      }
      a[0] = acc[0] / wsum;
      return;
    }
    for (int j = 0; j < m1; ++j)
      for (int k = 0; k < m1; ++k) {
        const double xx[2] = {x[0] + z[j], x[1] + z[k]};
        const double w = w1[j] * w1[k];
        base(t, xx, tmp);
        for (int e = 0; e < 4; ++e) acc[e] += w * tmp[e];
        wsum += w;
      }
    for (int e = 0; e < 4; ++e) a[e] = acc[e] / wsum;
  };
  return out;
}

}  // namespace spdelab
