#pragma once
// Nonlinear random coefficients f (rate), g (flux), h (diffusion amplitudes),
// their declared Lipschitz structure (C, alpha, beta), sampled audits of the
// structural hypotheses including both contraction margins, and freezing of
// the coefficients along a field into linear problem data.

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "spdelab/common.hpp"
#include "spdelab/field.hpp"
#include "spdelab/grid.hpp"
#include "spdelab/noise.hpp"
#include "spdelab/norms.hpp"
#include "spdelab/rng.hpp"

namespace spdelab {

struct FSpec {
  enum class Kind { zero, constant, source_sine, linear_reaction, sine_reaction };
  Kind kind = Kind::zero;
  double c = 0.0;
  double shift = 0.0;  // added constant, used by comparison scenarios

  static FSpec zero() { return {}; }
  static FSpec constant(double c) { return {Kind::constant, c, 0.0}; }
  static FSpec source_sine(double c) { return {Kind::source_sine, c, 0.0}; }
  static FSpec linear_reaction(double c) { return {Kind::linear_reaction, c, 0.0}; }
  static FSpec sine_reaction(double c) { return {Kind::sine_reaction, c, 0.0}; }

  double lip_y() const {
    return (kind == Kind::linear_reaction || kind == Kind::sine_reaction) ? std::abs(c)
                                                                          : 0.0;
  }
};

struct GSpec {
  enum class Kind { zero, gradient_flux, source_sine };
  Kind kind = Kind::zero;
  double c = 0.0;

  static GSpec zero() { return {}; }
  static GSpec gradient_flux(double a) { return {Kind::gradient_flux, a}; }
  static GSpec source_sine(double c) { return {Kind::source_sine, c}; }

  double lip_z() const { return kind == Kind::gradient_flux ? std::abs(c) : 0.0; }
};

struct HSpec {
  enum class Kind { zero, factored, additive_uniform };
  Kind kind = Kind::zero;
  // factored: h_i = sqrt(lambda_i) e_i(x) htilde(y,z), htilde = c0 + cy y + cz z1
  double c0 = 0.0, cy = 0.0, cz = 0.0;
  std::vector<double> sigma;  // additive_uniform: per-mode constants, profile 1

  static HSpec zero() { return {}; }
  static HSpec factored(double c0, double cy, double cz) {
    HSpec h;
    h.kind = Kind::factored;
    h.c0 = c0;
    h.cy = cy;
    h.cz = cz;
    return h;
  }
  static HSpec multiplicative(double btilde) { return factored(0.0, btilde, 0.0); }
  static HSpec additive_uniform(std::vector<double> sigma) {
    HSpec h;
    h.kind = Kind::additive_uniform;
    h.sigma = std::move(sigma);
    return h;
  }
};

struct NonlinearCoefficients {
  FSpec f;
  GSpec g;
  HSpec h;
  double C = 0.0;      // shared Lipschitz budget of (H)(i)-(iii)
  double alpha = 0.0;  // gradient sensitivity of g
  double beta = 0.0;   // gradient sensitivity of h, spectrum-weighted

  double f_eval(double t, const double* x, double y, const double* z, int dim) const {
    (void)t;
    double v = f.shift;
    switch (f.kind) {
      case FSpec::Kind::zero: break;
      case FSpec::Kind::constant: v += f.c; break;
      case FSpec::Kind::source_sine:
        v += f.c * std::sin(M_PI * x[0]) * (dim == 2 ? std::sin(M_PI * x[1]) : 1.0);
        break;
      case FSpec::Kind::linear_reaction: v += f.c * y; break;
      case FSpec::Kind::sine_reaction: v += f.c * std::sin(y); break;
    }
    (void)z;
    return v;
  }

  void g_eval(double t, const double* x, double y, const double* z, int dim,
              double* out) const {
    (void)t;
    (void)y;
    for (int i = 0; i < dim; ++i) out[i] = 0.0;
    switch (g.kind) {
      case GSpec::Kind::zero: break;
      case GSpec::Kind::gradient_flux:
        for (int i = 0; i < dim; ++i) out[i] = g.c * z[i];
        break;
      case GSpec::Kind::source_sine:
        for (int i = 0; i < dim; ++i) out[i] = g.c * std::sin(M_PI * x[i]);
        break;
    }
  }

  double htilde_eval(double t, const double* x, double y, const double* z) const {
    (void)t;
    (void)x;
    return h.c0 + h.cy * y + h.cz * z[0];
  }

  // declared-constant bookkeeping for a given spectrum
  double beta_from(const NoiseSpectrum& sp) const {
    if (h.kind != HSpec::Kind::factored) return 0.0;
    return std::sqrt(sp.sup_weighted) * std::abs(h.cz);
  }
  double h_lip_y_from(const NoiseSpectrum& sp) const {
    if (h.kind != HSpec::Kind::factored) return 0.0;
    return std::sqrt(sp.sup_weighted) * std::abs(h.cy);
  }
};

struct HypothesisReport {
  double C = 0.0, alpha = 0.0, beta = 0.0, lambda = 0.0;
  double ratio_f = 0.0;        // |df| / (|dy| + |dz|)
  double excess_g = 0.0;       // |dg| - (C|dy| + alpha|dz|), max observed
  double excess_h = 0.0;       // |dh|_l2 - (C|dy| + beta|dz|), max observed
  double margin_basic = 0.0;        // lambda - alpha - beta^2/2
  double margin_strengthened = 0.0; // lambda - alpha - beta^2/2 - 72 beta^2
  bool contraction_ok = false;
  bool strengthened_ok = false;
  bool pass = true;
  std::string message = "ok";
  double p = 2.0, theta = 0.0;
  // data-size norms of the frozen-at-zero coefficients
  double f0_l2l2 = 0.0, f0_dual_sharp = 0.0, f0_theta_dual = 0.0;
  double g0_l2l2 = 0.0, g0_dual_sharp = 0.0, g0_theta_dual = 0.0;
  double h0_l2l2 = 0.0, h0_dual_sharp = 0.0, h0_theta_dual = 0.0;
};

struct AuditOptions {
  int samples = 2000;
  std::uint64_t seed = 1;
  double lambda = 1.0;  // ellipticity floor the margins are measured against
  double T = 1.0;
  int steps = 64;
  double p = 2.0;
  double theta = 0.0;
};

namespace detail {

inline double mode_kappa(const NoiseSpectrum& sp, int node) {
  double s = 0.0;
  for (int i = 0; i < sp.modes(); ++i)
    s += sp.lambda[i] * sp.mode[i][node] * sp.mode[i][node];
  return s;
}

}  // namespace detail

inline HypothesisReport audit_hypotheses(const NonlinearCoefficients& nl,
                                         const Grid& g, const NoiseSpectrum& sp,
                                         const AuditOptions& opt = {}) {
  SPDELAB_REQUIRE(opt.samples >= 1, "audit_hypotheses: samples must be >= 1");
  SPDELAB_REQUIRE(opt.theta >= 0.0 && opt.theta < 1.0,
                  "audit_hypotheses: theta must be in [0,1)");
  SPDELAB_REQUIRE(!(nl.h.kind == HSpec::Kind::additive_uniform &&
                    static_cast<int>(nl.h.sigma.size()) > sp.modes()),
                  "audit_hypotheses: additive noise declares more modes than the spectrum");
  HypothesisReport rep;
  rep.C = nl.C;
  rep.alpha = nl.alpha;
  rep.beta = nl.beta;
  rep.lambda = opt.lambda;
  rep.p = opt.p;
  rep.theta = opt.theta;
  const int d = g.dim;
  CounterRng rng(opt.seed);
  double worst[4] = {0, 0, 0, 0};
  std::string witness;
  for (int s = 0; s < opt.samples; ++s) {
    const double t = rng.uniform(2, s, 0);
    const int node = static_cast<int>(rng.uniform(2, s, 1) * g.nnode) % g.nnode;
    const double* x = g.x[node].data();
    auto box = [&](int lane) { return 4.0 * rng.uniform(2, s, lane) - 2.0; };
    const double y1 = box(2), y2 = box(3);
    double z1[2] = {box(4), d == 2 ? box(5) : 0.0};
    double z2[2] = {box(6), d == 2 ? box(7) : 0.0};
    const double dy = std::abs(y1 - y2);
    const double dz = std::hypot(z1[0] - z2[0], d == 2 ? z1[1] - z2[1] : 0.0);
    if (dy + dz < 1e-12) continue;

    const double df = std::abs(nl.f_eval(t, x, y1, z1, d) - nl.f_eval(t, x, y2, z2, d));
    const double rf = df / (dy + dz);
    if (rf > rep.ratio_f) rep.ratio_f = rf;
    if (rf > nl.C + 1e-9 && rf > worst[0]) {
      worst[0] = rf;
      witness = "f ratio " + std::to_string(rf) + " at t=" + std::to_string(t) +
                " node=" + std::to_string(node);
    }

    double ga[2], gb[2];
    nl.g_eval(t, x, y1, z1, d, ga);
    nl.g_eval(t, x, y2, z2, d, gb);
    const double dg = std::hypot(ga[0] - gb[0], d == 2 ? ga[1] - gb[1] : 0.0);
    const double eg = dg - (nl.C * dy + nl.alpha * dz);
    if (eg > rep.excess_g) rep.excess_g = eg;
    if (eg > 1e-9 && eg > worst[1]) {
      worst[1] = eg;
      witness = "g excess " + std::to_string(eg) + " at node=" + std::to_string(node);
    }

    double dh = 0.0;
    if (nl.h.kind == HSpec::Kind::factored) {
      const double dht = std::abs(nl.htilde_eval(t, x, y1, z1) - nl.htilde_eval(t, x, y2, z2));
      dh = std::sqrt(detail::mode_kappa(sp, node)) * dht;
    }
    const double eh = dh - (nl.C * dy + nl.beta * dz);
    if (eh > rep.excess_h) rep.excess_h = eh;
    if (eh > 1e-9 && eh > worst[2]) {
      worst[2] = eh;
      witness = "h excess " + std::to_string(eh) + " at node=" + std::to_string(node);
    }
  }
  rep.margin_basic = opt.lambda - nl.alpha - 0.5 * nl.beta * nl.beta;
  rep.margin_strengthened = rep.margin_basic - 72.0 * nl.beta * nl.beta;
  rep.contraction_ok = rep.margin_basic > 0.0;
  rep.strengthened_ok = rep.margin_strengthened > 0.0;
  if (!witness.empty()) {
    rep.pass = false;
    rep.message = "sampled Lipschitz ratio exceeds declaration: " + witness;
  }

  // data-size norms of the zero-state coefficients on a fixed audit lattice
  SpaceTimeField f0(g, opt.T, opt.steps), g0(g, opt.T, opt.steps), h0(g, opt.T, opt.steps);
  const double z0[2] = {0.0, 0.0};
  for (int k = 0; k <= opt.steps; ++k) {
    const double t = f0.time(k);
    for (int id = 0; id < g.nnode; ++id) {
      const double* x = g.x[id].data();
      f0.at(k, id) = nl.f_eval(t, x, 0.0, z0, d);
      double gv[2] = {0.0, 0.0};
      nl.g_eval(t, x, 0.0, z0, d, gv);
      g0.at(k, id) = std::hypot(gv[0], d == 2 ? gv[1] : 0.0);
      double hv = 0.0;
      if (nl.h.kind == HSpec::Kind::factored) {
        const double ht = nl.htilde_eval(t, x, 0.0, z0);
        hv = std::sqrt(detail::mode_kappa(sp, id)) * std::abs(ht);
      } else if (nl.h.kind == HSpec::Kind::additive_uniform) {
        double s2 = 0.0;
        for (double v : nl.h.sigma) s2 += v * v;
        hv = std::sqrt(s2);
      }
      h0.at(k, id) = hv;
    }
  }
  rep.f0_l2l2 = lpq_norm(f0, 2.0, 2.0);
  rep.f0_dual_sharp = dual_sharp_upper(f0);
  rep.f0_theta_dual = theta_dual_upper(f0, opt.theta);
  rep.g0_l2l2 = lpq_norm(g0, 2.0, 2.0);
  rep.g0_dual_sharp = dual_sharp_upper(g0);
  rep.g0_theta_dual = theta_dual_upper(g0, opt.theta);
  rep.h0_l2l2 = lpq_norm(h0, 2.0, 2.0);
  rep.h0_dual_sharp = dual_sharp_upper(h0);
  rep.h0_theta_dual = theta_dual_upper(h0, opt.theta);
  return rep;
}

// Linear problem data obtained by evaluating (f, g, h) along a given field:
// wprime = f, wsecond = g per axis, and the diffusion amplitudes split into a
// factored node field against the spectrum plus per-mode additive constants.
struct FrozenData {
  const Grid* grid = nullptr;
  int steps = 0;
  double dt = 0.0;
  std::vector<NodeField> wprime;                   // per step slice
  std::vector<std::array<NodeField, 2>> wsecond;   // per step slice, per axis
  std::vector<NodeField> htilde;                   // empty when h has no factored part
  std::vector<std::vector<double>> hadd;           // [step][mode]
  bool has_factored = false;
  bool has_additive = false;
};

// evaluates along slice k of u with centred node gradients as z
inline FrozenData frozen_coefficients(const NonlinearCoefficients& nl,
                                      const NoiseSpectrum& sp,
                                      const SpaceTimeField& u) {
  (void)sp;
  const Grid& g = u.grid();
  FrozenData fd;
  fd.grid = &g;
  fd.steps = u.steps();
  fd.dt = u.dt();
  fd.has_factored = nl.h.kind == HSpec::Kind::factored;
  fd.has_additive = nl.h.kind == HSpec::Kind::additive_uniform;
  const int d = g.dim;
  for (int k = 0; k <= u.steps(); ++k) {
    const double t = u.time(k);
    NodeField uf(u.slice(k), u.slice(k) + g.nnode);
    NodeField wp(g.nnode);
    std::array<NodeField, 2> ws = {NodeField(g.nnode), NodeField(g.nnode)};
    NodeField ht;
    if (fd.has_factored) ht.assign(g.nnode, 0.0);
    for (int id = 0; id < g.nnode; ++id) {
      double z[2] = {grad_central(g, uf, id, 0),
                     d == 2 ? grad_central(g, uf, id, 1) : 0.0};
      const double* x = g.x[id].data();
      wp[id] = nl.f_eval(t, x, uf[id], z, d);
      double gv[2] = {0.0, 0.0};
      nl.g_eval(t, x, uf[id], z, d, gv);
      ws[0][id] = gv[0];
      if (d == 2) ws[1][id] = gv[1];
      if (fd.has_factored) ht[id] = nl.htilde_eval(t, x, uf[id], z);
    }
    fd.wprime.push_back(std::move(wp));
    fd.wsecond.push_back(std::move(ws));
    if (fd.has_factored) fd.htilde.push_back(std::move(ht));
    if (fd.has_additive) fd.hadd.push_back(nl.h.sigma);
  }
  return fd;
}

// evaluates along a scalar path (y = M_k everywhere, z = 0), as the
// maximum-principle comparisons require
inline FrozenData frozen_coefficients_scalar(const NonlinearCoefficients& nl,
                                             const NoiseSpectrum& sp, const Grid& g,
                                             const std::vector<double>& M, int steps,
                                             double dt) {
  SPDELAB_REQUIRE(static_cast<int>(M.size()) == steps + 1,
                  "frozen_coefficients_scalar: path length must be steps + 1");
  (void)sp;
  FrozenData fd;
  fd.grid = &g;
  fd.steps = steps;
  fd.dt = dt;
  fd.has_factored = nl.h.kind == HSpec::Kind::factored;
  fd.has_additive = nl.h.kind == HSpec::Kind::additive_uniform;
  const int d = g.dim;
  const double z0[2] = {0.0, 0.0};
  for (int k = 0; k <= steps; ++k) {
    const double t = k * dt;
    NodeField wp(g.nnode);
    std::array<NodeField, 2> ws = {NodeField(g.nnode), NodeField(g.nnode)};
    NodeField ht;
    if (fd.has_factored) ht.assign(g.nnode, 0.0);
    for (int id = 0; id < g.nnode; ++id) {
      const double* x = g.x[id].data();
      wp[id] = nl.f_eval(t, x, M[k], z0, d);
      double gv[2] = {0.0, 0.0};
      nl.g_eval(t, x, M[k], z0, d, gv);
      ws[0][id] = gv[0];
      if (d == 2) ws[1][id] = gv[1];
      if (fd.has_factored) ht[id] = nl.htilde_eval(t, x, M[k], z0);
    }
    fd.wprime.push_back(std::move(wp));
    fd.wsecond.push_back(std::move(ws));
    if (fd.has_factored) fd.htilde.push_back(std::move(ht));
    if (fd.has_additive) fd.hadd.push_back(nl.h.sigma);
  }
  return fd;
}

}  // namespace spdelab
