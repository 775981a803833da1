#pragma once
// Semi-implicit integration of the quasilinear equation (implicit in the
// divergence-form operator, explicit in f, g, h and the noise), the linear
// frozen-data solver it shares its stepping with, and the Picard iteration in
// the weighted norm with contraction monitoring.

#include <cmath>
#include <string>
#include <vector>

#include "spdelab/common.hpp"
#include "spdelab/field.hpp"
#include "spdelab/grid.hpp"
#include "spdelab/noise.hpp"
#include "spdelab/nonlin.hpp"
#include "spdelab/norms.hpp"
#include "spdelab/operator.hpp"

namespace spdelab {

struct Problem {
  const Grid* grid = nullptr;
  const CoefficientField* coeffs = nullptr;
  const NonlinearCoefficients* nonlin = nullptr;
  const NoiseSpectrum* spectrum = nullptr;
  NodeField xi;
  double T = 0.1;
  int steps = 1000;
  Scheme scheme = Scheme::backward_euler;

  double dt() const { return T / steps; }
};

struct Trajectory {
  SpaceTimeField u;
  bool blew_up = false;
  int blow_step = -1;
};

namespace detail {

inline void add_noise_term_factored(const NoiseSpectrum& sp, const NoisePath& path,
                                    int k, const NodeField& ht, NodeField& rhs,
                                    NodeField& scratch) {
  noise_field_increment(sp, path, k, scratch);
  for (std::size_t id = 0; id < rhs.size(); ++id) rhs[id] += ht[id] * scratch[id];
}

inline void add_noise_term_additive(const std::vector<double>& sigma,
                                    const NoisePath& path, int k, NodeField& rhs) {
  double s = 0.0;
  for (std::size_t j = 0; j < sigma.size(); ++j)
    s += sigma[j] * path.inc(k, static_cast<int>(j));
  for (double& v : rhs) v += s;
}

inline bool finite_and_bounded(const NodeField& u, double cap) {
  for (double v : u)
    if (!std::isfinite(v) || std::abs(v) > cap) return false;
  return true;
}

}  // namespace detail

// One semi-implicit step: (I - dt A(t_new)) u_new =
//   u + dt [f(t,., u, grad u) + div_h g(t,., u, grad u)] + sum_i h_i(...) dB^i
inline NodeField step_semi_implicit(ImplicitStepper& stepper, const Problem& pb,
                                    const NoisePath& path, const NodeField& u,
                                    int k, NodeField& scratch) {
  const Grid& g = *pb.grid;
  const NonlinearCoefficients& nl = *pb.nonlin;
  const double dt = pb.dt();
  const double t = k * dt;
  const int d = g.dim;
  NodeField rhs(g.nnode, 0.0);
  std::vector<NodeField> flux(d, NodeField(g.nnode));
  NodeField fval(g.nnode), ht;
  const bool factored = nl.h.kind == HSpec::Kind::factored;
  if (factored) ht.assign(g.nnode, 0.0);
  for (int id = 0; id < g.nnode; ++id) {
    double z[2] = {grad_central(g, u, id, 0), d == 2 ? grad_central(g, u, id, 1) : 0.0};
    const double* x = g.x[id].data();
    fval[id] = nl.f_eval(t, x, u[id], z, d);
    double gv[2] = {0.0, 0.0};
    nl.g_eval(t, x, u[id], z, d, gv);
    flux[0][id] = gv[0];
    if (d == 2) flux[1][id] = gv[1];
    if (factored) ht[id] = nl.htilde_eval(t, x, u[id], z);
  }
  for (int id = 0; id < g.nnode; ++id)
    rhs[id] = dt * (fval[id] + div_central(g, flux, id));
  if (factored)
    detail::add_noise_term_factored(*pb.spectrum, path, k, ht, rhs, scratch);
  else if (nl.h.kind == HSpec::Kind::additive_uniform)
    detail::add_noise_term_additive(nl.h.sigma, path, k, rhs);
  return stepper.step(u, rhs, t, t + dt);
}

inline Trajectory integrate(const Problem& pb, const NoisePath& path) {
  const Grid& g = *pb.grid;
  SPDELAB_REQUIRE(path.steps == pb.steps && std::abs(path.dt - pb.dt()) < 1e-12,
                  "integrate: path extent mismatch");
  SPDELAB_REQUIRE(pb.xi.size() == static_cast<std::size_t>(g.nnode),
                  "integrate: initial state size mismatch");
  Trajectory traj{SpaceTimeField(g, pb.T, pb.steps)};
  traj.u.set_slice(0, pb.xi);
  double scale = 1.0;
  for (double v : pb.xi) scale = std::max(scale, std::abs(v));
  const double cap = 1e6 * scale;
  ImplicitStepper stepper(*pb.coeffs, g, pb.dt(), pb.scheme);
  NodeField u = pb.xi, scratch(g.nnode);
  for (int k = 0; k < pb.steps; ++k) {
    u = step_semi_implicit(stepper, pb, path, u, k, scratch);
    if (!detail::finite_and_bounded(u, cap)) {
      traj.blew_up = true;
      traj.blow_step = k + 1;
      fail_runtime("integrate: trajectory blow-up at step " + std::to_string(k + 1));
    }
    traj.u.set_slice(k + 1, u);
  }
  return traj;
}

// linear solve with supplied frozen data (w', w'', diffusion amplitudes)
inline Trajectory integrate_frozen(const CoefficientField& c, const Grid& g,
                                   const FrozenData& fd, const NodeField& xi,
                                   const NoiseSpectrum& sp, const NoisePath& path,
                                   double T, int steps,
                                   Scheme scheme = Scheme::backward_euler) {
  SPDELAB_REQUIRE(fd.steps == steps, "integrate_frozen: data extent mismatch");
  SPDELAB_REQUIRE(path.steps == steps, "integrate_frozen: path extent mismatch");
  Trajectory traj{SpaceTimeField(g, T, steps)};
  traj.u.set_slice(0, xi);
  const double dt = T / steps;
  ImplicitStepper stepper(c, g, dt, scheme);
  NodeField u = xi, scratch(g.nnode);
  const int d = g.dim;
  for (int k = 0; k < steps; ++k) {
    const double t = k * dt;
    NodeField rhs(g.nnode, 0.0);
    std::vector<NodeField> flux(d);
    flux[0] = fd.wsecond[k][0];
    if (d == 2) flux[1] = fd.wsecond[k][1];
    for (int id = 0; id < g.nnode; ++id)
      rhs[id] = dt * (fd.wprime[k][id] + div_central(g, flux, id));
    if (fd.has_factored)
      detail::add_noise_term_factored(sp, path, k, fd.htilde[k], rhs, scratch);
    if (fd.has_additive)
      detail::add_noise_term_additive(fd.hadd[k], path, k, rhs);
    u = stepper.step(u, rhs, t, t + dt);
    for (double v : u)
      if (!std::isfinite(v)) fail_runtime("integrate_frozen: non-finite state");
    traj.u.set_slice(k + 1, u);
  }
  return traj;
}

struct PicardParams {
  double eps = 0.0, gamma = 0.0, delta = 0.0;
  double predicted_factor = 0.0;
};

// eps at the midpoint of the feasible interval for
// C eps + alpha + beta^2 (1+eps) < 2 lambda - alpha, then
// delta = C(1+eps+2/eps) / (C eps + alpha + beta^2(1+eps)),
// gamma = 1/eps + delta (2 lambda - alpha)
inline PicardParams contraction_recipe(double lambda, double C, double alpha,
                                       double beta) {
  SPDELAB_REQUIRE(alpha + 0.5 * beta * beta < lambda,
                  "contraction_recipe: alpha + beta^2/2 < lambda is required");
  PicardParams p;
  const double eps_max = (2.0 * lambda - 2.0 * alpha - beta * beta) / (C + beta * beta);
  p.eps = 0.5 * eps_max;
  const double denom = C * p.eps + alpha + beta * beta * (1.0 + p.eps);
  p.delta = C * (1.0 + p.eps + 2.0 / p.eps) / denom;
  if (C == 0.0) p.delta = 1.0;  // weight choice is free when the numerator vanishes
  p.gamma = 1.0 / p.eps + p.delta * (2.0 * lambda - alpha);
  p.predicted_factor = denom / (2.0 * lambda - alpha);
  return p;
}

// integral of exp(-gamma t) (delta ||d||^2 + ||grad d||^2) dt, trapezoid
inline double weighted_distance(const SpaceTimeField& a, const SpaceTimeField& b,
                                double gamma, double delta) {
  const Grid& g = a.grid();
  SPDELAB_REQUIRE(a.steps() == b.steps(), "weighted_distance: extent mismatch");
  const double dt = a.dt();
  double acc = 0.0;
  NodeField d(g.nnode);
  for (int k = 0; k <= a.steps(); ++k) {
    for (int id = 0; id < g.nnode; ++id) d[id] = a.at(k, id) - b.at(k, id);
    double l2 = 0.0;
    for (int id = 0; id < g.nnode; ++id) l2 += d[id] * d[id];
    l2 *= g.wp;
    const double val = std::exp(-gamma * k * dt) * (delta * l2 + grad_energy_faces(g, d));
    acc += (k == 0 || k == a.steps()) ? 0.5 * dt * val : dt * val;
  }
  return std::sqrt(acc);
}

struct PicardTrace {
  PicardParams params;
  std::vector<double> distance;  // successive weighted distances
  std::vector<double> ratio;     // distance[k+1] / distance[k]
  bool converged = false;
  bool contraction_failure = false;
  std::string message = "ok";
  int iterations = 0;  // applications of the map
};

// applies the map once: freeze (f,g,h) along u, solve the linear problem on
// the same noise path
inline Trajectory picard_map(const Problem& pb, const NoisePath& path,
                             const SpaceTimeField& u) {
  FrozenData fd = frozen_coefficients(*pb.nonlin, *pb.spectrum, u);
  return integrate_frozen(*pb.coeffs, *pb.grid, fd, pb.xi, *pb.spectrum, path,
                          pb.T, pb.steps, pb.scheme);
}

inline std::pair<Trajectory, PicardTrace> picard_solve(const Problem& pb,
                                                       const NoisePath& path,
                                                       double tol,
                                                       int max_iter = 50) {
  const NonlinearCoefficients& nl = *pb.nonlin;
  const double lambda = pb.coeffs->lambda;
  if (!(nl.alpha + 0.5 * nl.beta * nl.beta < lambda))
    fail_precondition(
        "picard_solve: assumption (H)(iv) fails, alpha + beta^2/2 must stay below "
        "lambda (alpha=" + std::to_string(nl.alpha) + ", beta=" + std::to_string(nl.beta) +
        ", lambda=" + std::to_string(lambda) + ")");
  PicardTrace trace;
  trace.params = contraction_recipe(lambda, nl.C, nl.alpha, nl.beta);
  Trajectory cur{SpaceTimeField(*pb.grid, pb.T, pb.steps)};  // start from zero
  int grow = 0;
  for (int it = 0; it < max_iter; ++it) {
    Trajectory next = picard_map(pb, path, cur.u);
    ++trace.iterations;
    const double d = weighted_distance(next.u, cur.u, trace.params.gamma,
                                       trace.params.delta);
    trace.distance.push_back(d);
    const std::size_t n = trace.distance.size();
    if (n >= 2 && trace.distance[n - 2] > 0.0)
      trace.ratio.push_back(d / trace.distance[n - 2]);
    cur = std::move(next);
    if (d < tol) {
      trace.converged = true;
      return {std::move(cur), std::move(trace)};
    }
    grow = (n >= 2 && d >= trace.distance[n - 2]) ? grow + 1 : 0;
    if (grow >= 3) {
      trace.contraction_failure = true;
      trace.message = "picard_solve: distances non-decreasing for 3 consecutive "
                      "iterates; last ratio " +
                      std::to_string(trace.ratio.empty() ? 0.0 : trace.ratio.back());
      return {std::move(cur), std::move(trace)};
    }
  }
  trace.message = "picard_solve: no convergence within iterate budget";
  return {std::move(cur), std::move(trace)};
}

}  // namespace spdelab
