#pragma once
// One engine evaluates every pathwise identity: the energy balance, the
// phi-formula, and its positive-part variant with indicator calculus. All
// three share quadrature conventions (left-point stochastic integrals,
// right-point states for drift terms, plain weights; the quadratic a-form
// rides the operator's face stencil while flux pairings stay centred to
// mirror the stepper's divergence), so the y^2 reductions agree to rounding
// by construction.

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "spdelab/coefficients.hpp"
#include "spdelab/common.hpp"
#include "spdelab/field.hpp"
#include "spdelab/grid.hpp"
#include "spdelab/noise.hpp"
#include "spdelab/nonlin.hpp"
#include "spdelab/solver.hpp"

namespace spdelab {

struct PhiSpec {
  std::string name;
  std::function<double(double, double)> phi;    // (t, y)
  std::function<double(double, double)> dphi;   // d/dy
  std::function<double(double, double)> d2phi;  // d2/dy2
  std::function<double(double, double)> dtphi;  // d/dt, empty if none

  static PhiSpec square() {
    PhiSpec p;
    p.name = "y^2";
    p.phi = [](double, double y) { return y * y; };
    p.dphi = [](double, double y) { return 2.0 * y; };
    p.d2phi = [](double, double) { return 2.0; };
    return p;
  }
};

struct ItoResidualRecord {
  std::string id;
  double L = 0.0, R = 0.0;
  double residual = 0.0;  // |L - R|
  double scale = 0.0;     // max(|L|, |R|)

  double relative() const { return residual / std::max(scale, 1e-300); }
};

enum class IdentityMode { full, positive_part };

inline ItoResidualRecord eval_phi_identity(const Trajectory& traj,
                                           const CoefficientField& c,
                                           const FrozenData& fd,
                                           const NoiseSpectrum& sp,
                                           const NoisePath& path, const PhiSpec& phi,
                                           IdentityMode mode) {
  const SpaceTimeField& u = traj.u;
  const Grid& g = u.grid();
  const int d = g.dim;
  const int K = u.steps();
  const double dt = u.dt();
  SPDELAB_REQUIRE(fd.steps == K, "identity: frozen data extent mismatch");
  SPDELAB_REQUIRE(path.steps == K, "identity: path extent mismatch");
  const bool positive = mode == IdentityMode::positive_part;
  for (double t : {0.0, 0.5 * K * dt, K * dt}) {
    SPDELAB_REQUIRE(std::abs(phi.dphi(t, 0.0)) <= 1e-12,
                    "identity: phi'(t,0) = 0 is required");
    if (positive)
      SPDELAB_REQUIRE(std::abs(phi.phi(t, 0.0)) <= 1e-12,
                      "identity: positive-part form needs phi(t,0) = 0");
  }

  NodeField kappa;
  if (fd.has_factored) {
    kappa.assign(g.nnode, 0.0);
    for (int i = 0; i < sp.modes(); ++i)
      for (int id = 0; id < g.nnode; ++id)
        kappa[id] += sp.lambda[i] * sp.mode[i][id] * sp.mode[i][id];
  }
  double sig2 = 0.0;  // additive quadratic variation rate, x-free
  if (fd.has_additive)
    for (double v : fd.hadd.empty() ? std::vector<double>{} : fd.hadd[0]) sig2 += v * v;

  auto state = [&](int k, int id) {
    const double v = u.at(k, id);
    return positive ? std::max(v, 0.0) : v;
  };
  auto indicator = [&](int k, int id) {
    return positive ? (u.at(k, id) > 0.0 ? 1.0 : 0.0) : 1.0;
  };

  ItoResidualRecord rec;
  rec.id = positive ? "positive-part" : (phi.name == "y^2" ? "energy" : "phi");

  // left side: final phi mass plus the Dirichlet-form accumulation
  double L = 0.0;
  for (int id = 0; id < g.nnode; ++id) L += phi.phi(K * dt, state(K, id));
  L *= g.wp;
  // the a-form uses the same face stencil as assemble: interior faces carry
  // the mean endpoint weight, wall faces the interior node alone
  double aform = 0.0;
  double amat[4];
  NodeField slice(g.nnode), psi(g.nnode);
  std::vector<std::array<double, 2>> acoef(g.nnode);
  const double inv_h2 = 1.0 / (g.h * g.h);
  for (int k = 0; k < K; ++k) {
    const double tn = (k + 1) * dt;
    for (int id = 0; id < g.nnode; ++id) {
      slice[id] = u.at(k + 1, id);
      psi[id] = phi.d2phi(tn, state(k + 1, id)) * indicator(k + 1, id);
      c(tn, g.x[id].data(), amat);
      for (int axis = 0; axis < d; ++axis) acoef[id][axis] = amat[axis * d + axis];
    }
    double acc = 0.0;
    for (int id = 0; id < g.nnode; ++id)
      for (int axis = 0; axis < d; ++axis) {
        const int r = g.nbr[id][2 * axis + 1];
        const double du = value_at(g, slice, r) - slice[id];
        const double af =
            r >= 0 ? 0.5 * (acoef[id][axis] + acoef[r][axis]) : acoef[id][axis];
        const double w = r >= 0 ? 0.5 * (psi[id] + psi[r]) : psi[id];
        acc += af * w * du * du;
        if (g.nbr[id][2 * axis] < 0 && !g.periodic)
          acc += acoef[id][axis] * psi[id] * slice[id] * slice[id];
      }
    aform += dt * acc * g.wp * inv_h2;
  }
  L += aform;

  // right side: initial mass, time-derivative, drift, flux, correction,
  // stochastic integral
  double R = 0.0;
  for (int id = 0; id < g.nnode; ++id) R += phi.phi(0.0, state(0, id));
  R *= g.wp;

  NodeField dW(g.nnode);
  for (int k = 0; k < K; ++k) {
    const double tl = k * dt;
    double drift = 0.0, tderiv = 0.0, fluxterm = 0.0, corr = 0.0, stoch = 0.0;
    for (int id = 0; id < g.nnode; ++id) slice[id] = u.at(k + 1, id);
    for (int id = 0; id < g.nnode; ++id) {
      const double vr = state(k + 1, id);
      const double chir = indicator(k + 1, id);
      drift += phi.dphi(tl, vr) * fd.wprime[k][id];
      if (phi.dtphi) tderiv += phi.dtphi(tl, vr);
      double gdot = 0.0;
      for (int axis = 0; axis < d; ++axis)
        gdot += grad_central(g, slice, id, axis) * fd.wsecond[k][axis][id];
      fluxterm += phi.d2phi(tl, vr) * chir * gdot;
    }
    for (int id = 0; id < g.nnode; ++id) {
      const double vl = state(k, id);
      const double chil = indicator(k, id);
      double h2 = 0.0;
      if (fd.has_factored) h2 += kappa[id] * fd.htilde[k][id] * fd.htilde[k][id];
      if (fd.has_additive) h2 += sig2;
      corr += 0.5 * phi.d2phi(tl, vl) * chil * h2;
    }
    if (fd.has_factored) {
      noise_field_increment(sp, path, k, dW);
      for (int id = 0; id < g.nnode; ++id)
        stoch += phi.dphi(tl, state(k, id)) * fd.htilde[k][id] * dW[id];
    }
    if (fd.has_additive) {
      double inc = 0.0;
      for (std::size_t j = 0; j < fd.hadd[k].size(); ++j)
        inc += fd.hadd[k][j] * path.inc(k, static_cast<int>(j));
      double mass = 0.0;
      for (int id = 0; id < g.nnode; ++id) mass += phi.dphi(tl, state(k, id));
      stoch += mass * inc;
    }
    R += g.wp * (dt * (drift + tderiv - fluxterm + corr) + stoch);
  }

  rec.L = L;
  rec.R = R;
  rec.residual = std::abs(L - R);
  rec.scale = std::max(std::abs(L), std::abs(R));
  return rec;
}

inline ItoResidualRecord energy_identity_residual(const Trajectory& traj,
                                                  const CoefficientField& c,
                                                  const NonlinearCoefficients& nl,
                                                  const NoiseSpectrum& sp,
                                                  const NoisePath& path) {
  FrozenData fd = frozen_coefficients(nl, sp, traj.u);
  ItoResidualRecord rec = eval_phi_identity(traj, c, fd, sp, path, PhiSpec::square(),
                                            IdentityMode::full);
  rec.id = "energy";
  return rec;
}

inline ItoResidualRecord ito_phi_residual(const Trajectory& traj,
                                          const CoefficientField& c,
                                          const NonlinearCoefficients& nl,
                                          const NoiseSpectrum& sp,
                                          const NoisePath& path, const PhiSpec& phi) {
  FrozenData fd = frozen_coefficients(nl, sp, traj.u);
  return eval_phi_identity(traj, c, fd, sp, path, phi, IdentityMode::full);
}

inline ItoResidualRecord positive_part_residual(const Trajectory& traj,
                                                const CoefficientField& c,
                                                const NonlinearCoefficients& nl,
                                                const NoiseSpectrum& sp,
                                                const NoisePath& path,
                                                const PhiSpec& phi) {
  FrozenData fd = frozen_coefficients(nl, sp, traj.u);
  return eval_phi_identity(traj, c, fd, sp, path, phi, IdentityMode::positive_part);
}

}  // namespace spdelab
