#pragma once
// Boundary cutoff fields: a smoothstep ramp of the boundary distance, one on
// {rho >= 1/n}, zero on {rho <= 1/(2n)}, with discrete gradient at most 3n.

#include <algorithm>
#include <cmath>
#include <vector>

#include "spdelab/common.hpp"
#include "spdelab/field.hpp"
#include "spdelab/grid.hpp"
#include "spdelab/norms.hpp"

namespace spdelab {

struct CutoffField {
  int n = 0;        // requested level
  int n_eff = 0;    // level actually used after band resolution clamp
  bool clamped = false;
  NodeField phi;
  double max_grad = 0.0;  // max discrete forward difference / h
};

inline CutoffField build_cutoff(const Grid& g, int n) {
  SPDELAB_REQUIRE(n >= 1, "build_cutoff: n must be positive");
  CutoffField f;
  f.n = n;
  f.n_eff = n;
  if (1.0 / (2.0 * n) < g.h) {  // transition band thinner than the mesh
    f.n_eff = std::max(1, static_cast<int>(std::floor(1.0 / (2.0 * g.h))));
    f.clamped = true;
  }
  const double lo = 1.0 / (2.0 * f.n_eff), hi = 1.0 / f.n_eff;
  f.phi = make_field(g);
  for (int id = 0; id < g.nnode; ++id) {
    const double s = std::clamp((g.rho[id] - lo) / (hi - lo), 0.0, 1.0);
    f.phi[id] = s * s * (3.0 - 2.0 * s);
  }
  for (int id = 0; id < g.nnode; ++id)
    for (int axis = 0; axis < g.dim; ++axis) {
      const int r = g.nbr[id][2 * axis + 1];
      f.max_grad = std::max(f.max_grad,
                            std::abs(value_at(g, f.phi, r) - f.phi[id]) / g.h);
      if (g.nbr[id][2 * axis] < 0)
        f.max_grad = std::max(f.max_grad, std::abs(f.phi[id]) / g.h);
    }
  return f;
}

struct CutoffConvergence {
  std::vector<int> levels;
  std::vector<double> h1_error;   // ||phi_n w - w||_H1 per level
  double sup_ratio = 0.0;         // sup_n ||phi_n w||_H1 / ||w||_H1
};

inline CutoffConvergence cutoff_convergence_test(const Grid& g, const NodeField& w,
                                                 const std::vector<int>& levels) {
  SPDELAB_REQUIRE(w.size() == static_cast<std::size_t>(g.nnode),
                  "cutoff_convergence_test: field size mismatch");
  CutoffConvergence rep;
  rep.levels = levels;
  const double base = h1_norm(g, w);
  for (int n : levels) {
    const CutoffField f = build_cutoff(g, n);
    NodeField d(w.size()), pw(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
      pw[i] = f.phi[i] * w[i];
      d[i] = pw[i] - w[i];
    }
    rep.h1_error.push_back(h1_norm(g, d));
    if (base > 0.0) rep.sup_ratio = std::max(rep.sup_ratio, h1_norm(g, pw) / base);
  }
  return rep;
}

}  // namespace spdelab
