#pragma once
// Node fields and space-time trajectories over a Grid, plus the two discrete
// gradients used throughout: face differences (forward, zero extension) for
// norms, and centred node differences, whose negative adjoint under the plain
// inner product is the centred divergence used by the flux term.

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "spdelab/common.hpp"
#include "spdelab/grid.hpp"

namespace spdelab {

using NodeField = std::vector<double>;

inline NodeField make_field(const Grid& g, double v = 0.0) {
  return NodeField(static_cast<std::size_t>(g.nnode), v);
}

inline NodeField sample_field(const Grid& g,
                              const std::function<double(double, double)>& f) {
  NodeField u(static_cast<std::size_t>(g.nnode));
  for (int id = 0; id < g.nnode; ++id) u[id] = f(g.x[id][0], g.x[id][1]);
  return u;
}

inline double value_at(const Grid&, const NodeField& u, int nb) {
  return nb >= 0 ? u[nb] : 0.0;
}

// centred node gradient, component `axis`
inline double grad_central(const Grid& g, const NodeField& u, int id, int axis) {
  const double ul = value_at(g, u, g.nbr[id][2 * axis]);
  const double ur = value_at(g, u, g.nbr[id][2 * axis + 1]);
  return (ur - ul) / (2.0 * g.h);
}

// centred divergence of a per-axis flux field; exact negative adjoint of
// grad_central under the plain h^d product with zero exterior values
inline double div_central(const Grid& g, const std::vector<NodeField>& flux,
                          int id) {
  double s = 0.0;
  for (int axis = 0; axis < g.dim; ++axis) {
    const double fl = value_at(g, flux[axis], g.nbr[id][2 * axis]);
    const double fr = value_at(g, flux[axis], g.nbr[id][2 * axis + 1]);
    s += (fr - fl) / (2.0 * g.h);
  }
  return s;
}

inline double dot_plain(const Grid& g, const NodeField& a, const NodeField& b) {
  double s = 0.0;
  for (int id = 0; id < g.nnode; ++id) s += a[id] * b[id];
  return s * g.wp;
}

inline double norm2_plain(const Grid& g, const NodeField& a) {
  return std::sqrt(dot_plain(g, a, a));
}

// sum over faces of (difference quotient)^2 * h^d; faces to the wall included
inline double grad_energy_faces(const Grid& g, const NodeField& u) {
  double s = 0.0;
  for (int id = 0; id < g.nnode; ++id)
    for (int axis = 0; axis < g.dim; ++axis) {
      const int r = g.nbr[id][2 * axis + 1];
      const double d = value_at(g, u, r) - u[id];
      s += d * d;
      if (g.nbr[id][2 * axis] < 0 && !g.periodic) s += u[id] * u[id];
    }
  return s * g.wp / (g.h * g.h);
}

// sum over nodes of |centred gradient|^2 * weight
inline double grad_energy_central(const Grid& g, const NodeField& u) {
  double s = 0.0;
  for (int id = 0; id < g.nnode; ++id)
    for (int axis = 0; axis < g.dim; ++axis) {
      const double d = grad_central(g, u, id, axis);
      s += d * d;
    }
  return s * g.wp;
}

class SpaceTimeField {
 public:
  SpaceTimeField() = default;
  SpaceTimeField(const Grid& g, double T, int steps)
      : grid_(&g), T_(T), steps_(steps),
        v_(static_cast<std::size_t>(steps + 1) * g.nnode, 0.0) {
    SPDELAB_REQUIRE(steps >= 1 && T > 0.0, "space-time field: bad extent");
  }

  const Grid& grid() const { return *grid_; }
  int steps() const { return steps_; }
  double T() const { return T_; }
  double dt() const { return T_ / steps_; }
  double time(int k) const { return T_ * k / steps_; }

  double* slice(int k) { return v_.data() + static_cast<std::size_t>(k) * grid_->nnode; }
  const double* slice(int k) const {
    return v_.data() + static_cast<std::size_t>(k) * grid_->nnode;
  }

  NodeField slice_field(int k) const {
    return NodeField(slice(k), slice(k) + grid_->nnode);
  }

  void set_slice(int k, const NodeField& f) {
    SPDELAB_REQUIRE(f.size() == static_cast<std::size_t>(grid_->nnode),
                    "space-time field: slice size mismatch");
    std::copy(f.begin(), f.end(), slice(k));
  }

  double& at(int k, int id) { return v_[static_cast<std::size_t>(k) * grid_->nnode + id]; }
  double at(int k, int id) const {
    return v_[static_cast<std::size_t>(k) * grid_->nnode + id];
  }

 private:
  const Grid* grid_ = nullptr;
  double T_ = 0.0;
  int steps_ = 0;
  std::vector<double> v_;
};

}  // namespace spdelab
