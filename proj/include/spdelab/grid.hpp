#pragma once
// Uniform lattices on the unit interval, the unit square, and the L-shaped
// region (unit square minus the closed quarter [1/2,1) x [1/2,1)), with
// homogeneous Dirichlet exterior. Nodes are the interior lattice points;
// a missing neighbour across the boundary reads as value zero.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "spdelab/common.hpp"

namespace spdelab {

enum class Shape { interval, rectangle, lshape };

inline const char* shape_name(Shape s) {
  switch (s) {
    case Shape::interval: return "interval";
    case Shape::rectangle: return "rectangle";
    case Shape::lshape: return "lshape";
  }
  return "?";
}

struct GridOptions {
  int min_interior_per_axis = 3;
  bool periodic = false;  // testing topology: neighbours wrap, no boundary
};

class Grid {
 public:
  Shape shape = Shape::interval;
  int dim = 1;
  double h = 0.0;
  int n = 0;  // cells per axis
  bool periodic = false;
  bool sublevel = false;  // node subset of a parent lattice (nested domains)

  int nnode = 0;
  std::vector<std::array<double, 2>> x;    // node coordinates, x[1] == 0 in 1d
  std::vector<std::array<int, 2>> lat;     // lattice indices
  std::vector<std::array<int, 4>> nbr;     // -x, +x, -y, +y; -1 across boundary
  std::vector<double> rho;                 // distance to the domain boundary
  std::vector<double> qw;                  // absorbed box quadrature weight
  double wp = 0.0;                         // plain weight h^dim

  int node_at(int i, int j) const {
    if (i < 0 || i > n || j < 0 || j > n) return -1;
    return id_[static_cast<std::size_t>(i) * (n + 1) + j];
  }

  double measure() const {
    switch (shape) {
      case Shape::interval: return 1.0;
      case Shape::rectangle: return 1.0;
      case Shape::lshape: return 0.75;
    }
    return 0.0;
  }

  friend Grid make_grid(Shape, double, GridOptions);
  friend Grid restrict_grid(const Grid&, const std::vector<char>&);

 private:
  std::vector<int> id_;  // (n+1)^2 lattice -> node id, -1 outside
};

namespace detail {

struct Segment {
  double ax, ay, bx, by;
};

inline double segment_distance(double px, double py, const Segment& s) {
  const double dx = s.bx - s.ax, dy = s.by - s.ay;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0)
    t = std::clamp(((px - s.ax) * dx + (py - s.ay) * dy) / len2, 0.0, 1.0);
  const double qx = s.ax + t * dx, qy = s.ay + t * dy;
  return std::hypot(px - qx, py - qy);
}

inline std::vector<Segment> boundary_segments(Shape shape) {
  switch (shape) {
    case Shape::interval:
      return {{0, 0, 0, 0}, {1, 0, 1, 0}};
    case Shape::rectangle:
      return {{0, 0, 1, 0}, {1, 0, 1, 1}, {1, 1, 0, 1}, {0, 1, 0, 0}};
    case Shape::lshape:
      return {{0, 0, 1, 0},     {1, 0, 1, 0.5},   {1, 0.5, 0.5, 0.5},
              {0.5, 0.5, 0.5, 1}, {0.5, 1, 0, 1}, {0, 1, 0, 0}};
  }
  return {};
}

inline bool lattice_interior(Shape shape, int n, int i, int j) {
  if (i <= 0 || i >= n) return false;
  if (shape == Shape::interval) return true;
  if (j <= 0 || j >= n) return false;
  if (shape == Shape::rectangle) return true;
  return !(2 * i >= n && 2 * j >= n);
}

}  // namespace detail

inline Grid make_grid(Shape shape, double h, GridOptions opt = {}) {
  SPDELAB_REQUIRE(h > 0.0, "grid: spacing must be positive");
  const double nr = 1.0 / h;
  const int n = static_cast<int>(std::lround(nr));
  SPDELAB_REQUIRE(n >= 1 && std::abs(n * h - 1.0) <= 1e-9,
                  "grid: spacing must divide the unit box edge");
  if (shape == Shape::lshape) {
    SPDELAB_REQUIRE(n % 2 == 0, "grid: lshape needs the line 1/2 on the lattice");
    SPDELAB_REQUIRE(!opt.periodic, "grid: periodic lshape is not defined");
  }
  const int interior_per_axis = opt.periodic ? n : n - 1;
  SPDELAB_REQUIRE(interior_per_axis >= opt.min_interior_per_axis,
                  "grid: fewer than " + std::to_string(opt.min_interior_per_axis) +
                      " interior nodes per axis; refine h");

  Grid g;
  g.shape = shape;
  g.dim = (shape == Shape::interval) ? 1 : 2;
  g.h = h;
  g.n = n;
  g.periodic = opt.periodic;
  g.wp = (g.dim == 1) ? h : h * h;
  g.id_.assign(static_cast<std::size_t>(n + 1) * (n + 1), -1);

  const auto segs = detail::boundary_segments(shape);
  const int lo = opt.periodic ? 0 : 1;
  const int hi = n - 1;
  const int jlo = (g.dim == 1) ? 0 : lo;
  const int jhi = (g.dim == 1) ? 0 : hi;

  for (int i = lo; i <= hi; ++i)
    for (int j = jlo; j <= jhi; ++j) {
      if (!opt.periodic && !detail::lattice_interior(shape, n, i, j)) continue;
      const int id = g.nnode++;
      g.id_[static_cast<std::size_t>(i) * (n + 1) + j] = id;
      g.lat.push_back({i, j});
      const double px = i * h, py = (g.dim == 2) ? j * h : 0.0;
      g.x.push_back({px, py});
      if (opt.periodic) {
        g.rho.push_back(1.0);
      } else if (shape == Shape::interval) {
        g.rho.push_back(std::min(px, 1.0 - px));
      } else {
        double d = 1e300;
        for (const auto& s : segs) d = std::min(d, detail::segment_distance(px, py, s));
        g.rho.push_back(d);
      }
    }

  g.nbr.assign(g.nnode, {-1, -1, -1, -1});
  g.qw.assign(g.nnode, 0.0);
  auto wrap = [n](int i) { return (i % n + n) % n; };
  for (int id = 0; id < g.nnode; ++id) {
    const int i = g.lat[id][0], j = g.lat[id][1];
    std::array<std::array<int, 2>, 4> cand = {{{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}}};
    double w = 1.0;
    for (int a = 0; a < 2 * g.dim; ++a) {
      int ci = cand[a][0], cj = cand[a][1];
      if (opt.periodic) { ci = wrap(ci); cj = (g.dim == 2) ? wrap(cj) : 0; }
      g.nbr[id][a] = g.node_at(ci, cj);
      if (a % 2 == 1) {
        const bool l = g.nbr[id][a - 1] >= 0, r = g.nbr[id][a] >= 0;
        // Absorbed cell: half spacing toward an interior neighbour, full
        // spacing toward the wall, so constants integrate exactly on boxes.
        w *= h * ((l ? 0.5 : 1.0) + (r ? 0.5 : 1.0));
      }
    }
    g.qw[id] = w;
  }
  return g;
}

// Grid on a node subset of `base` (kept lattice, Dirichlet on the complement).
inline Grid restrict_grid(const Grid& base, const std::vector<char>& keep) {
  SPDELAB_REQUIRE(keep.size() == static_cast<std::size_t>(base.nnode),
                  "restrict_grid: mask size mismatch");
  SPDELAB_REQUIRE(!base.periodic, "restrict_grid: periodic base unsupported");
  Grid g;
  g.shape = base.shape;
  g.dim = base.dim;
  g.h = base.h;
  g.n = base.n;
  g.periodic = false;
  g.sublevel = true;
  g.wp = base.wp;
  g.id_.assign(base.id_.size(), -1);
  for (int id = 0; id < base.nnode; ++id) {
    if (!keep[id]) continue;
    const int nid = g.nnode++;
    g.id_[static_cast<std::size_t>(base.lat[id][0]) * (base.n + 1) + base.lat[id][1]] = nid;
    g.lat.push_back(base.lat[id]);
    g.x.push_back(base.x[id]);
    g.rho.push_back(base.rho[id]);  // parent-boundary distance, informational
  }
  SPDELAB_REQUIRE(g.nnode > 0, "restrict_grid: empty node set");
  g.nbr.assign(g.nnode, {-1, -1, -1, -1});
  g.qw.assign(g.nnode, 0.0);
  for (int id = 0; id < g.nnode; ++id) {
    const int i = g.lat[id][0], j = g.lat[id][1];
    std::array<std::array<int, 2>, 4> cand = {{{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}}};
    double w = 1.0;
    for (int a = 0; a < 2 * g.dim; ++a) {
      g.nbr[id][a] = g.node_at(cand[a][0], cand[a][1]);
      if (a % 2 == 1) {
        const bool l = g.nbr[id][a - 1] >= 0, r = g.nbr[id][a] >= 0;
        w *= g.h * ((l ? 0.5 : 1.0) + (r ? 0.5 : 1.0));
      }
    }
    g.qw[id] = w;
  }
  return g;
}

// Nested node sets: level k keeps nodes with rho >= 1/(first_level + k + 1);
// the last level must exhaust the interior when h resolves 1/(depth+1).
struct DomainSequence {
  Grid base;
  std::vector<Grid> levels;
  std::vector<int> level_index;  // k values actually used
};

inline DomainSequence approx_domains(Shape shape, double h, int depth,
                                     int first_level = 1, GridOptions opt = {}) {
  SPDELAB_REQUIRE(depth >= 1, "approx_domains: depth must be at least 1");
  SPDELAB_REQUIRE(first_level >= 1, "approx_domains: first level must be at least 1");
  DomainSequence seq;
  seq.base = make_grid(shape, h, opt);
  for (int k = first_level; k < first_level + depth; ++k) {
    const double thr = 1.0 / (k + 1);
    std::vector<char> keep(seq.base.nnode, 0);
    int cnt = 0;
    for (int id = 0; id < seq.base.nnode; ++id)
      if (seq.base.rho[id] >= thr - 1e-12) { keep[id] = 1; ++cnt; }
    SPDELAB_REQUIRE(cnt > 0, "approx_domains: level " + std::to_string(k) +
                                 " is empty; refine h");
    seq.levels.push_back(restrict_grid(seq.base, keep));
    seq.level_index.push_back(k);
  }
  return seq;
}

inline int nearest_node(const Grid& g, double px, double py = 0.0) {
  int best = -1;
  double bd = 1e300;
  for (int id = 0; id < g.nnode; ++id) {
    const double d = std::hypot(g.x[id][0] - px, g.x[id][1] - py);
    if (d < bd) { bd = d; best = id; }
  }
  SPDELAB_REQUIRE(best >= 0, "nearest_node: empty grid");
  return best;
}

}  // namespace spdelab
