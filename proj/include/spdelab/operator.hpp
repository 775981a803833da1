#pragma once
// Conservative flux assembly of div(a grad .) with arithmetic face averages
// and eliminated Dirichlet rows, plus factored backward-Euler / Crank-Nicolson
// steppers built on a sparse Cholesky of (I - theta dt A).

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <array>
#include <cmath>
#include <memory>
#include <vector>

#include "spdelab/coefficients.hpp"
#include "spdelab/common.hpp"
#include "spdelab/field.hpp"
#include "spdelab/grid.hpp"

namespace spdelab {

class DiscreteOperator {
 public:
  const Grid* grid = nullptr;
  double t = 0.0;
  std::vector<double> diag;                  // units 1/time
  std::vector<std::array<double, 4>> off;    // per node, per (axis, dir)

  void apply(const NodeField& u, NodeField& out) const {
    const Grid& g = *grid;
    for (int id = 0; id < g.nnode; ++id) {
      double s = diag[id] * u[id];
      for (int a = 0; a < 2 * g.dim; ++a) {
        const int nb = g.nbr[id][a];
        if (nb >= 0) s += off[id][a] * u[nb];
      }
      out[id] = s;
    }
  }

  NodeField apply(const NodeField& u) const {
    NodeField out(u.size());
    apply(u, out);
    return out;
  }

  // u^T (-A) u * h^d, the discrete Dirichlet form
  double dirichlet_form(const NodeField& u) const {
    NodeField au(u.size());
    apply(u, au);
    return -dot_plain(*grid, u, au);
  }

  Eigen::SparseMatrix<double> matrix() const {
    const Grid& g = *grid;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(g.nnode) * (2 * g.dim + 1));
    for (int id = 0; id < g.nnode; ++id) {
      trip.emplace_back(id, id, diag[id]);
      for (int a = 0; a < 2 * g.dim; ++a)
        if (g.nbr[id][a] >= 0) trip.emplace_back(id, g.nbr[id][a], off[id][a]);
    }
    Eigen::SparseMatrix<double> A(g.nnode, g.nnode);
    A.setFromTriplets(trip.begin(), trip.end());
    return A;
  }
};

inline DiscreteOperator assemble(const CoefficientField& c, const Grid& g, double t) {
  SPDELAB_REQUIRE(c.dim == g.dim, "assemble: coefficient dimension mismatch");
  DiscreteOperator op;
  op.grid = &g;
  op.t = t;
  op.diag.assign(g.nnode, 0.0);
  op.off.assign(g.nnode, {0.0, 0.0, 0.0, 0.0});
  const int d = g.dim;
  const double inv_h2 = 1.0 / (g.h * g.h);
  std::vector<std::array<double, 4>> an(g.nnode);  // diagonal entries per node
  double a[4];
  for (int id = 0; id < g.nnode; ++id) {
    c(t, g.x[id].data(), a);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        if (i != j)
          SPDELAB_REQUIRE(std::abs(a[i * d + j]) <= 1e-14,
                          "assemble: off-diagonal conductivities are not supported "
                          "by the face-flux stencil");
    for (int i = 0; i < d; ++i) an[id][i] = a[i * d + i];
  }
  for (int id = 0; id < g.nnode; ++id)
    for (int axis = 0; axis < d; ++axis)
      for (int dir = 0; dir < 2; ++dir) {
        const int nb = g.nbr[id][2 * axis + dir];
        const double af =
            nb >= 0 ? 0.5 * (an[id][axis] + an[nb][axis]) : an[id][axis];
        op.diag[id] -= af * inv_h2;
        if (nb >= 0) op.off[id][2 * axis + dir] = af * inv_h2;
      }
  return op;
}

enum class Scheme { backward_euler, crank_nicolson };

// Solves (I - theta dt A(t_new)) u_new = u + (1-theta) dt A(t_old) u + rhs,
// theta = 1 (backward Euler) or 1/2 (Crank-Nicolson); the factorization is
// reused while the assembly time does not change.
class ImplicitStepper {
 public:
  ImplicitStepper(const CoefficientField& c, const Grid& g, double dt,
                  Scheme scheme = Scheme::backward_euler)
      : c_(&c), g_(&g), dt_(dt), scheme_(scheme) {
    SPDELAB_REQUIRE(dt > 0.0, "stepper: dt must be positive");
  }

  double theta() const { return scheme_ == Scheme::backward_euler ? 1.0 : 0.5; }

  const DiscreteOperator& op_at(double t) {
    if (!have_op_ || (!c_->time_constant && op_.t != t)) {
      op_ = assemble(*c_, *g_, t);
      have_op_ = true;
      factored_ = false;
    }
    return op_;
  }

  // rhs carries everything outside the stiffness term (already dt-scaled)
  NodeField step(const NodeField& u, const NodeField& rhs, double t_old,
                 double t_new) {
    const Grid& g = *g_;
    NodeField b(u);
    if (scheme_ == Scheme::crank_nicolson) {
      const DiscreteOperator& o = op_at(t_old);
      NodeField au(u.size());
      o.apply(u, au);
      for (int id = 0; id < g.nnode; ++id) b[id] += 0.5 * dt_ * au[id];
    }
    for (int id = 0; id < g.nnode; ++id) b[id] += rhs[id];
    factor_at(t_new);
    Eigen::Map<const Eigen::VectorXd> bv(b.data(), g.nnode);
    Eigen::VectorXd sol = chol_.solve(bv);
    SPDELAB_REQUIRE(chol_.info() == Eigen::Success, "stepper: solve failed");
    return NodeField(sol.data(), sol.data() + g.nnode);
  }

 private:
  void factor_at(double t) {
    op_at(t);
    if (factored_ && (c_->time_constant || factored_t_ == t)) return;
    Eigen::SparseMatrix<double> A = op_.matrix();
    Eigen::SparseMatrix<double> I(g_->nnode, g_->nnode);
    I.setIdentity();
    Eigen::SparseMatrix<double> S = I - theta() * dt_ * A;
    chol_.compute(S);
    SPDELAB_REQUIRE(chol_.info() == Eigen::Success, "stepper: factorization failed");
    factored_ = true;
    factored_t_ = t;
  }

  const CoefficientField* c_;
  const Grid* g_;
  double dt_;
  Scheme scheme_;
  DiscreteOperator op_;
  bool have_op_ = false;
  bool factored_ = false;
  double factored_t_ = 0.0;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol_;
};

}  // namespace spdelab
