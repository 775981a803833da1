#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "spdelab/field.hpp"
#include "spdelab/grid.hpp"
#include "spdelab/norms.hpp"

using namespace spdelab;

namespace {

SpaceTimeField random_field(const Grid& g, double T, int steps, std::mt19937& rng) {
  SpaceTimeField u(g, T, steps);
  std::uniform_real_distribution<double> box(-2.0, 2.0);
  for (int k = 0; k <= steps; ++k)
    for (int id = 0; id < g.nnode; ++id) u.at(k, id) = box(rng);
  return u;
}

// discrete space-time pairing with the same quadrature the norms use
double pairing(const SpaceTimeField& u, const SpaceTimeField& v) {
  const Grid& g = u.grid();
  const int K = u.steps();
  double s = 0.0;
  for (int k = 0; k <= K; ++k) {
    const double w = (k == 0 || k == K) ? 0.5 * u.dt() : u.dt();
    double sx = 0.0;
    for (int id = 0; id < g.nnode; ++id) sx += g.qw[id] * u.at(k, id) * v.at(k, id);
    s += w * sx;
  }
  return s;
}

SpaceTimeField constant_field(const Grid& g, double T, int steps, double c) {
  SpaceTimeField u(g, T, steps);
  for (int k = 0; k <= steps; ++k)
    for (int id = 0; id < g.nnode; ++id) u.at(k, id) = c;
  return u;
}

}  // namespace

TEST_CASE("unit constants have unit mixed norms") {
  for (Shape sh : {Shape::interval, Shape::rectangle}) {
    const Grid g = make_grid(sh, 1.0 / 16);
    const SpaceTimeField one = constant_field(g, 1.0, 20, 1.0);
    for (double p : {1.0, 2.0, 4.0, kInfExp})
      for (double q : {1.0, 2.0, kInfExp})
        REQUIRE(lpq_norm(one, p, q) == Catch::Approx(1.0).epsilon(1e-12));
    REQUIRE(sharp_norm(one) == Catch::Approx(1.0).epsilon(1e-12));
    REQUIRE(dual_sharp_upper(one) == Catch::Approx(1.0).epsilon(1e-12));
    REQUIRE(theta_dual_upper(one, 0.0) == Catch::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("the linear ramp reproduces its closed form time integrals") {
  const Grid g = make_grid(Shape::interval, 1.0 / 16);
  const int K = 100;
  const double dt = 1.0 / K;
  SpaceTimeField u(g, 1.0, K);
  for (int k = 0; k <= K; ++k)
    for (int id = 0; id < g.nnode; ++id) u.at(k, id) = k * dt;
  // trapezoid rule on s^2 lands exactly at 1/3 + dt^2/6
  const double want = std::sqrt(1.0 / 3.0 + dt * dt / 6.0);
  REQUIRE(lpq_norm(u, 2.0, 2.0) == Catch::Approx(want).epsilon(1e-12));
  REQUIRE(lpq_norm(u, 2.0, 2.0) == Catch::Approx(1.0 / std::sqrt(3.0)).margin(1e-4));
  REQUIRE(lpq_norm(u, 2.0, kInfExp) == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sharp norm of a time constant state splits into its two routes") {
  const Grid g = make_grid(Shape::rectangle, 1.0 / 16);
  SpaceTimeField u(g, 1.0, 40);
  for (int k = 0; k <= 40; ++k)
    for (int id = 0; id < g.nnode; ++id)
      u.at(k, id) = std::sin(M_PI * g.x[id][0]) * std::sin(M_PI * g.x[id][1]);
  NodeField xi(u.slice(0), u.slice(0) + g.nnode);
  const double l2 = spatial_lp(g, xi.data(), 2.0);
  const double l6 = spatial_lp(g, xi.data(), 6.0);
  REQUIRE(sharp_norm(u) == Catch::Approx(std::max(l2, l6)).epsilon(1e-10));
}

TEST_CASE("sharp norm is controlled by the energy pair with a stable fitted constant") {
  std::mt19937 rng(2024);
  const Grid g = make_grid(Shape::interval, 1.0 / 32);
  auto ratio = [](const SpaceTimeField& u) {
    const double en = std::sqrt(std::pow(lpq_norm(u, 2.0, kInfExp), 2) +
                                std::pow(grad_l22_norm(u), 2));
    return en > 0 ? sharp_norm(u) / en : 0.0;
  };
  double c1 = 0.0;
  for (int trial = 0; trial < 20; ++trial)
    c1 = std::max(c1, ratio(random_field(g, 0.5, 16, rng)));
  REQUIRE(c1 > 0.0);
  for (int trial = 0; trial < 20; ++trial)
    REQUIRE(ratio(random_field(g, 0.5, 16, rng)) <= 2.0 * c1);
}

TEST_CASE("dual upper bounds sit below each candidate and below the root t route") {
  std::mt19937 rng(7);
  for (Shape sh : {Shape::interval, Shape::rectangle}) {
    const Grid g = make_grid(sh, 1.0 / 8);
    for (int trial = 0; trial < 10; ++trial) {
      const SpaceTimeField v = random_field(g, 0.7, 14, rng);
      const double tsc = conjugate_exponent(two_star(g.dim));
      REQUIRE(dual_sharp_upper(v) <= lpq_norm(v, 2.0, 1.0) + 1e-12);
      REQUIRE(dual_sharp_upper(v) <= lpq_norm(v, tsc, 2.0) + 1e-12);
      REQUIRE(dual_sharp_upper(v) <=
              std::sqrt(0.7) * lpq_norm(v, 2.0, 2.0) + 1e-10);
    }
  }
}

TEST_CASE("the pairing obeys the sharp and dual sharp product bound on random pairs") {
  std::mt19937 rng(31);
  const Grid g1 = make_grid(Shape::interval, 1.0 / 16);
  const Grid g2 = make_grid(Shape::rectangle, 1.0 / 8);
  for (int trial = 0; trial < 100; ++trial) {
    const Grid& g = trial % 2 == 0 ? g1 : g2;
    const SpaceTimeField u = random_field(g, 0.5, 10, rng);
    const SpaceTimeField v = random_field(g, 0.5, 10, rng);
    const double lhs = std::abs(pairing(u, v));
    const double rhs = sharp_norm(u) * dual_sharp_upper(v);
    REQUIRE(lhs <= rhs * (1.0 + 1e-12) + 1e-12);
  }
}

TEST_CASE("theta corners follow the admissible line") {
  const Grid g = make_grid(Shape::interval, 1.0 / 16);
  std::mt19937 rng(5);
  const SpaceTimeField v = random_field(g, 1.0, 24, rng);
  // d=1, theta=1/2: corners (inf,2) and (1,inf)
  const double want = std::min(lpq_norm(v, kInfExp, 2.0), lpq_norm(v, 1.0, kInfExp));
  REQUIRE(theta_dual_upper(v, 0.5) == Catch::Approx(want).epsilon(1e-13));
  // d=1, theta=0: the second corner has p=1/2 and is dropped
  REQUIRE(theta_dual_upper(v, 0.0) ==
          Catch::Approx(lpq_norm(v, kInfExp, 1.0)).epsilon(1e-13));

  const Grid q = make_grid(Shape::rectangle, 1.0 / 8);
  const SpaceTimeField w = random_field(q, 1.0, 10, rng);
  const double want2 = std::min(lpq_norm(w, kInfExp, 2.0), lpq_norm(w, 2.0, kInfExp));
  REQUIRE(theta_dual_upper(w, 0.5) == Catch::Approx(want2).epsilon(1e-13));
}

TEST_CASE("theta upper bound dominates the space time l1 mass") {
  std::mt19937 rng(13);
  const double theta = 0.5, T = 1.0;
  for (Shape sh : {Shape::interval, Shape::rectangle}) {
    const Grid g = make_grid(sh, 1.0 / 8);
    double box = 0.0;
    for (int id = 0; id < g.nnode; ++id) box += g.qw[id];
    for (int trial = 0; trial < 20; ++trial) {
      const SpaceTimeField v = random_field(g, T, 12, rng);
      const double c = box * std::pow(T, theta);
      REQUIRE(lpq_norm(v, 1.0, 1.0) <= c * theta_dual_upper(v, theta) + 1e-10);
    }
  }
}

TEST_CASE("h1 norm of the first sine mode carries the frozen value") {
  const Grid g = make_grid(Shape::interval, 1.0 / 256);
  const NodeField w = sample_field(g, [](double x, double) { return std::sin(M_PI * x); });
  const double want = std::sqrt(0.5 + 0.5 * M_PI * M_PI);  // 2.33127
  REQUIRE(h1_norm(g, w) == Catch::Approx(want).epsilon(1e-3));
  REQUIRE(want == Catch::Approx(2.33127).margin(1e-5));
  REQUIRE(h1_norm(g, NodeField(g.nnode, 0.0)) == 0.0);
}

TEST_CASE("sobolev ratio is stable under refinement") {
  auto fit = [](double h) {
    const Grid g = make_grid(Shape::interval, h);
    double cs = 0.0;
    for (int k = 1; k <= 4; ++k) {
      const NodeField w = sample_field(
          g, [k](double x, double) { return std::sin(k * M_PI * x) + 0.3 * x * (1 - x); });
      const double num = spatial_lp(g, w.data(), two_star(1));
      const double den = std::sqrt(grad_energy_faces(g, w));
      cs = std::max(cs, num / den);
    }
    return cs;
  };
  const double c64 = fit(1.0 / 64), c128 = fit(1.0 / 128);
  REQUIRE(c64 > 0.0);
  REQUIRE(std::abs(c128 - c64) / c64 <= 0.05);
}

TEST_CASE("mixed norms are homogeneous, subadditive, and monotone") {
  std::mt19937 rng(99);
  const Grid g = make_grid(Shape::interval, 1.0 / 16);
  const double ps[] = {1.0, 2.0, 4.0, kInfExp};
  const double qs[] = {1.0, 2.0, kInfExp};
  for (int trial = 0; trial < 20; ++trial) {
    const SpaceTimeField u = random_field(g, 0.5, 8, rng);
    const SpaceTimeField v = random_field(g, 0.5, 8, rng);
    SpaceTimeField su(g, 0.5, 8), uv(g, 0.5, 8), au(g, 0.5, 8);
    for (int k = 0; k <= 8; ++k)
      for (int id = 0; id < g.nnode; ++id) {
        su.at(k, id) = -2.5 * u.at(k, id);
        uv.at(k, id) = u.at(k, id) + v.at(k, id);
        au.at(k, id) = std::abs(u.at(k, id)) * 1.25;
      }
    for (double p : ps)
      for (double q : qs) {
        const double nu = lpq_norm(u, p, q);
        REQUIRE(lpq_norm(su, p, q) == Catch::Approx(2.5 * nu).epsilon(1e-11));
        REQUIRE(lpq_norm(uv, p, q) <= nu + lpq_norm(v, p, q) + 1e-11);
        REQUIRE(nu <= lpq_norm(au, p, q) + 1e-12);
      }
  }
}

TEST_CASE("norms resolve by id and reject unknown names") {
  const Grid g = make_grid(Shape::interval, 1.0 / 16);
  std::mt19937 rng(3);
  const SpaceTimeField u = random_field(g, 0.5, 10, rng);
  REQUIRE(norm_by_id(u, "L2L2").value == Catch::Approx(lpq_norm(u, 2, 2)));
  REQUIRE(norm_by_id(u, "L2Linf").value == Catch::Approx(lpq_norm(u, 2, kInfExp)));
  REQUIRE(norm_by_id(u, "sharp").value == Catch::Approx(sharp_norm(u)));
  REQUIRE(norm_by_id(u, "dual_sharp_upper").value == Catch::Approx(dual_sharp_upper(u)));
  REQUIRE(norm_by_id(u, "theta_dual_upper(0.25)").value ==
          Catch::Approx(theta_dual_upper(u, 0.25)));
  REQUIRE(norm_by_id(u, "H1").value > 0.0);
  REQUIRE_THROWS(norm_by_id(u, "L3L3"));

  // genuine norms vanish only on the zero field
  SpaceTimeField z(g, 0.5, 10);
  REQUIRE(lpq_norm(z, 2, 2) == 0.0);
  z.at(3, 2) = 1e-9;
  REQUIRE(lpq_norm(z, 2, 2) > 0.0);
}
