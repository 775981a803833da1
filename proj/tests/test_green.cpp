#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "spdelab/coefficients.hpp"
#include "spdelab/field.hpp"
#include "spdelab/green.hpp"
#include "spdelab/grid.hpp"
#include "spdelab/norms.hpp"

using namespace spdelab;

namespace {

// continuum Dirichlet kernel on (0,1): eigenfunction series, independent of
// the table construction
double series_kernel(double t, double x, double y, int terms = 200) {
  double s = 0.0;
  for (int k = 1; k <= terms; ++k)
    s += 2.0 * std::sin(k * M_PI * x) * std::sin(k * M_PI * y) *
         std::exp(-k * k * M_PI * M_PI * t);
  return s;
}

double series_mass(double t, double y, int terms = 200) {
  double s = 0.0;
  for (int k = 1; k <= terms; k += 2)
    s += 2.0 * std::sin(k * M_PI * y) * (2.0 / (k * M_PI)) *
         std::exp(-k * k * M_PI * M_PI * t);
  return s;
}

// one fine unit-coefficient table shared by several cases
const GreenTable& fine_table() {
  static const Grid g = make_grid(Shape::interval, 1.0 / 128);
  static const GreenTable tab =
      compute_green_at(coeff_identity(1), g, 0.0, 0.5, 0.0, 1000, 1e-4);
  return tab;
}

}  // namespace

TEST_CASE("kernel value at the source matches the eigenfunction series") {
  const Grid g = make_grid(Shape::interval, 1.0 / 256);
  const GreenTable tab = compute_green_at(coeff_identity(1), g, 0.0, 0.5, 0.0, 1000, 1e-4);
  const double oracle = series_kernel(0.1, 0.5, 0.5);
  REQUIRE(oracle == Catch::Approx(0.7457).margin(2e-4));  // frozen series value
  const int mid = nearest_node(g, 0.5);
  REQUIRE(tab.at(1000, mid) == Catch::Approx(oracle).margin(3e-3));
}

TEST_CASE("kernel stays positive with sub markov mass") {
  const GreenTable& tab = fine_table();
  double mn = 1e300;
  for (int k = 0; k <= tab.steps; ++k)
    for (int id = 0; id < tab.grid->nnode; ++id) mn = std::min(mn, tab.at(k, id));
  REQUIRE(mn >= 0.0);  // backward Euler inverts an M matrix
  double prev = 1e300;
  for (int k = 1; k <= tab.steps; ++k) {
    REQUIRE(tab.mass(k) <= 1.0 + 1e-10);
    REQUIRE(tab.mass(k) <= prev + 1e-12);
    prev = tab.mass(k);
  }
  // boundary barely felt at t = 0.01
  REQUIRE(tab.mass(100) == Catch::Approx(series_mass(0.01, 0.5)).margin(3e-3));
  REQUIRE(tab.mass(100) >= 0.995);
}

TEST_CASE("late time mass drains below one percent") {
  const Grid g = make_grid(Shape::interval, 1.0 / 64);
  const GreenTable tab = compute_green_at(coeff_identity(1), g, 0.0, 0.5, 0.0, 1000, 1e-3);
  REQUIRE(tab.mass(1000) < 0.01);
  REQUIRE(series_mass(1.0, 0.5) < 0.01);
}

TEST_CASE("source and observation swap for a time constant symmetric tensor") {
  const Grid g = make_grid(Shape::rectangle, 1.0 / 16);
  const CoefficientField c = coeff_anisotropic(1.0, 2.0);
  const int ya = nearest_node(g, 0.25, 0.5);
  const int yb = nearest_node(g, 0.5, 0.25);
  const GreenTable ta = compute_green(c, g, 0.0, ya, 50, 2e-3);
  const GreenTable tb = compute_green(c, g, 0.0, yb, 50, 2e-3);
  double worst = 0.0;
  for (int k = 0; k <= 50; ++k)
    worst = std::max(worst, std::abs(ta.at(k, yb) - tb.at(k, ya)));
  REQUIRE(worst <= 1e-8);
}

TEST_CASE("whole line gaussian dominates the unit coefficient table") {
  const GreenTable& tab = fine_table();
  GaussianEnvelope env;
  env.C = std::pow(4.0 * M_PI, -0.5);
  env.rho = 2.0;
  env.T = 0.1;
  const EnvelopeReport rep = check_envelope(tab, env);
  REQUIRE(rep.pass);
  REQUIRE(rep.max_ratio <= 1.0 + 1e-3);

  // halving the amplitude doubles the observed peak ratio
  GaussianEnvelope half = env;
  half.C *= 0.5;
  const EnvelopeReport bad = check_envelope(tab, half);
  REQUIRE(!bad.pass);
  REQUIRE(bad.max_ratio == Catch::Approx(2.0 * rep.max_ratio).epsilon(1e-10));
  REQUIRE(bad.max_ratio == Catch::Approx(2.0).margin(0.1));

  REQUIRE_THROWS(check_envelope(tab, env, 1e-3, 2000));  // window past the table
}

TEST_CASE("fitted envelope recovers the unit decay rate and verifies out of sample") {
  const EnvelopeFit fit = fit_envelope(fine_table(), 1.0);
  REQUIRE(fit.env.C == Catch::Approx(std::pow(4.0 * M_PI, -0.5)).epsilon(1e-12));
  REQUIRE(fit.fit_samples > 1000);
  REQUIRE(fit.held_out_pass);
  // discrete deficits pad the admissible rate above the continuum value 2
  REQUIRE(fit.env.rho >= 1.8);
  REQUIRE(fit.env.rho <= 3.0);
}

TEST_CASE("anisotropic tensor fits along its fast axis") {
  // short horizon keeps wall reflections out of the fit window
  const Grid g = make_grid(Shape::rectangle, 1.0 / 32);
  const GreenTable tab =
      compute_green_at(coeff_anisotropic(1.0, 2.0), g, 0.0, 0.5, 0.5, 420, 5e-5);
  const EnvelopeFit fit = fit_envelope(tab, 1.0);
  REQUIRE(fit.held_out_pass);
  // the rate is pinched between the slow axis value 2 and the fast axis 2/2
  REQUIRE(fit.env.rho >= 0.5);
  REQUIRE(fit.env.rho <= 2.05);
  const EnvelopeReport rep = check_envelope(tab, fit.env);
  REQUIRE(rep.pass);
}

TEST_CASE("fitted rate moves opposite the diffusivity") {
  // the rate is an empirical stand-in, so only its trend is pinned down
  std::vector<double> rho;
  for (double lam : {0.5, 2.0}) {
    const Grid g = make_grid(Shape::interval, 1.0 / 128);
    // step scaled by 1/lam so both fits see the same diffusive window
    const GreenTable tab =
        compute_green_at(coeff_identity(1, lam), g, 0.0, 0.5, 0.0, 600, 5e-5 / lam);
    const EnvelopeFit fit = fit_envelope(tab, lam);
    REQUIRE(fit.env.C == Catch::Approx(std::pow(4.0 * M_PI * lam, -0.5)).epsilon(1e-12));
    REQUIRE(fit.held_out_pass);
    // whole space rate for conductivity lam is 2/lam; allow a wide band
    REQUIRE(fit.env.rho >= 0.3 * 2.0 / lam);
    REQUIRE(fit.env.rho <= 2.5 * 2.0 / lam);
    rho.push_back(fit.env.rho);
  }
  REQUIRE(rho[0] > 1.5 * rho[1]);
}

TEST_CASE("first derivative of the kernel obeys a gaussian budget in one dimension") {
  const GreenTable& tab = fine_table();
  const Grid& g = *tab.grid;
  const double* y = g.x[tab.ynode].data();
  auto scan = [&](int from, int to) {
    double worst = 0.0;
    for (int k = from; k <= to; ++k) {
      const double el = tab.time(k);
      const NodeField& slice = tab.values[k];
      for (int id = 0; id < g.nnode; ++id) {
        const double r2 = (g.x[id][0] - y[0]) * (g.x[id][0] - y[0]);
        const double env = std::pow(el, -1.0) * std::exp(-2.0 * r2 / (8.0 * el));
        const double dg = std::abs(grad_central(g, slice, id, 0));
        worst = std::max(worst, dg / env);
      }
    }
    return worst;
  };
  const int burn = envelope_burn_in(1e-3);
  const double fitted = scan(burn, 600);
  REQUIRE(fitted > 0.0);
  // later slices are smoother: the fitted budget holds out of window
  REQUIRE(scan(601, tab.steps) <= 1.2 * fitted);
}

TEST_CASE("zero flux data propagates to the zero state") {
  const Grid g = make_grid(Shape::interval, 1.0 / 32);
  std::vector<std::array<NodeField, 2>> w(
      10, {NodeField(g.nnode, 0.0), NodeField(g.nnode, 0.0)});
  const Trajectory traj = apply_U(coeff_identity(1), g, w, 0.01, 10);
  for (int k = 0; k <= 10; ++k)
    for (int id = 0; id < g.nnode; ++id) REQUIRE(traj.u.at(k, id) == 0.0);
}

TEST_CASE("flux source energy balance closes within one percent") {
  const Grid g = make_grid(Shape::interval, 1.0 / 256);
  const int steps = 1000;
  const double T = 0.1, dt = T / steps;
  std::vector<std::array<NodeField, 2>> w;
  for (int k = 0; k < steps; ++k) {
    NodeField s = sample_field(g, [t = k * dt](double x, double) {
      return std::exp(-t) * std::cos(M_PI * x);
    });
    w.push_back({std::move(s), NodeField(g.nnode, 0.0)});
  }
  const UEnergyReport rep = u_energy_report(coeff_identity(1), g, w, T, steps);
  REQUIRE(rep.energy > 0.0);
  REQUIRE(rep.balance.relative() <= 0.01);
}

TEST_CASE("flux source energy constant is stable under refinement") {
  auto fitted = [](double h, int steps) {
    const Grid g = make_grid(Shape::interval, h);
    const double T = 0.1, dt = T / steps;
    std::vector<std::array<NodeField, 2>> w;
    for (int k = 0; k < steps; ++k) {
      NodeField s = sample_field(g, [t = k * dt](double x, double) {
        return std::exp(-t) * std::cos(M_PI * x);
      });
      w.push_back({std::move(s), NodeField(g.nnode, 0.0)});
    }
    return u_energy_report(coeff_identity(1), g, w, T, steps).ratio;
  };
  const double c1 = fitted(1.0 / 64, 100);
  const double c2 = fitted(1.0 / 128, 200);
  REQUIRE(c1 > 0.0);
  REQUIRE(std::abs(c2 - c1) / c1 <= 0.1);
}

TEST_CASE("constant coefficients agree across nested domains at short horizons") {
  // walls start at distance 0.2 from the compact, far out of reach at T=0.002
  const GreenConvergenceReport rep = green_convergence_study(
      coeff_identity(1), Shape::interval, 0.5, 0.0, 3, 1.0 / 64, 3,
      /*T=*/0.002, /*steps=*/50, /*compact_rho=*/0.45, /*t_min=*/4e-4);
  for (double e : rep.sup_err) REQUIRE(e <= 1e-6);
}

TEST_CASE("mollified step kernels converge toward the finest level") {
  const GreenConvergenceReport rep = green_convergence_study(
      coeff_step(1), Shape::interval, 0.5, 0.0, 4, 1.0 / 64, 2);
  REQUIRE(rep.pass);
  REQUIRE(rep.order >= 0.5);
  for (std::size_t i = 1; i < rep.sup_err.size(); ++i)
    REQUIRE(rep.sup_err[i] <= rep.sup_err[i - 1] * 1.05);
}

TEST_CASE("periodic stepping conserves mass to machine accuracy") {
  GridOptions opt;
  opt.periodic = true;
  const Grid g = make_grid(Shape::interval, 1.0 / 64, opt);
  const GreenTable tab = compute_green_at(coeff_identity(1), g, 0.0, 0.5, 0.0, 200, 1e-3);
  for (int k = 0; k <= 200; ++k) REQUIRE(tab.mass(k) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("kernels grow with the domain") {
  const DomainSequence seq = approx_domains(Shape::interval, 1.0 / 64, 2, 3);
  const Grid& inner = seq.levels[0];
  const Grid& outer = seq.levels[1];
  const GreenTable ti =
      compute_green(coeff_identity(1), inner, 0.0, nearest_node(inner, 0.5), 100, 1e-3);
  const GreenTable to =
      compute_green(coeff_identity(1), outer, 0.0, nearest_node(outer, 0.5), 100, 1e-3);
  REQUIRE(domain_monotonicity_gap(ti, to) <= 1e-10);
}

TEST_CASE("superposing single source kernels reproduces the homogeneous flow") {
  const Grid g = make_grid(Shape::interval, 1.0 / 16);
  const NodeField xi = sample_field(g, [](double x, double) {
    return std::sin(M_PI * x) + 0.5 * std::sin(3.0 * M_PI * x);
  });
  REQUIRE(duhamel_gap(coeff_identity(1), g, xi, 20, 1e-3) <= 1e-11);
}

TEST_CASE("tables export as csv with one row per sample") {
  const Grid g = make_grid(Shape::interval, 1.0 / 8);
  const GreenTable tab = compute_green_at(coeff_identity(1), g, 0.0, 0.5, 0.0, 5, 1e-3);
  const std::string path =
      (std::filesystem::temp_directory_path() / "green_export_test.csv").string();
  green_to_csv(tab, path);
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  REQUIRE(line == "t,x,value");
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  REQUIRE(rows == 6 * g.nnode);
  std::filesystem::remove(path);
}
