#pragma once
// Spectral model of noise white in time and colored in space: truncated
// eigenexpansions of a covariance kernel, counter-seeded Brownian increments
// per (path, mode, step), and scalar Ito processes driven by the same
// increments. Inner products here are the plain h^d products, under which the
// discrete sine family is exactly orthonormal.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "spdelab/common.hpp"
#include "spdelab/field.hpp"
#include "spdelab/grid.hpp"
#include "spdelab/rng.hpp"

namespace spdelab {

struct NoiseSpectrum {
  const Grid* grid = nullptr;
  std::vector<double> lambda;       // positive, non-increasing
  std::vector<NodeField> mode;      // node-valued eigenfunctions
  std::vector<double> sup;          // per-mode sup norm
  double trace = 0.0;               // sum of lambda
  double sup_weighted = 0.0;        // sum of lambda * sup^2

  int modes() const { return static_cast<int>(lambda.size()); }

  void finalize() {
    trace = 0.0;
    sup_weighted = 0.0;
    sup.assign(mode.size(), 0.0);
    for (std::size_t i = 0; i < mode.size(); ++i) {
      for (double v : mode[i]) sup[i] = std::max(sup[i], std::abs(v));
      trace += lambda[i];
      sup_weighted += lambda[i] * sup[i] * sup[i];
    }
  }
};

struct KernelDescriptor {
  enum class Kind { sine_modes, rank_one, tabulated };
  Kind kind = Kind::sine_modes;
  double decay = 2.0;                // sine-modes: lambda_i = i^-decay by rank
  std::string profile = "flat";      // rank-one: "flat" or "sine"
  // tabulated kernel k(x, y) between two points (second coordinates unused in 1d)
  std::function<double(const double*, const double*)> k;

  static KernelDescriptor sine_modes(double p) {
    KernelDescriptor d;
    d.kind = Kind::sine_modes;
    d.decay = p;
    return d;
  }
  static KernelDescriptor rank_one(std::string profile = "flat") {
    KernelDescriptor d;
    d.kind = Kind::rank_one;
    d.profile = std::move(profile);
    return d;
  }
  static KernelDescriptor tabulated(std::function<double(const double*, const double*)> k) {
    KernelDescriptor d;
    d.kind = Kind::tabulated;
    d.k = std::move(k);
    return d;
  }
};

inline NoiseSpectrum build_spectrum(const KernelDescriptor& ker, const Grid& g,
                                    int N_K) {
  SPDELAB_REQUIRE(N_K >= 1, "build_spectrum: at least one mode required");
  NoiseSpectrum sp;
  sp.grid = &g;

  if (ker.kind == KernelDescriptor::Kind::sine_modes) {
    SPDELAB_REQUIRE(g.shape != Shape::lshape,
                    "build_spectrum: sine-modes needs a tensor box; tabulate the "
                    "kernel instead");
    struct Mode { int k, l; double freq; };
    std::vector<Mode> ms;
    if (g.dim == 1) {
      for (int k = 1; k <= N_K; ++k) ms.push_back({k, 0, static_cast<double>(k * k)});
    } else {
      for (int k = 1; k * k <= 2 * N_K * N_K; ++k)
        for (int l = 1; l * l <= 2 * N_K * N_K; ++l)
          ms.push_back({k, l, static_cast<double>(k * k + l * l)});
      std::sort(ms.begin(), ms.end(), [](const Mode& a, const Mode& b) {
        if (a.freq != b.freq) return a.freq < b.freq;
        return a.k < b.k;
      });
      ms.resize(N_K);
    }
    for (int i = 0; i < N_K; ++i) {
      sp.lambda.push_back(std::pow(i + 1.0, -ker.decay));
      NodeField e(g.nnode);
      for (int id = 0; id < g.nnode; ++id) {
        const double sx = std::sin(ms[i].k * M_PI * g.x[id][0]);
        e[id] = g.dim == 1 ? std::sqrt(2.0) * sx
                           : 2.0 * sx * std::sin(ms[i].l * M_PI * g.x[id][1]);
      }
      sp.mode.push_back(std::move(e));
    }
    sp.finalize();
    return sp;
  }

  if (ker.kind == KernelDescriptor::Kind::rank_one) {
    NodeField e(g.nnode, 1.0);
    if (ker.profile == "sine") {
      for (int id = 0; id < g.nnode; ++id)
        e[id] = std::sin(M_PI * g.x[id][0]) *
                (g.dim == 2 ? std::sin(M_PI * g.x[id][1]) : 1.0);
    } else {
      SPDELAB_REQUIRE(ker.profile == "flat",
                      "build_spectrum: unknown rank-one profile '" + ker.profile + "'");
    }
    const double nrm = norm2_plain(g, e);
    SPDELAB_REQUIRE(nrm > 0.0, "build_spectrum: degenerate rank-one profile");
    for (double& v : e) v /= nrm;
    sp.lambda.push_back(1.0);
    sp.mode.push_back(std::move(e));
    sp.finalize();
    return sp;
  }

  SPDELAB_REQUIRE(static_cast<bool>(ker.k), "build_spectrum: missing kernel evaluator");
  Eigen::MatrixXd K(g.nnode, g.nnode);
  double scale = 0.0;
  for (int a = 0; a < g.nnode; ++a)
    for (int b = 0; b < g.nnode; ++b) {
      K(a, b) = ker.k(g.x[a].data(), g.x[b].data());
      scale = std::max(scale, std::abs(K(a, b)));
    }
  const double asym = (K - K.transpose()).cwiseAbs().maxCoeff();
  SPDELAB_REQUIRE(asym <= 1e-10 * std::max(1.0, scale),
                  "build_spectrum: tabulated kernel is not symmetric");
  // plain-weight integral operator; constant weight keeps the problem symmetric
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K * g.wp);
  SPDELAB_REQUIRE(es.info() == Eigen::Success, "build_spectrum: eigensolve failed");
  SPDELAB_REQUIRE(es.eigenvalues().minCoeff() >= -1e-10,
                  "build_spectrum: kernel is not positive semi-definite");
  const double root_wp = std::sqrt(g.wp);
  for (int i = g.nnode - 1; i >= 0 && sp.modes() < N_K; --i) {
    const double lam = es.eigenvalues()(i);
    if (lam <= 1e-14) break;
    sp.lambda.push_back(lam);
    NodeField e(g.nnode);
    for (int id = 0; id < g.nnode; ++id) e[id] = es.eigenvectors()(id, i) / root_wp;
    sp.mode.push_back(std::move(e));
  }
  SPDELAB_REQUIRE(sp.modes() >= 1, "build_spectrum: kernel has no positive modes");
  sp.finalize();
  return sp;
}

struct NoisePath {
  std::uint64_t seed = 0;
  std::uint64_t path_index = 0;
  double dt = 0.0;
  int steps = 0;
  int modes = 0;
  std::vector<double> dB;  // [step * modes + mode]

  double inc(int step, int mode) const {
    return dB[static_cast<std::size_t>(step) * modes + mode];
  }
};

inline constexpr std::uint64_t kNoiseStreamBase = 1ULL << 32;

inline NoisePath sample_path(const NoiseSpectrum& sp, int steps, double dt,
                             std::uint64_t seed, std::uint64_t path_index = 0) {
  SPDELAB_REQUIRE(steps >= 1 && dt > 0.0, "sample_path: bad extent");
  NoisePath p;
  p.seed = seed;
  p.path_index = path_index;
  p.dt = dt;
  p.steps = steps;
  p.modes = sp.modes();
  p.dB.resize(static_cast<std::size_t>(steps) * p.modes);
  const CounterRng rng(seed);
  const double root = std::sqrt(dt);
  for (int k = 0; k < steps; ++k)
    for (int i = 0; i < p.modes; ++i)
      p.dB[static_cast<std::size_t>(k) * p.modes + i] =
          root * rng.gaussian(kNoiseStreamBase + path_index, i, k);
  return p;
}

// sum_i sqrt(lambda_i) e_i(x) dB^i_k
inline void noise_field_increment(const NoiseSpectrum& sp, const NoisePath& path,
                                  int step, NodeField& out) {
  const Grid& g = *sp.grid;
  out.assign(static_cast<std::size_t>(g.nnode), 0.0);
  for (int i = 0; i < sp.modes(); ++i) {
    const double w = std::sqrt(sp.lambda[i]) * path.inc(step, i);
    const NodeField& e = sp.mode[i];
    for (int id = 0; id < g.nnode; ++id) out[id] += w * e[id];
  }
}

struct ItoProcessPath {
  double m = 0.0;
  std::vector<double> b;                   // per step
  std::vector<std::vector<double>> sigma;  // [mode][step]
  std::vector<double> M;                   // steps + 1 values
};

inline ItoProcessPath sample_ito_process(double m, std::vector<double> b,
                                         std::vector<std::vector<double>> sigma,
                                         const NoisePath& path) {
  SPDELAB_REQUIRE(static_cast<int>(b.size()) == path.steps,
                  "sample_ito_process: drift sample count must match steps");
  SPDELAB_REQUIRE(static_cast<int>(sigma.size()) <= path.modes,
                  "sample_ito_process: volatility mode count exceeds the path");
  for (const auto& s : sigma)
    SPDELAB_REQUIRE(static_cast<int>(s.size()) == path.steps,
                    "sample_ito_process: volatility sample count must match steps");
  ItoProcessPath out;
  out.m = m;
  out.b = std::move(b);
  out.sigma = std::move(sigma);
  out.M.resize(path.steps + 1);
  out.M[0] = m;
  for (int k = 0; k < path.steps; ++k) {
    double dM = out.b[k] * path.dt;
    for (std::size_t j = 0; j < out.sigma.size(); ++j)
      dM += out.sigma[j][k] * path.inc(k, static_cast<int>(j));
    out.M[k + 1] = out.M[k] + dM;
  }
  return out;
}

}  // namespace spdelab
