#pragma once
// Counter-based normal variates. Every draw is addressed by
// (seed, stream, slot, step), so scheduling and worker count cannot change
// which number a consumer sees.

#include <cmath>
#include <cstdint>

namespace spdelab {

namespace detail {

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  // uniform on (0,1), endpoints excluded
  double uniform(std::uint64_t stream, std::uint64_t slot, std::uint64_t step,
                 std::uint64_t lane = 0) const {
    std::uint64_t x = detail::mix64(seed_ ^ 0x243f6a8885a308d3ULL);
    x = detail::mix64(x ^ stream);
    x = detail::mix64(x ^ slot);
    x = detail::mix64(x ^ step);
    x = detail::mix64(x ^ lane);
    return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
  }

  double gaussian(std::uint64_t stream, std::uint64_t slot,
                  std::uint64_t step) const {
    const double u = uniform(stream, slot, step, 0);
    const double v = uniform(stream, slot, step, 1);
    return std::sqrt(-2.0 * std::log(u)) *
           std::cos(6.283185307179586476925286766559 * v);
  }

 private:
  std::uint64_t seed_;
};

}  // namespace spdelab
