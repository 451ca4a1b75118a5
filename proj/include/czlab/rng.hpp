#pragma once

#include <cmath>
#include <cstdint>

namespace czlab {

/// Counter-based splittable RNG. Every draw is a pure function of
/// (seed, stream, counter), so parallel evaluation order never changes
/// the result stream.
class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : seed_(seed), stream_(stream) {}

    std::uint64_t bits(std::uint64_t counter) const {
        std::uint64_t z = seed_ ^ (0x9e3779b97f4a7c15ULL * (stream_ + 1));
        z ^= counter + 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform(std::uint64_t counter) const {
        return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi).
    double uniform(std::uint64_t counter, double lo, double hi) const {
        return lo + (hi - lo) * uniform(counter);
    }

    /// Standard normal (Box-Muller, two counters consumed).
    double normal(std::uint64_t counter) const {
        double u1 = uniform(2 * counter);
        double u2 = uniform(2 * counter + 1);
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(6.283185307179586 * u2);
    }

    std::uint64_t index(std::uint64_t counter, std::uint64_t n) const {
        return bits(counter) % n;
    }

    CounterRng substream(std::uint64_t k) const {
        return CounterRng(seed_, stream_ * 0x100000001b3ULL + k + 1);
    }

  private:
    std::uint64_t seed_;
    std::uint64_t stream_;
};

} // namespace czlab
