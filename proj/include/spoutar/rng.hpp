#pragma once

#include <cstdint>
#include <random>

namespace spoutar {

/// Deterministic random stream. All variate generation is hand-rolled on top
/// of the raw 64-bit output so that a given seed reproduces the same sequence
/// bit for bit on every build (std::*_distribution makes no such promise).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform on [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Uniform integer on [0, upper).
    std::uint64_t integer(std::uint64_t upper);

    /// Standard normal via the polar method; pairs are cached.
    double normal();

    /// Gamma(shape, scale 1), Marsaglia-Tsang.
    double gamma(double shape);

    double inv_gamma(double shape, double scale) {
        return scale / gamma(shape);
    }

    /// Stable derived seed for replication/grid-cell streams.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t index);

  private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace spoutar
