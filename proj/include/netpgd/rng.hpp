#pragma once

#include <array>
#include <cstdint>

#include "netpgd/matrix.hpp"

namespace netpgd {

/// xoshiro256** seeded through splitmix64. Streams are identical across
/// platforms for the integer and uniform outputs; normals go through
/// std::log/std::cos and so match wherever libm does.
class SeededRng {
public:
    static constexpr const char* kAlgorithm = "xoshiro256**/splitmix64";

    explicit SeededRng(std::uint64_t seed);

    /// Independent stream for (seed, index) pairs, e.g. one per trial.
    static SeededRng derive(std::uint64_t seed, std::uint64_t index);

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() noexcept;
    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
    /// Standard normal (Box-Muller, both outputs used).
    double normal() noexcept;

private:
    std::uint64_t seed_;
    std::array<std::uint64_t, 4> s_{};
    double cached_normal_ = 0.0;
    bool has_cached_ = false;
};

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

DenseMatrix gaussian_sample(SeededRng& rng, std::size_t rows, std::size_t cols, double stddev);
DenseMatrix uniform_sample(SeededRng& rng, std::size_t rows, std::size_t cols, double lo, double hi);

}  // namespace netpgd
