#include "netpgd/rng.hpp"

#include <cmath>
#include <numbers>

namespace netpgd {

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

SeededRng::SeededRng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t state = seed;
    for (auto& word : s_) word = splitmix64(state);
}

SeededRng SeededRng::derive(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t state = seed ^ 0x5851f42d4c957f2dULL;
    std::uint64_t mixed = splitmix64(state);
    state = mixed + index * 0xd1342543de82ef95ULL;
    return SeededRng(splitmix64(state));
}

std::uint64_t SeededRng::next_u64() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double SeededRng::uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double SeededRng::normal() noexcept {
    if (has_cached_) {
        has_cached_ = false;
        return cached_normal_;
    }
    // 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    cached_normal_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
}

DenseMatrix gaussian_sample(SeededRng& rng, std::size_t rows, std::size_t cols, double stddev) {
    require(stddev > 0.0, "gaussian_sample: stddev must be positive");
    DenseMatrix m(rows, cols);
    for (double& v : m.data()) v = stddev * rng.normal();
    return m;
}

DenseMatrix uniform_sample(SeededRng& rng, std::size_t rows, std::size_t cols, double lo, double hi) {
    DenseMatrix m(rows, cols);
    for (double& v : m.data()) v = rng.uniform(lo, hi);
    return m;
}

}  // namespace netpgd
