#pragma once

#include <cmath>
#include <string>

#include "netpgd/decoder.hpp"
#include "netpgd/rng.hpp"

namespace testutil {

inline std::string source_path(const std::string& rel) { return std::string(NETPGD_SOURCE_DIR) + "/" + rel; }

inline netpgd::Vector random_vector(std::size_t n, std::uint64_t seed) {
    netpgd::SeededRng rng(seed);
    netpgd::Vector v(n);
    for (double& x : v) x = rng.normal();
    return v;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// 2-layer linear-output spec small enough for exhaustive checks.
inline netpgd::DecoderSpec tiny_spec(bool norm = false, bool sigmoid = false) {
    return netpgd::DecoderSpec{{3, 4, 1}, 4, norm, sigmoid};
}

}  // namespace testutil
