// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mmimo/types.hpp"

#include <cstdint>
#include <random>

namespace mmimo {

/// Purpose tags keeping independent substreams apart for the same master seed.
enum class StreamTag : std::uint64_t {
    geometry = 1,
    rician = 2,
    trial = 3,
    scenario = 4,
};

std::uint64_t splitmix64(std::uint64_t x);

/// Seeded pseudo-random stream; all draws are reproducible from the seed.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed);

    /// Independent stream derived deterministically from (master, tag, index).
    static RngStream substream(std::uint64_t master, StreamTag tag, std::uint64_t index);

    double uniform();                   // [0, 1)
    double uniform(double lo, double hi);
    double normal();                    // N(0, 1)
    cd complex_normal();                // CN(0, 1): real and imaginary parts N(0, 1/2)

    template <class Derived>
    void fill_complex_normal(Eigen::MatrixBase<Derived>& out) {
        for (Eigen::Index c = 0; c < out.cols(); ++c)
            for (Eigen::Index r = 0; r < out.rows(); ++r) out(r, c) = complex_normal();
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace mmimo
