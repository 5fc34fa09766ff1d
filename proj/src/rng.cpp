// SPDX-License-Identifier: Apache-2.0
#include "mmimo/rng.hpp"

#include <cmath>

namespace mmimo {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed) : engine_(splitmix64(seed)) {}

RngStream RngStream::substream(std::uint64_t master, StreamTag tag, std::uint64_t index) {
    const std::uint64_t a = splitmix64(master);
    const std::uint64_t b = splitmix64(a ^ static_cast<std::uint64_t>(tag));
    return RngStream(b ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

double RngStream::uniform() { return uniform_(engine_); }

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform_(engine_); }

double RngStream::normal() { return normal_(engine_); }

cd RngStream::complex_normal() {
    static const double scale = std::sqrt(0.5);
    const double re = normal_(engine_);
    const double im = normal_(engine_);
    return {scale * re, scale * im};
}

}  // namespace mmimo
