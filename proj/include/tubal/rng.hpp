// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tubal/tensor3.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace tubal {

/// Names a reproducible random stream. Equal (seed, stream) pairs always
/// produce the same variates.
struct RngStream {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    friend bool operator==(const RngStream&, const RngStream&) = default;
};

/// Standard normal variates from a named stream.
///
/// The engine is std::mt19937_64 seeded through std::seed_seq with the four
/// 32-bit halves of (seed, stream); both engine and seed_seq are fully
/// specified by the standard. Normals use the Box-Muller transform on 53-bit
/// uniforms, consuming two engine outputs per pair of variates, so the
/// sequence is identical on every conforming standard library.
class NormalStream {
public:
    explicit NormalStream(RngStream id) {
        std::seed_seq seq{static_cast<std::uint32_t>(id.seed), static_cast<std::uint32_t>(id.seed >> 32),
                          static_cast<std::uint32_t>(id.stream), static_cast<std::uint32_t>(id.stream >> 32)};
        engine_.seed(seq);
    }

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // u1 in (0, 1] keeps the logarithm finite.
        const double u1 = static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
        const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// I.i.d. N(0,1) entries drawn in linear-offset order from `gen`.
inline Tensor3 gaussian_tensor(std::size_t rows, std::size_t cols, std::size_t tubes, NormalStream& gen) {
    Tensor3 out(rows, cols, tubes);
    for (double& v : out.values()) v = gen.next();
    return out;
}

inline Tensor3 gaussian_tensor(std::size_t rows, std::size_t cols, std::size_t tubes, RngStream id) {
    NormalStream gen(id);
    return gaussian_tensor(rows, cols, tubes, gen);
}

}  // namespace tubal
