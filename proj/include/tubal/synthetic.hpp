// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tubal/decomp.hpp"
#include "tubal/rng.hpp"
#include "tubal/spectral.hpp"

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace tubal {

enum class SyntheticCase { ExactLowRank, PolyDecay, ExpDecay, Hilbert1, Hilbert2 };

struct SyntheticSpec {
    SyntheticCase kind = SyntheticCase::ExactLowRank;
    std::size_t n = 100;
    std::size_t rank = 10;  ///< plateau rank R; unused by the Hilbert kinds
    double delta = 0.0;     ///< Frobenius norm of the added noise
    std::uint64_t seed = 0;
};

/// Stream ids under SyntheticSpec::seed. Each random ingredient has its own
/// stream so changing one never shifts another.
inline constexpr std::uint64_t kStreamLeft = 1;
inline constexpr std::uint64_t kStreamRight = 2;
inline constexpr std::uint64_t kStreamCore = 3;
inline constexpr std::uint64_t kStreamNoise = 4;

namespace detail {

inline bool is_hilbert(SyntheticCase c) { return c == SyntheticCase::Hilbert1 || c == SyntheticCase::Hilbert2; }

inline void validate(const SyntheticSpec& spec) {
    if (spec.n < 1) throw Error(ErrorCode::SpecInvalid, "n must be positive");
    if (!(spec.delta >= 0.0)) throw Error(ErrorCode::SpecInvalid, "delta must be nonnegative");
    if (!is_hilbert(spec.kind) && (spec.rank < 1 || spec.rank > spec.n)) {
        throw Error(ErrorCode::SpecInvalid, "rank must satisfy 1 <= R <= n");
    }
}

/// Diagonal tubes of the f-diagonal core, one row per diagonal position.
inline Eigen::MatrixXd core_tubes(const SyntheticSpec& spec) {
    const std::size_t n = spec.n, r = spec.rank;
    Eigen::MatrixXd tubes = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    switch (spec.kind) {
    case SyntheticCase::ExactLowRank: {
        NormalStream gen(RngStream{spec.seed, kStreamCore});
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t i = 0; i < r; ++i) tubes(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = gen.next();
        }
        break;
    }
    case SyntheticCase::PolyDecay:
        for (std::size_t i = 0; i < n; ++i) {
            const double v = i < r ? 1.0 : std::pow(static_cast<double>(i - r + 2), -2.0);
            tubes.row(static_cast<Eigen::Index>(i)).setConstant(v);
        }
        break;
    case SyntheticCase::ExpDecay:
        for (std::size_t i = 0; i < n; ++i) {
            const double v = i < r ? 1.0 : std::pow(10.0, -static_cast<double>(i - r + 1));
            tubes.row(static_cast<Eigen::Index>(i)).setConstant(v);
        }
        break;
    default:
        break;
    }
    return tubes;
}

/// The leading `width` lateral slices of an n x n x n Gaussian draw, taking
/// the full draw's entries so the result is a slice of the complete tensor.
inline Tensor3 leading_gaussian_columns(std::size_t n, std::size_t width, RngStream id) {
    NormalStream gen(id);
    Tensor3 out(n, width, n);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < n; ++i) {
                const double v = gen.next();
                if (j < width) out(i, j, k) = v;
            }
        }
    }
    return out;
}

}  // namespace detail

/// f-diagonal core tensor S of the low-rank cases (n x n x n).
inline Tensor3 synthetic_core(const SyntheticSpec& spec) {
    detail::validate(spec);
    if (detail::is_hilbert(spec.kind)) throw Error(ErrorCode::SpecInvalid, "Hilbert tensors have no core");
    const Eigen::MatrixXd tubes = detail::core_tubes(spec);
    Tensor3 s(spec.n, spec.n, spec.n);
    for (std::size_t k = 0; k < spec.n; ++k) {
        for (std::size_t i = 0; i < spec.n; ++i) s(i, i, k) = tubes(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
    }
    return s;
}

/// Synthetic test tensors.
///
/// Low-rank cases: x = U * S * V^T + delta * Y / ||Y||_F with U = orth(G1),
/// V = orth(G2) for n x n x n Gaussians G1, G2, S from synthetic_core and a
/// Gaussian Y. The product is formed in the Fourier domain using only the
/// lateral slices of U, V that meet a nonzero core tube, and only on
/// frequencies where the core is nonzero; by the prefix property of
/// Householder QR these slices equal the corresponding slices of orth(G).
///
/// Hilbert kinds (1-based indices): 1/(i+j+k) and 1/(sqrt(i)+sqrt(j)+sqrt(k))^2.
inline Tensor3 gen_synthetic(const SyntheticSpec& spec) {
    detail::validate(spec);
    const std::size_t n = spec.n;

    if (detail::is_hilbert(spec.kind)) {
        Tensor3 x(n, n, n);
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t j = 0; j < n; ++j) {
                for (std::size_t i = 0; i < n; ++i) {
                    const double a = static_cast<double>(i + 1), b = static_cast<double>(j + 1),
                                 c = static_cast<double>(k + 1);
                    if (spec.kind == SyntheticCase::Hilbert1) {
                        x(i, j, k) = 1.0 / (a + b + c);
                    } else {
                        const double root_sum = std::sqrt(a) + std::sqrt(b) + std::sqrt(c);
                        x(i, j, k) = 1.0 / (root_sum * root_sum);
                    }
                }
            }
        }
        return x;
    }

    const Eigen::MatrixXd tubes = detail::core_tubes(spec);
    const std::size_t active = spec.kind == SyntheticCase::ExactLowRank ? spec.rank : n;
    const auto width = static_cast<Eigen::Index>(active);

    // Fourier coefficients of the diagonal tubes, one row per leading slice.
    const std::size_t half = leading_slices(n);
    Eigen::MatrixXcd core_hat = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(half), width);
    if (spec.kind == SyntheticCase::ExactLowRank) {
        Tensor3 tube_tensor(active, 1, n);
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t i = 0; i < active; ++i) tube_tensor(i, 0, k) = tubes(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
        }
        const detail::HalfSpectrum th = detail::forward_half(tube_tensor);
        for (std::size_t k = 0; k < half; ++k) core_hat.row(static_cast<Eigen::Index>(k)) = th.slice(k).col(0).transpose();
    } else {
        // A constant tube transforms to n times its value at DC and zero elsewhere.
        core_hat.row(0) = (static_cast<double>(n) * tubes.col(0)).cast<cdouble>().transpose();
    }

    const detail::HalfSpectrum left = detail::forward_half(detail::leading_gaussian_columns(n, active, RngStream{spec.seed, kStreamLeft}));
    const detail::HalfSpectrum right = detail::forward_half(detail::leading_gaussian_columns(n, active, RngStream{spec.seed, kStreamRight}));

    detail::HalfSpectrum xhat(Dims{n, n, n});
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr;
    const auto rows = static_cast<Eigen::Index>(n);
    for (std::size_t k = 0; k < half; ++k) {
        const auto coeffs = core_hat.row(static_cast<Eigen::Index>(k));
        if ((coeffs.array() == cdouble(0.0)).all()) continue;
        qr.compute(left.slice(k));
        const Eigen::MatrixXcd qu = qr.householderQ() * Eigen::MatrixXcd::Identity(rows, width);
        qr.compute(right.slice(k));
        const Eigen::MatrixXcd qv = qr.householderQ() * Eigen::MatrixXcd::Identity(rows, width);
        xhat.slice(k).noalias() = (qu * coeffs.transpose().asDiagonal()) * qv.adjoint();
    }
    Tensor3 x = detail::inverse_half(xhat);

    if (spec.delta > 0.0) {
        const Tensor3 noise = gaussian_tensor(n, n, n, RngStream{spec.seed, kStreamNoise});
        x += (spec.delta / frobenius_norm(noise)) * noise;
    }
    return x;
}

inline std::string to_string(SyntheticCase c) {
    switch (c) {
    case SyntheticCase::ExactLowRank: return "exact-lowrank";
    case SyntheticCase::PolyDecay: return "poly-decay";
    case SyntheticCase::ExpDecay: return "exp-decay";
    case SyntheticCase::Hilbert1: return "hilbert-1";
    case SyntheticCase::Hilbert2: return "hilbert-2";
    }
    return "unknown";
}

}  // namespace tubal
