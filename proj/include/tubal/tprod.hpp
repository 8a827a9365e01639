// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tubal/spectral.hpp"
#include "tubal/tensor3.hpp"

#include <cmath>
#include <cstddef>
#include <string>

namespace tubal {

namespace detail {

enum class Side { Plain, Adjoint };

/// Slice-wise products of two half spectra. With Side::Adjoint the left
/// operand's slices are conjugate-transposed, which is the Fourier image of
/// the tubal transpose.
inline HalfSpectrum spectral_product(const HalfSpectrum& a, const HalfSpectrum& b, Side side = Side::Plain) {
    const Dims da = a.dims();
    const std::size_t out_rows = side == Side::Plain ? da.rows : da.cols;
    HalfSpectrum out(Dims{out_rows, b.dims().cols, da.tubes});
    for (std::size_t k = 0; k < out.count(); ++k) {
        if (side == Side::Plain) {
            out.slice(k).noalias() = a.slice(k) * b.slice(k);
        } else {
            out.slice(k).noalias() = a.slice(k).adjoint() * b.slice(k);
        }
    }
    return out;
}

inline void require_conformable(const Tensor3& x, const Tensor3& y) {
    if (x.cols() != y.rows() || x.tubes() != y.tubes()) {
        throw Error(ErrorCode::DimMismatch, "t-product of " + to_string(x.dims()) + " and " + to_string(y.dims()));
    }
}

}  // namespace detail

/// t-product x * y evaluated in the Fourier domain.
///
/// Only the leading ceil((I3+1)/2) slices are multiplied; the trailing ones
/// are conjugate mirrors and are reconstructed implicitly by the real inverse
/// transform.
inline Tensor3 tprod(const Tensor3& x, const Tensor3& y) {
    detail::require_conformable(x, y);
    return detail::inverse_half(detail::spectral_product(detail::forward_half(x), detail::forward_half(y)));
}

/// Default scalar budget for the materialized block-circulant matrix.
inline constexpr std::size_t kOracleScalarCap = 100'000'000;

/// Reference t-product: fold(circ(x) * unfold(y)) with circ(x) built
/// explicitly. Only meant for small tensors and for testing tprod.
inline Tensor3 tprod_oracle(const Tensor3& x, const Tensor3& y, std::size_t scalar_cap = kOracleScalarCap) {
    detail::require_conformable(x, y);
    const std::size_t n1 = x.rows(), n2 = x.cols(), n3 = x.tubes(), n4 = y.cols();
    if (n1 * n3 * n2 * n3 > scalar_cap) {
        throw Error(ErrorCode::SizeGuard, "block-circulant matrix of " + std::to_string(n1 * n3) + "x" +
                                              std::to_string(n2 * n3) + " exceeds the cap");
    }
    const auto r1 = static_cast<Eigen::Index>(n1), r2 = static_cast<Eigen::Index>(n2);

    Eigen::MatrixXd circ(r1 * static_cast<Eigen::Index>(n3), r2 * static_cast<Eigen::Index>(n3));
    for (std::size_t br = 0; br < n3; ++br) {
        for (std::size_t bc = 0; bc < n3; ++bc) {
            circ.block(static_cast<Eigen::Index>(br) * r1, static_cast<Eigen::Index>(bc) * r2, r1, r2) =
                x.slice((br + n3 - bc) % n3);
        }
    }
    // unfold(y) stacks frontal slices vertically.
    Eigen::MatrixXd unfolded(r2 * static_cast<Eigen::Index>(n3), static_cast<Eigen::Index>(n4));
    for (std::size_t k = 0; k < n3; ++k) unfolded.middleRows(static_cast<Eigen::Index>(k) * r2, r2) = y.slice(k);

    const Eigen::MatrixXd product = circ * unfolded;
    Tensor3 out(n1, n4, n3);
    for (std::size_t k = 0; k < n3; ++k) out.slice(k) = product.middleRows(static_cast<Eigen::Index>(k) * r1, r1);
    return out;
}

/// True when the lateral slices of q are orthonormal under the t-product:
/// ||q^T * q - I||_F <= tol * sqrt(R * I3) for q of size I1 x R x I3.
inline bool is_orthogonal(const Tensor3& q, double tol) {
    const std::size_t r = q.cols();
    const Tensor3 gram = tprod(transpose(q), q);
    const double defect = frobenius_norm(gram - identity_tensor(r, q.tubes()));
    return defect <= tol * std::sqrt(static_cast<double>(r * q.tubes()));
}

}  // namespace tubal
