// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tubal/spectral.hpp"
#include "tubal/tprod.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace tubal {

/// U * S * V^T with U (I1 x R x I3), f-diagonal S (R x R x I3), V (I2 x R x I3).
struct TSVDFactors {
    Tensor3 U;
    Tensor3 S;
    Tensor3 V;
    std::size_t rank = 0;
};

struct TQR {
    Tensor3 q;
    Tensor3 r;
};

namespace detail {

// Thin Householder QR of every leading Fourier slice. Householder Q factors
// stay orthonormal even when a slice is rank deficient.
inline HalfSpectrum orth_half(const HalfSpectrum& xhat, HalfSpectrum* rhat = nullptr) {
    const Dims d = xhat.dims();
    const std::size_t width = std::min(d.rows, d.cols);
    const auto m = static_cast<Eigen::Index>(d.rows), p = static_cast<Eigen::Index>(width);
    HalfSpectrum qhat(Dims{d.rows, width, d.tubes});
    if (rhat != nullptr) *rhat = HalfSpectrum(Dims{width, d.cols, d.tubes});
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr;
    for (std::size_t k = 0; k < xhat.count(); ++k) {
        qr.compute(xhat.slice(k));
        qhat.slice(k) = qr.householderQ() * Eigen::MatrixXcd::Identity(m, p);
        if (rhat != nullptr) {
            rhat->slice(k) = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
        }
    }
    return qhat;
}

inline bool numerically_zero(const Tensor3& x) {
    return frobenius_norm(x) <= 1e-14 * std::sqrt(static_cast<double>(x.size()));
}

struct SpectralSVD {
    HalfSpectrum u;
    HalfSpectrum s;
    HalfSpectrum v;
};

/// Rank-r truncated SVD of each leading Fourier slice.
inline SpectralSVD truncated_svd_half(const HalfSpectrum& xhat, std::size_t r) {
    const Dims d = xhat.dims();
    const auto rr = static_cast<Eigen::Index>(r);
    SpectralSVD out{HalfSpectrum(Dims{d.rows, r, d.tubes}), HalfSpectrum(Dims{r, r, d.tubes}),
                    HalfSpectrum(Dims{d.cols, r, d.tubes})};
    for (std::size_t k = 0; k < xhat.count(); ++k) {
        Eigen::BDCSVD<Eigen::MatrixXcd> svd(xhat.slice(k), Eigen::ComputeThinU | Eigen::ComputeThinV);
        out.u.slice(k) = svd.matrixU().leftCols(rr);
        out.s.slice(k).diagonal() = svd.singularValues().head(rr).cast<cdouble>();
        out.v.slice(k) = svd.matrixV().leftCols(rr);
    }
    return out;
}

/// Singular values of every leading Fourier slice, in nonincreasing order.
inline std::vector<Eigen::VectorXd> slice_singular_values(const HalfSpectrum& xhat) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(xhat.count());
    for (std::size_t k = 0; k < xhat.count(); ++k) {
        Eigen::BDCSVD<Eigen::MatrixXcd> svd(xhat.slice(k));
        out.push_back(svd.singularValues());
    }
    return out;
}

}  // namespace detail

/// t-QR: reduced QR of every Fourier slice, so x = q * r with q of size
/// I1 x min(I1, I2) x I3 having orthonormal lateral slices.
inline TQR t_qr(const Tensor3& x) {
    detail::HalfSpectrum rhat;
    const detail::HalfSpectrum qhat = detail::orth_half(detail::forward_half(x), &rhat);
    return {detail::inverse_half(qhat), detail::inverse_half(rhat)};
}

/// The q factor of t_qr. A numerically zero input raises DegenerateInput
/// instead of returning an arbitrary basis.
inline Tensor3 orth(const Tensor3& x) {
    if (detail::numerically_zero(x)) {
        throw Error(ErrorCode::DegenerateInput, "orth of a numerically zero " + to_string(x.dims()) + " tensor");
    }
    return detail::inverse_half(detail::orth_half(detail::forward_half(x)));
}

/// Truncated t-SVD at tubal rank r, computed on the leading Fourier slices
/// and completed by conjugate symmetry.
inline TSVDFactors truncated_tsvd(const Tensor3& x, std::size_t r) {
    const std::size_t limit = std::min(x.rows(), x.cols());
    if (r < 1 || r > limit) {
        throw Error(ErrorCode::RankOutOfRange,
                    "rank " + std::to_string(r) + " outside [1, " + std::to_string(limit) + "]");
    }
    const detail::SpectralSVD parts = detail::truncated_svd_half(detail::forward_half(x), r);
    return {detail::inverse_half(parts.u), detail::inverse_half(parts.s), detail::inverse_half(parts.v), r};
}

/// Largest numerical rank over the Fourier slices. A singular value counts
/// when it exceeds `tol`; without a tolerance, tol = max(I1, I2) * ulp(s_max)
/// where s_max is the largest singular value over all slices.
inline std::size_t tubal_rank(const Tensor3& x, std::optional<double> tol = std::nullopt) {
    if (x.empty()) return 0;
    const auto sigmas = detail::slice_singular_values(detail::forward_half(x));
    double threshold = 0.0;
    if (tol) {
        threshold = *tol;
    } else {
        double smax = 0.0;
        for (const auto& s : sigmas) {
            if (s.size() > 0) smax = std::max(smax, s.maxCoeff());
        }
        const double ulp = std::nextafter(smax, std::numeric_limits<double>::infinity()) - smax;
        threshold = static_cast<double>(std::max(x.rows(), x.cols())) * ulp;
    }
    std::size_t rank = 0;
    for (const auto& s : sigmas) {
        rank = std::max(rank, static_cast<std::size_t>((s.array() > threshold).count()));
    }
    return rank;
}

inline Tensor3 reconstruct(const TSVDFactors& f) { return tprod(tprod(f.U, f.S), transpose(f.V)); }

}  // namespace tubal
