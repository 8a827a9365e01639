// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tubal/decomp.hpp"
#include "tubal/rng.hpp"
#include "tubal/spectral.hpp"
#include "tubal/tprod.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace tubal {

/// Parameters of the fixed-precision QB algorithm.
struct AdaptiveConfig {
    double epsilon = 0.0;           ///< absolute bound on ||x - Q*B||_F
    std::size_t block_size = 10;    ///< lateral slices added per iteration (b)
    std::size_t power_iters = 1;    ///< subspace-iteration rounds per block (q)
    std::optional<std::size_t> max_rank;  ///< defaults to min(I1, I2)
    RngStream rng{};
    bool trim = true;               ///< apply precise rank selection on the last block
};

/// X ~= Q * B with Q orthonormal (I1 x k x I3) and B = Q^T * X (k x I2 x I3).
struct QBApprox {
    Tensor3 Q;
    Tensor3 B;
    std::size_t rank = 0;
    std::vector<double> energy_trace;  ///< tracked ||X - Q_i*B_i||^2 after each iteration
    double residual_energy = 0.0;      ///< tracked squared residual of the returned pair
    std::size_t iterations = 0;
    std::size_t last_block_size = 0;
    bool achieved = false;
};

/// State handed to an observer after every iteration of adaptive_qb, before
/// any rank trimming.
struct QBIterate {
    std::size_t iteration;
    const Tensor3& Q;
    const Tensor3& B;
    double energy;
};

using QBObserver = std::function<void(const QBIterate&)>;

namespace detail {

/// x and x^T applied through a spectrum of x computed once.
class TubalOperator {
public:
    explicit TubalOperator(const Tensor3& x) : dims_(x.dims()), xhat_(forward_half(x)) {}

    Tensor3 apply(const Tensor3& y) const {
        if (y.rows() != dims_.cols || y.tubes() != dims_.tubes) {
            throw Error(ErrorCode::DimMismatch, "operator of " + to_string(dims_) + " on " + to_string(y.dims()));
        }
        return inverse_half(spectral_product(xhat_, forward_half(y)));
    }

    Tensor3 apply_transpose(const Tensor3& y) const {
        if (y.rows() != dims_.rows || y.tubes() != dims_.tubes) {
            throw Error(ErrorCode::DimMismatch,
                        "transposed operator of " + to_string(dims_) + " on " + to_string(y.dims()));
        }
        return inverse_half(spectral_product(xhat_, forward_half(y), Side::Adjoint));
    }

private:
    Dims dims_;
    HalfSpectrum xhat_;
};

inline bool bound_met(double energy, double eps2) { return energy < eps2 || energy <= 0.0; }

/// Orthonormal lateral slices spanning the part of y outside span(q), taken
/// as the trailing columns of a Householder QR of [q, y] on every Fourier
/// slice. Equal to orth(y - q * (q^T * y)) for orthonormal q, and orthogonal
/// to q to working precision even when y lies almost inside span(q).
inline Tensor3 orth_outside(const Tensor3& q, const Tensor3& y) {
    const std::size_t m = q.rows(), k = q.cols(), b = y.cols();
    if (y.rows() != m || y.tubes() != q.tubes() || k + b > m) {
        throw Error(ErrorCode::DimMismatch, "cannot extend " + to_string(q.dims()) + " by " + to_string(y.dims()));
    }
    const HalfSpectrum qhat = forward_half(q);
    const HalfSpectrum yhat = forward_half(y);
    HalfSpectrum out(y.dims());

    const auto rows = static_cast<Eigen::Index>(m), kk = static_cast<Eigen::Index>(k),
               bb = static_cast<Eigen::Index>(b);
    Eigen::MatrixXcd joint(rows, kk + bb);
    Eigen::MatrixXcd select = Eigen::MatrixXcd::Zero(rows, bb);
    select.middleRows(kk, bb).setIdentity();
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr;
    double outside2 = 0.0;
    for (std::size_t s = 0; s < yhat.count(); ++s) {
        joint << qhat.slice(s), yhat.slice(s);
        qr.compute(joint);
        out.slice(s) = qr.householderQ() * select;
        // ||(I - Q Q^H) Y||^2 on this slice
        const Eigen::MatrixXcd r22 = qr.matrixQR().block(kk, kk, bb, bb).triangularView<Eigen::Upper>();
        outside2 += yhat.weight(s) * r22.squaredNorm();
    }
    outside2 /= static_cast<double>(y.tubes());
    if (std::sqrt(outside2) <= 1e-14 * std::sqrt(static_cast<double>(y.size()))) {
        throw Error(ErrorCode::DegenerateInput, "block lies inside the current basis");
    }
    return inverse_half(out);
}

inline Eigen::MatrixXd orth_matrix(const Eigen::MatrixXd& a) {
    const Eigen::Index p = std::min(a.rows(), a.cols());
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    return qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), p);
}

}  // namespace detail

/// Precise rank selection inside the last block.
///
/// Starting from the energy before the last block was subtracted, removes
/// the squared norms of its horizontal slices one at a time and keeps the
/// shortest prefix that brings the energy under epsilon^2. Q is truncated
/// alongside B without being examined.
inline QBApprox trim_last_block(QBApprox qb, double energy_before_last, double epsilon) {
    const std::size_t block = qb.last_block_size;
    if (block == 0 || block > qb.rank) return qb;
    const std::size_t first = qb.rank - block;
    const double eps2 = epsilon * epsilon;

    double energy = energy_before_last;
    std::size_t keep = block;
    for (std::size_t j = 0; j < block; ++j) {
        energy -= squared_norm(row_range(qb.B, first + j, 1));
        if (detail::bound_met(energy, eps2)) {
            keep = j + 1;
            break;
        }
    }
    if (keep < block) {
        qb.B = row_range(qb.B, 0, first + keep);
        qb.Q = col_range(qb.Q, 0, first + keep);
        qb.rank = first + keep;
        qb.last_block_size = keep;
    }
    qb.residual_energy = std::max(energy, 0.0);
    return qb;
}

/// Fixed-precision randomized QB for the t-product.
///
/// Grows Q and B by blocks of b lateral/horizontal slices until the tracked
/// residual energy E = ||x||^2 - sum ||B_i||^2 drops below epsilon^2, then
/// trims the last block to the shortest sufficient prefix. If max_rank is
/// reached first, returns the best pair found with achieved = false.
inline QBApprox adaptive_qb(const Tensor3& x, const AdaptiveConfig& cfg, const QBObserver& observer = {}) {
    const std::size_t limit = std::min(x.rows(), x.cols());
    const std::size_t max_rank = cfg.max_rank.value_or(limit);
    if (cfg.block_size < 1) throw Error(ErrorCode::InvalidConfig, "block size must be positive");
    if (!(cfg.epsilon >= 0.0)) throw Error(ErrorCode::InvalidConfig, "epsilon must be nonnegative");
    if (max_rank < 1 || max_rank > limit) {
        throw Error(ErrorCode::InvalidConfig,
                    "max_rank " + std::to_string(max_rank) + " outside [1, " + std::to_string(limit) + "]");
    }

    const std::size_t n1 = x.rows(), n2 = x.cols(), n3 = x.tubes();
    const double eps2 = cfg.epsilon * cfg.epsilon;
    const detail::TubalOperator op(x);
    NormalStream gen(cfg.rng);

    QBApprox out;
    out.Q = Tensor3(n1, 0, n3);
    out.B = Tensor3(0, n2, n3);
    double energy = squared_norm(x);
    out.residual_energy = energy;

    while (out.rank < max_rank) {
        const std::size_t width = std::min(cfg.block_size, max_rank - out.rank);
        const Tensor3 omega = gaussian_tensor(n2, width, n3, gen);

        Tensor3 qi;
        try {
            Tensor3 sketch = op.apply(omega);
            if (out.rank > 0) sketch -= tprod(out.Q, tprod(out.B, omega));
            qi = orth(sketch);
            for (std::size_t j = 0; j < cfg.power_iters; ++j) {
                qi = orth(op.apply_transpose(qi));
                qi = orth(op.apply(qi));
            }
            if (out.rank > 0) qi = detail::orth_outside(out.Q, qi);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::DegenerateInput) throw;
            out.achieved = detail::bound_met(energy, eps2);
            return out;
        }

        // Q_i^T * x == (x^T * Q_i)^T
        const Tensor3 bi = transpose(op.apply_transpose(qi));
        const double energy_before = energy;
        out.Q = concat_mode2(out.Q, qi);
        out.B = concat_mode1(out.B, bi);
        out.rank += width;
        out.last_block_size = width;
        ++out.iterations;

        energy -= squared_norm(bi);
        const bool clamped = energy < 0.0;
        if (clamped) energy = 0.0;
        out.energy_trace.push_back(energy);
        out.residual_energy = energy;
        if (observer) observer(QBIterate{out.iterations, out.Q, out.B, energy});

        if (clamped || energy < eps2) {
            out.achieved = true;
            if (cfg.trim) out = trim_last_block(std::move(out), energy_before, cfg.epsilon);
            return out;
        }
    }
    out.achieved = false;
    return out;
}

/// t-SVD of x recovered from a QB pair: B = U_b * S * V^T gives
/// x ~= (Q * U_b) * S * V^T. Without a rank, the full rank of B is kept.
inline TSVDFactors qb_to_tsvd(const QBApprox& qb, std::optional<std::size_t> r = std::nullopt) {
    const std::size_t limit = std::min(qb.B.rows(), qb.B.cols());
    const std::size_t target = r.value_or(limit);
    if (target < 1 || target > limit) {
        throw Error(ErrorCode::RankOutOfRange,
                    "rank " + std::to_string(target) + " outside [1, " + std::to_string(limit) + "]");
    }
    TSVDFactors f = truncated_tsvd(qb.B, target);
    f.U = tprod(qb.Q, f.U);
    return f;
}

/// Fixed-rank randomized t-SVD with oversampling and subspace iteration.
inline TSVDFactors randomized_tsvd(const Tensor3& x, std::size_t r, std::size_t oversample, std::size_t power_iters,
                                   RngStream rng) {
    const std::size_t limit = std::min(x.rows(), x.cols());
    if (r < 1 || r + oversample > limit) {
        throw Error(ErrorCode::RankOutOfRange, "rank " + std::to_string(r) + " plus oversampling " +
                                                   std::to_string(oversample) + " exceeds " + std::to_string(limit));
    }
    const detail::TubalOperator op(x);
    const Tensor3 omega = gaussian_tensor(x.cols(), r + oversample, x.tubes(), rng);
    Tensor3 q = orth(op.apply(omega));
    for (std::size_t j = 0; j < power_iters; ++j) {
        q = orth(op.apply_transpose(q));
        q = orth(op.apply(q));
    }
    QBApprox qb;
    qb.Q = std::move(q);
    qb.B = transpose(op.apply_transpose(qb.Q));
    qb.rank = r + oversample;
    return qb_to_tsvd(qb, r);
}

/// Result of the matrix blocked randQB reference.
struct MatrixQB {
    Eigen::MatrixXd Q;
    Eigen::MatrixXd B;
    std::size_t rank = 0;
    double error = 0.0;  ///< ||A - Q B||_F from the explicitly updated residual
    std::size_t iterations = 0;
    bool achieved = false;
};

/// Blocked randQB for matrices with an explicitly maintained residual.
///
/// The residual A - Q B is formed at every step and the loop stops once its
/// Frobenius norm is at most epsilon. Gaussian blocks are drawn from `rng` in
/// column-major order, matching gaussian_tensor(I2, b, 1) so the tensor
/// algorithm at I3 = 1 sees the same test matrices.
inline MatrixQB blocked_randqb_matrix(const Eigen::MatrixXd& a, double epsilon, std::size_t block_size,
                                      std::size_t power_iters, RngStream rng,
                                      std::optional<std::size_t> max_rank = std::nullopt) {
    const auto limit = static_cast<std::size_t>(std::min(a.rows(), a.cols()));
    const std::size_t cap = max_rank.value_or(limit);
    if (block_size < 1) throw Error(ErrorCode::InvalidConfig, "block size must be positive");
    if (cap < 1 || cap > limit) throw Error(ErrorCode::InvalidConfig, "max_rank outside [1, min(I1, I2)]");

    NormalStream gen(rng);
    MatrixQB out;
    out.Q.resize(a.rows(), 0);
    out.B.resize(0, a.cols());
    Eigen::MatrixXd residual = a;
    out.error = residual.norm();

    while (out.rank < cap) {
        const auto width = static_cast<Eigen::Index>(std::min(block_size, cap - out.rank));
        Eigen::MatrixXd omega(a.cols(), width);
        for (Eigen::Index c = 0; c < width; ++c) {
            for (Eigen::Index r = 0; r < a.cols(); ++r) omega(r, c) = gen.next();
        }
        Eigen::MatrixXd qi = detail::orth_matrix(residual * omega);
        for (std::size_t j = 0; j < power_iters; ++j) {
            qi = detail::orth_matrix(residual.transpose() * qi);
            qi = detail::orth_matrix(residual * qi);
        }
        if (out.rank > 0) qi = detail::orth_matrix(qi - out.Q * (out.Q.transpose() * qi));
        const Eigen::MatrixXd bi = qi.transpose() * residual;
        residual -= qi * bi;

        Eigen::MatrixXd q_next(a.rows(), out.Q.cols() + qi.cols());
        q_next << out.Q, qi;
        Eigen::MatrixXd b_next(out.B.rows() + bi.rows(), a.cols());
        b_next << out.B, bi;
        out.Q = std::move(q_next);
        out.B = std::move(b_next);
        out.rank += static_cast<std::size_t>(width);
        ++out.iterations;

        out.error = residual.norm();
        if (out.error <= epsilon) {
            out.achieved = true;
            break;
        }
    }
    return out;
}

}  // namespace tubal
