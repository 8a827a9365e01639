// SPDX-License-Identifier: Apache-2.0
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace tubal {
namespace {

using testing::projector_gap;
using testing::rel_diff;
using testing::ShapeSource;

Tensor3 random_tensor(std::size_t a, std::size_t b, std::size_t c, std::uint64_t stream) {
    return gaussian_tensor(a, b, c, RngStream{53, stream});
}

Tensor3 exact_low_rank(std::size_t n1, std::size_t n2, std::size_t n3, std::size_t r, std::uint64_t stream) {
    const Tensor3 u = orth(random_tensor(n1, r, n3, stream));
    const Tensor3 v = orth(random_tensor(n2, r, n3, stream + 1));
    Tensor3 s(r, r, n3);
    NormalStream gen(RngStream{53, stream + 2});
    for (std::size_t k = 0; k < n3; ++k) {
        for (std::size_t i = 0; i < r; ++i) s(i, i, k) = gen.next();
    }
    return tprod(tprod(u, s), transpose(v));
}

/// Matrix with singular values 2^-j and random singular vectors.
Eigen::MatrixXd fast_decay_matrix(Eigen::Index m, Eigen::Index n, std::uint64_t stream) {
    const Tensor3 g1 = random_tensor(static_cast<std::size_t>(m), static_cast<std::size_t>(n), 1, stream);
    const Tensor3 g2 = random_tensor(static_cast<std::size_t>(n), static_cast<std::size_t>(n), 1, stream + 1);
    const Eigen::MatrixXd u = detail::orth_matrix(g1.slice(0));
    const Eigen::MatrixXd v = detail::orth_matrix(g2.slice(0));
    Eigen::VectorXd s(n);
    for (Eigen::Index j = 0; j < n; ++j) s(j) = std::pow(2.0, -static_cast<double>(j));
    return u * s.asDiagonal() * v.transpose();
}

double direct_energy(const Tensor3& x, const Tensor3& q, const Tensor3& b) { return squared_norm(x - tprod(q, b)); }

AdaptiveConfig config(double eps, std::size_t b, std::size_t q, std::uint64_t seed) {
    AdaptiveConfig cfg;
    cfg.epsilon = eps;
    cfg.block_size = b;
    cfg.power_iters = q;
    cfg.rng = RngStream{seed, 0};
    return cfg;
}

// ---------------------------------------------------------------------------
// randomized_tsvd
// ---------------------------------------------------------------------------

TEST(RandomizedTSVDTest, ExactLowRankIsRecovered) {
    SyntheticSpec spec;
    spec.kind = SyntheticCase::ExactLowRank;
    spec.n = 50;
    spec.rank = 10;
    spec.delta = 0.0;
    spec.seed = 3;
    const Tensor3 x = gen_synthetic(spec);
    const TSVDFactors f = randomized_tsvd(x, 10, 5, 1, RngStream{4, 0});
    EXPECT_LE(rel_diff(reconstruct(f), x), 1e-8);
}

TEST(RandomizedTSVDTest, SingleSliceCloseToTruncatedSVD) {
    const Eigen::MatrixXd a = fast_decay_matrix(80, 60, 10);
    const Tensor3 x(Dims{80, 60, 1}, std::vector<double>(a.data(), a.data() + a.size()));
    for (std::size_t r : {3u, 8u, 15u}) {
        const double best = frobenius_norm(x - reconstruct(truncated_tsvd(x, r)));
        const double got = frobenius_norm(x - reconstruct(randomized_tsvd(x, r, 5, 1, RngStream{5, r})));
        EXPECT_LE(got, 1.1 * best) << "rank " << r;
    }
}

TEST(RandomizedTSVDTest, FullCaptureIsExact) {
    const Tensor3 x = random_tensor(12, 10, 4, 20);
    const TSVDFactors f = randomized_tsvd(x, 7, 3, 0, RngStream{6, 0});
    EXPECT_LE(rel_diff(reconstruct(f), reconstruct(truncated_tsvd(x, 7))), 1e-8);
    const Tensor3 y = exact_low_rank(12, 10, 4, 7, 22);
    EXPECT_LE(rel_diff(reconstruct(randomized_tsvd(y, 7, 3, 0, RngStream{6, 1})), y), 1e-8);
}

TEST(RandomizedTSVDTest, RankOutOfRange) {
    const Tensor3 x = random_tensor(6, 5, 2, 21);
    EXPECT_THROW(randomized_tsvd(x, 0, 2, 0, RngStream{}), Error);
    EXPECT_THROW(randomized_tsvd(x, 4, 2, 0, RngStream{}), Error);
}

// ---------------------------------------------------------------------------
// adaptive_qb
// ---------------------------------------------------------------------------

TEST(AdaptiveQBTest, LooseBoundStopsAfterFirstSlice) {
    const Tensor3 x = random_tensor(20, 15, 4, 30);
    const QBApprox qb = adaptive_qb(x, config(2.0 * frobenius_norm(x), 5, 1, 1));
    EXPECT_TRUE(qb.achieved);
    EXPECT_EQ(qb.iterations, 1u);
    EXPECT_LE(qb.rank, 1u);
}

TEST(AdaptiveQBTest, InvalidConfig) {
    const Tensor3 x = random_tensor(6, 5, 2, 31);
    EXPECT_THROW(adaptive_qb(x, config(0.1, 0, 1, 0)), Error);
    EXPECT_THROW(adaptive_qb(x, config(-1.0, 2, 1, 0)), Error);
    AdaptiveConfig cfg = config(0.1, 2, 1, 0);
    cfg.max_rank = 6;
    try {
        adaptive_qb(x, cfg);
        FAIL() << "expected InvalidConfig";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidConfig);
    }
}

TEST(AdaptiveQBTest, CaseOneFindsRankTen) {
    SyntheticSpec spec;
    spec.kind = SyntheticCase::ExactLowRank;
    spec.n = 100;
    spec.rank = 10;
    spec.delta = 0.01;
    spec.seed = 1;
    const Tensor3 x = gen_synthetic(spec);
    AdaptiveConfig cfg = config(0.01 * frobenius_norm(x), 25, 1, 1);
    const QBApprox qb = adaptive_qb(x, cfg);
    EXPECT_TRUE(qb.achieved);
    EXPECT_EQ(qb.iterations, 1u);
    EXPECT_EQ(qb.rank, 10u);
    EXPECT_LE(frobenius_norm(x - tprod(qb.Q, qb.B)), cfg.epsilon * (1 + 1e-6));

    cfg.trim = false;
    EXPECT_EQ(adaptive_qb(x, cfg).rank, 25u);
}

TEST(AdaptiveQBTest, TrackedEnergyMatchesResidual) {
    const Tensor3 x = random_tensor(40, 30, 8, 32);
    const QBApprox qb = adaptive_qb(x, config(0.5 * frobenius_norm(x), 5, 1, 2));
    ASSERT_TRUE(qb.achieved);
    EXPECT_LE(std::abs(qb.residual_energy - direct_energy(x, qb.Q, qb.B)), 1e-8 * squared_norm(x));
}

TEST(AdaptiveQBTest, RankCapReportsFailure) {
    const Tensor3 x = random_tensor(20, 20, 3, 33);
    AdaptiveConfig cfg = config(1e-3 * frobenius_norm(x), 4, 0, 3);
    cfg.max_rank = 10;
    const QBApprox qb = adaptive_qb(x, cfg);
    EXPECT_FALSE(qb.achieved);
    EXPECT_EQ(qb.rank, 10u);
    EXPECT_EQ(qb.iterations, 3u);
    EXPECT_EQ(qb.last_block_size, 2u);
    EXPECT_EQ(qb.Q.dims(), (Dims{20, 10, 3}));
}

TEST(AdaptiveQBTest, ZeroToleranceOnExactRankStopsOnDegenerateSketch) {
    const Tensor3 x = exact_low_rank(15, 12, 3, 2, 34);
    const QBApprox qb = adaptive_qb(x, config(0.0, 2, 0, 4));
    EXPECT_GE(qb.rank, 2u);
    EXPECT_LE(direct_energy(x, qb.Q, qb.B), 1e-20 * squared_norm(x));
}

TEST(AdaptiveQBTest, ZeroInput) {
    const QBApprox qb = adaptive_qb(Tensor3(6, 5, 3), config(0.1, 2, 1, 0));
    EXPECT_TRUE(qb.achieved);
    EXPECT_EQ(qb.rank, 0u);
}

TEST(AdaptiveQBProperty, EnergyRecursionAtEveryIteration) {
    ShapeSource shapes(40);
    for (std::size_t q : {0u, 1u, 2u}) {
        for (std::size_t b : {1u, 5u, 20u}) {
            const std::size_t n1 = shapes.uniform(20, 60), n2 = shapes.uniform(20, 60), n3 = shapes.uniform(1, 10);
            const Tensor3 x = random_tensor(n1, n2, n3, 100 + 10 * q + b);
            const double norm2 = squared_norm(x);
            AdaptiveConfig cfg = config(0.0, b, q, q * 100 + b);
            cfg.max_rank = std::min<std::size_t>(std::min(n1, n2), 25);
            std::size_t calls = 0;
            adaptive_qb(x, cfg, [&](const QBIterate& it) {
                ++calls;
                EXPECT_LE(std::abs(it.energy - direct_energy(x, it.Q, it.B)), 1e-7 * norm2)
                    << "q=" << q << " b=" << b << " iteration " << it.iteration;
            });
            EXPECT_GT(calls, 0u);
        }
    }
}

TEST(AdaptiveQBProperty, OrthogonalityAndMonotoneEnergy) {
    ShapeSource shapes(41);
    for (int trial = 0; trial < 8; ++trial) {
        const std::size_t n1 = shapes.uniform(10, 50), n2 = shapes.uniform(10, 50), n3 = shapes.uniform(1, 8);
        const Tensor3 x = random_tensor(n1, n2, n3, 200 + static_cast<std::uint64_t>(trial));
        AdaptiveConfig cfg = config(0.05 * frobenius_norm(x), shapes.uniform(1, 8), shapes.uniform(0, 2), 7);
        double previous = squared_norm(x);
        const QBApprox qb = adaptive_qb(x, cfg, [&](const QBIterate& it) {
            EXPECT_TRUE(is_orthogonal(it.Q, 1e-8)) << "iteration " << it.iteration;
            if (it.energy > 0.0) {
                EXPECT_LT(it.energy, previous);
            }
            previous = it.energy;
        });
        for (std::size_t i = 1; i < qb.energy_trace.size(); ++i) EXPECT_LE(qb.energy_trace[i], qb.energy_trace[i - 1]);
        EXPECT_TRUE(is_orthogonal(qb.Q, 1e-8));
        EXPECT_LE(squared_norm(qb.B), squared_norm(x) * (1 + 1e-8));
    }
}

TEST(AdaptiveQBProperty, OrthogonalityBelowNoiseFloor) {
    // Bound far below the spectrum's tail, so late blocks fall inside span(Q).
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        SyntheticSpec spec;
        spec.kind = SyntheticCase::ExpDecay;
        spec.n = 40;
        spec.rank = 5;
        spec.delta = 1e-10;
        spec.seed = seed;
        const Tensor3 x = gen_synthetic(spec);
        const QBApprox qb = adaptive_qb(x, config(1e-9 * frobenius_norm(x), 4, 2, seed));
        EXPECT_TRUE(is_orthogonal(qb.Q, 1e-8)) << "seed " << seed;
    }
}

TEST(OrthOutsideTest, MatchesProjectedOrth) {
    const Tensor3 q = orth(random_tensor(15, 4, 5, 90));
    const Tensor3 y = random_tensor(15, 3, 5, 91);
    const Tensor3 fresh = detail::orth_outside(q, y);
    EXPECT_EQ(fresh.dims(), (Dims{15, 3, 5}));
    EXPECT_LE(frobenius_norm(tprod(transpose(q), fresh)), 1e-13);
    EXPECT_TRUE(is_orthogonal(fresh, 1e-12));
    const Tensor3 projected = orth(y - tprod(q, tprod(transpose(q), y)));
    EXPECT_LE(projector_gap(fresh, projected), 1e-10);
}

TEST(OrthOutsideTest, BlockInsideSpanIsDegenerate) {
    const Tensor3 q = orth(random_tensor(12, 5, 4, 92));
    const Tensor3 y = tprod(q, random_tensor(5, 2, 4, 93));
    try {
        detail::orth_outside(q, y);
        FAIL() << "expected DegenerateInput";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DegenerateInput);
    }
    EXPECT_THROW(detail::orth_outside(q, random_tensor(12, 8, 4, 94)), Error);
}

TEST(AdaptiveQBProperty, ToleranceContract) {
    ShapeSource shapes(42);
    const double rels[] = {0.3, 0.1, 0.01};
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n1 = shapes.uniform(1, 60), n2 = shapes.uniform(1, 60), n3 = shapes.uniform(1, 10);
        const Tensor3 x = random_tensor(n1, n2, n3, 300 + static_cast<std::uint64_t>(trial));
        const double rel = rels[trial % 3];
        const double eps = rel * frobenius_norm(x);
        const QBApprox qb = adaptive_qb(x, config(eps, shapes.uniform(1, 10), shapes.uniform(0, 2), 8));
        if (qb.achieved) {
            const double err = qb.rank > 0 ? frobenius_norm(x - tprod(qb.Q, qb.B)) : frobenius_norm(x);
            EXPECT_LE(err, eps * (1 + 1e-6)) << n1 << "x" << n2 << "x" << n3 << " rel " << rel;
        }
    }
}

TEST(AdaptiveQBProperty, ScaleEquivariance) {
    SyntheticSpec spec;
    spec.kind = SyntheticCase::ExpDecay;
    spec.n = 30;
    spec.rank = 4;
    spec.delta = 1e-4;
    spec.seed = 9;
    const Tensor3 x = gen_synthetic(spec);
    const double eps = 1e-3 * frobenius_norm(x);
    const QBApprox base = adaptive_qb(x, config(eps, 3, 1, 11));
    ASSERT_TRUE(base.achieved);
    for (double alpha : {0.1, 10.0}) {
        const QBApprox scaled = adaptive_qb(alpha * x, config(alpha * eps, 3, 1, 11));
        EXPECT_EQ(scaled.rank, base.rank) << "alpha " << alpha;
        ASSERT_EQ(scaled.Q.dims(), base.Q.dims());
        EXPECT_LE(projector_gap(scaled.Q, base.Q), 1e-7) << "alpha " << alpha;
    }
}

TEST(AdaptiveQBProperty, RankRecovery) {
    for (std::size_t r : {1u, 7u, 10u}) {
        const Tensor3 x = exact_low_rank(40, 35, 6, r, 400 + r);
        for (std::size_t b : {4u, 25u}) {
            const QBApprox qb = adaptive_qb(x, config(1e-6 * frobenius_norm(x), b, 1, 12 + b));
            EXPECT_TRUE(qb.achieved);
            EXPECT_EQ(qb.rank, r) << "R=" << r << " b=" << b;
        }
    }
}

// ---------------------------------------------------------------------------
// trim_last_block
// ---------------------------------------------------------------------------

/// QB pair whose last block has rows of squared norm 4, 3, 2, 1.
QBApprox staged_qb(std::size_t earlier) {
    QBApprox qb;
    qb.rank = earlier + 4;
    qb.last_block_size = 4;
    qb.Q = orth(random_tensor(10, qb.rank, 2, 50));
    qb.B = Tensor3(qb.rank, 3, 2);
    for (std::size_t i = 0; i < earlier; ++i) qb.B(i, 0, 0) = 5.0;
    const double sq[] = {4.0, 3.0, 2.0, 1.0};
    for (std::size_t j = 0; j < 4; ++j) qb.B(earlier + j, 1, 1) = std::sqrt(sq[j]);
    return qb;
}

TEST(TrimLastBlockTest, StopsAtShortestPrefix) {
    const QBApprox qb = trim_last_block(staged_qb(3), 10.0, std::sqrt(4.5));
    EXPECT_EQ(qb.rank, 5u);
    EXPECT_EQ(qb.last_block_size, 2u);
    EXPECT_EQ(qb.B.dims(), (Dims{5, 3, 2}));
    EXPECT_EQ(qb.Q.dims(), (Dims{10, 5, 2}));
    EXPECT_DOUBLE_EQ(qb.residual_energy, 3.0);
}

TEST(TrimLastBlockTest, FirstSliceSuffices) {
    const QBApprox qb = trim_last_block(staged_qb(3), 10.0, std::sqrt(6.5));
    EXPECT_EQ(qb.rank, 4u);
}

TEST(TrimLastBlockTest, ExhaustionKeepsBlock) {
    const QBApprox in = staged_qb(2);
    const QBApprox qb = trim_last_block(in, 10.5, std::sqrt(0.1));
    EXPECT_EQ(qb.rank, 6u);
    EXPECT_EQ(qb.B, in.B);
    EXPECT_EQ(qb.Q, in.Q);
}

TEST(TrimLastBlockTest, KeepsPrefixOfQ) {
    const QBApprox in = staged_qb(1);
    const QBApprox qb = trim_last_block(in, 10.0, std::sqrt(4.5));
    EXPECT_EQ(qb.Q, col_range(in.Q, 0, 3));
}

// ---------------------------------------------------------------------------
// qb_to_tsvd
// ---------------------------------------------------------------------------

TEST(QBToTSVDTest, FullRankRoundTrip) {
    const Tensor3 x = random_tensor(20, 16, 5, 60);
    const QBApprox qb = adaptive_qb(x, config(0.3 * frobenius_norm(x), 4, 1, 13));
    const double qb_err = frobenius_norm(x - tprod(qb.Q, qb.B));
    const TSVDFactors f = qb_to_tsvd(qb);
    EXPECT_EQ(f.rank, qb.rank);
    EXPECT_NEAR(frobenius_norm(x - reconstruct(f)), qb_err, 1e-9 * frobenius_norm(x));
    EXPECT_TRUE(is_orthogonal(f.U, 1e-8));
    EXPECT_GE(frobenius_norm(x - reconstruct(qb_to_tsvd(qb, 1))), qb_err);
    EXPECT_THROW(qb_to_tsvd(qb, qb.rank + 1), Error);
}

TEST(QBToTSVDTest, SingleSliceMatchesMatrixPipeline) {
    const Tensor3 x = random_tensor(12, 9, 1, 61);
    const QBApprox qb = adaptive_qb(x, config(0.5 * frobenius_norm(x), 3, 0, 14));
    const TSVDFactors f = qb_to_tsvd(qb, 2);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(qb.B.slice(0), Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::MatrixXd u = qb.Q.slice(0) * svd.matrixU().leftCols(2);
    const Eigen::MatrixXd expected = u * svd.singularValues().head(2).asDiagonal() * svd.matrixV().leftCols(2).transpose();
    EXPECT_LE((reconstruct(f).slice(0) - expected).norm(), 1e-12 * expected.norm());
}

// ---------------------------------------------------------------------------
// blocked_randqb_matrix
// ---------------------------------------------------------------------------

TEST(BlockedRandQBTest, LowRankPlusNoise) {
    const Tensor3 lr = exact_low_rank(60, 40, 1, 5, 70);
    Eigen::MatrixXd a = lr.slice(0);
    a += 1e-6 * random_tensor(60, 40, 1, 73).slice(0);
    const double eps = 1e-3 * a.norm();
    const MatrixQB qb = blocked_randqb_matrix(a, eps, 10, 1, RngStream{15, 0});
    EXPECT_TRUE(qb.achieved);
    EXPECT_GE(qb.rank, 5u);
    EXPECT_LE(qb.rank, 14u);
    EXPECT_LE((a - qb.Q * qb.B).norm(), eps);
    EXPECT_NEAR(qb.error, (a - qb.Q * qb.B).norm(), 1e-12 * a.norm());
}

TEST(BlockedRandQBTest, LooseBoundOneBlock) {
    const Eigen::MatrixXd a = random_tensor(20, 15, 1, 74).slice(0);
    const MatrixQB qb = blocked_randqb_matrix(a, a.norm(), 6, 0, RngStream{16, 0});
    EXPECT_TRUE(qb.achieved);
    EXPECT_EQ(qb.iterations, 1u);
    EXPECT_LE(qb.rank, 6u);
}

TEST(BlockedRandQBTest, AgreesWithTubalAlgorithmOnSingleSlice) {
    const Eigen::MatrixXd a = fast_decay_matrix(200, 150, 80);
    const Tensor3 x(Dims{200, 150, 1}, std::vector<double>(a.data(), a.data() + a.size()));
    for (std::size_t q : {0u, 1u}) {
        const double eps = 1e-6 * a.norm();
        const MatrixQB ref = blocked_randqb_matrix(a, eps, 10, q, RngStream{17, 0});
        AdaptiveConfig cfg = config(eps, 10, q, 17);
        cfg.trim = false;
        const QBApprox qb = adaptive_qb(x, cfg);
        EXPECT_EQ(qb.rank, ref.rank) << "q=" << q;
        EXPECT_NEAR(frobenius_norm(x - tprod(qb.Q, qb.B)), ref.error, 1e-8) << "q=" << q;
    }
}

}  // namespace
}  // namespace tubal
