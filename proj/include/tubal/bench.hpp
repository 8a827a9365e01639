// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tubal/decomp.hpp"
#include "tubal/randomized.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tubal {

/// One benchmark run, serialized as a single JSON object.
struct RunReport {
    Dims dims;
    std::string method;  ///< "adaptive" | "tsvd" | "randomized"
    std::optional<double> epsilon_absolute;
    std::optional<double> epsilon_relative;
    std::optional<std::size_t> block_size;
    std::optional<std::size_t> power_iters;
    std::optional<std::uint64_t> seed;
    std::size_t estimated_rank = 0;
    double relative_error = 0.0;
    double wall_time_ms = 0.0;
    std::size_t iterations = 0;
    std::vector<double> energy_trace;
    bool achieved = true;
};

inline nlohmann::json to_json(const RunReport& r) {
    const auto opt = [](const auto& v) -> nlohmann::json { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    return {
        {"dims", {r.dims.rows, r.dims.cols, r.dims.tubes}},
        {"method", r.method},
        {"epsilon", {{"absolute", opt(r.epsilon_absolute)}, {"relative", opt(r.epsilon_relative)}}},
        {"block_size", opt(r.block_size)},
        {"power_iters", opt(r.power_iters)},
        {"seed", opt(r.seed)},
        {"estimated_rank", r.estimated_rank},
        {"relative_error", r.relative_error},
        {"wall_time_ms", r.wall_time_ms},
        {"iterations", r.iterations},
        {"energy_trace", r.energy_trace},
        {"achieved", r.achieved},
    };
}

namespace detail {

inline double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

inline double relative_residual(const Tensor3& x, const Tensor3& approx) {
    const double norm = frobenius_norm(x);
    const double err = frobenius_norm(x - approx);
    return norm > 0.0 ? err / norm : err;
}

}  // namespace detail

struct AdaptiveRun {
    RunReport report;
    QBApprox approx;
};

/// Times adaptive_qb and measures its error directly. With `relative`, the
/// configured epsilon is a fraction of ||x||_F and is converted once.
inline AdaptiveRun run_adaptive(const Tensor3& x, AdaptiveConfig cfg, bool relative) {
    RunReport r;
    r.dims = x.dims();
    r.method = "adaptive";
    if (relative) {
        r.epsilon_relative = cfg.epsilon;
        cfg.epsilon *= frobenius_norm(x);
    }
    r.epsilon_absolute = cfg.epsilon;
    r.block_size = cfg.block_size;
    r.power_iters = cfg.power_iters;
    r.seed = cfg.rng.seed;

    const auto start = std::chrono::steady_clock::now();
    QBApprox qb = adaptive_qb(x, cfg);
    r.wall_time_ms = detail::elapsed_ms(start);

    r.estimated_rank = qb.rank;
    r.iterations = qb.iterations;
    r.energy_trace = qb.energy_trace;
    r.achieved = qb.achieved;
    r.relative_error = qb.rank > 0 ? detail::relative_residual(x, tprod(qb.Q, qb.B))
                                   : detail::relative_residual(x, Tensor3(x.dims()));
    return {std::move(r), std::move(qb)};
}

struct TSVDRun {
    RunReport report;
    TSVDFactors factors;
};

inline TSVDRun run_tsvd(const Tensor3& x, std::size_t rank) {
    RunReport r;
    r.dims = x.dims();
    r.method = "tsvd";
    const auto start = std::chrono::steady_clock::now();
    TSVDFactors f = truncated_tsvd(x, rank);
    r.wall_time_ms = detail::elapsed_ms(start);
    r.estimated_rank = rank;
    r.relative_error = detail::relative_residual(x, reconstruct(f));
    return {std::move(r), std::move(f)};
}

inline TSVDRun run_randomized(const Tensor3& x, std::size_t rank, std::size_t oversample, std::size_t power_iters,
                              std::uint64_t seed) {
    RunReport r;
    r.dims = x.dims();
    r.method = "randomized";
    r.power_iters = power_iters;
    r.seed = seed;
    const auto start = std::chrono::steady_clock::now();
    TSVDFactors f = randomized_tsvd(x, rank, oversample, power_iters, RngStream{seed, 0});
    r.wall_time_ms = detail::elapsed_ms(start);
    r.estimated_rank = rank;
    r.relative_error = detail::relative_residual(x, reconstruct(f));
    return {std::move(r), std::move(f)};
}

}  // namespace tubal
