// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: synthetic benchmarks, adaptive and truncated
// t-SVD on TNS1 files, image-stack compression and tensor inspection.
//
// Exit status: 0 on success, 2 when the adaptive bound was not achieved,
// 1 on any error.

#include "tubal/tubal.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

namespace fs = std::filesystem;

struct AdaptiveFlags {
    double eps = 0.0;
    bool rel = false;
    std::size_t block = 10;
    std::size_t power = 1;
    std::uint64_t seed = 0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--eps", eps, "Error bound (absolute unless --rel)")->required()->check(CLI::NonNegativeNumber);
        cmd->add_flag("--rel", rel, "Interpret --eps relative to the Frobenius norm of the input");
        cmd->add_option("--block", block, "Block size b")->check(CLI::PositiveNumber)->capture_default_str();
        cmd->add_option("--power", power, "Power iterations q")->capture_default_str();
        cmd->add_option("--seed", seed, "RNG seed")->capture_default_str();
    }

    tubal::AdaptiveConfig config() const {
        tubal::AdaptiveConfig cfg;
        cfg.epsilon = eps;
        cfg.block_size = block;
        cfg.power_iters = power;
        cfg.rng = tubal::RngStream{seed, 0};
        return cfg;
    }
};

void write_report(const tubal::RunReport& report, const std::string& out) {
    const std::string text = tubal::to_json(report).dump(2) + "\n";
    if (out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream file(out, std::ios::trunc);
    if (!file) throw tubal::Error(tubal::ErrorCode::IoFailure, "cannot create " + out);
    file << text;
}

void save_factors(const tubal::TSVDFactors& f, const std::string& prefix) {
    tubal::save_tns(f.U, prefix + ".U.tns");
    tubal::save_tns(f.S, prefix + ".S.tns");
    tubal::save_tns(f.V, prefix + ".V.tns");
}

int finish_adaptive(const tubal::Tensor3& x, const AdaptiveFlags& flags, const std::string& out,
                    const std::string& factor_prefix) {
    const tubal::AdaptiveRun run = tubal::run_adaptive(x, flags.config(), flags.rel);
    write_report(run.report, out);
    if (!factor_prefix.empty() && run.approx.rank > 0) save_factors(tubal::qb_to_tsvd(run.approx), factor_prefix);
    return run.report.achieved ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tubal algebra toolkit: adaptive randomized t-SVD and benchmarks"};
    app.require_subcommand(1);

    std::string out;
    std::string in_path;
    std::string factor_prefix;

    // bench synthetic / bench hilbert
    auto* bench = app.add_subcommand("bench", "Run a synthetic benchmark");
    bench->require_subcommand(1);

    AdaptiveFlags synth_flags;
    int synth_case = 1;
    tubal::SyntheticSpec synth_spec;
    auto* synthetic = bench->add_subcommand("synthetic", "Low tubal-rank tensor U*S*V^T + noise");
    synthetic->add_option("--case", synth_case, "1 exact low rank, 2 polynomial decay, 3 exponential decay")
        ->required()
        ->check(CLI::Range(1, 3));
    synthetic->add_option("--n", synth_spec.n, "Tensor size n (n x n x n)")->required()->check(CLI::PositiveNumber);
    synthetic->add_option("--rank", synth_spec.rank, "Plateau rank R")->required()->check(CLI::PositiveNumber);
    synthetic->add_option("--delta", synth_spec.delta, "Noise level")->capture_default_str();
    synth_flags.attach(synthetic);
    synthetic->add_option("--out", out, "Report path (stdout when omitted)");

    AdaptiveFlags hilbert_flags;
    int hilbert_kind = 1;
    std::size_t hilbert_n = 100;
    auto* hilbert = bench->add_subcommand("hilbert", "Hilbert-type tensor");
    hilbert->add_option("--kind", hilbert_kind, "1: 1/(i+j+k), 2: 1/(sqrt i + sqrt j + sqrt k)^2")
        ->required()
        ->check(CLI::Range(1, 2));
    hilbert->add_option("--n", hilbert_n, "Tensor size n")->required()->check(CLI::PositiveNumber);
    hilbert_flags.attach(hilbert);
    hilbert->add_option("--out", out, "Report path (stdout when omitted)");

    AdaptiveFlags adaptive_flags;
    auto* adaptive = app.add_subcommand("adaptive", "Fixed-precision randomized QB of a TNS1 tensor");
    adaptive->add_option("--in", in_path, "Input TNS1 file")->required();
    adaptive_flags.attach(adaptive);
    adaptive->add_option("--out", out, "Report path (stdout when omitted)");
    adaptive->add_option("--save-factors", factor_prefix, "Write <prefix>.{U,S,V}.tns");

    std::size_t tsvd_rank = 1;
    auto* tsvd = app.add_subcommand("tsvd", "Truncated t-SVD of a TNS1 tensor");
    tsvd->add_option("--in", in_path, "Input TNS1 file")->required();
    tsvd->add_option("--rank", tsvd_rank, "Tubal rank")->required()->check(CLI::PositiveNumber);
    tsvd->add_option("--out", out, "Report path (stdout when omitted)");
    tsvd->add_option("--save-factors", factor_prefix, "Write <prefix>.{U,S,V}.tns");

    AdaptiveFlags compress_flags;
    std::string images_dir;
    std::string recon_dir;
    auto* compress = app.add_subcommand("compress", "Compress a directory of 8-bit PGM images");
    compress->add_option("--images", images_dir, "Directory of equally sized P5 images")->required();
    compress_flags.attach(compress);
    compress->add_option("--out", out, "Report path (stdout when omitted)");
    compress->add_option("--save-recon", recon_dir, "Directory for reconstructed images");

    auto* info = app.add_subcommand("info", "Print dims, Frobenius norm and tubal rank");
    info->add_option("--in", in_path, "Input TNS1 file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (synthetic->parsed()) {
            synth_spec.kind = static_cast<tubal::SyntheticCase>(synth_case - 1);
            synth_spec.seed = synth_flags.seed;
            return finish_adaptive(tubal::gen_synthetic(synth_spec), synth_flags, out, "");
        }
        if (hilbert->parsed()) {
            tubal::SyntheticSpec spec;
            spec.kind = hilbert_kind == 1 ? tubal::SyntheticCase::Hilbert1 : tubal::SyntheticCase::Hilbert2;
            spec.n = hilbert_n;
            return finish_adaptive(tubal::gen_synthetic(spec), hilbert_flags, out, "");
        }
        if (adaptive->parsed()) {
            return finish_adaptive(tubal::load_tns(in_path), adaptive_flags, out, factor_prefix);
        }
        if (tsvd->parsed()) {
            const tubal::TSVDRun run = tubal::run_tsvd(tubal::load_tns(in_path), tsvd_rank);
            write_report(run.report, out);
            if (!factor_prefix.empty()) save_factors(run.factors, factor_prefix);
            return 0;
        }
        if (compress->parsed()) {
            const auto files = tubal::list_pgm_files(images_dir);
            const tubal::Tensor3 x = tubal::load_pgm_stack(images_dir);
            const tubal::AdaptiveRun run = tubal::run_adaptive(x, compress_flags.config(), compress_flags.rel);
            write_report(run.report, out);
            if (!recon_dir.empty()) {
                fs::create_directories(recon_dir);
                const tubal::Tensor3 recon =
                    run.approx.rank > 0 ? tubal::tprod(run.approx.Q, run.approx.B) : tubal::Tensor3(x.dims());
                for (std::size_t k = 0; k < files.size(); ++k) {
                    tubal::write_pgm(tubal::slice_to_image(recon, k), fs::path(recon_dir) / files[k].filename());
                }
            }
            return run.report.achieved ? 0 : 2;
        }
        if (info->parsed()) {
            const tubal::Tensor3 x = tubal::load_tns(in_path);
            std::cout << "dims: " << tubal::to_string(x.dims()) << "\n"
                      << "frobenius_norm: " << nlohmann::json(tubal::frobenius_norm(x)).dump() << "\n"
                      << "tubal_rank: " << tubal::tubal_rank(x) << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
