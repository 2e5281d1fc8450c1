// trdma_sim - command-line runner for TRDMA link experiments.
//
//   trdma_sim run       --config exp.cfg [--seed N] [--out DIR]
//   trdma_sim sweep     --config exp.cfg [--seed N] [--out DIR] [--threads N]
//   trdma_sim focusing  --config exp.cfg [--out DIR]
//   trdma_sim soundtest --config exp.cfg [--seed N] [--out DIR]
//
// Exit codes: 0 success, 1 other failure, 2 config error, 3 I/O error.

#include "trdma/errors.hpp"
#include "trdma/experiment.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <chrono>
#include <cstdio>
#include <optional>
#include <string>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::size_t> threads;
};

trdma::ExperimentConfig load(const Options& opt) {
    trdma::ExperimentConfig cfg =
        opt.config.empty() ? trdma::ExperimentConfig{} : trdma::load_experiment_config(opt.config);
    if (opt.seed) cfg.seed = *opt.seed;
    if (opt.out) cfg.out = *opt.out;
    if (opt.threads) cfg.threads = *opt.threads;
    trdma::validate(cfg);
    return cfg;
}

void log_line(const std::string& msg) {
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(now).count();
    std::fprintf(stderr, "[%lld] %s\n", static_cast<long long>(secs), msg.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Time-reversal division multiple access link simulator"};
    app.require_subcommand(1);

    Options opt;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config, "plain-text key = value experiment config");
        sub->add_option("--seed", opt.seed, "master seed (overrides config)");
        sub->add_option("--out", opt.out, "output directory (overrides config)");
        sub->add_option("--threads", opt.threads, "worker threads (overrides config)");
    };
    auto* run = app.add_subcommand("run", "single link experiment: frames.csv, metrics.csv");
    auto* sweep = app.add_subcommand("sweep", "bit-rate sweep: sweep.csv, sweep_metrics.csv");
    auto* focusing = app.add_subcommand("focusing", "per-position TR receptions and focusing_profile.csv");
    auto* soundtest = app.add_subcommand("soundtest", "chirp sounding of every position: sounding.csv");
    for (auto* sub : {run, sweep, focusing, soundtest}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        const trdma::ExperimentConfig cfg = load(opt);
        if (run->parsed()) {
            const auto result = trdma::run_link_experiment(cfg);
            for (const auto& r : result.reports) {
                log_line(fmt::format("user {}: bit rate {:.4g} bps, median SINR {:.2f} dB, BER {:.3g}, SER {:.3g}",
                                     r.user, r.bit_rate_bps, r.sinr_db, r.ber, r.symbol_error_rate));
            }
        } else if (sweep->parsed()) {
            for (const auto& row : trdma::sweep_bitrates(cfg, cfg.sweep)) {
                log_line(fmt::format("tau_c {:>6} M {:>2} D {:>3}: {:8.4g} Mbps, median SINR {:6.2f} dB, BER {:.3g}",
                                     row.point.chirp_taps, row.point.bits_per_symbol, row.backoff,
                                     row.bit_rate_bps * 1e-6, row.median_sinr_db, row.ber));
            }
        } else if (focusing->parsed()) {
            const auto profiles = trdma::emit_focusing_figure_data(cfg);
            log_line(fmt::format("wrote {} focusing profiles to {}", profiles.size(), cfg.out.string()));
        } else if (soundtest->parsed()) {
            for (const auto& row : trdma::run_sound_test(cfg)) {
                log_line(fmt::format("position {:+.2f} mm: offset {}, NMSE {:.3e}", row.position_mm,
                                     row.alignment_offset, row.nmse));
            }
        }
    } catch (const trdma::ConfigError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitConfig;
    } catch (const trdma::FormatError& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return kExitIo;
    } catch (const trdma::IoError& e) {
        std::fprintf(stderr, "I/O error: %s\n", e.what());
        return kExitIo;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
