// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Usage: trdma_acceptance [output_dir]

#include "oracles.hpp"

#include "trdma/channel.hpp"
#include "trdma/experiment.hpp"
#include "trdma/precoder.hpp"
#include "trdma/sounding.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace trdma;
using oracle::cd;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and budgets.
constexpr double kRateBudgetS = 1.0;
constexpr double kFocusRelTol = 1e-9;
constexpr double kFocusBudgetS = 10.0;
constexpr double kOracleRelTol = 1e-9;
constexpr double kZeroLagUlps = 4.0;
constexpr double kSymmetryTol = 1e-9;
constexpr double kLoopbackMaxCorr = 0.3;
constexpr double kLoopbackBudgetS = 300.0;
constexpr double kTrendSnrDb = 20.0;
constexpr double kSoundingNmse = 1e-3;
constexpr double kSoundingBudgetS = 30.0;
constexpr std::uint64_t kSeed = 1;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// The two-position ensemble of the link experiments: -3 mm and 0 mm.
ExperimentConfig link_config(const fs::path& out) {
    ExperimentConfig cfg;
    cfg.config_id = "acceptance";
    cfg.positions_mm = {-3.0, 0.0};
    cfg.users = {0, 1};
    cfg.spatial_corr_per_mm = 0.3;
    cfg.channel_seed = kSeed;
    cfg.seed = kSeed;
    cfg.frames = 200;
    cfg.out = out;
    return cfg;
}

Outcome bit_rate_table(const fs::path& out) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg = link_config(out / "rates");
    cfg.frames = 1;
    std::vector<double> got;
    for (const SweepRow& row : sweep_bitrates(cfg, reference_rate_table())) got.push_back(row.bit_rate_bps * 1e-6);
    const double elapsed = seconds_since(t0);

    // Published rate table, with the number of decimals printed there.
    const std::vector<std::pair<double, int>> published{{343, 0}, {107, 0}, {36.4, 1}, {18, 0}, {10, 0}, {1, 0}};
    bool ok = elapsed < kRateBudgetS;
    std::string detail;
    for (std::size_t i = 0; i < published.size(); ++i) {
        const double scale = std::pow(10.0, published[i].second);
        const double rounded = std::round(got[i] * scale) / scale;
        ok = ok && std::abs(rounded - published[i].first) < 1e-9;
        detail += fmt::format("{}{:.4g}", i ? ", " : "", got[i]);
    }
    return {ok, fmt::format("Mbps [{}], {:.3f} s", detail, elapsed)};
}

Outcome focusing_identity() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(kSeed);
    std::uniform_int_distribution<std::size_t> len(1, 128);
    double worst = 0.0;
    std::size_t misplaced = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto h = oracle::random_samples(rng, len(rng));
        const Cir cir{ComplexSignal(h), 0.0};
        const ComplexSignal s = precode_multiuser({UserStream{0, {1.0}, tr_filter(cir)}}, 1);
        const ComplexSignal y = apply_channel(s, cir, 0.0, RngSeed{kSeed});
        std::size_t peak = 0;
        for (std::size_t k = 0; k < y.size(); ++k) {
            if (std::abs(y[k]) > std::abs(y[peak])) peak = k;
        }
        misplaced += peak != focusing_instant(h.size()) ? 1 : 0;
        const double norm = std::sqrt(oracle::energy(h));
        worst = std::max(worst, std::abs(y[focusing_instant(h.size())] - norm) / norm);
    }
    const double elapsed = seconds_since(t0);
    return {worst <= kFocusRelTol && misplaced == 0 && elapsed < kFocusBudgetS,
            fmt::format("1000 CIRs, max rel. error {:.2e}, peaks off L-1: {}, {:.2f} s", worst, misplaced, elapsed)};
}

Outcome oracle_equivalence() {
    std::mt19937_64 rng(kSeed + 3);
    // Log-uniform lengths up to 2^14, first pair at the maximum.
    std::uniform_real_distribution<double> log_len(0.0, 14.0);
    double worst_conv = 0.0;
    for (int pair = 0; pair < 100; ++pair) {
        const std::size_t na = pair == 0 ? 16384 : static_cast<std::size_t>(std::exp2(log_len(rng)));
        const std::size_t nb = pair == 0 ? 16384 : static_cast<std::size_t>(std::exp2(log_len(rng)));
        const auto a = oracle::random_samples(rng, na);
        const auto b = oracle::random_samples(rng, nb);
        const ComplexSignal fast = convolve(ComplexSignal(a), ComplexSignal(b));
        worst_conv = std::max(worst_conv, oracle::relative_error(fast.samples(), oracle::convolve(a, b)));
    }

    std::uniform_int_distribution<std::size_t> users(1, 3), taps(1, 32), backoff(1, 40), symbols(1, 16);
    double worst_decomp = 0.0;
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = users(rng), l = taps(rng), d = backoff(rng);
        std::vector<Cir> hs;
        std::vector<UserStream> streams;
        std::size_t longest = 0;
        for (std::size_t i = 0; i < n; ++i) {
            hs.push_back(Cir{oracle::random_signal(rng, l), 0.0});
            streams.push_back(UserStream{i, oracle::random_samples(rng, symbols(rng)), tr_filter(hs.back())});
            longest = std::max(longest, streams.back().symbols.size());
        }
        const std::size_t target = static_cast<std::size_t>(trial) % n;
        std::vector<std::size_t> idx(longest);
        for (std::size_t k = 0; k < longest; ++k) idx[k] = k;
        const ComplexSignal y = apply_channel(precode_multiuser(streams, d), hs[target], 0.0, RngSeed{kSeed});
        double scale = 0.0;
        for (const auto& s : y) scale = std::max(scale, std::abs(s));
        for (const auto& p : decompose_reception(streams, hs, d, target, idx)) {
            worst_decomp = std::max(worst_decomp, std::abs(p.total() - y[p.symbol_index * d + l - 1]) / scale);
        }
    }
    return {worst_conv <= kOracleRelTol && worst_decomp <= kOracleRelTol,
            fmt::format("convolution max rel. error {:.2e} (100 pairs up to 2^14), decomposition {:.2e} (300 cases)",
                        worst_conv, worst_decomp)};
}

Outcome correlation_properties() {
    std::mt19937_64 rng(kSeed + 4);
    std::uniform_int_distribution<std::size_t> len(1, 64);
    double worst_zero_ulps = 0.0, worst_bound = 0.0, worst_same_lag = 0.0, worst_mirrored = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t l = len(rng);
        const Cir hi{oracle::random_signal(rng, l), 0.0};
        const Cir hj{oracle::random_signal(rng, l), 0.0};
        const double ni = std::sqrt(energy(hi.taps));
        const double nj = std::sqrt(energy(hj.taps));
        const ComplexSignal rii = correlation_function(hi, hi);
        const ComplexSignal rji = correlation_function(hj, hi);
        const ComplexSignal rij = correlation_function(hi, hj);

        const cd zero = correlation_at(rii, 0);
        worst_zero_ulps = std::max(worst_zero_ulps, std::abs(zero - ni) / (ni * std::numeric_limits<double>::epsilon()));
        for (const auto& s : rii) worst_bound = std::max(worst_bound, std::abs(s) - zero.real());

        const auto L = static_cast<std::ptrdiff_t>(l);
        for (std::ptrdiff_t k = -(L - 1); k <= L - 1; ++k) {
            const cd lhs = ni * correlation_at(rji, k);
            worst_same_lag = std::max(worst_same_lag, std::abs(lhs - std::conj(nj * correlation_at(rij, k))));
            worst_mirrored = std::max(worst_mirrored, std::abs(lhs - std::conj(nj * correlation_at(rij, -k))));
        }
    }
    const bool zero_ok = worst_zero_ulps <= kZeroLagUlps;
    const bool bound_ok = worst_bound <= 0.0;
    const bool same_lag_ok = worst_same_lag <= kSymmetryTol;
    return {zero_ok && bound_ok && same_lag_ok,
            fmt::format("500 pairs: R_ii[0] vs |h| {:.1f} ulp, |R_ii[k]| - R_ii[0] <= {:.1e}, "
                        "same-lag symmetry max dev {:.2e}, mirrored-lag (k -> -k) max dev {:.2e}",
                        worst_zero_ulps, worst_bound, worst_same_lag, worst_mirrored)};
}

Outcome ppm_loopback(const fs::path& out) {
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentConfig cfg = link_config(out / "loopback");
    const CirEnsemble ensemble = build_ensemble(cfg);
    const double corr = std::abs(spatial_correlation(ensemble)(0, 1));
    bool ok = corr < kLoopbackMaxCorr;
    std::string detail;
    const auto table = reference_rate_table();
    for (std::size_t i = 0; i < table.size(); ++i) {
        const LinkResult r = simulate_link(cfg, ensemble, table[i], derive_seed(RngSeed{kSeed}, i), "loopback");
        ok = ok && r.ber == 0.0;
        detail += fmt::format("{}{}:{} BER {:.3g}", i ? ", " : "", table[i].chirp_taps, table[i].bits_per_symbol,
                              r.ber);
    }
    const double elapsed = seconds_since(t0);
    ok = ok && elapsed < kLoopbackBudgetS;
    return {ok, fmt::format("|corr| {:.3f}, 200 frames each: {}; {:.1f} s", corr, detail, elapsed)};
}

Outcome sinr_trend(const fs::path& out, std::vector<SweepRow>& rows) {
    ExperimentConfig cfg = link_config(out / "trend");
    cfg.snr_db = kTrendSnrDb;
    rows = sweep_bitrates(cfg, reference_rate_table());
    std::vector<SweepRow> by_rate = rows;
    std::sort(by_rate.begin(), by_rate.end(),
              [](const SweepRow& a, const SweepRow& b) { return a.bit_rate_bps < b.bit_rate_bps; });
    bool monotone = true;
    std::string detail;
    for (std::size_t i = 0; i < by_rate.size(); ++i) {
        if (i > 0) monotone = monotone && by_rate[i].median_sinr_db <= by_rate[i - 1].median_sinr_db;
        detail += fmt::format("{}{:.4g} Mbps: {:.2f} dB", i ? ", " : "", by_rate[i].bit_rate_bps * 1e-6,
                              by_rate[i].median_sinr_db);
    }
    const bool positive = by_rate.back().median_sinr_db > 0.0;
    return {monotone && positive, fmt::format("median SINR at {} dB input SNR: {}", kTrendSnrDb, detail)};
}

Outcome sounding_fidelity() {
    const auto t0 = std::chrono::steady_clock::now();
    const ChirpSpec chirp{4096, 1.0};
    CorrelatedTapsCfg ccfg;
    ccfg.taps = 64;
    ccfg.positions_mm = {0.0};
    std::vector<double> nmse;
    for (std::uint64_t s = 0; s < 100; ++s) {
        const Cir truth = generate_correlated_ensemble(ccfg, derive_seed(RngSeed{kSeed}, s))[0];
        nmse.push_back(*estimate_cir(sound_channel(chirp, truth, 0.0, RngSeed{kSeed}), chirp, truth).nmse);
    }
    const double elapsed = seconds_since(t0);
    const auto below = std::count_if(nmse.begin(), nmse.end(), [](double v) { return v < kSoundingNmse; });
    const double worst = *std::max_element(nmse.begin(), nmse.end());
    double mean = 0.0;
    for (double v : nmse) mean += v / static_cast<double>(nmse.size());
    return {worst < kSoundingNmse && elapsed < kSoundingBudgetS,
            fmt::format("100 channels: {} below {:.0e}, median {:.3e}, mean {:.3e}, max {:.3e}; {:.2f} s", below,
                        kSoundingNmse, median(nmse), mean, worst, elapsed)};
}

Outcome determinism(const fs::path& out) {
    // Repeat a noisy link run and the trend sweep: same seed must give the
    // same bytes, serially and with four workers.
    ExperimentConfig run = link_config(out / "det_run_a");
    run.snr_db = kTrendSnrDb;
    run.chirp_taps = 1100;
    run_link_experiment(run);
    ExperimentConfig run_b = run;
    run_b.out = out / "det_run_b";
    run_link_experiment(run_b);
    const bool run_same = slurp(run.out / "metrics.csv") == slurp(run_b.out / "metrics.csv") &&
                          slurp(run.out / "frames.csv") == slurp(run_b.out / "frames.csv");

    ExperimentConfig serial = link_config(out / "trend");
    serial.snr_db = kTrendSnrDb;
    ExperimentConfig parallel = serial;
    parallel.out = out / "det_parallel";
    parallel.threads = 4;
    sweep_bitrates(parallel, reference_rate_table());
    const bool sweep_same = slurp(serial.out / "sweep.csv") == slurp(parallel.out / "sweep.csv") &&
                            slurp(serial.out / "sweep_metrics.csv") == slurp(parallel.out / "sweep_metrics.csv");
    return {run_same && sweep_same, fmt::format("repeated run identical: {}, serial vs 4-thread sweep identical: {}",
                                                run_same ? "yes" : "no", sweep_same ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_out");
    fs::remove_all(out);
    fs::create_directories(out);

    std::vector<SweepRow> trend_rows;
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"bit-rate table", [&] { return bit_rate_table(out); }},
        {"focusing identity", focusing_identity},
        {"oracle equivalence", oracle_equivalence},
        {"correlation properties", correlation_properties},
        {"PPM loopback", [&] { return ppm_loopback(out); }},
        {"SINR vs bit rate", [&] { return sinr_trend(out, trend_rows); }},
        {"sounding fidelity", sounding_fidelity},
        {"determinism", [&] { return determinism(out); }},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        fmt::print("criterion {} [{}] {}: {}\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail);
        std::fflush(stdout);
    }
    fmt::print("{} of {} criteria passed\n", criteria.size() - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
