#include "trdma/experiment.hpp"

#include "trdma/errors.hpp"
#include "trdma/precoder.hpp"
#include "trdma/sounding.hpp"

#include <fmt/format.h>
#include <fmt/os.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <span>
#include <stdexcept>
#include <thread>

namespace trdma {

namespace {

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

void ensure_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

template <typename Fn>
void write_file(const std::filesystem::path& path, Fn&& body) {
    try {
        auto out = fmt::output_file(path.string());
        body(out);
    } catch (const std::system_error& e) {
        throw IoError("cannot write " + path.string() + ": " + e.what());
    }
}

std::vector<Cir> user_channels(const ExperimentConfig& cfg, const CirEnsemble& ensemble) {
    std::vector<Cir> out;
    for (std::size_t u : cfg.users) {
        if (u >= ensemble.size()) throw ConfigError("users", "position index out of range for the ensemble");
        out.push_back(ensemble[u]);
    }
    return out;
}

// The response the transmitter believes in: the truth, or a matched-filter
// estimate from a sounding probe.
Cir channel_state(const ExperimentConfig& cfg, const Cir& truth, RngSeed seed) {
    if (cfg.csi == CsiMode::perfect) return truth;
    const ChirpSpec probe{cfg.sounding_chirp_taps, 1.0};
    const double power = static_cast<double>(probe.tau_c) * energy(truth.taps) /
                         static_cast<double>(probe.tau_c + truth.size() - 1);
    const double sigma = sigma_for_snr(power, cfg.sounding_snr_db);
    const ComplexSignal rx = sound_channel(probe, truth, sigma, seed);
    const SoundingResult res = estimate_cir(rx, probe, truth.size());
    // Put the window back on the absolute lag axis; the probe timing is known.
    const auto taps = static_cast<std::int64_t>(truth.size());
    std::vector<Sample> aligned(truth.size());
    for (std::int64_t k = 0; k < taps; ++k) {
        const std::int64_t lag = k + res.alignment_offset;
        if (lag >= 0 && lag < taps) aligned[static_cast<std::size_t>(lag)] = res.estimated.taps[static_cast<std::size_t>(k)];
    }
    if (!(energy(std::span<const Sample>(aligned)) > 0.0)) {
        throw std::runtime_error("sounding: estimate falls outside the CIR support");
    }
    return Cir{ComplexSignal(std::move(aligned), truth.taps.tap_seconds()), truth.position_mm};
}

}  // namespace

CirEnsemble build_ensemble(const ExperimentConfig& cfg) {
    CirEnsemble ensemble;
    switch (cfg.channel) {
    case ChannelModel::correlated: {
        CorrelatedTapsCfg c;
        c.taps = cfg.taps;
        c.delay_spread_taps = cfg.delay_spread_taps;
        c.spatial_corr_per_mm = cfg.spatial_corr_per_mm;
        c.positions_mm = cfg.positions_mm;
        ensemble = generate_correlated_ensemble(c, cfg.ensemble_seed());
        break;
    }
    case ChannelModel::waveguide: {
        WaveguideModelCfg w = cfg.waveguide;
        w.taps = cfg.taps;
        w.bandwidth_hz = cfg.bandwidth_hz;
        w.carrier_hz = cfg.carrier_hz;
        try {
            ensemble = generate_waveguide_ensemble(w, cfg.positions_mm, cfg.ensemble_seed());
        } catch (const std::invalid_argument& e) {
            throw ConfigError("waveguide", e.what());
        }
        break;
    }
    case ChannelModel::file:
        ensemble = load_cir_csv(cfg.cir_file);
        if (ensemble.taps() != cfg.taps) {
            throw ConfigError("taps", "CIR file has " + std::to_string(ensemble.taps()) + " taps, config says " +
                                          std::to_string(cfg.taps));
        }
        break;
    }
    for (std::size_t u : cfg.users) {
        if (u >= ensemble.size()) throw ConfigError("users", "position index out of range for the ensemble");
    }
    return ensemble;
}

LinkResult simulate_link(const ExperimentConfig& cfg, const CirEnsemble& ensemble, const RatePoint& point,
                         RngSeed seed, const std::string& config_id) {
    LinkResult result;
    result.ppm = ppm_config_for(cfg, point);
    const PpmConfig& ppm = result.ppm;
    const std::vector<Cir> truth = user_channels(cfg, ensemble);
    const std::size_t n_users = truth.size();
    const unsigned bits = ppm.bits_per_symbol;

    std::vector<ComplexSignal> spread;
    std::vector<double> sigma;
    for (std::size_t u = 0; u < n_users; ++u) {
        const Cir csi = channel_state(cfg, truth[u], derive_seed(seed, 0x5000 + u));
        spread.push_back(chirp_spread_filter(tr_filter(csi), ppm.chirp()));
        if (cfg.sigma) {
            sigma.push_back(*cfg.sigma);
        } else {
            // Expected received power per tap: N unit-energy frames over
            // frame_len taps, scaled by the channel gain.
            const double power = static_cast<double>(n_users) * energy(truth[u].taps) /
                                 static_cast<double>(ppm.frame_len);
            sigma.push_back(sigma_for_snr(power, cfg.snr_db));
        }
    }

    std::vector<std::vector<double>> sinr(n_users), pslr(n_users);
    std::vector<std::size_t> bit_errors(n_users, 0), symbol_errors(n_users, 0);
    result.frames.reserve(cfg.frames * n_users);

    for (std::size_t f = 0; f < cfg.frames; ++f) {
        const RngSeed frame_seed = derive_seed(seed, f);
        std::mt19937_64 bit_rng(frame_seed.value);
        std::vector<std::vector<std::uint8_t>> tx_bits(n_users);
        std::vector<UserFrame> users;
        for (std::size_t u = 0; u < n_users; ++u) {
            tx_bits[u].resize(bits);
            for (auto& b : tx_bits[u]) b = static_cast<std::uint8_t>(bit_rng() >> 63);
            users.push_back(UserFrame{spread[u], ppm_encode(tx_bits[u], bits)});
        }
        const ComplexSignal tx = transmit_frame(users, ppm);

        for (std::size_t u = 0; u < n_users; ++u) {
            const ComplexSignal decision =
                receive_frame(tx, truth[u], sigma[u], derive_seed(frame_seed, u + 1), ppm);
            const PpmDetection det = ppm_detect(decision, ppm);
            const auto rx_bits = ppm_decode(det.symbol, bits);

            FrameTrace trace;
            trace.frame = f;
            trace.user = u;
            trace.m_tx = users[u].symbol;
            trace.m_rx = det.symbol;
            trace.peak_power = det.peak_power;
            trace.runner_up_power = det.runner_up_power;
            trace.sinr_db = sinr_db(decision, users[u].symbol, ppm);
            trace.pslr_db = peak_to_sidelobe_db(decision, cfg.pslr_exclusion);
            for (unsigned b = 0; b < bits; ++b) trace.bit_errors += tx_bits[u][b] != rx_bits[b] ? 1 : 0;

            bit_errors[u] += trace.bit_errors;
            symbol_errors[u] += trace.m_tx != trace.m_rx ? 1 : 0;
            sinr[u].push_back(trace.sinr_db);
            pslr[u].push_back(trace.pslr_db);
            result.frames.push_back(trace);
        }
    }

    std::vector<double> all_sinr;
    std::size_t total_bit_errors = 0, total_symbol_errors = 0;
    for (std::size_t u = 0; u < n_users; ++u) {
        MetricsReport r;
        r.config_id = config_id;
        r.user = u;
        r.bit_rate_bps = bit_rate(ppm);
        r.sinr_db = median(sinr[u]);
        r.pslr_db = median(pslr[u]);
        r.ber = static_cast<double>(bit_errors[u]) / static_cast<double>(cfg.frames * bits);
        r.symbol_error_rate = static_cast<double>(symbol_errors[u]) / static_cast<double>(cfg.frames);
        r.seed = seed.value;
        result.reports.push_back(r);
        all_sinr.insert(all_sinr.end(), sinr[u].begin(), sinr[u].end());
        total_bit_errors += bit_errors[u];
        total_symbol_errors += symbol_errors[u];
    }
    result.median_sinr_db = median(all_sinr);
    result.ber = static_cast<double>(total_bit_errors) / static_cast<double>(cfg.frames * bits * n_users);
    result.symbol_error_rate =
        static_cast<double>(total_symbol_errors) / static_cast<double>(cfg.frames * n_users);
    return result;
}

LinkResult run_link_experiment(const ExperimentConfig& cfg) {
    validate(cfg);
    const CirEnsemble ensemble = build_ensemble(cfg);
    const RngSeed seed{cfg.seed};
    LinkResult result = simulate_link(cfg, ensemble, RatePoint{cfg.chirp_taps, cfg.bits_per_symbol}, seed,
                                      cfg.config_id);

    ensure_directory(cfg.out);
    write_file(cfg.out / "frames.csv", [&](fmt::ostream& out) {
        out.print("frame,user,m_tx,m_rx,peak_power,runnerup_power\n");
        for (const FrameTrace& t : result.frames) {
            out.print("{},{},{},{},{:.16e},{:.16e}\n", t.frame, t.user, t.m_tx, t.m_rx, t.peak_power,
                      t.runner_up_power);
        }
    });
    write_metrics_csv(result.reports, cfg.out / "metrics.csv");
    return result;
}

std::vector<SweepRow> sweep_bitrates(const ExperimentConfig& cfg, const std::vector<RatePoint>& table) {
    validate(cfg);
    validate_sweep(cfg, table);
    const CirEnsemble ensemble = build_ensemble(cfg);

    std::vector<LinkResult> results(table.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < table.size(); i = next++) {
            try {
                results[i] = simulate_link(cfg, ensemble, table[i], derive_seed(RngSeed{cfg.seed}, i),
                                           fmt::format("{}_{}", cfg.config_id, i));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const std::size_t n_threads = std::min(cfg.threads, table.size());
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<SweepRow> rows;
    std::vector<MetricsReport> reports;
    for (std::size_t i = 0; i < table.size(); ++i) {
        const LinkResult& r = results[i];
        rows.push_back(SweepRow{fmt::format("{}_{}", cfg.config_id, i), table[i], r.ppm.backoff, bit_rate(r.ppm),
                                r.median_sinr_db, r.ber});
        reports.insert(reports.end(), r.reports.begin(), r.reports.end());
    }

    ensure_directory(cfg.out);
    write_file(cfg.out / "sweep.csv", [&](fmt::ostream& out) {
        out.print("config_id,chirp_taps,bits_per_symbol,backoff,bit_rate_bps,median_sinr_db,ber\n");
        for (const SweepRow& row : rows) {
            out.print("{},{},{},{},{:.16e},{:.16e},{:.16e}\n", row.config_id, row.point.chirp_taps,
                      row.point.bits_per_symbol, row.backoff, row.bit_rate_bps, row.median_sinr_db, row.ber);
        }
    });
    write_metrics_csv(reports, cfg.out / "sweep_metrics.csv");
    return rows;
}

std::vector<std::vector<double>> emit_focusing_figure_data(const ExperimentConfig& cfg) {
    validate(cfg);
    const CirEnsemble ensemble = build_ensemble(cfg);
    const ChirpSpec chirp{cfg.chirp_taps, 1.0};
    ensure_directory(cfg.out);

    std::vector<std::vector<double>> profiles;
    for (std::size_t target : cfg.users) {
        const std::vector<ComplexSignal> traces = focusing_receptions(ensemble, target, chirp);
        std::vector<double> profile;
        for (std::size_t p = 0; p < traces.size(); ++p) {
            save_signal_csv(traces[p], cfg.out / fmt::format("focusing_target{}_pos{}.csv", target, p));
            double peak = 0.0;
            for (const Sample& s : traces[p]) peak = std::max(peak, std::norm(s));
            profile.push_back(peak);
        }
        profiles.push_back(std::move(profile));
    }
    write_file(cfg.out / "focusing_profile.csv", [&](fmt::ostream& out) {
        out.print("target_index,target_position_mm,position_index,position_mm,peak_power\n");
        for (std::size_t t = 0; t < cfg.users.size(); ++t) {
            const std::size_t target = cfg.users[t];
            for (std::size_t p = 0; p < ensemble.size(); ++p) {
                out.print("{},{:.16e},{},{:.16e},{:.16e}\n", target, ensemble[target].position_mm, p,
                          ensemble[p].position_mm, profiles[t][p]);
            }
        }
    });
    return profiles;
}

std::vector<SoundTestRow> run_sound_test(const ExperimentConfig& cfg) {
    validate(cfg);
    const CirEnsemble ensemble = build_ensemble(cfg);
    const ChirpSpec probe{cfg.sounding_chirp_taps, 1.0};

    std::vector<SoundTestRow> rows;
    CirEnsemble estimates;
    estimates.bandwidth_ghz = ensemble.bandwidth_ghz;
    estimates.carrier_ghz = ensemble.carrier_ghz;
    for (std::size_t p = 0; p < ensemble.size(); ++p) {
        const Cir& truth = ensemble[p];
        const double power = static_cast<double>(probe.tau_c) * energy(truth.taps) /
                             static_cast<double>(probe.tau_c + truth.size() - 1);
        const double sigma = sigma_for_snr(power, cfg.sounding_snr_db);
        const ComplexSignal rx = sound_channel(probe, truth, sigma, derive_seed(RngSeed{cfg.seed}, p));
        const SoundingResult res = estimate_cir(rx, probe, truth);
        rows.push_back(SoundTestRow{p, truth.position_mm, res.alignment_offset, *res.nmse});
        estimates.entries.push_back(res.estimated);
    }

    ensure_directory(cfg.out);
    write_file(cfg.out / "sounding.csv", [&](fmt::ostream& out) {
        out.print("position_index,position_mm,alignment_offset,nmse\n");
        for (const SoundTestRow& r : rows) {
            out.print("{},{:.16e},{},{:.16e}\n", r.position_index, r.position_mm, r.alignment_offset, r.nmse);
        }
    });
    save_cir_csv(estimates, cfg.out / "estimated_cirs.csv");
    return rows;
}

}  // namespace trdma
