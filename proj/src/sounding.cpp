#include "trdma/sounding.hpp"

#include <cmath>
#include <stdexcept>

namespace trdma {

ComplexSignal sound_channel(const ChirpSpec& chirp, const Cir& cir, double sigma, RngSeed seed) {
    validate_cir(cir);
    return apply_channel(make_chirp(chirp), cir, sigma, seed, ConvolutionMode::linear());
}

SoundingResult estimate_cir(const ComplexSignal& received, const ChirpSpec& chirp, std::size_t taps) {
    const ComplexSignal probe = make_chirp(chirp);
    if (received.size() < probe.size()) {
        throw std::invalid_argument("estimate_cir: received trace shorter than the chirp");
    }
    if (taps < 1) throw std::invalid_argument("estimate_cir: taps must be >= 1");
    const ComplexSignal corr = cross_correlate(received, probe);
    if (taps > corr.size()) throw std::invalid_argument("estimate_cir: L exceeds correlation support");

    // Each window summed from scratch so no rounding drift builds up along
    // the trace; strict '>' keeps the earliest maximum.
    std::vector<double> power(corr.size());
    for (std::size_t k = 0; k < corr.size(); ++k) power[k] = std::norm(corr[k]);
    double best = -1.0;
    std::size_t best_start = 0;
    for (std::size_t start = 0; start + taps <= corr.size(); ++start) {
        double window = 0.0;
        for (std::size_t k = 0; k < taps; ++k) window += power[start + k];
        if (window > best) {
            best = window;
            best_start = start;
        }
    }

    const double scale = 1.0 / energy(probe);
    std::vector<Sample> est(taps);
    for (std::size_t k = 0; k < taps; ++k) est[k] = corr[best_start + k] * scale;

    SoundingResult result;
    result.estimated = Cir{ComplexSignal(std::move(est), received.tap_seconds()), 0.0};
    result.alignment_offset =
        static_cast<std::int64_t>(best_start) - static_cast<std::int64_t>(correlation_zero_lag(probe.size()));
    return result;
}

double sounding_nmse(const SoundingResult& result, const Cir& truth) {
    validate_cir(truth);
    const auto& est = result.estimated.taps;
    const std::int64_t off = result.alignment_offset;
    const auto est_len = static_cast<std::int64_t>(est.size());
    const auto true_len = static_cast<std::int64_t>(truth.size());
    // Union of the two supports on the absolute lag axis.
    const std::int64_t lo = std::min<std::int64_t>(0, off);
    const std::int64_t hi = std::max(true_len, off + est_len);
    double err = 0.0;
    for (std::int64_t lag = lo; lag < hi; ++lag) {
        const Sample t = (lag >= 0 && lag < true_len) ? truth.taps[static_cast<std::size_t>(lag)] : Sample{};
        const std::int64_t e_idx = lag - off;
        const Sample e = (e_idx >= 0 && e_idx < est_len) ? est[static_cast<std::size_t>(e_idx)] : Sample{};
        err += std::norm(e - t);
    }
    return err / energy(truth.taps);
}

SoundingResult estimate_cir(const ComplexSignal& received, const ChirpSpec& chirp, const Cir& truth) {
    SoundingResult result = estimate_cir(received, chirp, truth.size());
    result.estimated.position_mm = truth.position_mm;
    result.nmse = sounding_nmse(result, truth);
    return result;
}

double sigma_for_snr(double signal_power_per_tap, double snr_db) {
    if (!(signal_power_per_tap >= 0.0)) throw std::invalid_argument("sigma_for_snr: negative power");
    if (std::isinf(snr_db) && snr_db > 0) return 0.0;
    return std::sqrt(signal_power_per_tap / std::pow(10.0, snr_db / 10.0));
}

}  // namespace trdma
