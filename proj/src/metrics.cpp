#include "trdma/metrics.hpp"

#include "trdma/errors.hpp"
#include "trdma/precoder.hpp"

#include <fmt/os.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace trdma {

namespace {

double capped_ratio_db(double num, double den) {
    if (den <= 0.0) return num > 0.0 ? kMetricCapDb : 0.0;
    if (num <= 0.0) return -kMetricCapDb;
    return std::clamp(10.0 * std::log10(num / den), -kMetricCapDb, kMetricCapDb);
}

}  // namespace

double sinr_db_from_candidates(std::span<const double> candidate_power, std::size_t true_index) {
    if (candidate_power.size() < 2 || true_index >= candidate_power.size()) {
        throw std::invalid_argument("sinr: need >= 2 candidates and a valid true index");
    }
    double others = 0.0;
    for (std::size_t k = 0; k < candidate_power.size(); ++k) {
        if (k != true_index) others += candidate_power[k];
    }
    others /= static_cast<double>(candidate_power.size() - 1);
    return capped_ratio_db(candidate_power[true_index], others);
}

double sinr_db(const ComplexSignal& decision, std::uint32_t true_symbol, const PpmConfig& cfg) {
    if (decision.size() != cfg.frame_len) throw std::invalid_argument("sinr: decision length mismatch");
    if (true_symbol >= cfg.num_positions()) throw std::invalid_argument("sinr: symbol out of range");
    std::vector<double> power(cfg.num_positions());
    for (std::uint32_t m = 0; m < power.size(); ++m) power[m] = std::norm(decision[candidate_index(m, cfg)]);
    return sinr_db_from_candidates(power, true_symbol);
}

double bit_error_rate(std::span<const std::uint8_t> tx_bits, std::span<const std::uint8_t> rx_bits) {
    if (tx_bits.size() != rx_bits.size()) throw std::invalid_argument("ber: length mismatch");
    if (tx_bits.empty()) throw std::invalid_argument("ber: empty bit streams");
    std::size_t errors = 0;
    for (std::size_t k = 0; k < tx_bits.size(); ++k) errors += (tx_bits[k] != rx_bits[k]) ? 1 : 0;
    return static_cast<double>(errors) / static_cast<double>(tx_bits.size());
}

double peak_to_sidelobe_db(const ComplexSignal& decision, std::size_t exclusion_width) {
    if (exclusion_width < 1) throw std::invalid_argument("pslr: exclusion width must be >= 1");
    if (decision.size() <= 2 * exclusion_width + 1) {
        throw std::invalid_argument("pslr: signal shorter than the exclusion window");
    }
    std::size_t peak = 0;
    for (std::size_t k = 1; k < decision.size(); ++k) {
        if (std::norm(decision[k]) > std::norm(decision[peak])) peak = k;
    }
    double side = 0.0;
    for (std::size_t k = 0; k < decision.size(); ++k) {
        const std::size_t dist = k > peak ? k - peak : peak - k;
        if (dist > exclusion_width) side = std::max(side, std::norm(decision[k]));
    }
    return capped_ratio_db(std::norm(decision[peak]), side);
}

std::vector<ComplexSignal> focusing_receptions(const CirEnsemble& ensemble, std::size_t target,
                                               const ChirpSpec& chirp) {
    validate_ensemble(ensemble);
    if (target >= ensemble.size()) throw std::out_of_range("focusing_profile: target index out of range");
    const ComplexSignal spread = chirp_spread_filter(tr_filter(ensemble[target]), chirp);
    const ComplexSignal probe = make_chirp(chirp);
    std::vector<ComplexSignal> out;
    out.reserve(ensemble.size());
    for (const Cir& cir : ensemble.entries) {
        out.push_back(cross_correlate(convolve(spread, cir.taps), probe));
    }
    return out;
}

std::vector<double> focusing_profile(const CirEnsemble& ensemble, std::size_t target, const ChirpSpec& chirp) {
    std::vector<double> profile;
    for (const ComplexSignal& rx : focusing_receptions(ensemble, target, chirp)) {
        double peak = 0.0;
        for (const Sample& s : rx) peak = std::max(peak, std::norm(s));
        profile.push_back(peak);
    }
    return profile;
}

void write_metrics_csv(const std::vector<MetricsReport>& reports, const std::filesystem::path& path) {
    try {
        auto out = fmt::output_file(path.string());
        out.print("config_id,user,bit_rate_bps,sinr_db,ber,pslr_db,seed\n");
        for (const MetricsReport& r : reports) {
            out.print("{},{},{:.16e},{:.16e},{:.16e},{:.16e},{}\n", r.config_id, r.user, r.bit_rate_bps, r.sinr_db,
                      r.ber, r.pslr_db, r.seed);
        }
    } catch (const std::system_error& e) {
        throw IoError("cannot write " + path.string() + ": " + e.what());
    }
}

}  // namespace trdma
