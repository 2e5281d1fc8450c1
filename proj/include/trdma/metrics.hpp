// metrics.hpp - SINR, BER, focusing and peak-to-sidelobe figures

#pragma once

#include "trdma/channel.hpp"
#include "trdma/ppm.hpp"
#include "trdma/signal.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace trdma {

// Ratios with a zero denominator report this value instead of +inf.
inline constexpr double kMetricCapDb = 100.0;

// Signal: |decision|^2 at the true candidate. Interference plus noise: mean
// |decision|^2 over the other 2^M - 1 candidates.
double sinr_db(const ComplexSignal& decision, std::uint32_t true_symbol, const PpmConfig& cfg);

// Same estimator from explicit candidate powers.
double sinr_db_from_candidates(std::span<const double> candidate_power, std::size_t true_index);

double bit_error_rate(std::span<const std::uint8_t> tx_bits, std::span<const std::uint8_t> rx_bits);

// Peak |.|^2 divided by the largest |.|^2 further than exclusion_width taps
// from the peak.
double peak_to_sidelobe_db(const ComplexSignal& decision, std::size_t exclusion_width);

// Single-user TR focused on ensemble[target]: chirp-spread, sent through
// every position's response, de-spread; returns max |.|^2 per position.
std::vector<double> focusing_profile(const CirEnsemble& ensemble, std::size_t target, const ChirpSpec& chirp);

// De-spread reception at every position when focusing on `target`
// (the traces behind focusing_profile).
std::vector<ComplexSignal> focusing_receptions(const CirEnsemble& ensemble, std::size_t target,
                                               const ChirpSpec& chirp);

struct MetricsReport {
    std::string config_id;
    std::size_t user = 0;
    double bit_rate_bps = 0.0;
    double sinr_db = 0.0;
    double ber = 0.0;
    double symbol_error_rate = 0.0;
    double pslr_db = 0.0;
    std::uint64_t seed = 0;
    double cap_db = kMetricCapDb;
};

// `config_id,user,bit_rate_bps,sinr_db,ber,pslr_db,seed`
void write_metrics_csv(const std::vector<MetricsReport>& reports, const std::filesystem::path& path);

}  // namespace trdma
