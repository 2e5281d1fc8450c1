// channel.hpp - multipath channel ensembles and channel application
//
// Two generators stand in for measured responses:
//   * a straight-ray waveguide model (image sources inside a metal tube,
//     constant loss per wall bounce), and
//   * a statistical model with an exponential power-delay profile and
//     Gauss-Markov correlation across receive positions.
// Measured responses can be loaded from CSV.

#pragma once

#include "trdma/signal.hpp"

#include <filesystem>
#include <vector>

namespace trdma {

struct Cir {
    ComplexSignal taps;
    double position_mm = 0.0;

    std::size_t size() const { return taps.size(); }
};

// Throws std::invalid_argument on an empty or zero-energy response.
void validate_cir(const Cir& cir);

struct CirEnsemble {
    std::vector<Cir> entries;
    double bandwidth_ghz = 2.0;
    double carrier_ghz = 273.6;

    std::size_t size() const { return entries.size(); }
    std::size_t taps() const { return entries.empty() ? 0 : entries.front().size(); }
    const Cir& operator[](std::size_t i) const { return entries[i]; }
};

// Common tap count, positive energy, non-decreasing positions.
void validate_ensemble(const CirEnsemble& ensemble);

struct WaveguideModelCfg {
    std::size_t num_paths = 8;
    double tube_length_m = 1.0;
    double tube_diameter_m = 7e-3;
    double incident_angle_deg = 0.0;
    std::size_t max_reflections = 64;
    double loss_per_reflection_db = 0.5;
    std::size_t taps = 64;
    double bandwidth_hz = 2e9;
    double carrier_hz = 273.6e9;
};

struct CorrelatedTapsCfg {
    std::size_t taps = 64;
    double delay_spread_taps = 16.0;
    double spatial_corr_per_mm = 0.5;
    std::vector<double> positions_mm;
};

// One path per image order r (r wall bounces). The tilted transmitter
// illuminates orders centred on round(length * tan(angle) / diameter);
// num_paths consecutive orders are kept, clipped to [0, max_reflections].
// Path r lands at tap round((d_r - d_first) * B / c) with amplitude
// 10^(-r * loss / 20), carrier phase from its length and a seeded wall phase.
CirEnsemble generate_waveguide_ensemble(const WaveguideModelCfg& cfg,
                                        const std::vector<double>& positions_mm, RngSeed seed);

// Delay of each ray (taps, before rounding) and its bounce count, exposed
// for inspection and tests.
struct WaveguidePath {
    std::size_t reflections;
    double length_m;
    std::size_t delay_taps;
    double amplitude;
};
std::vector<WaveguidePath> waveguide_paths(const WaveguideModelCfg& cfg, double position_mm);

CirEnsemble generate_correlated_ensemble(const CorrelatedTapsCfg& cfg, RngSeed seed);

// Normalised exponential power-delay profile, sums to 1.
std::vector<double> exponential_pdp(std::size_t taps, double delay_spread_taps);

// CSV `position_mm,tap_index,re,im`, sorted by position then tap.
void save_cir_csv(const CirEnsemble& ensemble, const std::filesystem::path& path);
CirEnsemble load_cir_csv(const std::filesystem::path& path);

ComplexSignal apply_channel(const ComplexSignal& tx, const Cir& cir, double sigma, RngSeed seed,
                            ConvolutionMode mode = ConvolutionMode::linear());

// Row-major square matrix of complex correlation coefficients.
struct CorrelationMatrix {
    std::size_t n = 0;
    std::vector<Sample> values;

    Sample operator()(std::size_t i, std::size_t j) const { return values[i * n + j]; }
};

// (i, j) = sum_l conj(h_i[l]) h_j[l] / (|h_i| |h_j|).
CorrelationMatrix spatial_correlation(const CirEnsemble& ensemble);

}  // namespace trdma
