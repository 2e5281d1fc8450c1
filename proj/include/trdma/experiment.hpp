// experiment.hpp - seeded end-to-end link experiments
//
// Config files are plain text, one `key = value` per line, `#` starts a
// comment. Keys (defaults in brackets):
//
//   config_id            label echoed in metric rows           [run]
//   channel              correlated | waveguide | file         [correlated]
//   taps                 CIR length L                          [64]
//   delay_spread_taps    exponential PDP constant              [16]
//   spatial_corr_per_mm  correlation per mm of separation      [0.3]
//   positions_mm         comma list of receive positions       [-3,-2,-1,0,1,2,3]
//   cir_file             CIR CSV, for channel = file
//   waveguide.num_paths, waveguide.tube_length_m, waveguide.tube_diameter_mm,
//   waveguide.incident_angle_deg, waveguide.max_reflections, waveguide.loss_db
//   channel_seed         ensemble seed                         [derived from seed]
//   users                comma list of position indices        [0,3]
//   chirp_taps           tau_c                                 [40000]
//   bits_per_symbol      M                                     [10]
//   backoff              D or `auto` = floor(tau_c / 2^M)      [auto]
//   frame_len            taps or `auto`                        [auto]
//   snr_db               per-sample input SNR, `inf` = noiseless [inf]
//   sigma                explicit noise std (overrides snr_db)
//   frames               frames per point                      [200]
//   seed                 master seed                           [1]
//   csi                  perfect | sounded                     [perfect]
//   sounding_chirp_taps  probe length for sounded CSI          [4096]
//   sounding_snr_db      per-sample SNR of the probe           [inf]
//   bandwidth_hz         B                                     [2e9]
//   carrier_hz           f_c (metadata)                        [273.6e9]
//   sweep                list of tau_c:M pairs                 [the six rate points]
//   pslr_exclusion       taps excluded around the peak         [1]
//   threads              sweep worker threads                  [1]
//   out                  output directory                      [out]

#pragma once

#include "trdma/channel.hpp"
#include "trdma/metrics.hpp"
#include "trdma/ppm.hpp"
#include "trdma/signal.hpp"

#include <cstdint>
#include <filesystem>
#include <istream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace trdma {

enum class ChannelModel { correlated, waveguide, file };
enum class CsiMode { perfect, sounded };

struct RatePoint {
    std::size_t chirp_taps = 0;
    unsigned bits_per_symbol = 0;

    friend bool operator==(const RatePoint&, const RatePoint&) = default;
};

// (tau_c, M) rows of the reference bit-rate table.
std::vector<RatePoint> reference_rate_table();

struct ExperimentConfig {
    std::string config_id = "run";

    ChannelModel channel = ChannelModel::correlated;
    std::size_t taps = 64;
    double delay_spread_taps = 16.0;
    double spatial_corr_per_mm = 0.3;
    std::vector<double> positions_mm{-3, -2, -1, 0, 1, 2, 3};
    std::filesystem::path cir_file;
    WaveguideModelCfg waveguide;
    std::optional<std::uint64_t> channel_seed;

    std::vector<std::size_t> users{0, 3};
    std::size_t chirp_taps = 40000;
    unsigned bits_per_symbol = 10;
    std::optional<std::size_t> backoff;
    std::optional<std::size_t> frame_len;
    double snr_db = std::numeric_limits<double>::infinity();
    std::optional<double> sigma;
    std::size_t frames = 200;
    std::uint64_t seed = 1;
    CsiMode csi = CsiMode::perfect;
    std::size_t sounding_chirp_taps = 4096;
    double sounding_snr_db = std::numeric_limits<double>::infinity();
    double bandwidth_hz = 2e9;
    double carrier_hz = 273.6e9;
    std::vector<RatePoint> sweep = reference_rate_table();
    std::size_t pslr_exclusion = 1;
    std::size_t threads = 1;
    std::filesystem::path out = "out";

    RngSeed ensemble_seed() const;
};

ExperimentConfig parse_experiment_config(std::istream& in);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Checks every module constraint for the single-run point up front;
// throws ConfigError.
void validate(const ExperimentConfig& cfg);
void validate_sweep(const ExperimentConfig& cfg, const std::vector<RatePoint>& table);
PpmConfig ppm_config_for(const ExperimentConfig& cfg, const RatePoint& point);

CirEnsemble build_ensemble(const ExperimentConfig& cfg);

struct FrameTrace {
    std::size_t frame = 0;
    std::size_t user = 0;
    std::uint32_t m_tx = 0;
    std::uint32_t m_rx = 0;
    double peak_power = 0.0;
    double runner_up_power = 0.0;
    double sinr_db = 0.0;
    double pslr_db = 0.0;
    std::size_t bit_errors = 0;
};

struct LinkResult {
    PpmConfig ppm;
    std::vector<FrameTrace> frames;
    std::vector<MetricsReport> reports;  // one per user
    double median_sinr_db = 0.0;         // over all frames and users
    double ber = 0.0;
    double symbol_error_rate = 0.0;
};

// One rate point over an existing ensemble. Pure given its arguments.
LinkResult simulate_link(const ExperimentConfig& cfg, const CirEnsemble& ensemble, const RatePoint& point,
                         RngSeed seed, const std::string& config_id);

// Writes frames.csv and metrics.csv under cfg.out.
LinkResult run_link_experiment(const ExperimentConfig& cfg);

struct SweepRow {
    std::string config_id;
    RatePoint point;
    std::size_t backoff = 0;
    double bit_rate_bps = 0.0;
    double median_sinr_db = 0.0;
    double ber = 0.0;
};

// Writes sweep.csv and sweep_metrics.csv under cfg.out. Point i uses seed
// derive_seed(seed, i), so results do not depend on `threads`.
std::vector<SweepRow> sweep_bitrates(const ExperimentConfig& cfg, const std::vector<RatePoint>& table);

// Per (target user, position) de-spread traces as signal CSVs plus
// focusing_profile.csv.
std::vector<std::vector<double>> emit_focusing_figure_data(const ExperimentConfig& cfg);

struct SoundTestRow {
    std::size_t position_index = 0;
    double position_mm = 0.0;
    std::int64_t alignment_offset = 0;
    double nmse = 0.0;
};

// Sounds every ensemble position; writes sounding.csv and estimated_cirs.csv.
std::vector<SoundTestRow> run_sound_test(const ExperimentConfig& cfg);

}  // namespace trdma
