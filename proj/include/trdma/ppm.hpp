// ppm.hpp - pulse position modulation over chirp-spread time reversal
//
// A symbol m in [0, 2^M) places the chirp-spread TR waveform on a grid of
// 2^M candidate positions D taps apart: the zero-padded waveform is
// circularly rotated by m*D taps inside a frame of frame_len taps. The
// receiver de-spreads with a circular chirp correlation and picks the
// candidate with the largest |.|^2 (no phase reference needed). After
// de-spreading, symbol m peaks at (m*D + L - 1) mod frame_len.

#pragma once

#include "trdma/channel.hpp"
#include "trdma/signal.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace trdma {

struct PpmConfig {
    unsigned bits_per_symbol = 1;  // M
    std::size_t chirp_taps = 2;    // tau_c
    std::size_t backoff = 1;       // D, taps between candidate positions
    std::size_t frame_len = 2;
    std::size_t num_users = 1;     // N
    std::size_t cir_taps = 1;      // L
    double bandwidth_hz = 2e9;     // B, only used for bit-rate accounting

    std::size_t num_positions() const { return std::size_t{1} << bits_per_symbol; }
    std::size_t focus_offset() const { return cir_taps - 1; }
    ChirpSpec chirp() const { return ChirpSpec{chirp_taps, 1.0}; }

    // Auto backoff floor(tau_c / 2^M); auto frame_len is the smallest
    // length holding both the spread waveform and the position grid.
    static PpmConfig make(unsigned bits_per_symbol, std::size_t chirp_taps, std::size_t cir_taps,
                          std::size_t num_users, std::optional<std::size_t> backoff = std::nullopt,
                          std::optional<std::size_t> frame_len = std::nullopt, double bandwidth_hz = 2e9);
};

std::size_t auto_backoff(std::size_t chirp_taps, unsigned bits_per_symbol);

// Throws ConfigError naming the violated constraint.
void validate(const PpmConfig& cfg);

// MSB-first.
std::uint32_t ppm_encode(std::span<const std::uint8_t> bits, unsigned bits_per_symbol);
std::vector<std::uint8_t> ppm_decode(std::uint32_t m, unsigned bits_per_symbol);

ComplexSignal ppm_frame(const ComplexSignal& spread, std::uint32_t m, const PpmConfig& cfg);

struct UserFrame {
    ComplexSignal spread;
    std::uint32_t symbol = 0;
};

ComplexSignal transmit_frame(const std::vector<UserFrame>& users, const PpmConfig& cfg);

// Circular channel over frame_len, AWGN, circular correlation with the chirp.
ComplexSignal receive_frame(const ComplexSignal& tx_frame, const Cir& cir, double sigma, RngSeed seed,
                            const PpmConfig& cfg);

struct PpmDetection {
    std::uint32_t symbol = 0;
    double peak_power = 0.0;
    double runner_up_power = 0.0;
};

std::size_t candidate_index(std::uint32_t m, const PpmConfig& cfg);

PpmDetection ppm_detect(const ComplexSignal& decision, const PpmConfig& cfg);

// N * B * M / tau_c.
double bit_rate(const PpmConfig& cfg);

}  // namespace trdma
