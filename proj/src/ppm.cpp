#include "trdma/ppm.hpp"

#include "trdma/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace trdma {

std::size_t auto_backoff(std::size_t chirp_taps, unsigned bits_per_symbol) {
    if (bits_per_symbol >= 8 * sizeof(std::size_t)) return 0;
    return chirp_taps >> bits_per_symbol;
}

PpmConfig PpmConfig::make(unsigned bits_per_symbol, std::size_t chirp_taps, std::size_t cir_taps,
                          std::size_t num_users, std::optional<std::size_t> backoff,
                          std::optional<std::size_t> frame_len, double bandwidth_hz) {
    PpmConfig cfg;
    cfg.bits_per_symbol = bits_per_symbol;
    cfg.chirp_taps = chirp_taps;
    cfg.cir_taps = cir_taps;
    cfg.num_users = num_users;
    cfg.bandwidth_hz = bandwidth_hz;
    cfg.backoff = backoff.value_or(auto_backoff(chirp_taps, bits_per_symbol));
    if (frame_len) {
        cfg.frame_len = *frame_len;
    } else if (bits_per_symbol < 31 && cir_taps >= 1) {
        cfg.frame_len = std::max(chirp_taps + cir_taps - 1, cfg.num_positions() * cfg.backoff);
    } else {
        cfg.frame_len = 0;
    }
    validate(cfg);
    return cfg;
}

void validate(const PpmConfig& cfg) {
    if (cfg.bits_per_symbol < 1 || cfg.bits_per_symbol > 30) {
        throw ConfigError("bits_per_symbol", "M must lie in [1, 30]");
    }
    if (cfg.chirp_taps < 2) throw ConfigError("chirp_taps", "tau_c must be >= 2");
    if (cfg.cir_taps < 1) throw ConfigError("cir_taps", "L must be >= 1");
    if (cfg.num_users < 1) throw ConfigError("users", "at least one user required");
    if (cfg.backoff < 1) {
        throw ConfigError("backoff", "rate backoff D must be >= 1 (auto D = floor(tau_c / 2^M) is 0)");
    }
    if (cfg.num_positions() * cfg.backoff > cfg.frame_len) {
        throw ConfigError("frame_len", "constraint 2^M * D <= frame_len violated (2^M * D = " +
                                           std::to_string(cfg.num_positions() * cfg.backoff) +
                                           ", frame_len = " + std::to_string(cfg.frame_len) + ")");
    }
    if (cfg.frame_len < cfg.chirp_taps + cfg.cir_taps - 1) {
        throw ConfigError("frame_len", "constraint frame_len >= tau_c + L - 1 violated (tau_c + L - 1 = " +
                                           std::to_string(cfg.chirp_taps + cfg.cir_taps - 1) +
                                           ", frame_len = " + std::to_string(cfg.frame_len) + ")");
    }
    if (!(cfg.bandwidth_hz > 0.0)) throw ConfigError("bandwidth_hz", "bandwidth must be positive");
}

std::uint32_t ppm_encode(std::span<const std::uint8_t> bits, unsigned bits_per_symbol) {
    if (bits.size() != bits_per_symbol) {
        throw std::invalid_argument("ppm_encode: expected " + std::to_string(bits_per_symbol) + " bits, got " +
                                    std::to_string(bits.size()));
    }
    if (bits_per_symbol < 1 || bits_per_symbol > 30) throw std::invalid_argument("ppm_encode: M out of range");
    std::uint32_t m = 0;
    for (std::uint8_t b : bits) {
        if (b > 1) throw std::invalid_argument("ppm_encode: bits must be 0 or 1");
        m = (m << 1) | b;
    }
    return m;
}

std::vector<std::uint8_t> ppm_decode(std::uint32_t m, unsigned bits_per_symbol) {
    if (bits_per_symbol < 1 || bits_per_symbol > 30) throw std::invalid_argument("ppm_decode: M out of range");
    if (m >> bits_per_symbol) throw std::invalid_argument("ppm_decode: symbol out of range");
    std::vector<std::uint8_t> bits(bits_per_symbol);
    for (unsigned b = 0; b < bits_per_symbol; ++b) bits[b] = (m >> (bits_per_symbol - 1 - b)) & 1u;
    return bits;
}

ComplexSignal ppm_frame(const ComplexSignal& spread, std::uint32_t m, const PpmConfig& cfg) {
    validate(cfg);
    if (m >= cfg.num_positions()) throw std::invalid_argument("ppm_frame: symbol out of range");
    if (spread.size() > cfg.frame_len) throw std::invalid_argument("ppm_frame: waveform longer than frame");
    const auto shift = static_cast<std::int64_t>(m) * static_cast<std::int64_t>(cfg.backoff);
    return normalize_unit_energy(rotate_circular(zero_pad(spread, cfg.frame_len), shift));
}

ComplexSignal transmit_frame(const std::vector<UserFrame>& users, const PpmConfig& cfg) {
    if (users.empty()) throw std::invalid_argument("transmit_frame: no users");
    ComplexSignal tx = ComplexSignal::zeros(cfg.frame_len);
    for (const UserFrame& u : users) tx += ppm_frame(u.spread, u.symbol, cfg);
    return tx;
}

ComplexSignal receive_frame(const ComplexSignal& tx_frame, const Cir& cir, double sigma, RngSeed seed,
                            const PpmConfig& cfg) {
    validate(cfg);
    if (tx_frame.size() != cfg.frame_len) throw std::invalid_argument("receive_frame: frame length mismatch");
    if (cir.size() > cfg.frame_len) throw std::invalid_argument("receive_frame: CIR longer than frame");
    const ComplexSignal rx = apply_channel(tx_frame, cir, sigma, seed, ConvolutionMode::circular(cfg.frame_len));
    return cross_correlate_circular(rx, make_chirp(cfg.chirp()));
}

std::size_t candidate_index(std::uint32_t m, const PpmConfig& cfg) {
    return (static_cast<std::size_t>(m) * cfg.backoff + cfg.focus_offset()) % cfg.frame_len;
}

PpmDetection ppm_detect(const ComplexSignal& decision, const PpmConfig& cfg) {
    if (decision.size() != cfg.frame_len) throw std::invalid_argument("ppm_detect: decision length mismatch");
    PpmDetection det;
    double best = -1.0;
    double second = -1.0;
    for (std::uint32_t m = 0; m < cfg.num_positions(); ++m) {
        const double p = std::norm(decision[candidate_index(m, cfg)]);
        if (p > best) {
            second = best;
            best = p;
            det.symbol = m;
        } else if (p > second) {
            second = p;
        }
    }
    det.peak_power = best;
    det.runner_up_power = std::max(second, 0.0);
    return det;
}

double bit_rate(const PpmConfig& cfg) {
    return static_cast<double>(cfg.num_users) * cfg.bandwidth_hz * static_cast<double>(cfg.bits_per_symbol) /
           static_cast<double>(cfg.chirp_taps);
}

}  // namespace trdma
