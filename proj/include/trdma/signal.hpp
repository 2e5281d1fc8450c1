// signal.hpp - complex-baseband signal primitives
//
// Every waveform in the simulator (transmit frames, channel impulse
// responses, correlator outputs) is a ComplexSignal: a sequence of complex
// baseband samples, one per tap of duration 1/B.
//
// All functions here are pure; randomness enters only through an explicit
// RngSeed.

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace trdma {

using Sample = std::complex<double>;

// Default tap duration for B = 2 GHz.
inline constexpr double kDefaultTapSeconds = 0.5e-9;

class ComplexSignal {
public:
    ComplexSignal() = default;
    explicit ComplexSignal(std::vector<Sample> samples, double tap_seconds = kDefaultTapSeconds);
    // All-zero signal of the given length.
    static ComplexSignal zeros(std::size_t length, double tap_seconds = kDefaultTapSeconds);

    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }
    double tap_seconds() const { return tap_seconds_; }

    const Sample& operator[](std::size_t k) const { return samples_[k]; }
    Sample& operator[](std::size_t k) { return samples_[k]; }

    std::span<const Sample> view() const { return samples_; }
    const std::vector<Sample>& samples() const { return samples_; }
    std::vector<Sample>& samples() { return samples_; }

    auto begin() const { return samples_.begin(); }
    auto end() const { return samples_.end(); }

    ComplexSignal& operator+=(const ComplexSignal& other);
    ComplexSignal& operator*=(Sample factor);

    friend bool operator==(const ComplexSignal&, const ComplexSignal&) = default;

private:
    std::vector<Sample> samples_;
    double tap_seconds_ = kDefaultTapSeconds;
};

ComplexSignal operator*(Sample factor, ComplexSignal x);

struct ChirpSpec {
    std::size_t tau_c = 0;   // chirp length in taps
    double amplitude = 1.0;
};

struct RngSeed {
    std::uint64_t value = 0;
};

// Mixes a master seed with a stream index (splitmix64 finalizer). Used to
// give every frame / sweep point its own independent stream.
RngSeed derive_seed(RngSeed master, std::uint64_t index);

class ConvolutionMode {
public:
    static ConvolutionMode linear() { return ConvolutionMode{0}; }
    static ConvolutionMode circular(std::size_t frame_len) { return ConvolutionMode{frame_len}; }

    bool is_circular() const { return frame_len_ != 0; }
    std::size_t frame_len() const { return frame_len_; }

private:
    explicit ConvolutionMode(std::size_t n) : frame_len_(n) {}
    std::size_t frame_len_;
};

// c[k] = amplitude * exp(i*pi*(k - tau_c/2)^2 / tau_c), k = 0..tau_c-1.
// Instantaneous frequency (k - tau_c/2)/tau_c sweeps -1/2 .. +1/2 cycles/tap.
ComplexSignal make_chirp(const ChirpSpec& spec);

ComplexSignal convolve(const ComplexSignal& a, const ComplexSignal& b,
                       ConvolutionMode mode = ConvolutionMode::linear());

// Index of lag 0 in the output of cross_correlate(x, ref) is len(ref) - 1.
inline std::size_t correlation_zero_lag(std::size_t ref_len) { return ref_len - 1; }

// out[k + len(ref) - 1] = sum_n conj(ref[n]) * x[n + k], k = -(len(ref)-1) .. len(x)-1.
ComplexSignal cross_correlate(const ComplexSignal& x, const ComplexSignal& ref);

// out[k] = sum_n conj(ref[n]) * x[(n + k) mod len(x)]; requires len(ref) <= len(x).
ComplexSignal cross_correlate_circular(const ComplexSignal& x, const ComplexSignal& ref);

// out[k] = conj(h[L-1-k]).
ComplexSignal time_reverse_conjugate(const ComplexSignal& h);

// out[k] = x[(k - m) mod len(x)]; m may be negative.
ComplexSignal rotate_circular(const ComplexSignal& x, std::int64_t m);

// Adds circularly-symmetric complex Gaussian noise of total variance sigma^2 per tap.
ComplexSignal add_awgn(const ComplexSignal& x, double sigma, RngSeed seed);

double energy(const ComplexSignal& x);
double energy(std::span<const Sample> x);
ComplexSignal normalize_unit_energy(const ComplexSignal& x);

// Zero-pads (or rejects truncation of) x to the requested length.
ComplexSignal zero_pad(const ComplexSignal& x, std::size_t length);

// CSV with header `index,re,im`, scientific notation, 17 significant digits.
void save_signal_csv(const ComplexSignal& x, const std::filesystem::path& path);
ComplexSignal load_signal_csv(const std::filesystem::path& path);

}  // namespace trdma
