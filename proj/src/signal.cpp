#include "trdma/signal.hpp"

#include "fft_convolution.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace trdma {

namespace {

void require_nonempty(const ComplexSignal& x, const char* what) {
    if (x.empty()) throw std::invalid_argument(std::string(what) + ": empty signal");
}

}  // namespace

ComplexSignal::ComplexSignal(std::vector<Sample> samples, double tap_seconds)
    : samples_(std::move(samples)), tap_seconds_(tap_seconds) {
    for (const Sample& s : samples_) {
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) {
            throw std::invalid_argument("ComplexSignal: non-finite sample");
        }
    }
}

ComplexSignal ComplexSignal::zeros(std::size_t length, double tap_seconds) {
    return ComplexSignal(std::vector<Sample>(length, Sample{}), tap_seconds);
}

ComplexSignal& ComplexSignal::operator+=(const ComplexSignal& other) {
    if (other.size() != size()) throw std::invalid_argument("ComplexSignal +=: length mismatch");
    for (std::size_t k = 0; k < size(); ++k) samples_[k] += other.samples_[k];
    return *this;
}

ComplexSignal& ComplexSignal::operator*=(Sample factor) {
    for (Sample& s : samples_) s *= factor;
    return *this;
}

ComplexSignal operator*(Sample factor, ComplexSignal x) {
    x *= factor;
    return x;
}

RngSeed derive_seed(RngSeed master, std::uint64_t index) {
    std::uint64_t z = master.value + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return RngSeed{z ^ (z >> 31)};
}

ComplexSignal make_chirp(const ChirpSpec& spec) {
    if (spec.tau_c < 2) throw std::invalid_argument("make_chirp: tau_c must be >= 2");
    if (!(spec.amplitude > 0.0) || !std::isfinite(spec.amplitude)) {
        throw std::invalid_argument("make_chirp: amplitude must be positive");
    }
    const double n = static_cast<double>(spec.tau_c);
    std::vector<Sample> c(spec.tau_c);
    for (std::size_t k = 0; k < spec.tau_c; ++k) {
        const double t = static_cast<double>(k) - n / 2.0;
        // Reduce the quadratic phase modulo 2*pi in exact-ish arithmetic:
        // t^2 / n can be ~1e4 rad for long chirps.
        const double cycles = std::fmod(t * t, 2.0 * n) / n;
        c[k] = std::polar(spec.amplitude, std::numbers::pi * cycles);
    }
    return ComplexSignal(std::move(c));
}

ComplexSignal convolve(const ComplexSignal& a, const ComplexSignal& b, ConvolutionMode mode) {
    require_nonempty(a, "convolve");
    require_nonempty(b, "convolve");
    std::vector<Sample> full = detail::linear_convolution(a.view(), b.view());
    if (!mode.is_circular()) return ComplexSignal(std::move(full), a.tap_seconds());

    const std::size_t n = mode.frame_len();
    if (n < std::max(a.size(), b.size())) {
        throw std::invalid_argument("convolve: circular frame_len smaller than an input");
    }
    std::vector<Sample> wrapped(n, Sample{});
    for (std::size_t k = 0; k < full.size(); ++k) wrapped[k % n] += full[k];
    return ComplexSignal(std::move(wrapped), a.tap_seconds());
}

ComplexSignal cross_correlate(const ComplexSignal& x, const ComplexSignal& ref) {
    require_nonempty(x, "cross_correlate");
    require_nonempty(ref, "cross_correlate");
    return convolve(x, time_reverse_conjugate(ref));
}

ComplexSignal cross_correlate_circular(const ComplexSignal& x, const ComplexSignal& ref) {
    require_nonempty(x, "cross_correlate_circular");
    require_nonempty(ref, "cross_correlate_circular");
    if (ref.size() > x.size()) {
        throw std::invalid_argument("cross_correlate_circular: reference longer than signal");
    }
    const ComplexSignal full = cross_correlate(x, ref);
    const std::size_t n = x.size();
    const std::size_t zero = correlation_zero_lag(ref.size());
    std::vector<Sample> out(n, Sample{});
    // full[p] is lag p - zero; lags below zero wrap to the end of the frame.
    for (std::size_t p = 0; p < full.size(); ++p) {
        const std::size_t idx = p >= zero ? (p - zero) % n : n - (zero - p) % n;
        out[idx % n] += full[p];
    }
    return ComplexSignal(std::move(out), x.tap_seconds());
}

ComplexSignal time_reverse_conjugate(const ComplexSignal& h) {
    require_nonempty(h, "time_reverse_conjugate");
    std::vector<Sample> out(h.size());
    const std::size_t last = h.size() - 1;
    for (std::size_t k = 0; k < h.size(); ++k) out[k] = std::conj(h[last - k]);
    return ComplexSignal(std::move(out), h.tap_seconds());
}

ComplexSignal rotate_circular(const ComplexSignal& x, std::int64_t m) {
    require_nonempty(x, "rotate_circular");
    const auto n = static_cast<std::int64_t>(x.size());
    const auto shift = static_cast<std::size_t>(((m % n) + n) % n);
    std::vector<Sample> out(x.samples());
    std::rotate(out.begin(), out.end() - static_cast<std::ptrdiff_t>(shift), out.end());
    return ComplexSignal(std::move(out), x.tap_seconds());
}

ComplexSignal add_awgn(const ComplexSignal& x, double sigma, RngSeed seed) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw std::invalid_argument("add_awgn: sigma must be finite and >= 0");
    }
    if (sigma == 0.0) return x;
    std::mt19937_64 rng(seed.value);
    std::normal_distribution<double> gauss(0.0, sigma / std::numbers::sqrt2);
    std::vector<Sample> out(x.samples());
    for (Sample& s : out) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        s += Sample{re, im};
    }
    return ComplexSignal(std::move(out), x.tap_seconds());
}

double energy(std::span<const Sample> x) {
    double e = 0.0;
    for (const Sample& s : x) e += std::norm(s);
    return e;
}

double energy(const ComplexSignal& x) { return energy(x.view()); }

ComplexSignal normalize_unit_energy(const ComplexSignal& x) {
    const double e = energy(x);
    if (!(e > 0.0)) throw std::invalid_argument("normalize_unit_energy: zero-energy signal");
    return Sample{1.0 / std::sqrt(e), 0.0} * x;
}

ComplexSignal zero_pad(const ComplexSignal& x, std::size_t length) {
    if (length < x.size()) throw std::invalid_argument("zero_pad: target shorter than signal");
    std::vector<Sample> out(x.samples());
    out.resize(length, Sample{});
    return ComplexSignal(std::move(out), x.tap_seconds());
}

}  // namespace trdma
