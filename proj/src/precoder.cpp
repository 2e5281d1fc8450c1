#include "trdma/precoder.hpp"

#include <cmath>
#include <stdexcept>

namespace trdma {

TrFilter tr_filter(const Cir& cir) {
    validate_cir(cir);
    const double norm = std::sqrt(energy(cir.taps));
    return TrFilter{Sample{1.0 / norm, 0.0} * time_reverse_conjugate(cir.taps), norm};
}

ComplexSignal precode_multiuser(const std::vector<UserStream>& streams, std::size_t backoff) {
    if (streams.empty()) throw std::invalid_argument("precode_multiuser: no streams");
    if (backoff < 1) throw std::invalid_argument("precode_multiuser: rate backoff D must be >= 1");
    const std::size_t taps = streams.front().filter.size();
    std::size_t longest = 0;
    for (const UserStream& s : streams) {
        if (s.filter.size() != taps) throw std::invalid_argument("precode_multiuser: filters differ in L");
        if (s.symbols.empty()) throw std::invalid_argument("precode_multiuser: stream without symbols");
        longest = std::max(longest, s.symbols.size());
    }

    ComplexSignal out = ComplexSignal::zeros((longest - 1) * backoff + taps);
    for (const UserStream& s : streams) {
        std::vector<Sample> up((s.symbols.size() - 1) * backoff + 1, Sample{});
        for (std::size_t l = 0; l < s.symbols.size(); ++l) up[l * backoff] = s.symbols[l];
        const ComplexSignal part = convolve(ComplexSignal(std::move(up)), s.filter.taps);
        for (std::size_t k = 0; k < part.size(); ++k) out[k] += part[k];
    }
    return out;
}

ComplexSignal correlation_function(const Cir& cir_j, const Cir& cir_i) {
    if (cir_j.taps.empty() || cir_i.taps.empty()) {
        throw std::invalid_argument("correlation_function: empty response");
    }
    const double norm_i = std::sqrt(energy(cir_i.taps));
    if (!(norm_i > 0.0)) throw std::invalid_argument("correlation_function: zero-energy h_i");

    const auto lj = static_cast<std::ptrdiff_t>(cir_j.size());
    const auto li = static_cast<std::ptrdiff_t>(cir_i.size());
    // Lags where the supports overlap: n in [0, lj), n + k in [0, li).
    const std::ptrdiff_t lo = -(lj - 1);
    const std::ptrdiff_t hi = li - 1;
    std::vector<Sample> r(static_cast<std::size_t>(hi - lo + 1));
    for (std::ptrdiff_t k = lo; k <= hi; ++k) {
        Sample acc{};
        for (std::ptrdiff_t n = std::max<std::ptrdiff_t>(0, -k); n < lj && n + k < li; ++n) {
            acc += std::conj(cir_i.taps[static_cast<std::size_t>(n + k)]) * cir_j.taps[static_cast<std::size_t>(n)];
        }
        r[static_cast<std::size_t>(k - lo)] = acc / norm_i;
    }
    return ComplexSignal(std::move(r));
}

Sample correlation_at(const ComplexSignal& r, std::ptrdiff_t lag) {
    // Full support is symmetric around the centre only for equal lengths,
    // which is the only case the precoder produces.
    const auto half = static_cast<std::ptrdiff_t>(r.size() / 2);
    const std::ptrdiff_t idx = lag + half;
    if (idx < 0 || idx >= static_cast<std::ptrdiff_t>(r.size())) return Sample{};
    return r[static_cast<std::size_t>(idx)];
}

std::vector<ReceptionParts> decompose_reception(const std::vector<UserStream>& streams,
                                                const std::vector<Cir>& channels, std::size_t backoff,
                                                std::size_t target,
                                                const std::vector<std::size_t>& symbol_indices) {
    if (streams.size() != channels.size()) {
        throw std::invalid_argument("decompose_reception: one channel per stream required");
    }
    if (target >= streams.size()) throw std::invalid_argument("decompose_reception: target out of range");
    if (backoff < 1) throw std::invalid_argument("decompose_reception: rate backoff D must be >= 1");
    const std::size_t taps = channels[target].size();
    for (const Cir& c : channels) {
        if (c.size() != taps) throw std::invalid_argument("decompose_reception: channels differ in L");
    }

    std::vector<ComplexSignal> corr;
    corr.reserve(streams.size());
    for (const Cir& c : channels) corr.push_back(correlation_function(channels[target], c));

    const auto d = static_cast<std::ptrdiff_t>(backoff);
    std::vector<ReceptionParts> out;
    out.reserve(symbol_indices.size());
    for (std::size_t k : symbol_indices) {
        ReceptionParts parts;
        parts.symbol_index = k;
        const auto kk = static_cast<std::ptrdiff_t>(k);
        for (std::size_t i = 0; i < streams.size(); ++i) {
            const auto& x = streams[i].symbols;
            for (std::size_t l = 0; l < x.size(); ++l) {
                const auto ll = static_cast<std::ptrdiff_t>(l);
                const Sample term = x[l] * correlation_at(corr[i], (ll - kk) * d);
                if (i != target) {
                    parts.iui += term;
                } else if (l == k) {
                    parts.signal += term;
                } else {
                    parts.isi += term;
                }
            }
        }
        out.push_back(parts);
    }
    return out;
}

ComplexSignal chirp_spread_filter(const TrFilter& filter, const ChirpSpec& chirp) {
    return normalize_unit_energy(convolve(filter.taps, make_chirp(chirp)));
}

}  // namespace trdma
