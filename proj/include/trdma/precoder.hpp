// precoder.hpp - multi-user time-reversal precoding
//
// Lag convention. For users j (receiver) and i (precoded stream):
//
//   R_{j,i}[k] = sum_n conj(h_i[n + k]) h_j[n] / |h_i|,   k = -(L-1) .. L-1
//
// stored at index k + L - 1. With this convention the noiseless sample of
// user j at the focusing instant of symbol k, t = k*D + L - 1, is
//
//   y_j = sum_i sum_l x_i[l] R_{j,i}[(l - k) * D]
//
// and R_{i,i}[0] = |h_i|. The received TR waveform g = filter_i (*) h_j
// relates to R by g[t] = R_{j,i}[L - 1 - t].

#pragma once

#include "trdma/channel.hpp"
#include "trdma/signal.hpp"

#include <cstddef>
#include <vector>

namespace trdma {

struct TrFilter {
    ComplexSignal taps;        // unit energy
    double source_norm = 0.0;  // |h|_2 of the response it was built from

    std::size_t size() const { return taps.size(); }
};

struct UserStream {
    std::size_t user_id = 0;
    std::vector<Sample> symbols;
    TrFilter filter;
};

// Sample index of the focusing peak for an L-tap response under linear
// convolution of a single symbol.
inline std::size_t focusing_instant(std::size_t taps) { return taps - 1; }

TrFilter tr_filter(const Cir& cir);

// s = sum_i upsample(x_i, D) (*) filter_i, upsampling inserts D-1 zeros.
ComplexSignal precode_multiuser(const std::vector<UserStream>& streams, std::size_t backoff);

// Full-support R_{j,i}, length 2L-1, lag 0 at index L-1.
ComplexSignal correlation_function(const Cir& cir_j, const Cir& cir_i);

// R_{j,i}[lag] read from a full-support correlation, zero outside support.
Sample correlation_at(const ComplexSignal& r, std::ptrdiff_t lag);

struct ReceptionParts {
    std::size_t symbol_index = 0;
    Sample signal{};
    Sample isi{};
    Sample iui{};

    Sample total() const { return signal + isi + iui; }
};

// Splits the noiseless reception of `target` (index into streams) at the
// focusing instants of the given symbol indices. `channels[n]` is the true
// response behind streams[n]; the target hears every stream through
// channels[target].
std::vector<ReceptionParts> decompose_reception(const std::vector<UserStream>& streams,
                                                const std::vector<Cir>& channels, std::size_t backoff,
                                                std::size_t target,
                                                const std::vector<std::size_t>& symbol_indices);

// filter (*) chirp, unit energy. Length tau_c + L - 1.
ComplexSignal chirp_spread_filter(const TrFilter& filter, const ChirpSpec& chirp);

}  // namespace trdma
