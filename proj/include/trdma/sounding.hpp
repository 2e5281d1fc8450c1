// sounding.hpp - chirp channel sounding and matched-filter CIR estimation

#pragma once

#include "trdma/channel.hpp"
#include "trdma/signal.hpp"

#include <cstdint>
#include <optional>

namespace trdma {

struct SoundingResult {
    Cir estimated;
    // Lag (taps, relative to the correlator's zero lag) of the first
    // estimated tap.
    std::int64_t alignment_offset = 0;
    std::optional<double> nmse;
};

// The probe as seen by the receiver: linear channel plus noise.
ComplexSignal sound_channel(const ChirpSpec& chirp, const Cir& cir, double sigma, RngSeed seed);

// Matched filter, then the L-tap lag window of maximal energy (earliest on
// ties), scaled by 1 / energy(chirp).
SoundingResult estimate_cir(const ComplexSignal& received, const ChirpSpec& chirp, std::size_t taps);

// Normalised squared error of an estimate against the true response, with
// both placed on the absolute lag axis (truth starts at lag 0).
double sounding_nmse(const SoundingResult& result, const Cir& truth);

// Same as estimate_cir, filling in nmse from the known truth.
SoundingResult estimate_cir(const ComplexSignal& received, const ChirpSpec& chirp, const Cir& truth);

// sigma giving the requested per-sample SNR for a signal of the given
// average power per tap.
double sigma_for_snr(double signal_power_per_tap, double snr_db);

}  // namespace trdma
