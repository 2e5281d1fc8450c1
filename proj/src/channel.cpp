#include "trdma/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace trdma {

namespace {

constexpr double kSpeedOfLight = 299'792'458.0;

double wrap_cycles(double cycles) { return cycles - std::floor(cycles); }

}  // namespace

void validate_cir(const Cir& cir) {
    if (cir.taps.empty()) throw std::invalid_argument("Cir: no taps");
    if (!(energy(cir.taps) > 0.0)) throw std::invalid_argument("Cir: zero energy");
    if (!std::isfinite(cir.position_mm)) throw std::invalid_argument("Cir: non-finite position");
}

void validate_ensemble(const CirEnsemble& ensemble) {
    if (ensemble.entries.empty()) throw std::invalid_argument("CirEnsemble: empty");
    const std::size_t taps = ensemble.taps();
    for (std::size_t i = 0; i < ensemble.size(); ++i) {
        validate_cir(ensemble[i]);
        if (ensemble[i].size() != taps) throw std::invalid_argument("CirEnsemble: tap counts differ");
        if (i > 0 && ensemble[i].position_mm < ensemble[i - 1].position_mm) {
            throw std::invalid_argument("CirEnsemble: positions must be non-decreasing");
        }
    }
}

std::vector<WaveguidePath> waveguide_paths(const WaveguideModelCfg& cfg, double position_mm) {
    if (cfg.num_paths < 1) throw std::invalid_argument("waveguide: num_paths must be >= 1");
    if (!(cfg.tube_length_m > 0.0) || !(cfg.tube_diameter_m > 0.0)) {
        throw std::invalid_argument("waveguide: tube dimensions must be positive");
    }
    if (!(cfg.loss_per_reflection_db >= 0.0)) {
        throw std::invalid_argument("waveguide: loss_per_reflection_db must be >= 0");
    }
    if (!(cfg.incident_angle_deg >= 0.0 && cfg.incident_angle_deg < 90.0)) {
        throw std::invalid_argument("waveguide: incident angle must be in [0, 90) degrees");
    }
    if (cfg.taps < 1) throw std::invalid_argument("waveguide: taps must be >= 1");

    const double tilt = std::tan(cfg.incident_angle_deg * std::numbers::pi / 180.0);
    const auto centre = static_cast<std::size_t>(std::llround(cfg.tube_length_m * tilt / cfg.tube_diameter_m));
    const std::size_t half = (cfg.num_paths - 1) / 2;
    const std::size_t first = centre > half ? centre - half : 0;
    if (first > cfg.max_reflections) {
        throw std::invalid_argument("waveguide: incident angle needs more than max_reflections bounces");
    }
    const std::size_t last = std::min(cfg.max_reflections, first + cfg.num_paths - 1);

    const double rx = position_mm * 1e-3;
    std::vector<WaveguidePath> paths;
    for (std::size_t r = first; r <= last; ++r) {
        // Image of a centred source after r bounces sits r diameters off axis.
        const double transverse = static_cast<double>(r) * cfg.tube_diameter_m - rx;
        const double length = std::hypot(cfg.tube_length_m, transverse);
        const double amplitude = std::pow(10.0, -static_cast<double>(r) * cfg.loss_per_reflection_db / 20.0);
        paths.push_back(WaveguidePath{r, length, 0, amplitude});
    }
    const double shortest =
        std::min_element(paths.begin(), paths.end(), [](const auto& a, const auto& b) {
            return a.length_m < b.length_m;
        })->length_m;
    for (WaveguidePath& p : paths) {
        const double delay = (p.length_m - shortest) / kSpeedOfLight * cfg.bandwidth_hz;
        p.delay_taps = static_cast<std::size_t>(std::llround(delay));
        if (p.delay_taps >= cfg.taps) {
            throw std::invalid_argument("waveguide: path delay of " + std::to_string(p.delay_taps) +
                                        " taps does not fit in " + std::to_string(cfg.taps) + " taps");
        }
    }
    return paths;
}

CirEnsemble generate_waveguide_ensemble(const WaveguideModelCfg& cfg,
                                        const std::vector<double>& positions_mm, RngSeed seed) {
    if (positions_mm.empty()) throw std::invalid_argument("waveguide: no positions");

    // Wall phase per bounce order, shared by all receive positions.
    std::mt19937_64 rng(seed.value);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::vector<double> wall_cycles(cfg.max_reflections + 1);
    for (double& w : wall_cycles) w = uniform(rng);

    CirEnsemble ensemble;
    ensemble.bandwidth_ghz = cfg.bandwidth_hz * 1e-9;
    ensemble.carrier_ghz = cfg.carrier_hz * 1e-9;
    for (double pos : positions_mm) {
        const auto paths = waveguide_paths(cfg, pos);
        double power = 0.0;
        for (const auto& p : paths) power += p.amplitude * p.amplitude;
        const double scale = 1.0 / std::sqrt(power);

        std::vector<Sample> taps(cfg.taps, Sample{});
        for (const auto& p : paths) {
            const double carrier = wrap_cycles(p.length_m / kSpeedOfLight * cfg.carrier_hz);
            const double phase = -2.0 * std::numbers::pi * (carrier + wall_cycles[p.reflections]);
            taps[p.delay_taps] += std::polar(p.amplitude * scale, phase);
        }
        if (!(energy(std::span<const Sample>(taps)) > 0.0)) {
            throw std::invalid_argument("waveguide: paths cancelled to a zero-energy response");
        }
        ensemble.entries.push_back(Cir{ComplexSignal(std::move(taps)), pos});
    }
    validate_ensemble(ensemble);
    return ensemble;
}

std::vector<double> exponential_pdp(std::size_t taps, double delay_spread_taps) {
    if (taps < 1) throw std::invalid_argument("pdp: taps must be >= 1");
    if (!(delay_spread_taps > 0.0)) throw std::invalid_argument("pdp: delay spread must be > 0");
    std::vector<double> pdp(taps);
    double total = 0.0;
    for (std::size_t l = 0; l < taps; ++l) {
        pdp[l] = std::exp(-static_cast<double>(l) / delay_spread_taps);
        total += pdp[l];
    }
    for (double& p : pdp) p /= total;
    return pdp;
}

CirEnsemble generate_correlated_ensemble(const CorrelatedTapsCfg& cfg, RngSeed seed) {
    if (!(cfg.spatial_corr_per_mm >= 0.0 && cfg.spatial_corr_per_mm <= 1.0)) {
        throw std::invalid_argument("correlated ensemble: spatial_corr_per_mm must lie in [0, 1]");
    }
    if (cfg.positions_mm.empty()) throw std::invalid_argument("correlated ensemble: no positions");
    if (!std::is_sorted(cfg.positions_mm.begin(), cfg.positions_mm.end())) {
        throw std::invalid_argument("correlated ensemble: positions must be non-decreasing");
    }
    const std::vector<double> pdp = exponential_pdp(cfg.taps, cfg.delay_spread_taps);

    std::mt19937_64 rng(seed.value);
    std::normal_distribution<double> gauss(0.0, std::numbers::sqrt2 / 2.0);
    auto draw = [&] {
        std::vector<Sample> u(cfg.taps);
        for (Sample& s : u) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            s = Sample{re, im};
        }
        return u;
    };

    // Gauss-Markov chain across positions: neighbouring responses share the
    // previous innovation with weight rho = corr^|dx|, so any pair dx apart
    // has correlation corr^dx.
    CirEnsemble ensemble;
    std::vector<Sample> state = draw();
    for (std::size_t i = 0; i < cfg.positions_mm.size(); ++i) {
        if (i > 0) {
            const double dx = cfg.positions_mm[i] - cfg.positions_mm[i - 1];
            const double rho = std::pow(cfg.spatial_corr_per_mm, dx);
            const double innov = std::sqrt(std::max(0.0, 1.0 - rho * rho));
            const std::vector<Sample> fresh = draw();
            for (std::size_t l = 0; l < cfg.taps; ++l) state[l] = rho * state[l] + innov * fresh[l];
        }
        std::vector<Sample> taps(cfg.taps);
        for (std::size_t l = 0; l < cfg.taps; ++l) taps[l] = std::sqrt(pdp[l]) * state[l];
        ensemble.entries.push_back(Cir{ComplexSignal(std::move(taps)), cfg.positions_mm[i]});
    }
    validate_ensemble(ensemble);
    return ensemble;
}

ComplexSignal apply_channel(const ComplexSignal& tx, const Cir& cir, double sigma, RngSeed seed,
                            ConvolutionMode mode) {
    return add_awgn(convolve(tx, cir.taps, mode), sigma, seed);
}

CorrelationMatrix spatial_correlation(const CirEnsemble& ensemble) {
    validate_ensemble(ensemble);
    const std::size_t n = ensemble.size();
    std::vector<double> norms(n);
    for (std::size_t i = 0; i < n; ++i) norms[i] = std::sqrt(energy(ensemble[i].taps));

    CorrelationMatrix m{n, std::vector<Sample>(n * n)};
    for (std::size_t i = 0; i < n; ++i) {
        m.values[i * n + i] = Sample{1.0, 0.0};
        for (std::size_t j = i + 1; j < n; ++j) {
            Sample acc{};
            for (std::size_t l = 0; l < ensemble.taps(); ++l) {
                acc += std::conj(ensemble[i].taps[l]) * ensemble[j].taps[l];
            }
            acc /= norms[i] * norms[j];
            m.values[i * n + j] = acc;
            m.values[j * n + i] = std::conj(acc);
        }
    }
    return m;
}

}  // namespace trdma
