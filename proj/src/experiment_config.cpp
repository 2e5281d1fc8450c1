#include "trdma/errors.hpp"
#include "trdma/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <string_view>

namespace trdma {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

struct Field {
    std::string key;
    std::string_view value;
    std::size_t line;

    [[noreturn]] void fail(const std::string& what) const { throw ConfigError(key, what, line); }

    double real() const {
        if (value == "inf" || value == "+inf") return std::numeric_limits<double>::infinity();
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
        if (ec != std::errc{} || ptr != value.data() + value.size() || std::isnan(v)) {
            fail("expected a number, got '" + std::string(value) + "'");
        }
        return v;
    }

    std::uint64_t u64() const {
        std::uint64_t v = 0;
        const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
        if (ec != std::errc{} || ptr != value.data() + value.size()) {
            fail("expected a non-negative integer, got '" + std::string(value) + "'");
        }
        return v;
    }

    std::size_t size() const { return static_cast<std::size_t>(u64()); }

    std::optional<std::size_t> size_or_auto() const {
        if (value == "auto") return std::nullopt;
        return size();
    }

    std::vector<double> reals() const {
        std::vector<double> out;
        for (std::string_view item : split(value, ',')) {
            out.push_back(Field{key, item, line}.real());
        }
        return out;
    }

    std::vector<std::size_t> sizes() const {
        std::vector<std::size_t> out;
        for (std::string_view item : split(value, ',')) out.push_back(Field{key, item, line}.size());
        return out;
    }

    std::vector<RatePoint> rate_points() const {
        std::vector<RatePoint> out;
        for (std::string_view item : split(value, ',')) {
            const auto parts = split(item, ':');
            if (parts.size() != 2) fail("expected tau_c:M pairs");
            out.push_back(RatePoint{Field{key, parts[0], line}.size(),
                                    static_cast<unsigned>(Field{key, parts[1], line}.size())});
        }
        return out;
    }
};

using Setter = std::function<void(ExperimentConfig&, const Field&)>;

const std::map<std::string, Setter, std::less<>>& setters() {
    static const std::map<std::string, Setter, std::less<>> table = {
        {"config_id", [](auto& c, const Field& f) { c.config_id = std::string(f.value); }},
        {"channel",
         [](auto& c, const Field& f) {
             if (f.value == "correlated") c.channel = ChannelModel::correlated;
             else if (f.value == "waveguide") c.channel = ChannelModel::waveguide;
             else if (f.value == "file") c.channel = ChannelModel::file;
             else f.fail("expected correlated | waveguide | file");
         }},
        {"taps", [](auto& c, const Field& f) { c.taps = f.size(); }},
        {"delay_spread_taps", [](auto& c, const Field& f) { c.delay_spread_taps = f.real(); }},
        {"spatial_corr_per_mm", [](auto& c, const Field& f) { c.spatial_corr_per_mm = f.real(); }},
        {"positions_mm", [](auto& c, const Field& f) { c.positions_mm = f.reals(); }},
        {"cir_file", [](auto& c, const Field& f) { c.cir_file = std::string(f.value); }},
        {"waveguide.num_paths", [](auto& c, const Field& f) { c.waveguide.num_paths = f.size(); }},
        {"waveguide.tube_length_m", [](auto& c, const Field& f) { c.waveguide.tube_length_m = f.real(); }},
        {"waveguide.tube_diameter_mm",
         [](auto& c, const Field& f) { c.waveguide.tube_diameter_m = f.real() * 1e-3; }},
        {"waveguide.incident_angle_deg",
         [](auto& c, const Field& f) { c.waveguide.incident_angle_deg = f.real(); }},
        {"waveguide.max_reflections", [](auto& c, const Field& f) { c.waveguide.max_reflections = f.size(); }},
        {"waveguide.loss_db", [](auto& c, const Field& f) { c.waveguide.loss_per_reflection_db = f.real(); }},
        {"channel_seed", [](auto& c, const Field& f) { c.channel_seed = f.u64(); }},
        {"users", [](auto& c, const Field& f) { c.users = f.sizes(); }},
        {"chirp_taps", [](auto& c, const Field& f) { c.chirp_taps = f.size(); }},
        {"bits_per_symbol", [](auto& c, const Field& f) { c.bits_per_symbol = static_cast<unsigned>(f.size()); }},
        {"backoff", [](auto& c, const Field& f) { c.backoff = f.size_or_auto(); }},
        {"frame_len", [](auto& c, const Field& f) { c.frame_len = f.size_or_auto(); }},
        {"snr_db", [](auto& c, const Field& f) { c.snr_db = f.real(); }},
        {"sigma", [](auto& c, const Field& f) { c.sigma = f.real(); }},
        {"frames", [](auto& c, const Field& f) { c.frames = f.size(); }},
        {"seed", [](auto& c, const Field& f) { c.seed = f.u64(); }},
        {"csi",
         [](auto& c, const Field& f) {
             if (f.value == "perfect") c.csi = CsiMode::perfect;
             else if (f.value == "sounded") c.csi = CsiMode::sounded;
             else f.fail("expected perfect | sounded");
         }},
        {"sounding_chirp_taps", [](auto& c, const Field& f) { c.sounding_chirp_taps = f.size(); }},
        {"sounding_snr_db", [](auto& c, const Field& f) { c.sounding_snr_db = f.real(); }},
        {"bandwidth_hz", [](auto& c, const Field& f) { c.bandwidth_hz = f.real(); }},
        {"carrier_hz", [](auto& c, const Field& f) { c.carrier_hz = f.real(); }},
        {"sweep", [](auto& c, const Field& f) { c.sweep = f.rate_points(); }},
        {"pslr_exclusion", [](auto& c, const Field& f) { c.pslr_exclusion = f.size(); }},
        {"threads", [](auto& c, const Field& f) { c.threads = f.size(); }},
        {"out", [](auto& c, const Field& f) { c.out = std::string(f.value); }},
    };
    return table;
}

}  // namespace

std::vector<RatePoint> reference_rate_table() {
    return {{70, 6}, {300, 8}, {1100, 10}, {2200, 10}, {4000, 10}, {40000, 10}};
}

RngSeed ExperimentConfig::ensemble_seed() const {
    if (channel_seed) return RngSeed{*channel_seed};
    // Index outside the range used for sweep points.
    return derive_seed(RngSeed{seed}, 0xC0FFEEULL << 32);
}

ExperimentConfig parse_experiment_config(std::istream& in) {
    ExperimentConfig cfg;
    std::set<std::string, std::less<>> seen;
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError("", "expected 'key = value'", lineno);
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        const auto it = setters().find(key);
        if (it == setters().end()) throw ConfigError(key, "unknown key", lineno);
        if (!seen.insert(key).second) throw ConfigError(key, "duplicate key", lineno);
        if (value.empty()) throw ConfigError(key, "missing value", lineno);
        it->second(cfg, Field{key, value, lineno});
    }
    validate(cfg);
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) throw FileNotFoundError("no such config: " + path.string());
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    return parse_experiment_config(in);
}

namespace {

void check_point(const ExperimentConfig& cfg, const RatePoint& p) {
    try {
        (void)ppm_config_for(cfg, p);
    } catch (const ConfigError& e) {
        throw ConfigError(e.field(), std::string(e.what()) + " for tau_c = " + std::to_string(p.chirp_taps) +
                                         ", M = " + std::to_string(p.bits_per_symbol));
    }
}

}  // namespace

PpmConfig ppm_config_for(const ExperimentConfig& cfg, const RatePoint& point) {
    return PpmConfig::make(point.bits_per_symbol, point.chirp_taps, cfg.taps, cfg.users.size(), cfg.backoff,
                           cfg.frame_len, cfg.bandwidth_hz);
}

void validate(const ExperimentConfig& cfg) {
    if (cfg.taps < 1) throw ConfigError("taps", "L must be >= 1");
    if (cfg.users.empty()) throw ConfigError("users", "at least one user required");
    if (cfg.frames < 1) throw ConfigError("frames", "frames must be >= 1");
    if (cfg.threads < 1) throw ConfigError("threads", "threads must be >= 1");
    if (cfg.pslr_exclusion < 1) throw ConfigError("pslr_exclusion", "must be >= 1");
    if (cfg.sigma && !(*cfg.sigma >= 0.0 && std::isfinite(*cfg.sigma))) {
        throw ConfigError("sigma", "sigma must be finite and >= 0");
    }
    if (std::isnan(cfg.snr_db)) throw ConfigError("snr_db", "not a number");
    if (!(cfg.bandwidth_hz > 0.0)) throw ConfigError("bandwidth_hz", "bandwidth must be positive");
    if (cfg.sounding_chirp_taps < 2) throw ConfigError("sounding_chirp_taps", "probe must have >= 2 taps");

    switch (cfg.channel) {
    case ChannelModel::correlated:
        if (!(cfg.spatial_corr_per_mm >= 0.0 && cfg.spatial_corr_per_mm <= 1.0)) {
            throw ConfigError("spatial_corr_per_mm", "must lie in [0, 1]");
        }
        if (!(cfg.delay_spread_taps > 0.0)) throw ConfigError("delay_spread_taps", "must be > 0");
        [[fallthrough]];
    case ChannelModel::waveguide:
        if (cfg.positions_mm.empty()) throw ConfigError("positions_mm", "no positions");
        if (!std::is_sorted(cfg.positions_mm.begin(), cfg.positions_mm.end())) {
            throw ConfigError("positions_mm", "positions must be non-decreasing");
        }
        for (std::size_t u : cfg.users) {
            if (u >= cfg.positions_mm.size()) throw ConfigError("users", "position index out of range");
        }
        break;
    case ChannelModel::file:
        if (cfg.cir_file.empty()) throw ConfigError("cir_file", "required for channel = file");
        break;
    }

    check_point(cfg, RatePoint{cfg.chirp_taps, cfg.bits_per_symbol});
}

void validate_sweep(const ExperimentConfig& cfg, const std::vector<RatePoint>& table) {
    if (table.empty()) throw ConfigError("sweep", "no rate points");
    for (const RatePoint& p : table) check_point(cfg, p);
}

}  // namespace trdma
