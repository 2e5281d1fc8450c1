#include "trdma/channel.hpp"
#include "trdma/errors.hpp"
#include "trdma/signal.hpp"

#include <fmt/format.h>
#include <fmt/os.h>

#include <charconv>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace trdma {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
        throw FileNotFoundError("no such file: " + path.string());
    }
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return in;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_double(std::string_view field, std::size_t line) {
    field = trim(field);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw FormatError("malformed number '" + std::string(field) + "'", line);
    }
    return v;
}

std::size_t parse_index(std::string_view field, std::size_t line) {
    field = trim(field);
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw FormatError("malformed index '" + std::string(field) + "'", line);
    }
    return v;
}

void expect_header(std::istream& in, std::string_view header) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty file", 1);
    if (trim(line) != header) {
        throw FormatError("expected header '" + std::string(header) + "'", 1);
    }
}

fmt::ostream open_output(const std::filesystem::path& path) {
    try {
        return fmt::output_file(path.string());
    } catch (const std::system_error& e) {
        throw IoError("cannot write " + path.string() + ": " + e.what());
    }
}

}  // namespace

void save_signal_csv(const ComplexSignal& x, const std::filesystem::path& path) {
    auto out = open_output(path);
    out.print("index,re,im\n");
    for (std::size_t k = 0; k < x.size(); ++k) {
        out.print("{},{:.16e},{:.16e}\n", k, x[k].real(), x[k].imag());
    }
}

ComplexSignal load_signal_csv(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    expect_header(in, "index,re,im");
    std::vector<Sample> samples;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto f = split_fields(line);
        if (f.size() != 3) throw FormatError("expected 3 fields", lineno);
        if (parse_index(f[0], lineno) != samples.size()) {
            throw FormatError("indices must be consecutive from 0", lineno);
        }
        samples.emplace_back(parse_double(f[1], lineno), parse_double(f[2], lineno));
    }
    if (samples.empty()) throw FormatError("no samples", lineno);
    return ComplexSignal(std::move(samples));
}

void save_cir_csv(const CirEnsemble& ensemble, const std::filesystem::path& path) {
    validate_ensemble(ensemble);
    auto out = open_output(path);
    out.print("position_mm,tap_index,re,im\n");
    for (const Cir& cir : ensemble.entries) {
        for (std::size_t k = 0; k < cir.size(); ++k) {
            out.print("{:.16e},{},{:.16e},{:.16e}\n", cir.position_mm, k, cir.taps[k].real(),
                      cir.taps[k].imag());
        }
    }
}

CirEnsemble load_cir_csv(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    expect_header(in, "position_mm,tap_index,re,im");

    CirEnsemble ensemble;
    std::vector<Sample> current;
    double current_pos = 0.0;
    std::size_t expected_taps = 0;
    std::size_t entry_first_line = 0;

    auto flush = [&](std::size_t line) {
        if (current.empty()) return;
        if (expected_taps == 0) {
            expected_taps = current.size();
        } else if (current.size() != expected_taps) {
            throw InconsistentTapCountError(
                fmt::format("position {} has {} taps, expected {}", current_pos, current.size(),
                            expected_taps),
                line);
        }
        ensemble.entries.push_back(Cir{ComplexSignal(std::move(current)), current_pos});
        current.clear();
    };

    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto f = split_fields(line);
        if (f.size() != 4) throw FormatError("expected 4 fields", lineno);
        const double pos = parse_double(f[0], lineno);
        const std::size_t tap = parse_index(f[1], lineno);
        // A new response starts when the tap index restarts at 0.
        if (tap == 0) {
            flush(entry_first_line);
            if (!ensemble.entries.empty() && pos < ensemble.entries.back().position_mm) {
                throw FormatError("positions must be sorted", lineno);
            }
            current_pos = pos;
            entry_first_line = lineno;
        } else if (current.empty() || pos != current_pos || tap != current.size()) {
            throw FormatError("tap indices must run 0..L-1 within one position", lineno);
        }
        current.emplace_back(parse_double(f[2], lineno), parse_double(f[3], lineno));
    }
    flush(entry_first_line);
    if (ensemble.entries.empty()) throw FormatError("no CIR rows", lineno);
    for (const Cir& cir : ensemble.entries) {
        if (!(energy(cir.taps) > 0.0)) {
            throw FormatError(fmt::format("zero-energy CIR at position {}", cir.position_mm), lineno);
        }
    }
    return ensemble;
}

}  // namespace trdma
