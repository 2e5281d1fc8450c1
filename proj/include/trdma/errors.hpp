#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace trdma {

// Precondition violations on numeric inputs throw std::invalid_argument.
// File handling and configuration have their own hierarchy so callers can
// map them to distinct exit codes.

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class FileNotFoundError : public IoError {
public:
    using IoError::IoError;
};

class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& what, std::size_t line)
        : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// All ensemble entries must carry the same number of taps.
class InconsistentTapCountError : public FormatError {
public:
    using FormatError::FormatError;
};

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& field, const std::string& what, std::size_t line = 0)
        : std::runtime_error(format(field, what, line)), field_(field), line_(line) {}

    const std::string& field() const { return field_; }
    std::size_t line() const { return line_; }

private:
    static std::string format(const std::string& field, const std::string& what, std::size_t line) {
        std::string s = "config error";
        if (line != 0) s += " at line " + std::to_string(line);
        if (!field.empty()) s += " [" + field + "]";
        return s + ": " + what;
    }

    std::string field_;
    std::size_t line_;
};

}  // namespace trdma
