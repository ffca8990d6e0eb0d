#pragma once

#include <stdexcept>
#include <string>

namespace msvr {

/// Process exit codes used by the command-line front end.
enum class ExitCode : int {
    kSuccess = 0,
    kConfigError = 2,
    kSimulationError = 3,
    kAnalysisError = 4,
};

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    [[nodiscard]] virtual ExitCode exit_code() const noexcept = 0;
};

/// Invalid parameters, malformed scenario documents, invariant violations.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what), message_(what) {}

    /// `key` is the dotted key path; `line` is 1-based, 0 when unknown.
    ConfigError(const std::string& key, std::size_t line, const std::string& message)
        : Error(format(key, line, message)), key_(key), message_(message), line_(line) {}

    [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::kConfigError; }
    [[nodiscard]] const std::string& key() const noexcept { return key_; }
    [[nodiscard]] std::size_t line() const noexcept { return line_; }
    /// Message without the key/line prefix.
    [[nodiscard]] const std::string& message() const noexcept { return message_; }

private:
    static std::string format(const std::string& key, std::size_t line, const std::string& message) {
        std::string out;
        if (line > 0) {
            out += "line " + std::to_string(line) + ": ";
        }
        if (!key.empty()) {
            out += "'" + key + "': ";
        }
        return out + message;
    }

    std::string key_;
    std::string message_;
    std::size_t line_ = 0;
};

/// Non-finite solver state or other failure while integrating.
class SimulationError : public Error {
public:
    using Error::Error;
    [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::kSimulationError; }
};

/// Spectral/power analysis preconditions not met.
class AnalysisError : public Error {
public:
    using Error::Error;
    [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::kAnalysisError; }
};

/// File could not be read or written. Reported with the simulation exit code.
class IoError : public Error {
public:
    using Error::Error;
    [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::kSimulationError; }
};

}  // namespace msvr
