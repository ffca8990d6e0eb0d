#pragma once

// Switching mathematics of a binary-weighted multi-stage converter: two-level
// pole voltages, weighted phase-voltage synthesis, the full level table and
// nearest-level selection.

#include "msvr/errors.hpp"
#include "msvr/time_series.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace msvr {

inline constexpr int kMaxWordStages = 30;
inline constexpr int kMaxTableStages = 16;

/// p-bit switching state of one phase's converter stack. Bit k (0-based)
/// drives stage k+1, which has weight 2^k. The textual form is written
/// most-significant first, so the rightmost character is stage 1.
class StateWord {
public:
    StateWord(int stages, std::uint32_t value) : stages_(stages), value_(value) {
        if (stages < 1 || stages > kMaxWordStages) {
            throw ConfigError("state word stage count " + std::to_string(stages) + " outside [1, " +
                              std::to_string(kMaxWordStages) + "]");
        }
        if (value > max_value(stages)) {
            throw ConfigError("state word value " + std::to_string(value) + " does not fit in " +
                              std::to_string(stages) + " bits");
        }
    }

    /// Parses "101"-style strings; rightmost character is stage 1.
    static StateWord parse(std::string_view bits) {
        if (bits.empty()) {
            throw ConfigError("empty state word");
        }
        std::uint32_t v = 0;
        for (char c : bits) {
            if (c != '0' && c != '1') {
                throw ConfigError("state word '" + std::string(bits) + "' contains non-binary character");
            }
            v = (v << 1U) | static_cast<std::uint32_t>(c - '0');
        }
        return {static_cast<int>(bits.size()), v};
    }

    static constexpr std::uint32_t max_value(int stages) noexcept {
        return (std::uint32_t{1} << static_cast<unsigned>(stages)) - 1U;
    }

    [[nodiscard]] int stages() const noexcept { return stages_; }
    [[nodiscard]] std::uint32_t value() const noexcept { return value_; }

    /// Switch state of stage `k`, 1-based.
    [[nodiscard]] bool bit(int stage) const noexcept {
        return ((value_ >> static_cast<unsigned>(stage - 1)) & 1U) != 0U;
    }

    [[nodiscard]] std::vector<bool> bits() const {
        std::vector<bool> out(static_cast<std::size_t>(stages_));
        for (int k = 1; k <= stages_; ++k) {
            out[static_cast<std::size_t>(k - 1)] = bit(k);
        }
        return out;
    }

    [[nodiscard]] std::string to_string() const {
        std::string s(static_cast<std::size_t>(stages_), '0');
        for (int k = 1; k <= stages_; ++k) {
            if (bit(k)) {
                s[static_cast<std::size_t>(stages_ - k)] = '1';
            }
        }
        return s;
    }

    /// Signed odd level index 2b - (2^p - 1).
    [[nodiscard]] long long state_value() const noexcept {
        return 2LL * static_cast<long long>(value_) - static_cast<long long>(max_value(stages_));
    }

    friend bool operator==(const StateWord&, const StateWord&) = default;

private:
    int stages_;
    std::uint32_t value_;
};

/// Stage count and DC link of one converter stack.
class ConverterParams {
public:
    ConverterParams(int stages, double v_dc) : stages_(stages), v_dc_(v_dc) {
        if (stages < 1 || stages > kMaxWordStages) {
            throw ConfigError("converter.stages", 0,
                              "stage count " + std::to_string(stages) + " must be in [1, " +
                                  std::to_string(kMaxWordStages) + "]");
        }
        if (!(v_dc > 0.0) || !std::isfinite(v_dc)) {
            throw ConfigError("converter.v_dc_volt", 0, "DC link voltage must be positive and finite");
        }
    }

    [[nodiscard]] int stages() const noexcept { return stages_; }
    [[nodiscard]] double v_dc() const noexcept { return v_dc_; }

    /// Turns-ratio weight 2^(k-1) of stage k (1-based).
    [[nodiscard]] std::uint32_t weight(int stage) const noexcept {
        return std::uint32_t{1} << static_cast<unsigned>(stage - 1);
    }

    [[nodiscard]] std::vector<std::uint32_t> weights() const {
        std::vector<std::uint32_t> w;
        w.reserve(static_cast<std::size_t>(stages_));
        for (int k = 1; k <= stages_; ++k) {
            w.push_back(weight(k));
        }
        return w;
    }

    [[nodiscard]] std::uint32_t level_count() const noexcept { return StateWord::max_value(stages_) + 1U; }

    /// Largest synthesizable magnitude, (2^p - 1) v_dc / 2.
    [[nodiscard]] double max_level() const noexcept {
        return static_cast<double>(StateWord::max_value(stages_)) * v_dc_ / 2.0;
    }

private:
    int stages_;
    double v_dc_;
};

struct LevelTableRow {
    StateWord word;
    long long state_value;
    double voltage;
};

/// Two-level pole output: +v_dc/2 when on, -v_dc/2 when off.
constexpr double pole_voltage(bool on, double v_dc) noexcept {
    return (2.0 * (on ? 1.0 : 0.0) - 1.0) * v_dc / 2.0;
}

/// Weighted sum of pole voltages over the stack.
inline double phase_voltage(const StateWord& word, const ConverterParams& params) {
    if (word.stages() != params.stages()) {
        throw ConfigError("state word has " + std::to_string(word.stages()) + " stages, converter has " +
                          std::to_string(params.stages()));
    }
    double v = 0.0;
    for (int k = 1; k <= params.stages(); ++k) {
        v += static_cast<double>(params.weight(k)) * pole_voltage(word.bit(k), params.v_dc());
    }
    return v;
}

/// Every state of the stack, ascending by voltage.
inline std::vector<LevelTableRow> enumerate_states(const ConverterParams& params) {
    if (params.stages() > kMaxTableStages) {
        throw ConfigError("converter.stages", 0,
                          "level table limited to " + std::to_string(kMaxTableStages) + " stages");
    }
    std::vector<LevelTableRow> rows;
    rows.reserve(params.level_count());
    for (std::uint32_t b = 0; b < params.level_count(); ++b) {
        StateWord w(params.stages(), b);
        const auto sv = w.state_value();
        rows.push_back({w, sv, static_cast<double>(sv) * params.v_dc() / 2.0});
    }
    return rows;
}

/// Aligned text table: state bits, state value, voltage. One header line.
inline std::string format_level_table(const ConverterParams& params) {
    const auto rows = enumerate_states(params);
    const int w = std::max(5, params.stages());
    std::string out;
    std::array<char, 160> buf{};
    std::snprintf(buf.data(), buf.size(), "%-*s %6s %14s\n", w, "state", "value", "voltage_V");
    out += buf.data();
    for (const auto& r : rows) {
        std::snprintf(buf.data(), buf.size(), "%-*s %6lld %14.10g\n", w, r.word.to_string().c_str(), r.state_value,
                      r.voltage);
        out += buf.data();
    }
    return out;
}

namespace detail {

inline double level_of(std::uint32_t b, const ConverterParams& params) noexcept {
    const auto sv = 2LL * static_cast<long long>(b) - static_cast<long long>(params.level_count() - 1U);
    return static_cast<double>(sv) * params.v_dc() / 2.0;
}

// True when `cand` should replace `best` for reference v: strictly closer, or
// equally close and higher.
inline bool better_level(double v, double cand, double best) noexcept {
    const double dc = std::abs(v - cand);
    const double db = std::abs(v - best);
    return dc < db || (dc == db && cand > best);
}

}  // namespace detail

/// Word whose level is closest to `v_ref`; exact ties go to the higher
/// level, and references outside the range saturate at the end words.
inline StateWord nearest_state(double v_ref, const ConverterParams& params) {
    const std::uint32_t top = params.level_count() - 1U;
    if (std::isnan(v_ref)) {
        throw SimulationError("modulator reference is NaN");
    }
    // Level b sits at (2b - top) v_dc/2, so the nearest index is
    // round(v_ref/v_dc + top/2) with halves rounded up.
    const double guess = std::floor(v_ref / params.v_dc() + static_cast<double>(top + 1U) / 2.0);
    std::uint32_t b = 0;
    if (guess >= static_cast<double>(top)) {
        b = top;
    } else if (guess > 0.0) {
        b = static_cast<std::uint32_t>(guess);
    }
    // The division above can land one index off near a midpoint; settle it
    // with the same comparison a full search would use.
    if (b > 0 && detail::better_level(v_ref, detail::level_of(b - 1U, params), detail::level_of(b, params))) {
        --b;
    } else if (b < top && detail::better_level(v_ref, detail::level_of(b + 1U, params), detail::level_of(b, params))) {
        ++b;
    }
    return {params.stages(), b};
}

struct QuantizedWaveform {
    TimeSeries staircase;
    std::vector<StateWord> words;
};

/// Nearest-level quantization applied sample by sample.
inline QuantizedWaveform quantize_waveform(const TimeSeries& reference, const ConverterParams& params) {
    QuantizedWaveform out{TimeSeries(reference.name + "_staircase", reference.unit, reference.t0, reference.dt), {}};
    out.staircase.values.reserve(reference.size());
    out.words.reserve(reference.size());
    for (double v : reference.values) {
        auto w = nearest_state(v, params);
        out.staircase.values.push_back(phase_voltage(w, params));
        out.words.push_back(w);
    }
    return out;
}

/// Level set for arbitrary per-stage ratios (for instance identical
/// transformers). Several words may share one level; the lowest word wins.
class RatioLevelTable {
public:
    RatioLevelTable(std::span<const double> ratios, double v_dc) : stages_(static_cast<int>(ratios.size())) {
        if (stages_ < 1 || stages_ > kMaxTableStages) {
            throw ConfigError("stage ratio list must have 1.." + std::to_string(kMaxTableStages) + " entries");
        }
        const std::uint32_t n = StateWord::max_value(stages_) + 1U;
        for (std::uint32_t b = 0; b < n; ++b) {
            double v = 0.0;
            for (int k = 1; k <= stages_; ++k) {
                v += ratios[static_cast<std::size_t>(k - 1)] * pole_voltage(((b >> (k - 1)) & 1U) != 0U, v_dc);
            }
            if (levels_.empty() || v > levels_.back().first) {
                levels_.emplace_back(v, b);
            } else {
                // Insert keeping ascending order, first word per distinct level.
                auto it = std::lower_bound(levels_.begin(), levels_.end(), v,
                                           [](const auto& e, double x) { return e.first < x; });
                if (it == levels_.end() || it->first != v) {
                    levels_.emplace(it, v, b);
                }
            }
        }
    }

    [[nodiscard]] std::size_t size() const noexcept { return levels_.size(); }
    [[nodiscard]] double level(std::size_t i) const noexcept { return levels_[i].first; }

    [[nodiscard]] StateWord nearest(double v_ref) const {
        auto it = std::lower_bound(levels_.begin(), levels_.end(), v_ref,
                                   [](const auto& e, double x) { return e.first < x; });
        std::size_t i = static_cast<std::size_t>(it - levels_.begin());
        if (i == levels_.size()) {
            i = levels_.size() - 1;
        } else if (i > 0 && detail::better_level(v_ref, levels_[i - 1].first, levels_[i].first)) {
            --i;
        }
        return {stages_, levels_[i].second};
    }

private:
    int stages_;
    std::vector<std::pair<double, std::uint32_t>> levels_;
};

}  // namespace msvr
