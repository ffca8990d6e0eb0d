#pragma once

// Compensation control: supply disturbance events, the load voltage
// reference, the feed-forward injection law and a causal sliding RMS.

#include "msvr/circuit.hpp"
#include "msvr/errors.hpp"
#include "msvr/time_series.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace msvr {

enum class EventKind { kSag, kSwell };

inline const char* to_string(EventKind k) noexcept { return k == EventKind::kSag ? "sag" : "swell"; }

/// Step change of the grid amplitude over [start, end).
struct Event {
    EventKind kind = EventKind::kSag;
    double start = 0.0;
    double end = std::numeric_limits<double>::infinity();
    double magnitude = 1.0;

    [[nodiscard]] bool active(double t) const noexcept { return t >= start && t < end; }

    void validate(const std::string& where = "events") const {
        if (!(start < end)) {
            throw ConfigError(where, 0, "event start must precede its end");
        }
        if (!(magnitude > 0.0) || !std::isfinite(magnitude)) {
            throw ConfigError(where, 0, "event magnitude must be positive");
        }
        if (kind == EventKind::kSag && !(magnitude < 1.0)) {
            throw ConfigError(where, 0, "sag magnitude must be below 1");
        }
        if (kind == EventKind::kSwell && !(magnitude >= 1.0)) {
            throw ConfigError(where, 0, "swell magnitude must be at least 1");
        }
    }
};

/// Validated, time-ordered, non-overlapping event list.
class EventSchedule {
public:
    EventSchedule() = default;
    explicit EventSchedule(std::vector<Event> events) : events_(std::move(events)) {
        for (std::size_t k = 0; k < events_.size(); ++k) {
            events_[k].validate("events[" + std::to_string(k) + "]");
        }
        std::vector<Event> sorted = events_;
        std::sort(sorted.begin(), sorted.end(), [](const Event& a, const Event& b) { return a.start < b.start; });
        for (std::size_t k = 1; k < sorted.size(); ++k) {
            if (sorted[k].start < sorted[k - 1].end) {
                throw ConfigError("events", 0, "events overlap in time");
            }
        }
        events_ = std::move(sorted);
    }

    [[nodiscard]] const std::vector<Event>& events() const noexcept { return events_; }
    [[nodiscard]] bool empty() const noexcept { return events_.empty(); }

    /// Product of the magnitudes of the events active at `t`.
    [[nodiscard]] double scale(double t) const noexcept {
        double s = 1.0;
        for (const auto& e : events_) {
            if (e.active(t)) {
                s *= e.magnitude;
            }
        }
        return s;
    }

private:
    std::vector<Event> events_;
};

inline double apply_events(const std::vector<Event>& events, double t) { return EventSchedule(events).scale(t); }

/// Target load-voltage waveform, balanced three-phase.
struct ReferenceSpec {
    double rms = 11000.0 / std::numbers::sqrt3;
    double frequency = 50.0;
    ThreePhase offsets{0.0, -2.0 * std::numbers::pi / 3.0, 2.0 * std::numbers::pi / 3.0};

    void validate() const {
        if (!(rms > 0.0) || !std::isfinite(rms)) {
            throw ConfigError("control.reference_rms_volt", 0, "reference rms must be positive");
        }
        if (!(frequency > 0.0)) {
            throw ConfigError("grid.frequency_hz", 0, "reference frequency must be positive");
        }
    }

    [[nodiscard]] double peak() const noexcept { return rms * std::numbers::sqrt2; }

    [[nodiscard]] ThreePhase at(double t) const noexcept {
        const double wt = 2.0 * std::numbers::pi * frequency * t;
        const double a = peak();
        return {a * std::sin(wt + offsets[0]), a * std::sin(wt + offsets[1]), a * std::sin(wt + offsets[2])};
    }

    /// Reference that reproduces the undisturbed grid waveform.
    static ReferenceSpec from_grid(const GridSource& g) {
        return {g.v_rms_ll / std::numbers::sqrt3, g.frequency, g.offsets};
    }
};

/// Feed-forward series compensation: what must be added to the measured grid
/// voltage to reach the reference.
inline ThreePhase injection_reference(const ThreePhase& v_ref_load, const ThreePhase& v_grid_measured) noexcept {
    return {v_ref_load[0] - v_grid_measured[0], v_ref_load[1] - v_grid_measured[1],
            v_ref_load[2] - v_grid_measured[2]};
}

/// Causal RMS over a trailing window of fixed sample count.
class SlidingRms {
public:
    explicit SlidingRms(std::size_t window_samples) : buf_(window_samples, 0.0) {
        if (window_samples < 2) {
            throw ConfigError("sliding RMS window must span at least 2 samples");
        }
    }

    /// Pushes a sample and returns the RMS over the samples seen so far,
    /// capped at the window length.
    double push(double x) {
        const double sq = x * x;
        sum_ += sq - buf_[head_];
        buf_[head_] = sq;
        head_ = (head_ + 1) % buf_.size();
        if (count_ < buf_.size()) {
            ++count_;
        }
        // Re-sum once per window so rounding does not accumulate.
        if (head_ == 0) {
            sum_ = 0.0;
            for (double v : buf_) {
                sum_ += v;
            }
        }
        return std::sqrt(std::max(sum_, 0.0) / static_cast<double>(count_));
    }

    [[nodiscard]] bool warmed_up() const noexcept { return count_ == buf_.size(); }
    [[nodiscard]] std::size_t window() const noexcept { return buf_.size(); }

private:
    std::vector<double> buf_;
    double sum_ = 0.0;
    std::size_t head_ = 0;
    std::size_t count_ = 0;
};

struct SlidingRmsResult {
    TimeSeries rms;
    /// Leading samples computed over a partial window.
    std::size_t warmup_samples = 0;

    [[nodiscard]] bool is_warmup(std::size_t k) const noexcept { return k < warmup_samples; }
};

inline SlidingRmsResult sliding_rms(const TimeSeries& series, double window) {
    const double n = std::round(window / series.dt);
    if (!(n >= 2.0)) {
        throw ConfigError("sliding RMS window of " + std::to_string(window) + " s spans fewer than 2 samples");
    }
    SlidingRms acc(static_cast<std::size_t>(n));
    SlidingRmsResult out{TimeSeries(series.name + "_rms", series.unit, series.t0, series.dt), 0};
    out.rms.values.reserve(series.size());
    for (double x : series.values) {
        out.rms.values.push_back(acc.push(x));
    }
    out.warmup_samples = std::min(series.size(), acc.window() - 1);
    return out;
}

/// Time after `onset` from which the sliding RMS stays within `tolerance`
/// (relative) of `nominal` up to `until`. Empty when it never settles.
inline std::optional<double> recovery_time(const SlidingRmsResult& r, double nominal, double onset, double until,
                                           double tolerance) {
    const auto& s = r.rms;
    std::optional<double> last_bad;
    bool any = false;
    for (std::size_t k = 0; k < s.size(); ++k) {
        const double t = s.time(k);
        if (t < onset || t >= until) {
            continue;
        }
        any = true;
        if (std::abs(s.values[k] / nominal - 1.0) > tolerance) {
            last_bad = t;
        }
    }
    if (!any) {
        return std::nullopt;
    }
    if (!last_bad) {
        return 0.0;
    }
    const double rec = *last_bad + s.dt - onset;
    if (*last_bad + s.dt >= until) {
        return std::nullopt;
    }
    return rec;
}

}  // namespace msvr
