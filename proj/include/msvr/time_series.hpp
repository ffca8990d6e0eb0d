#pragma once

#include "msvr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace msvr {

/// Uniformly sampled named signal. Sample k sits at t0 + k * dt.
struct TimeSeries {
    std::string name;
    std::string unit;
    double t0 = 0.0;
    double dt = 1.0;
    std::vector<double> values;

    TimeSeries() = default;
    TimeSeries(std::string name_, std::string unit_, double t0_, double dt_, std::vector<double> values_ = {})
        : name(std::move(name_)), unit(std::move(unit_)), t0(t0_), dt(dt_), values(std::move(values_)) {}

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
    [[nodiscard]] bool empty() const noexcept { return values.empty(); }
    [[nodiscard]] double time(std::size_t k) const noexcept { return t0 + static_cast<double>(k) * dt; }
    [[nodiscard]] double duration() const noexcept { return static_cast<double>(values.size()) * dt; }
    [[nodiscard]] std::span<const double> samples() const noexcept { return values; }

    double operator[](std::size_t k) const noexcept { return values[k]; }
    double& operator[](std::size_t k) noexcept { return values[k]; }
};

/// Builds a series by evaluating `fn(t)` on `n` samples.
template <typename Fn>
TimeSeries sample_function(std::string name, std::string unit, double t0, double dt, std::size_t n, Fn&& fn) {
    TimeSeries ts(std::move(name), std::move(unit), t0, dt);
    ts.values.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        ts.values.push_back(fn(t0 + static_cast<double>(k) * dt));
    }
    return ts;
}

/// Run provenance carried alongside a bundle.
struct BundleMetadata {
    std::string scenario_hash;
    double dt = 0.0;
    double duration = 0.0;
};

/// Ordered set of series that share one time base.
class SignalBundle {
public:
    SignalBundle() = default;
    SignalBundle(double t0, double dt) : t0_(t0), dt_(dt) {}

    /// Appends a series. Its length and time base must match the bundle's.
    void add(TimeSeries series) {
        if (index_.contains(series.name)) {
            throw ConfigError("duplicate signal name '" + series.name + "'");
        }
        if (!series_.empty()) {
            if (series.size() != series_.front().size()) {
                throw ConfigError("signal '" + series.name + "' has " + std::to_string(series.size()) +
                                  " samples, bundle has " + std::to_string(series_.front().size()));
            }
        }
        if (series.t0 != t0_ || series.dt != dt_) {
            throw ConfigError("signal '" + series.name + "' does not share the bundle time base");
        }
        index_.emplace(series.name, series_.size());
        series_.push_back(std::move(series));
    }

    [[nodiscard]] bool contains(const std::string& name) const { return index_.contains(name); }

    [[nodiscard]] const TimeSeries& at(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) {
            throw ConfigError("unknown signal '" + name + "'");
        }
        return series_[it->second];
    }

    [[nodiscard]] const std::vector<TimeSeries>& series() const noexcept { return series_; }
    [[nodiscard]] std::size_t signal_count() const noexcept { return series_.size(); }
    [[nodiscard]] std::size_t sample_count() const noexcept {
        return series_.empty() ? 0 : series_.front().size();
    }
    [[nodiscard]] bool empty() const noexcept { return series_.empty() || sample_count() == 0; }
    [[nodiscard]] double t0() const noexcept { return t0_; }
    [[nodiscard]] double dt() const noexcept { return dt_; }

    BundleMetadata metadata;

    /// Keeps only the named signals, in the order given.
    [[nodiscard]] SignalBundle select(const std::vector<std::string>& names) const {
        SignalBundle out(t0_, dt_);
        out.metadata = metadata;
        for (const auto& n : names) {
            out.add(at(n));
        }
        return out;
    }

    /// Keeps every `stride`-th sample of every signal.
    [[nodiscard]] SignalBundle decimate(std::size_t stride) const {
        if (stride == 0) {
            throw ConfigError("decimation stride must be positive");
        }
        SignalBundle out(t0_, dt_ * static_cast<double>(stride));
        out.metadata = metadata;
        for (const auto& s : series_) {
            TimeSeries d(s.name, s.unit, s.t0, out.dt_);
            d.values.reserve(s.size() / stride + 1);
            for (std::size_t k = 0; k < s.size(); k += stride) {
                d.values.push_back(s.values[k]);
            }
            out.add(std::move(d));
        }
        return out;
    }

private:
    double t0_ = 0.0;
    double dt_ = 1.0;
    std::vector<TimeSeries> series_;
    std::map<std::string, std::size_t> index_;
};

}  // namespace msvr
