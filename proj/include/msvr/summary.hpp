#pragma once

// Scalar metrics of a finished run, as printed by the CLI.

#include "msvr/analysis.hpp"
#include "msvr/control.hpp"
#include "msvr/scenario.hpp"
#include "msvr/simulation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace msvr {

struct EventRecovery {
    Event event;
    double nominal_rms = 0.0;        // worst phase, pre-event
    std::optional<double> recovery;  // seconds after onset; empty if never
};

struct RunSummary {
    int stages = 0;
    std::array<double, kPhases> thd_load{};
    std::array<double, kPhases> rms_grid{};
    std::array<double, kPhases> rms_load{};
    double mean_p = 0.0;
    double mean_q = 0.0;
    std::size_t injected_levels = 0;
    double injected_min = 0.0;
    double injected_max = 0.0;
    std::optional<double> kvl_residual_max;
    double grid_peak = 0.0;
    std::vector<EventRecovery> events;
};

/// Relative tolerance used for recovery times.
inline constexpr double kRecoveryTolerance = 0.02;

/// RMS over whole cycles [start_cycle, start_cycle + cycles).
inline double window_rms(const TimeSeries& s, double f, std::size_t start_cycle, std::size_t cycles) {
    const std::size_t spc = samples_per_cycle(s.dt, f);
    const std::size_t first = start_cycle * spc;
    const std::size_t last = (start_cycle + cycles) * spc;
    if (last > s.size() || cycles == 0) {
        throw AnalysisError("RMS window of " + std::to_string(cycles) + " cycles from cycle " +
                            std::to_string(start_cycle) + " needs " + std::to_string(last) + " samples, have " +
                            std::to_string(s.size()));
    }
    double acc = 0.0;
    for (std::size_t k = first; k < last; ++k) {
        acc += s.values[k] * s.values[k];
    }
    return std::sqrt(acc / static_cast<double>(last - first));
}

/// Worst-phase recovery of the load sliding RMS (one-period window) after
/// each event onset, against the value just before the onset.
inline std::vector<EventRecovery> event_recoveries(const SignalBundle& b, const Scenario& s) {
    std::vector<EventRecovery> out;
    if (s.events.empty()) {
        return out;
    }
    const double period = 1.0 / s.grid.frequency;
    std::array<SlidingRmsResult, kPhases> rms;
    for (int ph = 0; ph < kPhases; ++ph) {
        rms[static_cast<std::size_t>(ph)] = sliding_rms(b.at(detail::phase_signal("v_load", ph)), period);
    }
    const double t_end = b.t0() + static_cast<double>(b.sample_count()) * b.dt();
    for (std::size_t e = 0; e < s.events.size(); ++e) {
        const Event& ev = s.events[e];
        EventRecovery r{ev, 0.0, 0.0};
        const double until = std::min({ev.end, e + 1 < s.events.size() ? s.events[e + 1].start : t_end, t_end});
        const auto onset_idx = static_cast<std::size_t>(std::llround(ev.start / b.dt()));
        if (onset_idx == 0 || onset_idx >= b.sample_count()) {
            r.recovery.reset();
            out.push_back(r);
            continue;
        }
        for (int ph = 0; ph < kPhases; ++ph) {
            const auto& sr = rms[static_cast<std::size_t>(ph)];
            const double nominal = sr.rms.values[onset_idx - 1];
            r.nominal_rms = std::max(r.nominal_rms, nominal);
            const auto rec = recovery_time(sr, nominal, ev.start, until, kRecoveryTolerance);
            if (!rec) {
                r.recovery.reset();
                break;
            }
            r.recovery = std::max(*r.recovery, *rec);
        }
        out.push_back(r);
    }
    return out;
}

inline RunSummary summarize(const SimulationResult& result, const Scenario& s) {
    const auto& b = result.bundle;
    const double f = s.grid.frequency;
    const auto& a = s.analysis;
    RunSummary out;
    out.stages = s.converter.stages;
    for (int ph = 0; ph < kPhases; ++ph) {
        const auto u = static_cast<std::size_t>(ph);
        const auto& vl = b.at(detail::phase_signal("v_load", ph));
        out.thd_load[u] = thd(harmonic_spectrum(vl, f, a.cycles, a.start_cycle, a.harmonics));
        out.rms_grid[u] = window_rms(b.at(detail::phase_signal("v_grid", ph)), f, a.start_cycle, a.cycles);
        out.rms_load[u] = window_rms(vl, f, a.start_cycle, a.cycles);
    }
    const std::size_t spc = samples_per_cycle(b.dt(), f);
    out.mean_p = mean(b.at("p"), a.start_cycle * spc, (a.start_cycle + a.cycles) * spc);
    out.mean_q = mean(b.at("q"), a.start_cycle * spc, (a.start_cycle + a.cycles) * spc);

    const auto& inj = b.at("v_inj_a").values;
    const std::set<double> levels(inj.begin(), inj.end());
    out.injected_levels = levels.size();
    out.injected_min = levels.empty() ? 0.0 : *levels.begin();
    out.injected_max = levels.empty() ? 0.0 : *levels.rbegin();
    out.kvl_residual_max = result.kvl_residual_max;
    out.grid_peak = result.grid_peak;
    out.events = event_recoveries(b, s);
    return out;
}

inline std::string format_summary(const RunSummary& r, const Scenario& s) {
    std::string out;
    char buf[256];
    auto line = [&out, &buf](const char* fmt, auto... args) {
        std::snprintf(buf, sizeof buf, fmt, args...);
        out += buf;
        out += '\n';
    };
    line("stages                 %d", r.stages);
    line("analysis window        cycles %zu..%zu, H = %zu", s.analysis.start_cycle,
         s.analysis.start_cycle + s.analysis.cycles, s.analysis.harmonics);
    line("load THD %%             a %.4f  b %.4f  c %.4f", r.thd_load[0], r.thd_load[1], r.thd_load[2]);
    line("grid rms V             a %.2f  b %.2f  c %.2f", r.rms_grid[0], r.rms_grid[1], r.rms_grid[2]);
    line("load rms V             a %.2f  b %.2f  c %.2f", r.rms_load[0], r.rms_load[1], r.rms_load[2]);
    line("mean p W               %.6g", r.mean_p);
    line("mean q var             %.6g", r.mean_q);
    line("injected levels (a)    %zu  [%.2f, %.2f] V", r.injected_levels, r.injected_min, r.injected_max);
    if (r.kvl_residual_max) {
        line("max KVL residual V     %.3e  (%.3e of grid peak)", *r.kvl_residual_max,
             *r.kvl_residual_max / r.grid_peak);
    }
    for (std::size_t k = 0; k < r.events.size(); ++k) {
        const auto& e = r.events[k];
        if (e.recovery) {
            line("event %zu %-5s x%.3g at %.4g s: recovery %.4f s (within %.0f%% of %.2f V)", k,
                 to_string(e.event.kind), e.event.magnitude, e.event.start, *e.recovery, kRecoveryTolerance * 100.0,
                 e.nominal_rms);
        } else {
            line("event %zu %-5s x%.3g at %.4g s: not recovered", k, to_string(e.event.kind), e.event.magnitude,
                 e.event.start);
        }
    }
    return out;
}

}  // namespace msvr
