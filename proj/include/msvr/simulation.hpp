#pragma once

// Fixed-step run of a whole scenario: grid EMF with events, feed-forward
// reference, nearest-level modulator, series stages and load.

#include "msvr/analysis.hpp"
#include "msvr/circuit.hpp"
#include "msvr/control.hpp"
#include "msvr/converter.hpp"
#include "msvr/scenario.hpp"
#include "msvr/time_series.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace msvr {

struct SimulationResult {
    SignalBundle bundle;
    ReferenceSpec reference;
    /// Largest network-equation residual over all steps and phases (V).
    /// Empty for the diode-bridge load, whose terminal voltage is algebraic.
    std::optional<double> kvl_residual_max;
    double grid_peak = 0.0;
};

namespace detail {

/// Picks the word per phase for either weighting.
class Modulator {
public:
    Modulator(const Scenario& s, const std::vector<TransformerStage>& stages)
        : params_(s.converter_params()) {
        canonical_ = s.converter.weighting == StageWeighting::kBinary && s.stage.turns_scale == 1.0;
        if (!canonical_) {
            std::vector<double> ratios;
            for (const auto& st : stages) {
                ratios.push_back(st.ratio);
            }
            table_.emplace(ratios, params_.v_dc());
        }
    }

    [[nodiscard]] StateWord pick(double v_ref) const {
        if (canonical_) {
            return nearest_state(v_ref, params_);
        }
        if (std::isnan(v_ref)) {
            throw SimulationError("modulator reference is NaN");
        }
        return table_->nearest(v_ref);
    }

    [[nodiscard]] double max_level() const {
        return canonical_ ? params_.max_level() : table_->level(table_->size() - 1);
    }

private:
    ConverterParams params_;
    bool canonical_ = true;
    std::optional<RatioLevelTable> table_;
};

inline std::string stage_signal(int k, int ph) {
    return "v_stage" + std::to_string(k) + "_" + kPhaseNames[static_cast<std::size_t>(ph)];
}

inline std::string phase_signal(const char* base, int ph) {
    return std::string(base) + "_" + kPhaseNames[static_cast<std::size_t>(ph)];
}

}  // namespace detail

struct RunOptions {
    /// Skip the warm-up run and use this reference instead.
    std::optional<ReferenceSpec> reference;
};

inline SimulationResult run_simulation(const Scenario& scenario, const RunOptions& opts = {});

/// Load-voltage fundamental of a disturbance-free, uncompensated run, as a
/// balanced reference (phase a magnitude and angle).
inline ReferenceSpec warmup_reference(const Scenario& scenario) {
    Scenario w = scenario;
    w.events.clear();
    w.converter.enabled = false;
    w.control.source = ReferenceSource::kSupply;
    const std::size_t cycles = 40;
    w.sim.duration = static_cast<double>(cycles) / w.grid.frequency;
    w.analysis.start_cycle = cycles - 10;
    w.analysis.cycles = 10;
    w.sim.signals.clear();
    const auto r = run_simulation(w, RunOptions{ReferenceSpec::from_grid(w.grid)});
    const auto& v = r.bundle.at("v_load_a");
    const auto spec = harmonic_spectrum(v, w.grid.frequency, 10, cycles - 10, 2);
    // A sine a*sin(wt + phi) has DFT phasor -j*a*e^{j phi}.
    const std::complex<double> c = spec.coefficients[0] * std::complex<double>(0.0, 1.0);
    ReferenceSpec ref = ReferenceSpec::from_grid(scenario.grid);
    ref.rms = std::abs(c) / std::numbers::sqrt2;
    const double shift = std::arg(c) - scenario.grid.offsets[0];
    for (auto& o : ref.offsets) {
        o += shift;
    }
    return ref;
}

/// The load-voltage target implied by the scenario's control settings.
inline ReferenceSpec resolve_reference(const Scenario& s) {
    ReferenceSpec ref = s.control.source == ReferenceSource::kLoadWarmup ? warmup_reference(s)
                                                                         : ReferenceSpec::from_grid(s.grid);
    if (s.control.reference_rms) {
        ref.rms = *s.control.reference_rms;
    }
    const double shift = s.control.reference_phase_deg * std::numbers::pi / 180.0;
    for (auto& o : ref.offsets) {
        o += shift;
    }
    ref.validate();
    return ref;
}

inline SimulationResult run_simulation(const Scenario& s, const RunOptions& opts) {
    s.validate();
    const auto stages = s.transformer_stages();
    const ConverterParams params = s.converter_params();
    const detail::Modulator modulator(s, stages);
    const EventSchedule schedule(s.events);
    const double dt = s.sim.dt;
    const std::size_t n_steps = s.step_count();
    const std::size_t n = n_steps + 1;

    SimulationResult out;
    out.reference = opts.reference ? *opts.reference : resolve_reference(s);
    out.grid_peak = s.grid.phase_peak();

    // Range guard: the worst injection the reference can ask for, over every
    // amplitude scale the schedule produces.
    if (s.converter.enabled) {
        std::vector<double> scales{1.0};
        for (const auto& e : schedule.events()) {
            scales.push_back(e.magnitude);
        }
        double worst = 0.0;
        for (double k : scales) {
            for (int ph = 0; ph < kPhases; ++ph) {
                const auto u = static_cast<std::size_t>(ph);
                const std::complex<double> r = std::polar(out.reference.peak(), out.reference.offsets[u]);
                const std::complex<double> g = std::polar(k * s.grid.phase_peak(), s.grid.offsets[u]);
                worst = std::max(worst, std::abs(r - g));
            }
        }
        if (worst > 2.0 * modulator.max_level()) {
            throw ConfigError("converter.v_dc_volt", 0,
                              "injection reference reaches " + detail::format_double(worst) +
                                  " V, more than twice the converter range " +
                                  detail::format_double(modulator.max_level()) + " V");
        }
    }

    SeriesImpedance series{s.line.r_line, s.line.l_line};
    std::vector<SeriesImpedance> stage_z;
    for (const auto& st : stages) {
        stage_z.push_back(referred_stage_impedance(st, s.grid.frequency));
        series += stage_z.back();
    }
    SeriesImpedance stage_total{0.0, 0.0};
    for (const auto& z : stage_z) {
        stage_total += z;
    }

    const bool bridge = s.load.topology == LoadTopology::kDiodeBridge;
    std::optional<PhaseIntegrator> integ;
    std::optional<DiodeBridge> diodes;
    if (bridge) {
        diodes.emplace(series, s.load, dt);
    } else {
        integ.emplace(series, s.load, dt);
    }

    const int p = params.stages();
    auto make = [&](const std::string& name, const char* unit) {
        TimeSeries ts(name, unit, 0.0, dt);
        ts.values.resize(n);
        return ts;
    };
    std::array<TimeSeries, kPhases> v_grid;
    std::array<TimeSeries, kPhases> i_grid;
    std::array<TimeSeries, kPhases> v_load;
    std::array<TimeSeries, kPhases> v_inj;
    std::array<TimeSeries, kPhases> v_saf;
    std::vector<std::array<TimeSeries, kPhases>> v_stage(static_cast<std::size_t>(p));
    for (int ph = 0; ph < kPhases; ++ph) {
        const auto u = static_cast<std::size_t>(ph);
        v_grid[u] = make(detail::phase_signal("v_grid", ph), "V");
        i_grid[u] = make(detail::phase_signal("i_grid", ph), "A");
        v_load[u] = make(detail::phase_signal("v_load", ph), "V");
        v_inj[u] = make(detail::phase_signal("v_inj", ph), "V");
        v_saf[u] = make(detail::phase_signal("v_saf", ph), "V");
        for (int k = 1; k <= p; ++k) {
            v_stage[static_cast<std::size_t>(k - 1)][u] = make(detail::stage_signal(k, ph), "V");
        }
    }

    CircuitState state;
    double residual_max = 0.0;
    const StateWord idle(p, 0);
    std::array<StateWord, kPhases> words{idle, idle, idle};

    auto grid_at = [&](std::size_t k) {
        const double t = static_cast<double>(k) * dt;
        return grid_emf(t, s.grid, schedule.scale(t));
    };

    ThreePhase e_grid = grid_at(0);
    for (std::size_t k = 0;; ++k) {
        const double t = static_cast<double>(k) * dt;
        state.t = t;

        InjectedVoltage inj;
        if (s.converter.enabled) {
            const ThreePhase target = injection_reference(out.reference.at(t), e_grid);
            for (int ph = 0; ph < kPhases; ++ph) {
                words[static_cast<std::size_t>(ph)] = modulator.pick(target[static_cast<std::size_t>(ph)]);
            }
            inj = injected_voltage(words, params, stages);
        } else {
            for (auto& per : inj.per_stage) {
                per.assign(static_cast<std::size_t>(p), 0.0);
            }
        }

        for (int ph = 0; ph < kPhases; ++ph) {
            const auto u = static_cast<std::size_t>(ph);
            const double i = state.i_line[u];
            const double v = state.v_cap[u];
            v_grid[u].values[k] = e_grid[u];
            i_grid[u].values[k] = i;
            v_load[u].values[k] = v;
            v_inj[u].values[k] = inj.total[u];
            for (int st = 0; st < p; ++st) {
                v_stage[static_cast<std::size_t>(st)][u].values[k] = inj.per_stage[u][static_cast<std::size_t>(st)];
            }
            // Terminal voltage of the stage stack: EMF less winding drops.
            const double didt = series.l > 0.0 ? (e_grid[u] + inj.total[u] - series.r * i - v) / series.l : 0.0;
            v_saf[u].values[k] = inj.total[u] - stage_total.r * i - stage_total.l * didt;
        }

        if (k == n_steps) {
            break;
        }

        const ThreePhase e_next = grid_at(k + 1);
        ThreePhase e0{};
        ThreePhase e1{};
        for (std::size_t u = 0; u < static_cast<std::size_t>(kPhases); ++u) {
            e0[u] = e_grid[u] + inj.total[u];
            e1[u] = e_next[u] + inj.total[u];
        }
        if (bridge) {
            diodes->step(state, e0, e1);
        } else {
            for (std::size_t u = 0; u < static_cast<std::size_t>(kPhases); ++u) {
                const double i0 = state.i_line[u];
                const double v0 = state.v_cap[u];
                integ->step(state.i_line[u], state.v_cap[u], e0[u], e1[u]);
                const double res = kvl_residual(i0, v0, state.i_line[u], state.v_cap[u], e0[u], e1[u], series, dt);
                residual_max = std::max(residual_max, std::abs(res));
            }
        }
        state.t = static_cast<double>(k + 1) * dt;
        detail::require_finite(state);
        e_grid = e_next;
    }

    SignalBundle bundle(0.0, dt);
    for (int ph = 0; ph < kPhases; ++ph) {
        bundle.add(v_grid[static_cast<std::size_t>(ph)]);
    }
    for (int ph = 0; ph < kPhases; ++ph) {
        bundle.add(i_grid[static_cast<std::size_t>(ph)]);
    }
    for (int ph = 0; ph < kPhases; ++ph) {
        bundle.add(v_load[static_cast<std::size_t>(ph)]);
    }
    for (int ph = 0; ph < kPhases; ++ph) {
        bundle.add(v_inj[static_cast<std::size_t>(ph)]);
    }
    for (int ph = 0; ph < kPhases; ++ph) {
        bundle.add(v_saf[static_cast<std::size_t>(ph)]);
    }
    for (auto& per_phase : v_stage) {
        for (auto& ts : per_phase) {
            bundle.add(std::move(ts));
        }
    }
    auto pq = instantaneous_powers(v_load, i_grid);
    bundle.add(std::move(pq.p));
    bundle.add(std::move(pq.q));

    bundle.metadata = {s.hash(), dt, static_cast<double>(n_steps) * dt};
    out.bundle = std::move(bundle);
    if (!bridge) {
        out.kvl_residual_max = residual_max;
    }
    return out;
}

}  // namespace msvr
