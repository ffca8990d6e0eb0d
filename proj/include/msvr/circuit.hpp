#pragma once

// Per-phase electrical model: grid EMF behind a series line, p injection
// transformer stages in series, and a load at the far end. Each phase obeys
//
//     L_tot di/dt = v_grid + v_inj - R_tot i - v_load
//
// and is advanced with the trapezoidal rule. The injected EMF is held
// constant over a step (the modulator updates on sample boundaries).

#include "msvr/converter.hpp"
#include "msvr/errors.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace msvr {

inline constexpr int kPhases = 3;
using ThreePhase = std::array<double, kPhases>;

inline constexpr std::array<const char*, kPhases> kPhaseNames{"a", "b", "c"};

/// Series resistance and inductance.
struct SeriesImpedance {
    double r = 0.0;
    double l = 0.0;

    SeriesImpedance& operator+=(const SeriesImpedance& o) noexcept {
        r += o.r;
        l += o.l;
        return *this;
    }
};

/// One injection transformer. Per-unit values are per winding; both windings
/// are lumped into the series branch seen by the line current.
struct TransformerStage {
    double r_pu = 0.002;
    double x_pu = 0.08;
    double ratio = 1.0;
    double v_base = 3000.0;
    double s_base = 1.0e6;

    void validate() const {
        if (!(r_pu >= 0.0) || !(x_pu >= 0.0)) {
            throw ConfigError("stage", 0, "winding resistance and reactance must be non-negative");
        }
        if (!(v_base > 0.0) || !(s_base > 0.0)) {
            throw ConfigError("stage", 0, "base voltage and base power must be positive");
        }
        if (!std::isfinite(ratio)) {
            throw ConfigError("stage", 0, "stage ratio must be finite");
        }
    }

    [[nodiscard]] double z_base() const noexcept { return v_base * v_base / s_base; }
};

inline SeriesImpedance referred_stage_impedance(const TransformerStage& stage, double frequency) {
    stage.validate();
    if (!(frequency > 0.0)) {
        throw ConfigError("grid.frequency_hz", 0, "frequency must be positive");
    }
    const double zb = stage.z_base();
    return {2.0 * stage.r_pu * zb, 2.0 * stage.x_pu * zb / (2.0 * std::numbers::pi * frequency)};
}

struct LineParams {
    double l_line = 0.010;
    double r_line = 0.01;

    void validate() const {
        if (!(l_line > 0.0)) {
            throw ConfigError("line.l_henry", 0, "line inductance must be positive");
        }
        if (!(r_line >= 0.0)) {
            throw ConfigError("line.r_ohm", 0, "line resistance must be non-negative");
        }
    }
};

enum class LoadTopology {
    kParallelRc,   // R parallel C per phase, capacitor voltage is a state
    kResistive,    // R only, load voltage = R i
    kShort,        // output shorted, load voltage = 0
    kDiodeBridge,  // ideal 3-phase bridge into R parallel C on the DC side
};

struct LoadParams {
    LoadTopology topology = LoadTopology::kParallelRc;
    double r_load = 60.0;
    double c_load = 150e-6;

    void validate() const {
        if (topology == LoadTopology::kShort) {
            return;
        }
        if (!(r_load > 0.0)) {
            throw ConfigError("load.r_ohm", 0, "load resistance must be positive");
        }
        if (topology != LoadTopology::kResistive && !(c_load > 0.0)) {
            throw ConfigError("load.c_farad", 0, "load capacitance must be positive");
        }
    }
};

struct GridSource {
    double v_rms_ll = 11000.0;
    double frequency = 50.0;
    ThreePhase offsets{0.0, -2.0 * std::numbers::pi / 3.0, 2.0 * std::numbers::pi / 3.0};

    void validate() const {
        if (!(v_rms_ll >= 0.0) || !std::isfinite(v_rms_ll)) {
            throw ConfigError("grid.v_rms_ll_volt", 0, "grid voltage must be non-negative and finite");
        }
        if (!(frequency > 0.0) || !std::isfinite(frequency)) {
            throw ConfigError("grid.frequency_hz", 0, "grid frequency must be positive");
        }
    }

    /// Line-to-neutral peak at unit amplitude scale.
    [[nodiscard]] double phase_peak() const noexcept { return v_rms_ll * std::numbers::sqrt2 / std::numbers::sqrt3; }
    [[nodiscard]] double period() const noexcept { return 1.0 / frequency; }
};

/// Phase i: scale * V_ll sqrt(2)/sqrt(3) * sin(2 pi f t + offset_i).
inline ThreePhase grid_emf(double t, const GridSource& src, double scale = 1.0) noexcept {
    const double peak = scale * src.phase_peak();
    const double wt = 2.0 * std::numbers::pi * src.frequency * t;
    return {peak * std::sin(wt + src.offsets[0]), peak * std::sin(wt + src.offsets[1]),
            peak * std::sin(wt + src.offsets[2])};
}

struct InjectedVoltage {
    ThreePhase total{};
    /// per_stage[phase][stage-1]
    std::array<std::vector<double>, kPhases> per_stage;
};

/// Secondary EMF of stage k is ratio_k * pole_voltage(bit k); the phase total
/// is their sum. Series drops are handled by the integrator.
inline InjectedVoltage injected_voltage(const std::array<StateWord, kPhases>& words, const ConverterParams& params,
                                        const std::vector<TransformerStage>& stages) {
    if (static_cast<int>(stages.size()) != params.stages()) {
        throw ConfigError("stage", 0,
                          "stage list has " + std::to_string(stages.size()) + " entries, converter has " +
                              std::to_string(params.stages()) + " stages");
    }
    InjectedVoltage out;
    for (int ph = 0; ph < kPhases; ++ph) {
        const auto& w = words[static_cast<std::size_t>(ph)];
        if (w.stages() != params.stages()) {
            throw ConfigError("state word stage count does not match converter");
        }
        auto& per = out.per_stage[static_cast<std::size_t>(ph)];
        per.resize(stages.size());
        // Sum in stage order so the total equals the sum of the emitted
        // per-stage series exactly.
        double total = 0.0;
        for (int k = 1; k <= params.stages(); ++k) {
            const double v = stages[static_cast<std::size_t>(k - 1)].ratio * pole_voltage(w.bit(k), params.v_dc());
            per[static_cast<std::size_t>(k - 1)] = v;
            total += v;
        }
        out.total[static_cast<std::size_t>(ph)] = total;
    }
    return out;
}

/// Dynamic state of the whole three-phase network.
struct CircuitState {
    ThreePhase i_line{};
    ThreePhase v_cap{};  // load terminal voltage per phase
    double t = 0.0;

    // Diode-bridge topology only.
    double v_dc_bus = 0.0;
    std::array<int, kPhases> diode_mode{};  // +1 upper diode, -1 lower diode, 0 open
};

struct StepInputs {
    ThreePhase v_grid_start{};
    ThreePhase v_grid_end{};
    ThreePhase v_inj{};  // held over the step
    SeriesImpedance series;
    LoadParams load;
};

namespace detail {

[[noreturn]] inline void abort_non_finite(double t, int phase, double i, double v) {
    std::ostringstream os;
    os << "non-finite circuit state at t=" << t << " s, phase " << kPhaseNames[static_cast<std::size_t>(phase)]
       << ": i=" << i << " A, v_load=" << v << " V";
    throw SimulationError(os.str());
}

inline void require_finite(const CircuitState& s) {
    for (int ph = 0; ph < kPhases; ++ph) {
        const auto k = static_cast<std::size_t>(ph);
        if (!std::isfinite(s.i_line[k]) || !std::isfinite(s.v_cap[k])) {
            abort_non_finite(s.t, ph, s.i_line[k], s.v_cap[k]);
        }
    }
    if (!std::isfinite(s.v_dc_bus)) {
        throw SimulationError("non-finite DC bus voltage at t=" + std::to_string(s.t) + " s");
    }
}

}  // namespace detail

/// Trapezoidal integrator for one phase of a linear load, with the step
/// matrices factored once for a fixed dt.
class PhaseIntegrator {
public:
    PhaseIntegrator(const SeriesImpedance& series, const LoadParams& load, double dt)
        : series_(series), load_(load), dt_(dt) {
        if (!(dt > 0.0) || !std::isfinite(dt)) {
            throw ConfigError("sim.dt_s", 0, "time step must be positive");
        }
        if (!(series.r >= 0.0) || !(series.l >= 0.0)) {
            throw ConfigError("series branch R and L must be non-negative");
        }
        load.validate();
        if (load.topology == LoadTopology::kDiodeBridge) {
            throw ConfigError("load.topology", 0, "diode bridge is not a per-phase load");
        }
        if (series.l == 0.0) {
            if (series.r != 0.0) {
                throw ConfigError("a series branch without inductance must also be lossless");
            }
            if (load.topology == LoadTopology::kShort) {
                throw ConfigError("ideal source into a short circuit");
            }
            return;
        }
        const double h = dt / 2.0;
        if (load.topology == LoadTopology::kParallelRc) {
            Eigen::Matrix2d m;
            m << -series.r / series.l, -1.0 / series.l, 1.0 / load.c_load, -1.0 / (load.r_load * load.c_load);
            const Eigen::Matrix2d id = Eigen::Matrix2d::Identity();
            a_inv_ = (id - h * m).inverse();
            b_ = id + h * m;
        } else {
            const double r_eff = series.r + (load.topology == LoadTopology::kResistive ? load.r_load : 0.0);
            const double m = -r_eff / series.l;
            scalar_gain_ = (1.0 + h * m) / (1.0 - h * m);
            scalar_in_ = h / series.l / (1.0 - h * m);
        }
    }

    /// Advances (i, v_load) from the EMF e0 at the step start to e1 at its end.
    void step(double& i, double& v, double e0, double e1) const noexcept {
        if (series_.l == 0.0) {
            const double v_prev = v;
            v = e1;
            if (load_.topology == LoadTopology::kParallelRc) {
                i = v / load_.r_load + load_.c_load * (v - v_prev) / dt_;
            } else {
                i = v / load_.r_load;
            }
            return;
        }
        switch (load_.topology) {
            case LoadTopology::kParallelRc: {
                const double h = dt_ / 2.0;
                Eigen::Vector2d x(i, v);
                Eigen::Vector2d u(h * (e0 + e1) / series_.l, 0.0);
                Eigen::Vector2d x1 = a_inv_ * (b_ * x + u);
                i = x1(0);
                v = x1(1);
                break;
            }
            case LoadTopology::kResistive:
                i = scalar_gain_ * i + scalar_in_ * (e0 + e1);
                v = load_.r_load * i;
                break;
            case LoadTopology::kShort:
                i = scalar_gain_ * i + scalar_in_ * (e0 + e1);
                v = 0.0;
                break;
            case LoadTopology::kDiodeBridge:
                break;
        }
    }

    /// Right-hand side of L di/dt for the given state and EMF.
    [[nodiscard]] double di_dt(double i, double v, double e) const noexcept {
        if (series_.l == 0.0) {
            return 0.0;
        }
        return (e - series_.r * i - v) / series_.l;
    }

    [[nodiscard]] const SeriesImpedance& series() const noexcept { return series_; }
    [[nodiscard]] double dt() const noexcept { return dt_; }

private:
    SeriesImpedance series_;
    LoadParams load_;
    double dt_;
    Eigen::Matrix2d a_inv_ = Eigen::Matrix2d::Zero();
    Eigen::Matrix2d b_ = Eigen::Matrix2d::Zero();
    double scalar_gain_ = 0.0;
    double scalar_in_ = 0.0;
};

/// Network-equation residual of one accepted step, with di/dt taken from the
/// discrete scheme: L (i1 - i0)/dt against the trapezoidal average of the
/// driving voltage. Zero up to rounding when the step solved the network.
inline double kvl_residual(double i0, double v0, double i1, double v1, double e0, double e1,
                           const SeriesImpedance& series, double dt) noexcept {
    if (series.l == 0.0) {
        return e1 - series.r * i1 - v1;
    }
    const double lhs = series.l * (i1 - i0) / dt;
    const double rhs = 0.5 * ((e0 - series.r * i0 - v0) + (e1 - series.r * i1 - v1));
    return lhs - rhs;
}

/// Ideal three-phase diode bridge on a floating DC bus (R parallel C).
/// Diode states change on sample boundaries only.
class DiodeBridge {
public:
    DiodeBridge(const SeriesImpedance& series, const LoadParams& load, double dt)
        : series_(series), load_(load), dt_(dt) {
        load.validate();
        if (!(series.l > 0.0)) {
            throw ConfigError("line.l_henry", 0, "diode bridge needs a series inductance");
        }
        if (!(dt > 0.0)) {
            throw ConfigError("sim.dt_s", 0, "time step must be positive");
        }
    }

    /// Advances currents, DC bus voltage and diode states; terminal voltages
    /// land in state.v_cap. `e0`/`e1` include the injected EMF.
    void step(CircuitState& s, const ThreePhase& e0, const ThreePhase& e1) const {
        using Mat4 = Eigen::Matrix4d;
        using Vec4 = Eigen::Vector4d;
        Mat4 m = Mat4::Zero();
        Eigen::Matrix<double, 4, 3> g = Eigen::Matrix<double, 4, 3>::Zero();
        build(s.diode_mode, m, g);

        const double h = dt_ / 2.0;
        const Mat4 id = Mat4::Identity();
        Vec4 x(s.i_line[0], s.i_line[1], s.i_line[2], s.v_dc_bus);
        const Eigen::Vector3d esum(e0[0] + e1[0], e0[1] + e1[1], e0[2] + e1[2]);
        Vec4 rhs = (id + h * m) * x + h * g * esum;
        Vec4 x1 = (id - h * m).partialPivLu().solve(rhs);

        for (int k = 0; k < kPhases; ++k) {
            s.i_line[static_cast<std::size_t>(k)] = x1(k);
        }
        s.v_dc_bus = x1(3);
        update_modes(s, e1);
        s.v_cap = terminal_voltages(s, e1);
    }

    /// Bridge AC terminal potentials relative to the source neutral.
    [[nodiscard]] ThreePhase terminal_voltages(const CircuitState& s, const ThreePhase& e) const noexcept {
        ThreePhase v = e;
        int np = 0;
        int nn = 0;
        double sum = 0.0;
        for (int k = 0; k < kPhases; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            if (s.diode_mode[ku] != 0) {
                sum += e[ku] - series_.r * s.i_line[ku];
                (s.diode_mode[ku] > 0 ? np : nn) += 1;
            }
        }
        if (np == 0 || nn == 0) {
            return v;
        }
        const double u_p = (sum + static_cast<double>(nn) * s.v_dc_bus) / static_cast<double>(np + nn);
        for (int k = 0; k < kPhases; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            if (s.diode_mode[ku] > 0) {
                v[ku] = u_p;
            } else if (s.diode_mode[ku] < 0) {
                v[ku] = u_p - s.v_dc_bus;
            }
        }
        return v;
    }

private:
    void build(const std::array<int, kPhases>& mode, Eigen::Matrix4d& m, Eigen::Matrix<double, 4, 3>& g) const {
        const double c = load_.c_load;
        m(3, 3) = -1.0 / (load_.r_load * c);
        int np = 0;
        int nn = 0;
        for (int k : mode) {
            np += k > 0 ? 1 : 0;
            nn += k < 0 ? 1 : 0;
        }
        if (np == 0 || nn == 0) {
            return;
        }
        const double inv_m = 1.0 / static_cast<double>(np + nn);
        const double l = series_.l;
        const double r = series_.r;
        for (int k = 0; k < kPhases; ++k) {
            if (mode[static_cast<std::size_t>(k)] == 0) {
                continue;
            }
            for (int j = 0; j < kPhases; ++j) {
                if (mode[static_cast<std::size_t>(j)] == 0) {
                    continue;
                }
                const double delta = (k == j) ? 1.0 : 0.0;
                m(k, j) = (-r * delta + r * inv_m) / l;
                g(k, j) = (delta - inv_m) / l;
            }
            const double on_lower = mode[static_cast<std::size_t>(k)] < 0 ? 1.0 : 0.0;
            m(k, 3) = (on_lower - static_cast<double>(nn) * inv_m) / l;
            if (mode[static_cast<std::size_t>(k)] > 0) {
                m(3, k) = 1.0 / c;
            }
        }
    }

    void update_modes(CircuitState& s, const ThreePhase& e) const {
        // Turn off diodes whose current reversed.
        bool changed = false;
        for (int k = 0; k < kPhases; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            if ((s.diode_mode[ku] > 0 && s.i_line[ku] < 0.0) || (s.diode_mode[ku] < 0 && s.i_line[ku] > 0.0)) {
                s.diode_mode[ku] = 0;
                s.i_line[ku] = 0.0;
                changed = true;
            }
        }
        if (changed) {
            rebalance(s);
        }
        // Turn on open phases whose EMF is outside the rail potentials.
        const ThreePhase v = terminal_voltages(s, e);
        double u_p = 0.0;
        double u_n = 0.0;
        int np = 0;
        int nn = 0;
        for (int k = 0; k < kPhases; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            if (s.diode_mode[ku] > 0) {
                u_p = v[ku];
                ++np;
            } else if (s.diode_mode[ku] < 0) {
                u_n = v[ku];
                ++nn;
            }
        }
        if (np > 0 && nn > 0) {
            for (int k = 0; k < kPhases; ++k) {
                const auto ku = static_cast<std::size_t>(k);
                if (s.diode_mode[ku] == 0) {
                    if (e[ku] > u_p) {
                        s.diode_mode[ku] = 1;
                    } else if (e[ku] < u_n) {
                        s.diode_mode[ku] = -1;
                    }
                }
            }
            return;
        }
        // Bridge blocked: conduct through the widest pair once it exceeds the bus.
        std::size_t hi = 0;
        std::size_t lo = 0;
        for (std::size_t k = 1; k < static_cast<std::size_t>(kPhases); ++k) {
            if (e[k] > e[hi]) {
                hi = k;
            }
            if (e[k] < e[lo]) {
                lo = k;
            }
        }
        s.diode_mode = {0, 0, 0};
        s.i_line = {0.0, 0.0, 0.0};
        if (e[hi] - e[lo] > s.v_dc_bus) {
            s.diode_mode[hi] = 1;
            s.diode_mode[lo] = -1;
        }
    }

    // Restore zero current sum after a diode turned off mid-commutation.
    static void rebalance(CircuitState& s) noexcept {
        double sum = 0.0;
        int n = 0;
        for (int k = 0; k < kPhases; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            sum += s.i_line[ku];
            n += s.diode_mode[ku] != 0 ? 1 : 0;
        }
        if (n < 2) {
            s.i_line = {0.0, 0.0, 0.0};
            s.diode_mode = {0, 0, 0};
            return;
        }
        for (int k = 0; k < kPhases; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            if (s.diode_mode[ku] != 0) {
                s.i_line[ku] -= sum / static_cast<double>(n);
            }
        }
    }

    SeriesImpedance series_;
    LoadParams load_;
    double dt_;
};

/// One trapezoidal step of the whole network. Builds the step matrices on
/// every call; the simulator keeps a PhaseIntegrator per run instead.
inline CircuitState step(const CircuitState& state, const StepInputs& in, double dt) {
    CircuitState next = state;
    next.t = state.t + dt;
    if (in.load.topology == LoadTopology::kDiodeBridge) {
        DiodeBridge bridge(in.series, in.load, dt);
        ThreePhase e0{};
        ThreePhase e1{};
        for (std::size_t k = 0; k < static_cast<std::size_t>(kPhases); ++k) {
            e0[k] = in.v_grid_start[k] + in.v_inj[k];
            e1[k] = in.v_grid_end[k] + in.v_inj[k];
        }
        bridge.step(next, e0, e1);
    } else {
        PhaseIntegrator integ(in.series, in.load, dt);
        for (std::size_t k = 0; k < static_cast<std::size_t>(kPhases); ++k) {
            integ.step(next.i_line[k], next.v_cap[k], in.v_grid_start[k] + in.v_inj[k],
                       in.v_grid_end[k] + in.v_inj[k]);
        }
    }
    detail::require_finite(next);
    return next;
}

}  // namespace msvr
