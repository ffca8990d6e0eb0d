#pragma once

// Scenario documents: flat `key = value` lines, `#` starts a comment.
//
//   grid.v_rms_ll_volt = 11000
//   converter.stages   = 3
//   events[0].kind     = sag
//   events[0].start_s  = 0.1
//
// Every key is optional; omitted keys take the defaults below. Unknown keys,
// repeated keys and malformed values are rejected with the key path and line.

#include "msvr/circuit.hpp"
#include "msvr/control.hpp"
#include "msvr/converter.hpp"
#include "msvr/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace msvr {

enum class StageWeighting { kBinary, kIdentical };

/// Where the compensator's load-voltage target comes from.
enum class ReferenceSource {
    kSupply,      // the undisturbed grid waveform (pre-disturbance restoration)
    kLoadWarmup,  // load-voltage fundamental of an uncompensated warm-up run
};

struct ConverterSettings {
    int stages = 3;
    double v_dc = 2.0 * std::numbers::sqrt2 * 3000.0 / 7.0;
    bool enabled = true;
    StageWeighting weighting = StageWeighting::kBinary;
    // Device data carried for completeness; switches are ideal.
    double on_resistance = 1e-3;
    double snubber_r = 1e5;
    double snubber_c = std::numeric_limits<double>::infinity();
};

struct StageSettings {
    double hv_r_pu = 0.002;
    double hv_x_pu = 0.08;
    double lv_r_pu = 0.002;
    double lv_x_pu = 0.08;
    // Shunt branch; not part of the dynamic model.
    double magnetizing_r_pu = 6.0;
    double magnetizing_x_pu = 0.038;
    double v_base = 3000.0;
    double s_base = 1.0e6;
    double turns_scale = 1.0;
};

struct ControlSettings {
    ReferenceSource source = ReferenceSource::kSupply;
    std::optional<double> reference_rms;
    double reference_phase_deg = 0.0;
};

struct SimSettings {
    double duration = 2.5;
    double dt = 1e-5;
    std::size_t csv_stride = 10;
    std::vector<std::string> signals;  // empty selects all
};

struct AnalysisSettings {
    std::size_t start_cycle = 75;
    std::size_t cycles = 50;
    std::size_t harmonics = 49;
};

struct Scenario {
    GridSource grid;
    ConverterSettings converter;
    StageSettings stage;
    LineParams line;
    LoadParams load;
    std::vector<Event> events;
    ControlSettings control;
    SimSettings sim;
    AnalysisSettings analysis;

    [[nodiscard]] ConverterParams converter_params() const { return {converter.stages, converter.v_dc}; }

    /// One entry per converter stage, ratios 1:2:4:... (or all equal).
    [[nodiscard]] std::vector<TransformerStage> transformer_stages() const {
        std::vector<TransformerStage> out;
        for (int k = 1; k <= converter.stages; ++k) {
            TransformerStage s;
            s.r_pu = 0.5 * (stage.hv_r_pu + stage.lv_r_pu);
            s.x_pu = 0.5 * (stage.hv_x_pu + stage.lv_x_pu);
            s.v_base = stage.v_base;
            s.s_base = stage.s_base;
            const double w = converter.weighting == StageWeighting::kBinary
                                 ? static_cast<double>(std::uint32_t{1} << static_cast<unsigned>(k - 1))
                                 : 1.0;
            s.ratio = stage.turns_scale * w;
            out.push_back(s);
        }
        return out;
    }

    /// Line plus every stage's referred winding impedance.
    [[nodiscard]] SeriesImpedance total_series() const {
        SeriesImpedance z{line.r_line, line.l_line};
        for (const auto& s : transformer_stages()) {
            z += referred_stage_impedance(s, grid.frequency);
        }
        return z;
    }

    [[nodiscard]] std::size_t step_count() const {
        return static_cast<std::size_t>(std::llround(sim.duration / sim.dt));
    }

    /// Checks every cross-field invariant. Field-level checks happen while parsing.
    void validate() const;

    /// Canonical `key = value` rendering of every setting.
    [[nodiscard]] std::string to_text() const;

    /// FNV-1a of the canonical text, hex.
    [[nodiscard]] std::string hash() const {
        std::uint64_t h = 1469598103934665603ULL;
        for (unsigned char c : to_text()) {
            h ^= c;
            h *= 1099511628211ULL;
        }
        std::ostringstream os;
        os << std::hex << std::setw(16) << std::setfill('0') << h;
        return os.str();
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::string format_double(double v) {
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    std::array<char, 64> buf{};
    auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return {buf.data(), p};
}

struct Entry {
    std::string value;
    std::size_t line;
};

class Reader {
public:
    explicit Reader(std::map<std::string, Entry> entries) : entries_(std::move(entries)) {}

    bool has(const std::string& key) const { return entries_.contains(key); }

    std::size_t line(const std::string& key) const {
        auto it = entries_.find(key);
        return it == entries_.end() ? 0 : it->second.line;
    }

    void real(const std::string& key, double& out) {
        if (auto e = take(key)) {
            out = parse_real(key, *e);
        }
    }

    void integer(const std::string& key, long long& out) {
        if (auto e = take(key)) {
            const std::string_view s = e->value;
            long long v = 0;
            auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc() || p != s.data() + s.size()) {
                throw ConfigError(key, e->line, "expected an integer, got '" + e->value + "'");
            }
            out = v;
        }
    }

    void boolean(const std::string& key, bool& out) {
        if (auto e = take(key)) {
            if (e->value == "true") {
                out = true;
            } else if (e->value == "false") {
                out = false;
            } else {
                throw ConfigError(key, e->line, "expected true or false, got '" + e->value + "'");
            }
        }
    }

    std::optional<Entry> take(const std::string& key) {
        auto it = entries_.find(key);
        if (it == entries_.end()) {
            return std::nullopt;
        }
        Entry e = it->second;
        entries_.erase(it);
        return e;
    }

    static double parse_real(const std::string& key, const Entry& e) {
        const std::string_view s = e.value;
        double v = 0.0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size()) {
            throw ConfigError(key, e.line, "expected a number, got '" + e.value + "'");
        }
        return v;
    }

    const std::map<std::string, Entry>& remaining() const { return entries_; }

private:
    std::map<std::string, Entry> entries_;
};

inline void require(bool ok, const std::string& key, std::size_t line, const std::string& msg) {
    if (!ok) {
        throw ConfigError(key, line, msg);
    }
}

}  // namespace detail

inline void Scenario::validate() const {
    grid.validate();
    line.validate();
    load.validate();
    (void)converter_params();
    if (converter.stages > kMaxTableStages) {
        throw ConfigError("converter.stages", 0,
                          "at most " + std::to_string(kMaxTableStages) + " stages can be simulated");
    }
    for (const auto& s : transformer_stages()) {
        s.validate();
    }
    if (!(stage.turns_scale > 0.0)) {
        throw ConfigError("stage.turns_scale", 0, "turns scale must be positive");
    }
    (void)EventSchedule(events);
    if (control.reference_rms && !(*control.reference_rms > 0.0)) {
        throw ConfigError("control.reference_rms_volt", 0, "reference rms must be positive");
    }
    if (!(sim.dt > 0.0) || !std::isfinite(sim.dt)) {
        throw ConfigError("sim.dt_s", 0, "time step must be positive");
    }
    if (!(sim.duration > 0.0) || !std::isfinite(sim.duration)) {
        throw ConfigError("sim.duration_s", 0, "duration must be positive");
    }
    const double steps = sim.duration / sim.dt;
    if (std::abs(steps - std::round(steps)) > 1e-6 * std::max(1.0, steps)) {
        throw ConfigError("sim.dt_s", 0, "time step must divide the duration into whole steps");
    }
    const double spc = 1.0 / (grid.frequency * sim.dt);
    if (std::abs(spc - std::round(spc)) > 1e-6 * spc) {
        throw ConfigError("sim.dt_s", 0, "time step must divide the fundamental period into whole samples");
    }
    if (spc < 200.0 - 1e-9) {
        throw ConfigError("sim.dt_s", 0, "time step must resolve at least 200 samples per fundamental period");
    }
    if (sim.csv_stride == 0) {
        throw ConfigError("sim.csv_stride", 0, "stride must be positive");
    }
    if (analysis.cycles == 0) {
        throw ConfigError("analysis.cycles", 0, "analysis window must hold at least one cycle");
    }
    if (analysis.harmonics < 2) {
        throw ConfigError("analysis.harmonics", 0, "at least 2 harmonic orders are required");
    }
    const double span = static_cast<double>(analysis.start_cycle + analysis.cycles) / grid.frequency;
    if (span > sim.duration * (1.0 + 1e-9)) {
        throw ConfigError("analysis.cycles", 0,
                          "analysis window ends at " + detail::format_double(span) +
                              " s, after the simulated duration " + detail::format_double(sim.duration) + " s");
    }
}

inline std::string Scenario::to_text() const {
    using detail::format_double;
    std::ostringstream os;
    auto kv = [&os](const std::string& k, const std::string& v) { os << k << " = " << v << '\n'; };
    kv("grid.v_rms_ll_volt", format_double(grid.v_rms_ll));
    kv("grid.frequency_hz", format_double(grid.frequency));
    kv("converter.stages", std::to_string(converter.stages));
    kv("converter.v_dc_volt", format_double(converter.v_dc));
    kv("converter.enabled", converter.enabled ? "true" : "false");
    kv("converter.weighting", converter.weighting == StageWeighting::kBinary ? "binary" : "identical");
    kv("converter.on_resistance_ohm", format_double(converter.on_resistance));
    kv("converter.snubber_r_ohm", format_double(converter.snubber_r));
    kv("converter.snubber_c_farad", format_double(converter.snubber_c));
    kv("stage.hv_r_pu", format_double(stage.hv_r_pu));
    kv("stage.hv_x_pu", format_double(stage.hv_x_pu));
    kv("stage.lv_r_pu", format_double(stage.lv_r_pu));
    kv("stage.lv_x_pu", format_double(stage.lv_x_pu));
    kv("stage.magnetizing_r_pu", format_double(stage.magnetizing_r_pu));
    kv("stage.magnetizing_x_pu", format_double(stage.magnetizing_x_pu));
    kv("stage.v_base_volt", format_double(stage.v_base));
    kv("stage.s_base_va", format_double(stage.s_base));
    kv("stage.turns_scale", format_double(stage.turns_scale));
    kv("line.l_henry", format_double(line.l_line));
    kv("line.r_ohm", format_double(line.r_line));
    const char* topo = "parallel_rc";
    switch (load.topology) {
        case LoadTopology::kParallelRc: topo = "parallel_rc"; break;
        case LoadTopology::kResistive: topo = "resistive"; break;
        case LoadTopology::kShort: topo = "short"; break;
        case LoadTopology::kDiodeBridge: topo = "diode_bridge"; break;
    }
    kv("load.topology", topo);
    kv("load.r_ohm", format_double(load.r_load));
    kv("load.c_farad", format_double(load.c_load));
    for (std::size_t k = 0; k < events.size(); ++k) {
        const std::string p = "events[" + std::to_string(k) + "].";
        kv(p + "kind", to_string(events[k].kind));
        kv(p + "start_s", format_double(events[k].start));
        kv(p + "end_s", format_double(events[k].end));
        kv(p + "magnitude", format_double(events[k].magnitude));
    }
    kv("control.reference", control.source == ReferenceSource::kSupply ? "supply" : "load_warmup");
    if (control.reference_rms) {
        kv("control.reference_rms_volt", format_double(*control.reference_rms));
    }
    kv("control.reference_phase_deg", format_double(control.reference_phase_deg));
    kv("sim.duration_s", format_double(sim.duration));
    kv("sim.dt_s", format_double(sim.dt));
    kv("sim.csv_stride", std::to_string(sim.csv_stride));
    std::string sig;
    for (const auto& s : sim.signals) {
        sig += (sig.empty() ? "" : ",") + s;
    }
    kv("sim.signals", sig.empty() ? "all" : sig);
    kv("analysis.start_cycle", std::to_string(analysis.start_cycle));
    kv("analysis.cycles", std::to_string(analysis.cycles));
    kv("analysis.harmonics", std::to_string(analysis.harmonics));
    return os.str();
}

/// Parses and validates a scenario document.
inline Scenario parse_scenario(std::string_view text) {
    using detail::Entry;
    using detail::require;
    std::map<std::string, Entry> entries;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = raw.find('#'); hash != std::string_view::npos) {
            raw = raw.substr(0, hash);
        }
        raw = detail::trim(raw);
        if (raw.empty()) {
            continue;
        }
        const auto eq = raw.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("", line_no, "expected 'key = value', got '" + std::string(raw) + "'");
        }
        const std::string key(detail::trim(raw.substr(0, eq)));
        const std::string value(detail::trim(raw.substr(eq + 1)));
        if (key.empty()) {
            throw ConfigError("", line_no, "missing key before '='");
        }
        if (value.empty()) {
            throw ConfigError(key, line_no, "missing value");
        }
        if (entries.contains(key)) {
            throw ConfigError(key, line_no, "repeated key (first set on line " +
                                                std::to_string(entries.at(key).line) + ")");
        }
        entries.emplace(key, Entry{value, line_no});
    }

    std::map<std::string, std::size_t> lines;
    for (const auto& [k, e] : entries) {
        lines[k] = e.line;
    }
    detail::Reader r(std::move(entries));
    Scenario s;

    auto positive = [&r](const std::string& key, double v) {
        require(v > 0.0 && std::isfinite(v), key, r.line(key), "must be positive and finite");
    };
    auto non_negative = [&r](const std::string& key, double v) {
        require(v >= 0.0 && std::isfinite(v), key, r.line(key), "must be non-negative and finite");
    };

    // grid.*
    r.real("grid.v_rms_ll_volt", s.grid.v_rms_ll);
    non_negative("grid.v_rms_ll_volt", s.grid.v_rms_ll);
    r.real("grid.frequency_hz", s.grid.frequency);
    positive("grid.frequency_hz", s.grid.frequency);

    // converter.*
    {
        long long stages = s.converter.stages;
        const std::size_t ln = r.line("converter.stages");
        r.integer("converter.stages", stages);
        require(stages >= 1 && stages <= kMaxTableStages, "converter.stages", ln,
                "stage count must be in [1, " + std::to_string(kMaxTableStages) + "], got " + std::to_string(stages));
        s.converter.stages = static_cast<int>(stages);
    }
    {
        const std::size_t ln = r.line("converter.v_dc_volt");
        r.real("converter.v_dc_volt", s.converter.v_dc);
        require(s.converter.v_dc > 0.0 && std::isfinite(s.converter.v_dc), "converter.v_dc_volt", ln,
                "DC link voltage must be positive");
    }
    r.boolean("converter.enabled", s.converter.enabled);
    if (auto e = r.take("converter.weighting")) {
        if (e->value == "binary") {
            s.converter.weighting = StageWeighting::kBinary;
        } else if (e->value == "identical") {
            s.converter.weighting = StageWeighting::kIdentical;
        } else {
            throw ConfigError("converter.weighting", e->line, "expected binary or identical, got '" + e->value + "'");
        }
    }
    {
        const std::size_t l1 = r.line("converter.on_resistance_ohm");
        const std::size_t l2 = r.line("converter.snubber_r_ohm");
        const std::size_t l3 = r.line("converter.snubber_c_farad");
        r.real("converter.on_resistance_ohm", s.converter.on_resistance);
        r.real("converter.snubber_r_ohm", s.converter.snubber_r);
        r.real("converter.snubber_c_farad", s.converter.snubber_c);
        require(s.converter.on_resistance >= 0.0, "converter.on_resistance_ohm", l1, "must be non-negative");
        require(s.converter.snubber_r > 0.0, "converter.snubber_r_ohm", l2, "must be positive");
        require(s.converter.snubber_c > 0.0, "converter.snubber_c_farad", l3, "must be positive");
    }

    // stage.*
    const std::pair<const char*, double*> stage_fields[] = {
        {"stage.hv_r_pu", &s.stage.hv_r_pu},
        {"stage.hv_x_pu", &s.stage.hv_x_pu},
        {"stage.lv_r_pu", &s.stage.lv_r_pu},
        {"stage.lv_x_pu", &s.stage.lv_x_pu},
        {"stage.magnetizing_r_pu", &s.stage.magnetizing_r_pu},
        {"stage.magnetizing_x_pu", &s.stage.magnetizing_x_pu},
    };
    for (const auto& [key, dst] : stage_fields) {
        const std::size_t ln = r.line(key);
        r.real(key, *dst);
        require(*dst >= 0.0 && std::isfinite(*dst), key, ln, "per-unit value must be non-negative");
    }
    for (const auto& [key, dst] : {std::pair<const char*, double*>{"stage.v_base_volt", &s.stage.v_base},
                                   std::pair<const char*, double*>{"stage.s_base_va", &s.stage.s_base},
                                   std::pair<const char*, double*>{"stage.turns_scale", &s.stage.turns_scale}}) {
        const std::size_t ln = r.line(key);
        r.real(key, *dst);
        require(*dst > 0.0 && std::isfinite(*dst), key, ln, "must be positive and finite");
    }

    // line.*
    {
        const std::size_t ln = r.line("line.l_henry");
        r.real("line.l_henry", s.line.l_line);
        require(s.line.l_line > 0.0 && std::isfinite(s.line.l_line), "line.l_henry", ln, "line inductance must be positive");
        const std::size_t lr = r.line("line.r_ohm");
        r.real("line.r_ohm", s.line.r_line);
        require(s.line.r_line >= 0.0 && std::isfinite(s.line.r_line), "line.r_ohm", lr, "must be non-negative");
    }

    // load.*
    if (auto e = r.take("load.topology")) {
        if (e->value == "parallel_rc") {
            s.load.topology = LoadTopology::kParallelRc;
        } else if (e->value == "resistive") {
            s.load.topology = LoadTopology::kResistive;
        } else if (e->value == "diode_bridge") {
            s.load.topology = LoadTopology::kDiodeBridge;
        } else if (e->value == "short") {
            s.load.topology = LoadTopology::kShort;
        } else {
            throw ConfigError("load.topology", e->line,
                              "expected parallel_rc, resistive, diode_bridge or short, got '" + e->value + "'");
        }
    }
    {
        const std::size_t lr = r.line("load.r_ohm");
        r.real("load.r_ohm", s.load.r_load);
        require(s.load.r_load > 0.0 && std::isfinite(s.load.r_load), "load.r_ohm", lr, "load resistance must be positive");
        const std::size_t lc = r.line("load.c_farad");
        r.real("load.c_farad", s.load.c_load);
        require(s.load.c_load > 0.0 && std::isfinite(s.load.c_load), "load.c_farad", lc,
                "load capacitance must be positive");
    }

    // events[n].*
    {
        std::map<long long, std::map<std::string, Entry>> grouped;
        std::vector<std::string> event_keys;
        for (const auto& [key, entry] : r.remaining()) {
            if (key.rfind("events[", 0) != 0) {
                continue;
            }
            const auto close = key.find(']');
            if (close == std::string::npos || close + 1 >= key.size() || key[close + 1] != '.') {
                throw ConfigError(key, entry.line, "expected events[<n>].<field>");
            }
            const std::string idx = key.substr(7, close - 7);
            long long n = -1;
            auto [p, ec] = std::from_chars(idx.data(), idx.data() + idx.size(), n);
            if (ec != std::errc() || p != idx.data() + idx.size() || n < 0) {
                throw ConfigError(key, entry.line, "event index must be a non-negative integer");
            }
            grouped[n][key.substr(close + 2)] = entry;
            event_keys.push_back(key);
        }
        for (const auto& k : event_keys) {
            r.take(k);
        }
        for (auto& [n, fields] : grouped) {
            const std::string prefix = "events[" + std::to_string(n) + "].";
            Event ev;
            auto kind = fields.find("kind");
            if (kind == fields.end()) {
                const std::size_t ln = fields.begin()->second.line;
                throw ConfigError(prefix + "kind", ln, "missing required key");
            }
            if (kind->second.value == "sag") {
                ev.kind = EventKind::kSag;
                ev.magnitude = 0.7;
            } else if (kind->second.value == "swell") {
                ev.kind = EventKind::kSwell;
                ev.magnitude = 1.3;
            } else {
                throw ConfigError(prefix + "kind", kind->second.line,
                                  "expected sag or swell, got '" + kind->second.value + "'");
            }
            fields.erase(kind);
            auto start = fields.find("start_s");
            if (start == fields.end()) {
                throw ConfigError(prefix + "start_s", 0, "missing required key");
            }
            ev.start = detail::Reader::parse_real(prefix + "start_s", start->second);
            const std::size_t start_line = start->second.line;
            fields.erase(start);
            if (auto end = fields.find("end_s"); end != fields.end()) {
                ev.end = detail::Reader::parse_real(prefix + "end_s", end->second);
                fields.erase(end);
            }
            std::size_t mag_line = start_line;
            if (auto mag = fields.find("magnitude"); mag != fields.end()) {
                ev.magnitude = detail::Reader::parse_real(prefix + "magnitude", mag->second);
                mag_line = mag->second.line;
                fields.erase(mag);
            }
            if (!fields.empty()) {
                throw ConfigError(prefix + fields.begin()->first, fields.begin()->second.line, "unknown key");
            }
            try {
                ev.validate(prefix.substr(0, prefix.size() - 1));
            } catch (const ConfigError& err) {
                throw ConfigError(prefix + "magnitude", mag_line, err.message());
            }
            s.events.push_back(ev);
        }
        try {
            s.events = EventSchedule(s.events).events();
        } catch (const ConfigError& err) {
            throw ConfigError("events", 0, err.message());
        }
    }

    // control.*
    if (auto e = r.take("control.reference")) {
        if (e->value == "supply") {
            s.control.source = ReferenceSource::kSupply;
        } else if (e->value == "load_warmup") {
            s.control.source = ReferenceSource::kLoadWarmup;
        } else {
            throw ConfigError("control.reference", e->line, "expected supply or load_warmup, got '" + e->value + "'");
        }
    }
    if (auto e = r.take("control.reference_rms_volt")) {
        const double v = detail::Reader::parse_real("control.reference_rms_volt", *e);
        require(v > 0.0 && std::isfinite(v), "control.reference_rms_volt", e->line, "must be positive");
        s.control.reference_rms = v;
    }
    r.real("control.reference_phase_deg", s.control.reference_phase_deg);

    // sim.*
    {
        const std::size_t ld = r.line("sim.duration_s");
        r.real("sim.duration_s", s.sim.duration);
        require(s.sim.duration > 0.0 && std::isfinite(s.sim.duration), "sim.duration_s", ld, "must be positive");
        const std::size_t lt = r.line("sim.dt_s");
        r.real("sim.dt_s", s.sim.dt);
        require(s.sim.dt > 0.0 && std::isfinite(s.sim.dt), "sim.dt_s", lt, "must be positive");
        long long stride = static_cast<long long>(s.sim.csv_stride);
        const std::size_t ls = r.line("sim.csv_stride");
        r.integer("sim.csv_stride", stride);
        require(stride >= 1, "sim.csv_stride", ls, "must be at least 1");
        s.sim.csv_stride = static_cast<std::size_t>(stride);
        if (auto e = r.take("sim.signals")) {
            if (e->value != "all") {
                std::string_view rest = e->value;
                while (!rest.empty()) {
                    const auto comma = rest.find(',');
                    auto item = detail::trim(rest.substr(0, comma));
                    require(!item.empty(), "sim.signals", e->line, "empty signal name in list");
                    s.sim.signals.emplace_back(item);
                    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
                }
            }
        }
    }

    // analysis.*
    for (const auto& [key, dst] : {std::pair<const char*, std::size_t*>{"analysis.start_cycle", &s.analysis.start_cycle},
                                   std::pair<const char*, std::size_t*>{"analysis.cycles", &s.analysis.cycles},
                                   std::pair<const char*, std::size_t*>{"analysis.harmonics", &s.analysis.harmonics}}) {
        long long v = static_cast<long long>(*dst);
        const std::size_t ln = r.line(key);
        r.integer(key, v);
        require(v >= 0, key, ln, "must be non-negative");
        *dst = static_cast<std::size_t>(v);
    }

    if (!r.remaining().empty()) {
        const auto& [key, entry] = *r.remaining().begin();
        throw ConfigError(key, entry.line, "unknown key");
    }

    // Cross-field invariants; attach the line of the key that was set, if any.
    try {
        s.validate();
    } catch (const ConfigError& err) {
        auto it = lines.find(err.key());
        if (err.line() != 0 || it == lines.end()) {
            throw;
        }
        throw ConfigError(err.key(), it->second, err.message());
    }
    return s;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("", 0, "cannot open scenario file '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

}  // namespace msvr
