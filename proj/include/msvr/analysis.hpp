#pragma once

#include "msvr/errors.hpp"
#include "msvr/time_series.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

namespace msvr {

/// Peak magnitude per harmonic order from a whole-cycle DFT.
struct HarmonicSpectrum {
    double fundamental = 0.0;
    double dc = 0.0;
    /// coefficients[h-1] is the complex peak phasor of harmonic h.
    std::vector<std::complex<double>> coefficients;

    [[nodiscard]] std::size_t highest_order() const noexcept { return coefficients.size(); }

    /// Peak magnitude of harmonic `h` (1-based).
    [[nodiscard]] double magnitude(std::size_t h) const { return std::abs(coefficients.at(h - 1)); }

    [[nodiscard]] std::vector<double> magnitudes() const {
        std::vector<double> m;
        m.reserve(coefficients.size());
        for (const auto& c : coefficients) {
            m.push_back(std::abs(c));
        }
        return m;
    }
};

/// Samples per fundamental period; the time step must divide it exactly.
inline std::size_t samples_per_cycle(double dt, double fundamental) {
    if (!(fundamental > 0.0) || !(dt > 0.0)) {
        throw AnalysisError("fundamental frequency and sample step must be positive");
    }
    const double spc = 1.0 / (fundamental * dt);
    const double r = std::round(spc);
    if (r < 1.0 || std::abs(spc - r) > 1e-6 * r) {
        throw AnalysisError("sample step " + std::to_string(dt) + " s does not divide the " +
                            std::to_string(fundamental) + " Hz period into whole samples");
    }
    return static_cast<std::size_t>(r);
}

/// Rectangular-window DFT over exactly `cycles` periods starting at period
/// `start_cycle`. Harmonics 1..H.
inline HarmonicSpectrum harmonic_spectrum(const TimeSeries& series, double fundamental, std::size_t cycles,
                                          std::size_t start_cycle, std::size_t harmonics) {
    if (harmonics < 2) {
        throw AnalysisError("at least 2 harmonic orders are required, got " + std::to_string(harmonics));
    }
    if (cycles == 0) {
        throw AnalysisError("analysis window must contain at least one cycle");
    }
    const std::size_t spc = samples_per_cycle(series.dt, fundamental);
    if (spc < 2 * harmonics + 2) {
        throw AnalysisError("resolving " + std::to_string(harmonics) + " harmonics needs " +
                            std::to_string(2 * harmonics + 2) + " samples per cycle, have " + std::to_string(spc));
    }
    const std::size_t need = (start_cycle + cycles) * spc;
    if (series.size() < need) {
        throw AnalysisError("window of " + std::to_string(cycles) + " cycles from cycle " +
                            std::to_string(start_cycle) + " needs " + std::to_string(need) + " samples, have " +
                            std::to_string(series.size()));
    }

    // Twiddles repeat every period; index by (h n) mod spc.
    std::vector<std::complex<double>> twiddle(spc);
    for (std::size_t m = 0; m < spc; ++m) {
        const double ang = -2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(spc);
        twiddle[m] = {std::cos(ang), std::sin(ang)};
    }

    const std::size_t n_win = cycles * spc;
    const std::size_t first = start_cycle * spc;
    HarmonicSpectrum out;
    out.fundamental = fundamental;
    out.coefficients.resize(harmonics);
    double dc = 0.0;
    for (std::size_t n = 0; n < n_win; ++n) {
        dc += series.values[first + n];
    }
    out.dc = dc / static_cast<double>(n_win);
    for (std::size_t h = 1; h <= harmonics; ++h) {
        std::complex<double> acc{0.0, 0.0};
        std::size_t idx = 0;
        for (std::size_t n = 0; n < n_win; ++n) {
            acc += series.values[first + n] * twiddle[idx];
            idx += h;
            if (idx >= spc) {
                idx %= spc;
            }
        }
        out.coefficients[h - 1] = acc * (2.0 / static_cast<double>(n_win));
    }
    return out;
}

/// Total harmonic distortion in percent, relative to the fundamental.
inline double thd(const HarmonicSpectrum& spectrum) {
    if (spectrum.coefficients.size() < 2) {
        throw AnalysisError("spectrum has fewer than 2 harmonic orders");
    }
    const double m1 = std::abs(spectrum.coefficients.front());
    if (!(m1 > 0.0)) {
        throw AnalysisError("THD undefined: fundamental magnitude is zero");
    }
    double sum = 0.0;
    for (std::size_t h = 2; h <= spectrum.coefficients.size(); ++h) {
        const double m = std::abs(spectrum.coefficients[h - 1]);
        sum += m * m;
    }
    return 100.0 * std::sqrt(sum) / m1;
}

struct PowerSeries {
    TimeSeries p;  // W
    TimeSeries q;  // var
};

/// p = sum v_k i_k; q = [(va - vb) ic + (vb - vc) ia + (vc - va) ib] / sqrt(3).
/// Lagging current gives positive q.
inline PowerSeries instantaneous_powers(const std::array<const TimeSeries*, 3>& v,
                                        const std::array<const TimeSeries*, 3>& i) {
    const std::size_t n = v[0]->size();
    for (std::size_t k = 0; k < 3; ++k) {
        if (v[k]->size() != n || i[k]->size() != n) {
            throw AnalysisError("voltage and current series must have equal sample counts");
        }
        if (v[k]->dt != v[0]->dt || i[k]->dt != v[0]->dt || v[k]->t0 != v[0]->t0 || i[k]->t0 != v[0]->t0) {
            throw AnalysisError("voltage and current series must share one time base");
        }
    }
    PowerSeries out{TimeSeries("p", "W", v[0]->t0, v[0]->dt), TimeSeries("q", "var", v[0]->t0, v[0]->dt)};
    out.p.values.resize(n);
    out.q.values.resize(n);
    const double inv_sqrt3 = 1.0 / std::numbers::sqrt3;
    for (std::size_t k = 0; k < n; ++k) {
        const double va = (*v[0])[k];
        const double vb = (*v[1])[k];
        const double vc = (*v[2])[k];
        const double ia = (*i[0])[k];
        const double ib = (*i[1])[k];
        const double ic = (*i[2])[k];
        out.p.values[k] = va * ia + vb * ib + vc * ic;
        out.q.values[k] = inv_sqrt3 * ((va - vb) * ic + (vb - vc) * ia + (vc - va) * ib);
    }
    return out;
}

inline PowerSeries instantaneous_powers(const std::array<TimeSeries, 3>& v, const std::array<TimeSeries, 3>& i) {
    return instantaneous_powers({&v[0], &v[1], &v[2]}, {&i[0], &i[1], &i[2]});
}

/// RMS over the last `cycles` whole periods of the series.
inline double rms(const TimeSeries& series, std::size_t cycles, double fundamental) {
    if (cycles == 0) {
        throw AnalysisError("RMS needs at least one cycle");
    }
    if (!(fundamental > 0.0)) {
        throw AnalysisError("fundamental frequency must be positive");
    }
    const double n_exact = static_cast<double>(cycles) / (fundamental * series.dt);
    const auto n = static_cast<std::size_t>(std::llround(n_exact));
    if (n == 0 || n > series.size()) {
        throw AnalysisError("RMS over " + std::to_string(cycles) + " cycles needs " + std::to_string(n) +
                            " samples, have " + std::to_string(series.size()));
    }
    double sum = 0.0;
    for (std::size_t k = series.size() - n; k < series.size(); ++k) {
        sum += series.values[k] * series.values[k];
    }
    return std::sqrt(sum / static_cast<double>(n));
}

/// Arithmetic mean over samples [first, last).
inline double mean(const TimeSeries& series, std::size_t first, std::size_t last) {
    if (first >= last || last > series.size()) {
        throw AnalysisError("mean over an empty or out-of-range sample span");
    }
    double s = 0.0;
    for (std::size_t k = first; k < last; ++k) {
        s += series.values[k];
    }
    return s / static_cast<double>(last - first);
}

}  // namespace msvr
