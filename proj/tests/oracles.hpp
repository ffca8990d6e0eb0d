#pragma once

// Reference implementations the tests compare against. Deliberately naive:
// nothing here shares code with the library.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

namespace oracle {

/// Every level (2b - (2^p - 1)) v_dc / 2 built from pole sums, ascending b.
inline std::vector<double> levels_by_pole_sum(int p, double v_dc) {
    std::vector<double> out;
    for (std::uint32_t b = 0; b < (1U << p); ++b) {
        double v = 0.0;
        for (int k = 0; k < p; ++k) {
            const double n = ((b >> k) & 1U) ? 1.0 : 0.0;
            v += std::pow(2.0, k) * (2.0 * n - 1.0) * v_dc / 2.0;
        }
        out.push_back(v);
    }
    return out;
}

/// Index b minimizing |v - level(b)|, ties to the higher level.
inline std::uint32_t argmin_level(double v, int p, double v_dc) {
    const auto lv = levels_by_pole_sum(p, v_dc);
    std::uint32_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::uint32_t b = 0; b < lv.size(); ++b) {
        const double d = std::abs(v - lv[b]);
        if (d < best_d || (d == best_d && lv[b] > lv[best])) {
            best = b;
            best_d = d;
        }
    }
    return best;
}

/// Peak magnitude of harmonic h over samples [first, first + n), with the
/// angle evaluated directly for every sample.
inline double dft_magnitude(const std::vector<double>& x, std::size_t first, std::size_t n, std::size_t spc,
                            int h) {
    long double re = 0.0L;
    long double im = 0.0L;
    for (std::size_t k = 0; k < n; ++k) {
        const long double ang = 2.0L * std::numbers::pi_v<long double> * h * static_cast<long double>(k) /
                                static_cast<long double>(spc);
        re += x[first + k] * std::cos(ang);
        im -= x[first + k] * std::sin(ang);
    }
    return static_cast<double>(2.0L * std::sqrt(re * re + im * im) / static_cast<long double>(n));
}

inline double thd_percent(const std::vector<double>& x, std::size_t first, std::size_t n, std::size_t spc, int H) {
    const double m1 = dft_magnitude(x, first, n, spc, 1);
    double s = 0.0;
    for (int h = 2; h <= H; ++h) {
        const double m = dft_magnitude(x, first, n, spc, h);
        s += m * m;
    }
    return 100.0 * std::sqrt(s) / m1;
}

/// Ideal square wave THD from its Fourier series (odd harmonics 1/h) through H.
inline double square_wave_thd(int H) {
    double s = 0.0;
    for (int h = 3; h <= H; h += 2) {
        s += 1.0 / (static_cast<double>(h) * h);
    }
    return 100.0 * std::sqrt(s);
}

/// Series R-L driven by a DC step V from rest.
inline double rl_step(double V, double R, double L, double t) { return V / R * (1.0 - std::exp(-R * t / L)); }

}  // namespace oracle
