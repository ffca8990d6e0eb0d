#pragma once

// CSV export of a signal bundle. Column 1 is `t_s`; every other column is
// `<name>_<unit>`. Numbers use the shortest text that reads back to the
// same double, so a write/read cycle is lossless.

#include "msvr/errors.hpp"
#include "msvr/time_series.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace msvr {

namespace detail {

inline void put_double(std::string& line, double v) {
    std::array<char, 32> buf{};
    auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    line.append(buf.data(), p);
}

}  // namespace detail

inline void write_csv(const SignalBundle& bundle, std::ostream& os) {
    if (bundle.empty()) {
        throw IoError("cannot write an empty signal bundle");
    }
    std::string line = "t_s";
    for (const auto& s : bundle.series()) {
        line += ',';
        line += s.name;
        line += '_';
        line += s.unit;
    }
    line += '\n';
    os << line;
    const auto& cols = bundle.series();
    for (std::size_t k = 0; k < bundle.sample_count(); ++k) {
        line.clear();
        detail::put_double(line, bundle.t0() + static_cast<double>(k) * bundle.dt());
        for (const auto& s : cols) {
            line += ',';
            detail::put_double(line, s.values[k]);
        }
        line += '\n';
        os << line;
    }
    if (!os) {
        throw IoError("write failed");
    }
}

inline void write_csv(const SignalBundle& bundle, const std::string& path) {
    if (bundle.empty()) {
        throw IoError("cannot write an empty signal bundle");
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    write_csv(bundle, f);
    f.flush();
    if (!f) {
        throw IoError("write to '" + path + "' failed");
    }
}

/// Parsed CSV: header names and column-major values.
struct CsvTable {
    std::vector<std::string> headers;
    std::vector<std::vector<double>> columns;

    [[nodiscard]] std::size_t rows() const noexcept { return columns.empty() ? 0 : columns.front().size(); }

    [[nodiscard]] const std::vector<double>& column(const std::string& header) const {
        for (std::size_t k = 0; k < headers.size(); ++k) {
            if (headers[k] == header) {
                return columns[k];
            }
        }
        throw IoError("no column '" + header + "'");
    }

    /// Column as a series on the time base of `t_s`.
    [[nodiscard]] TimeSeries series(const std::string& header) const {
        const auto& t = column("t_s");
        const auto& v = column(header);
        if (t.size() < 2) {
            throw AnalysisError("column '" + header + "' has fewer than 2 samples");
        }
        const double dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
        return {header, "", t.front(), dt, v};
    }
};

inline CsvTable read_csv(std::istream& in) {
    CsvTable out;
    std::string line;
    if (!std::getline(in, line)) {
        throw IoError("CSV has no header");
    }
    {
        std::string_view rest = line;
        while (true) {
            const auto c = rest.find(',');
            out.headers.emplace_back(rest.substr(0, c));
            if (c == std::string_view::npos) {
                break;
            }
            rest.remove_prefix(c + 1);
        }
    }
    out.columns.resize(out.headers.size());
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) {
            continue;
        }
        std::size_t col = 0;
        const char* p = line.data();
        const char* end = line.data() + line.size();
        while (true) {
            if (col >= out.columns.size()) {
                throw IoError("CSV row " + std::to_string(row) + " has too many fields");
            }
            double v = 0.0;
            auto [q, ec] = std::from_chars(p, end, v);
            if (ec != std::errc()) {
                throw IoError("CSV row " + std::to_string(row) + ", column " + std::to_string(col + 1) +
                              ": not a number");
            }
            out.columns[col++].push_back(v);
            if (q == end) {
                break;
            }
            if (*q != ',') {
                throw IoError("CSV row " + std::to_string(row) + ": unexpected character");
            }
            p = q + 1;
        }
        if (col != out.columns.size()) {
            throw IoError("CSV row " + std::to_string(row) + " has " + std::to_string(col) + " fields, expected " +
                          std::to_string(out.columns.size()));
        }
    }
    return out;
}

inline CsvTable read_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw IoError("cannot open '" + path + "'");
    }
    return read_csv(f);
}

}  // namespace msvr
