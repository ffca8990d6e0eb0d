#include "msvr/csv.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace msvr;

namespace {

SignalBundle bundle3(std::size_t n) {
    SignalBundle b(0.0, 1e-4);
    std::mt19937 rng(9);
    std::normal_distribution<double> d(0.0, 1e3);
    for (const auto& [name, unit] : {std::pair{"v_load_a", "V"}, std::pair{"i_grid_a", "A"}, std::pair{"q", "var"}}) {
        TimeSeries ts(name, unit, 0.0, 1e-4);
        for (std::size_t k = 0; k < n; ++k) {
            ts.values.push_back(d(rng) * std::pow(10.0, static_cast<double>(k % 7) - 3.0));
        }
        b.add(std::move(ts));
    }
    return b;
}

std::string tmp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST(WriteCsv, Shape) {
    std::ostringstream os;
    write_csv(bundle3(100), os);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "t_s,v_load_a_V,i_grid_a_A,q_var");
    std::size_t rows = 1;
    while (std::getline(is, line)) {
        ++rows;
        EXPECT_EQ(std::count(line.begin(), line.end(), ','), 3);
    }
    EXPECT_EQ(rows, 101U);
}

TEST(WriteCsv, EmptyBundleRejected) {
    std::ostringstream os;
    EXPECT_THROW(write_csv(SignalBundle(0.0, 1e-4), os), IoError);
}

TEST(WriteCsv, RoundTripIsExact) {
    const auto b = bundle3(500);
    const auto path = tmp_path("msvr_roundtrip.csv");
    write_csv(b, path);
    const auto t = read_csv(path);
    ASSERT_EQ(t.rows(), 500U);
    for (const auto& s : b.series()) {
        const auto& col = t.column(s.name + "_" + s.unit);
        for (std::size_t k = 0; k < s.size(); ++k) {
            EXPECT_EQ(col[k], s.values[k]);
        }
    }
    const auto& ts = t.column("t_s");
    for (std::size_t k = 0; k < ts.size(); ++k) {
        EXPECT_EQ(ts[k], static_cast<double>(k) * 1e-4);
    }
    std::remove(path.c_str());
}

TEST(WriteCsv, UnwritablePath) {
    EXPECT_THROW(write_csv(bundle3(3), std::string("/nonexistent-dir/x.csv")), IoError);
}

TEST(ReadCsv, Malformed) {
    std::istringstream a("t_s,x_V\n0,1\n1,abc\n");
    EXPECT_THROW(read_csv(a), IoError);
    std::istringstream b("t_s,x_V\n0,1,2\n");
    EXPECT_THROW(read_csv(b), IoError);
    std::istringstream c("t_s,x_V\n0\n");
    EXPECT_THROW(read_csv(c), IoError);
    std::istringstream d("");
    EXPECT_THROW(read_csv(d), IoError);
    std::istringstream e("t_s,x_V\n0,1\n");
    EXPECT_THROW((void)read_csv(e).column("y_V"), IoError);
}

TEST(SignalBundle, Invariants) {
    SignalBundle b(0.0, 1e-4);
    b.add(TimeSeries("a", "V", 0.0, 1e-4, {1, 2, 3}));
    EXPECT_THROW(b.add(TimeSeries("a", "V", 0.0, 1e-4, {1, 2, 3})), ConfigError);
    EXPECT_THROW(b.add(TimeSeries("b", "V", 0.0, 1e-4, {1, 2})), ConfigError);
    EXPECT_THROW(b.add(TimeSeries("c", "V", 0.0, 2e-4, {1, 2, 3})), ConfigError);
    b.add(TimeSeries("d", "A", 0.0, 1e-4, {4, 5, 6}));
    const auto d = b.decimate(2);
    EXPECT_EQ(d.sample_count(), 2U);
    EXPECT_EQ(d.at("d").values, (std::vector<double>{4, 6}));
    EXPECT_EQ(d.dt(), 2e-4);
    const auto s = b.select({"d"});
    EXPECT_EQ(s.signal_count(), 1U);
    EXPECT_THROW((void)b.select({"zz"}), ConfigError);
}
