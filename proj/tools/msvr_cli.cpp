#include "msvr/msvr.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <future>
#include <iostream>
#include <string>
#include <vector>

namespace {

struct Globals {
    std::string config;
    std::string out;
    bool quiet = false;
};

msvr::Scenario load(const Globals& g) { return g.config.empty() ? msvr::parse_scenario("") : msvr::load_scenario(g.config); }

int cmd_levels(const Globals& g, std::optional<int> stages, std::optional<double> v_dc) {
    const msvr::Scenario s = load(g);
    const msvr::ConverterParams params(stages.value_or(s.converter.stages), v_dc.value_or(s.converter.v_dc));
    std::fputs(msvr::format_level_table(params).c_str(), stdout);
    return 0;
}

int cmd_simulate(const Globals& g) {
    const msvr::Scenario s = load(g);
    const auto result = msvr::run_simulation(s);
    if (!g.out.empty()) {
        auto bundle = s.sim.signals.empty() ? result.bundle : result.bundle.select(s.sim.signals);
        msvr::write_csv(bundle.decimate(s.sim.csv_stride), g.out);
    }
    if (!g.quiet) {
        std::printf("scenario %s\n", s.hash().c_str());
        std::fputs(msvr::format_summary(msvr::summarize(result, s), s).c_str(), stdout);
        if (!g.out.empty()) {
            std::printf("wrote %s\n", g.out.c_str());
        }
    }
    return 0;
}

double mean_thd(const msvr::Scenario& s) {
    const auto r = msvr::summarize(msvr::run_simulation(s), s);
    return (r.thd_load[0] + r.thd_load[1] + r.thd_load[2]) / 3.0;
}

int cmd_compare(const Globals& g, bool sweep) {
    const msvr::Scenario base = load(g);
    const std::vector<int> stages = sweep ? std::vector<int>{1, 2, 3} : std::vector<int>{1, 3};
    std::vector<std::future<double>> jobs;
    for (int p : stages) {
        msvr::Scenario s = base;
        s.converter.stages = p;
        jobs.push_back(std::async(std::launch::async, [s] { return mean_thd(s); }));
    }
    std::vector<double> thds;
    for (auto& j : jobs) {
        thds.push_back(j.get());
    }
    if (!g.quiet) {
        for (std::size_t k = 0; k < stages.size(); ++k) {
            std::printf("p=%d  load THD %.4f %%\n", stages[k], thds[k]);
        }
        std::printf("ratio THD(p=%d)/THD(p=1) %.4f\n", stages.back(), thds.back() / thds.front());
        if (sweep) {
            bool mono = true;
            for (std::size_t k = 1; k < thds.size(); ++k) {
                mono = mono && thds[k] <= thds[k - 1];
            }
            std::printf("non-increasing %s\n", mono ? "yes" : "no");
        }
    }
    return 0;
}

int cmd_thd(const Globals& g, const std::string& csv, const std::string& column, std::optional<std::size_t> start,
            std::optional<std::size_t> cycles, std::optional<std::size_t> harmonics) {
    const msvr::Scenario s = load(g);
    const auto table = msvr::read_csv(csv);
    const auto series = table.series(column);
    const auto spec = msvr::harmonic_spectrum(series, s.grid.frequency, cycles.value_or(s.analysis.cycles),
                                              start.value_or(s.analysis.start_cycle),
                                              harmonics.value_or(s.analysis.harmonics));
    const double v = msvr::thd(spec);
    if (g.quiet) {
        std::printf("%.6f\n", v);
    } else {
        std::printf("%s THD %.4f %% (fundamental %.6g peak)\n", column.c_str(), v, spec.magnitude(1));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-stage series voltage injection simulator"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config, "scenario file")->check(CLI::ExistingFile);
    app.add_option("--out", g.out, "CSV output path");
    app.add_flag("--quiet", g.quiet, "print less");

    auto* levels = app.add_subcommand("levels", "print the converter level table");
    std::optional<int> stages;
    std::optional<double> v_dc;
    levels->add_option("-p,--stages", stages, "stage count");
    levels->add_option("--vdc", v_dc, "DC link voltage");

    auto* simulate = app.add_subcommand("simulate", "run a scenario, write CSV, print a summary");

    auto* compare = app.add_subcommand("compare-stages", "load THD at p=1 and p=3");
    bool sweep = false;
    compare->add_flag("--sweep", sweep, "also run p=2");

    auto* thd = app.add_subcommand("thd", "THD of one CSV column");
    std::string csv;
    std::string column;
    std::optional<std::size_t> start;
    std::optional<std::size_t> cycles;
    std::optional<std::size_t> harmonics;
    thd->add_option("csv", csv)->required();
    thd->add_option("column", column)->required();
    thd->add_option("--start-cycle", start);
    thd->add_option("--cycles", cycles);
    thd->add_option("--harmonics", harmonics);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(msvr::ExitCode::kConfigError);
    }

    try {
        if (levels->parsed()) {
            return cmd_levels(g, stages, v_dc);
        }
        if (simulate->parsed()) {
            return cmd_simulate(g);
        }
        if (compare->parsed()) {
            return cmd_compare(g, sweep);
        }
        return cmd_thd(g, csv, column, start, cycles, harmonics);
    } catch (const msvr::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.exit_code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(msvr::ExitCode::kSimulationError);
    }
}
