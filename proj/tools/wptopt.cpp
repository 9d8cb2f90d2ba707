// wptopt: multi-tone power-allocation experiments from the command line.
//
// Subcommands:
//   solve --config <file> [--seed <u64>] [--out <dir>]   run the scenario in a JSON config
//   bench --scenario <tag> [...]                         run a scenario with defaults
//   fit   --data <csv>                                   quadratic fit of harvester samples
//
// Exit codes: 0 success, 1 flagged realizations, 2 configuration error.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "wpt/bench.hpp"

namespace {

int finish(const wpt::bench::SweepResult& result, const std::string& out_dir) {
    wpt::bench::write_outputs(result, out_dir);
    if (result.flagged > 0) {
        std::cerr << "warning: " << result.flagged
                  << " realization(s) flagged (solver failure or infeasible allocation)\n";
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-tone waveform power allocation for wireless power transfer"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".", scenario_tag, data_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> realizations, n_tones;

    CLI::App* solve = app.add_subcommand("solve", "run the scenario described by a config file");
    solve->add_option("--config", config_path, "JSON scenario config")->required();
    solve->add_option("--seed", seed, "override the master seed");
    solve->add_option("--out", out_dir, "output directory");

    CLI::App* bench = app.add_subcommand("bench", "run a named scenario with default settings");
    bench->add_option("--scenario", scenario_tag, "scenario tag")->required();
    bench->add_option("--seed", seed, "master seed");
    bench->add_option("--out", out_dir, "output directory");
    bench->add_option("--realizations", realizations, "Monte Carlo realization count");
    bench->add_option("--n-tones", n_tones, "number of tones");

    CLI::App* fit = app.add_subcommand("fit", "fit a quadratic to harvester samples");
    fit->add_option("--data", data_path, "CSV with header p_in_w,p_out_w")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) {
            wpt::bench::ScenarioConfig cfg = wpt::bench::load_config_file(config_path);
            if (seed) cfg.seed = *seed;
            return finish(wpt::bench::run_scenario(cfg), out_dir);
        }
        if (bench->parsed()) {
            nlohmann::json j;
            j["scenario"] = scenario_tag;
            wpt::bench::ScenarioConfig cfg = wpt::bench::load_config(j);
            if (seed) cfg.seed = *seed;
            if (realizations) cfg.realizations = *realizations;
            if (n_tones) cfg.n_tones = *n_tones;
            return finish(wpt::bench::run_scenario(cfg), out_dir);
        }
        // fit
        const auto samples = wpt::harvester::read_samples_csv_file(data_path);
        const wpt::harvester::Poly2 q = wpt::harvester::fit_poly2(samples);
        std::printf("beta1 = %.12g\nbeta2 = %.12g\nbeta3 = %.12g\n", q.beta1, q.beta2, q.beta3);
        return 0;
    } catch (const wpt::bench::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
