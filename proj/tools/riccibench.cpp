#include <CLI11.hpp>

#include <iostream>

#include "riccibench/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"riccibench: run a positive Ricci construction scenario"};
    std::string scenario, out;
    std::optional<int> grid;
    std::optional<std::uint64_t> seed;
    bool json_only = false;
    app.add_option("--scenario", scenario, "scenario JSON file")->required();
    app.add_option("--grid", grid, "grid size, overrides the scenario")->check(CLI::Range(8, 1 << 22));
    app.add_option("--seed", seed, "seed for randomized scans");
    app.add_option("--out", out, "directory for report.json and sweep CSVs");
    app.add_flag("--json", json_only, "print only the JSON report");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return rb::kStatusParse;
    }

    rb::ScenarioResult r;
    try {
        r = rb::run_scenario_file(scenario, {grid, seed});
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return rb::kStatusParse;
    }
    if (!out.empty()) {
        try {
            rb::write_outputs(r, out);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return rb::kStatusParse;
        }
    }
    if (json_only)
        std::cout << r.report.dump(2) << '\n';
    else
        std::cout << r.text;
    if (r.status != rb::kStatusPass) std::cerr << "FAIL " << r.failure << '\n';
    return r.status;
}
