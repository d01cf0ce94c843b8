#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "riccibench/report.hpp"

namespace rb {

// exit statuses
inline constexpr int kStatusPass = 0;
inline constexpr int kStatusFail = 1;
inline constexpr int kStatusParse = 2;

// The scenario file does not parse or does not match the schema.
class ScenarioError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct RunOptions {
    std::optional<int> grid;  // overrides the scenario
    std::optional<std::uint64_t> seed;
};

struct OutputFile {
    std::string name;  // relative to the output directory
    std::string content;
};

struct ScenarioResult {
    int status = kStatusPass;
    json report;
    std::string text;     // margin table for people
    std::string failure;  // failing margin, for standard error
    std::vector<OutputFile> files;  // report.json and sweep CSVs
};

// commands: block, pipeline, scan, refine, wu-check, sw-table
ScenarioResult run_scenario(const json& scenario, const RunOptions& opt = {});
ScenarioResult run_scenario_file(const std::string& path, const RunOptions& opt = {});

// csv files for the sweeps of one report, named "<prefix><sweep><suffix>.csv"
std::vector<OutputFile> emit_plot_data(const BlockReport& r, const std::string& prefix = "", const std::string& suffix = "");

// writes every file into dir (created when missing)
void write_outputs(const ScenarioResult& r, const std::string& dir);

}  // namespace rb
