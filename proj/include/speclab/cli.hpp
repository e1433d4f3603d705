#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "speclab/experiments.hpp"

namespace speclab {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitRangeFail = 2, kExitBudget = 3 };

struct ScenarioInfo {
    std::string name;
    std::string description;
    std::string anchor;  // the result the scenario reproduces
    std::function<Scenario()> make;
};

const std::vector<ScenarioInfo>& scenario_registry();

/// Throws std::invalid_argument for an unknown name.
const ScenarioInfo& find_scenario(const std::string& name);

/// One line per scenario: name, description, anchor.
void list_scenarios(std::ostream& os);

struct RunConfig {
    std::string scenario;
    std::optional<std::vector<int>> n_grid;
    std::optional<int> trials;
    std::optional<std::uint64_t> seed;
    std::optional<double> beta;
    std::optional<double> omega;
    std::filesystem::path out = "out";
    int jobs = 1;
    std::optional<double> budget_seconds;
    // Expected ranges; mostly for forcing the range-failure path.
    std::optional<std::pair<double, double>> slope_range;
    std::optional<double> min_frequency;
};

/// Reads a JSON config, or the "config" object of a manifest written by run().
RunConfig load_config(const std::filesystem::path& path);

/// Registry scenario with the overrides applied. The seed falls back to
/// SPECTRAL_LAB_SEED, then to the registry default.
Scenario resolve(const RunConfig& cfg);

/// Writes rates.csv, spectrum.csv, raster.csv, summary.json and
/// manifest.json under cfg.out. Returns an ExitCode.
int run(const RunConfig& cfg, std::ostream& log);

/// Shortest decimal that reads back to the same double.
std::string format_double(double v);

/// Entry point of the command-line tool: `list` and `run`.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace speclab
