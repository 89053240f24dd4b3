#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "swarmform/sim.hpp"

namespace swarmform::cli {

// Exit codes of run(): 0 converged, 2 finished without convergence,
// 1 any error.
inline constexpr int kExitConverged = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNotConverged = 2;

struct RunConfig {
    std::string scenario;  // builtin name or path to a scenario JSON file
    sim::Mode mode = sim::Mode::Centralized;
    std::optional<double> dt;
    std::optional<double> t_final;
    std::optional<std::uint64_t> seed;  // overrides a random initial draw
    std::string output_dir = ".";
    std::set<std::string> emit = {"trajectory_csv", "summary_json"};
    std::vector<double> sweep_a;  // non-empty switches to a gain sweep
};

// Loads and validates a scenario JSON file. Syntactic problems raise
// ParseError; schema or model violations raise ValidationError naming the
// offending field or constraint.
sim::Scenario parse_scenario_file(const std::string& path);

// Builtin name first, then the filesystem.
sim::Scenario load_scenario(const std::string& name_or_path);

// Scenario serialized back to schema JSON, floats at 17 significant digits;
// parse(emit(s)) reproduces s exactly.
std::string scenario_to_json(const sim::Scenario& scenario);

// Executes one scenario (or a sweep when sweep_a is set) and writes the
// requested artifacts into output_dir: trajectory.csv, summary.json,
// curve.csv. Returns the process exit code; errors are reported on stderr.
int run(const RunConfig& config);

// Flag parsing front end for the swarmform binary.
int main_cli(int argc, char** argv);

}  // namespace swarmform::cli
