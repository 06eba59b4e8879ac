#ifndef FOCS_SCENARIO_HPP
#define FOCS_SCENARIO_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "focs/engine.hpp"
#include "focs/geometry.hpp"

namespace focs {

// Parses and fully validates a scenario document (sections: agents, edges,
// controller, solver, output). Throws ValidationError listing every problem
// with its field path; JSON syntax errors propagate as parse exceptions.
ScenarioConfig load_scenario(const std::filesystem::path& path);
ScenarioConfig parse_scenario(const std::string& json_text, const std::string& origin = "scenario");

// Canonical serialization: stable key order, shortest round-trip numbers.
// load(serialize(config)) reproduces a hash-identical config.
std::string serialize_scenario(const ScenarioConfig& config);

// FNV-1a digest of the canonical serialization.
std::uint64_t config_hash(const ScenarioConfig& config);

// Deterministic 10-agent demo network (3 leaders, 7 followers, d = 2) with
// follower starts drawn from the seeded generator inside a disk near the
// leaders, redrawn until every initial margin clears 0.1 * delta.
ScenarioConfig preset_karate(std::uint64_t seed);

// Same network, but followers start strictly inside the leaders' hull.
ScenarioConfig preset_karate_interior(std::uint64_t seed);

// Returns the preset for a name ("karate", "karate-interior"); throws
// ValidationError for unknown names.
ScenarioConfig make_preset(const std::string& name, std::uint64_t seed);

// Shortest decimal form that round-trips to the same double.
std::string format_double(double value);

// One row per recorded step: t, per-agent coordinates (column names carry
// the agent id and role), then per-edge margins.
void write_trajectory_csv(const TrajectoryRecord& trajectory, const NetworkTopology& topology,
                          const std::filesystem::path& path);

void write_report_json(const ContainmentReport& report, const std::filesystem::path& path);

// Two-column plot-ready series.
void write_series_csv(std::span<const double> x, std::span<const double> y,
                      const std::string& x_name, const std::string& y_name,
                      const std::filesystem::path& path);

struct RunManifest {
    std::string scenario_id;
    std::uint64_t config_hash = 0;
    std::string scheme;  // "fractional" or "discrete"
    std::vector<std::string> output_paths;
    int exit_status = 0;
    double wall_seconds = 0.0;
};

void write_manifest_json(const RunManifest& manifest, const std::filesystem::path& path);

}  // namespace focs

#endif
