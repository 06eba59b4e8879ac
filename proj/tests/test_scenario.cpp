#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "focs/engine.hpp"
#include "focs/errors.hpp"
#include "focs/geometry.hpp"
#include "focs/scenario.hpp"

using namespace focs;
namespace fs = std::filesystem;

namespace {

const char* kTinyConfig = R"({
  "name": "tiny",
  "agents": {
    "count": 2,
    "dim": 2,
    "roles": ["follower", "leader"],
    "initial_states": [[0.0, 0.0], [1.0, 0.0]]
  },
  "edges": {"delta": 5.0, "access": [[0, 1]]},
  "controller": {"k": 2.0, "gains": [3.0]},
  "solver": {"alpha": 1.0, "step": 0.001, "horizon": 0.01},
  "output": {"record_every": 2},
  "seed": 4
})";

bool mentions(const ValidationError& e, const std::string& needle) {
    for (const auto& issue : e.issues()) {
        if (issue.find(needle) != std::string::npos) return true;
    }
    return false;
}

fs::path test_dir() {
    const fs::path dir = fs::temp_directory_path() / "focs_scenario_tests";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("tiny config parses with every field applied") {
    const auto config = parse_scenario(kTinyConfig);
    CHECK(config.name == "tiny");
    CHECK(config.topology.agent_count == 2);
    CHECK(config.initial_states.dim == 2);
    CHECK(config.topology.delta == 5.0);
    CHECK(config.params.delta == 5.0);
    CHECK(config.params.k == 2.0);
    CHECK(config.params.gains == std::vector<double>{3.0});
    CHECK(config.alpha == 1.0);
    CHECK(config.step == 0.001);
    CHECK(config.horizon == 0.01);
    CHECK(config.steps() == 10);
    CHECK_FALSE(config.memory_window.has_value());
    CHECK_FALSE(config.edge_addition);
    CHECK(config.record_every == 2);
    CHECK(config.seed == 4);
}

TEST_CASE("serialize/parse round trip is hash-identical") {
    const auto config = preset_karate(7);
    const std::string text = serialize_scenario(config);
    const auto reloaded = parse_scenario(text, "roundtrip");
    CHECK(config_hash(reloaded) == config_hash(config));
    CHECK(serialize_scenario(reloaded) == text);

    auto changed = config;
    changed.alpha = 0.5;
    CHECK(config_hash(changed) != config_hash(config));
}

TEST_CASE("missing sections and fields are reported with paths") {
    try {
        parse_scenario(R"({"agents": {"count": 1}})");
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(mentions(e, "agents.dim: missing"));
        CHECK(mentions(e, "agents.roles: missing"));
        CHECK(mentions(e, "agents.initial_states: missing"));
        CHECK(mentions(e, "edges"));
        CHECK(mentions(e, "controller"));
        CHECK(mentions(e, "solver"));
    }
}

TEST_CASE("field type problems carry their indices") {
    std::string bad = kTinyConfig;
    bad.replace(bad.find("\"follower\""), 10, "\"fan\"");
    try {
        parse_scenario(bad);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(mentions(e, "agents.roles[0]"));
    }

    std::string ragged = kTinyConfig;
    ragged.replace(ragged.find("[1.0, 0.0]"), 10, "[1.0]");
    try {
        parse_scenario(ragged);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(mentions(e, "agents.initial_states[1]"));
    }
}

TEST_CASE("semantic validation runs behind parsing") {
    // follower placed beyond the threshold of its declared edge
    std::string far = kTinyConfig;
    far.replace(far.find("[[0.0, 0.0]"), 11, "[[9.0, 0.0]");
    try {
        parse_scenario(far);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(mentions(e, "initial margin"));
    }

    std::string dup = kTinyConfig;
    dup.replace(dup.find("[[0, 1]]"), 8, "[[0, 1], [0, 1]]");
    try {
        parse_scenario(dup);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(mentions(e, "duplicate"));
    }
}

TEST_CASE("json syntax errors propagate as parse exceptions") {
    CHECK_THROWS_AS(parse_scenario("{not json"), nlohmann::json::exception);
}

TEST_CASE("karate preset produces a valid 3-leader 7-follower network") {
    for (std::uint64_t seed : {0ULL, 1ULL, 42ULL, 1234ULL}) {
        const auto config = preset_karate(seed);
        CHECK(config.topology.agent_count == 10);
        CHECK(config.topology.leader_ids == std::vector<std::size_t>{7, 8, 9});
        CHECK(config.topology.follower_ids.size() == 7);
        CHECK(config.initial_states.dim == 2);
        CHECK_NOTHROW(validate_config(config));
        for (const auto& [i, j] : config.topology.edges()) {
            const double margin =
                config.topology.delta - social_difference(config.initial_states.row(i),
                                                          config.initial_states.row(j));
            CHECK(margin >= 0.1 * config.topology.delta);
        }
    }
}

TEST_CASE("karate preset is deterministic in the seed") {
    const auto a = preset_karate(11);
    const auto b = preset_karate(11);
    CHECK(a.initial_states.data == b.initial_states.data);
    CHECK(config_hash(a) == config_hash(b));
    const auto c = preset_karate(12);
    CHECK(a.initial_states.data != c.initial_states.data);
}

TEST_CASE("interior preset starts every follower inside the leader hull") {
    const auto config = preset_karate_interior(5);
    CHECK_NOTHROW(validate_config(config));
    std::vector<std::vector<double>> leaders;
    for (std::size_t l : config.topology.leader_ids) {
        const auto row = config.initial_states.row(l);
        leaders.push_back({row.begin(), row.end()});
    }
    const auto hull = convex_hull(leaders);
    for (std::size_t f : config.topology.follower_ids) {
        CHECK(hull_distance(config.initial_states.row(f), hull) == 0.0);
    }
}

TEST_CASE("preset lookup") {
    CHECK(make_preset("karate", 3).name == "karate");
    CHECK(make_preset("karate-interior", 3).name == "karate-interior");
    CHECK_THROWS_AS(make_preset("office", 0), ValidationError);
}

TEST_CASE("format_double round trips exactly") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-7, 1e22, 0.0, 50000.0, 3.141592653589793}) {
        const std::string s = format_double(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(2.0) == "2");
}

TEST_CASE("trajectory csv layout and determinism") {
    const auto config = parse_scenario(kTinyConfig);
    const auto rec = run_fractional(config);
    REQUIRE(rec.status == RunStatus::Completed);

    const fs::path path = test_dir() / "trajectory.csv";
    write_trajectory_csv(rec, config.topology, path);
    const std::string first = slurp(path);

    std::istringstream lines(first);
    std::string header;
    std::getline(lines, header);
    CHECK(header == "t,f0_x,f0_y,l1_x,l1_y,b_0_1");
    std::size_t rows = 0;
    std::string line;
    while (std::getline(lines, line)) {
        if (!line.empty()) ++rows;
    }
    CHECK(rows == rec.record_count());
    CHECK(first.substr(0, 2) == "t,");

    write_trajectory_csv(rec, config.topology, path);
    CHECK(slurp(path) == first);
}

TEST_CASE("report json mirrors the report") {
    const auto config = parse_scenario(kTinyConfig);
    const auto rec = run_fractional(config);
    const auto report = build_report(rec, config.topology, config.params);

    const fs::path path = test_dir() / "report.json";
    write_report_json(report, path);
    const auto doc = nlohmann::json::parse(slurp(path));
    CHECK(doc["status"] == "completed");
    CHECK(doc["complete"] == true);
    CHECK(doc["connectivity_preserved"] == report.connectivity_preserved);
    CHECK(doc["min_margin_over_run"].get<double>() == report.min_margin_over_run);
    CHECK(doc["final_hull_distances"].size() == report.final_hull_distances.size());
    CHECK(doc["hull_volume_series"].size() == report.hull_volume_series.size());
    CHECK(doc["breach"].is_null());
}

TEST_CASE("series csv writer") {
    const std::vector<double> x{0.0, 0.5, 1.0};
    const std::vector<double> y{1.0, 0.25, 0.0625};
    const fs::path path = test_dir() / "series.csv";
    write_series_csv(x, y, "t", "value", path);
    CHECK(slurp(path) == "t,value\n0,1\n0.5,0.25\n1,0.0625\n");

    const std::vector<double> shorter{1.0};
    CHECK_THROWS_AS(write_series_csv(x, shorter, "t", "value", path), std::invalid_argument);
}

TEST_CASE("manifest records the run identity") {
    RunManifest manifest;
    manifest.scenario_id = "tiny";
    manifest.config_hash = 0xabcdef0123456789ULL;
    manifest.scheme = "fractional";
    manifest.output_paths = {"a.csv", "b.json"};
    manifest.exit_status = 0;
    manifest.wall_seconds = 1.25;

    const fs::path path = test_dir() / "manifest.json";
    write_manifest_json(manifest, path);
    const auto doc = nlohmann::json::parse(slurp(path));
    CHECK(doc["scenario_id"] == "tiny");
    CHECK(doc["config_hash"] == "abcdef0123456789");
    CHECK(doc["scheme"] == "fractional");
    CHECK(doc["output_paths"].size() == 2);
    CHECK(doc["exit_status"] == 0);
    CHECK(doc["wall_seconds"].get<double>() == 1.25);
}

}  // TEST_SUITE
