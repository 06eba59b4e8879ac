#include "focs/scenario.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "focs/errors.hpp"

namespace focs {

using nlohmann::json;

namespace {

const char* role_name(AgentRole r) { return r == AgentRole::Leader ? "leader" : "follower"; }

json config_to_json(const ScenarioConfig& config) {
    const auto& topo = config.topology;
    json agents;
    agents["count"] = topo.agent_count;
    agents["dim"] = config.initial_states.dim;
    json roles = json::array();
    for (AgentRole r : topo.roles) roles.push_back(role_name(r));
    agents["roles"] = std::move(roles);
    json init = json::array();
    for (std::size_t i = 0; i < config.initial_states.count; ++i) {
        const auto row = config.initial_states.row(i);
        init.push_back(json(std::vector<double>(row.begin(), row.end())));
    }
    agents["initial_states"] = std::move(init);

    json edges;
    edges["delta"] = topo.delta;
    edges["edge_addition"] = config.edge_addition;
    json access = json::array();
    for (const auto& [i, j] : topo.edges()) access.push_back(json::array({i, j}));
    edges["access"] = std::move(access);

    json controller;
    controller["k"] = config.params.k;
    controller["gains"] = config.params.gains;

    json solver;
    solver["alpha"] = config.alpha;
    solver["step"] = config.step;
    solver["horizon"] = config.horizon;
    if (config.memory_window) {
        solver["memory_window"] = *config.memory_window;
    } else {
        solver["memory_window"] = nullptr;
    }

    json output;
    output["record_every"] = config.record_every;

    json doc;
    doc["name"] = config.name;
    doc["agents"] = std::move(agents);
    doc["edges"] = std::move(edges);
    doc["controller"] = std::move(controller);
    doc["solver"] = std::move(solver);
    doc["output"] = std::move(output);
    doc["seed"] = config.seed;
    return doc;
}

// Pull a required key, recording an issue instead of throwing.
const json* need(const json& obj, const std::string& path, const char* key,
                 std::vector<std::string>& issues) {
    if (!obj.is_object() || !obj.contains(key)) {
        issues.push_back(path + "." + key + ": missing");
        return nullptr;
    }
    return &obj.at(key);
}

bool get_number(const json* v, const std::string& path, std::vector<std::string>& issues,
                double& out) {
    if (!v) return false;
    if (!v->is_number()) {
        issues.push_back(path + ": expected a number");
        return false;
    }
    out = v->get<double>();
    return true;
}

bool get_unsigned(const json* v, const std::string& path, std::vector<std::string>& issues,
                  std::uint64_t& out) {
    if (!v) return false;
    if (!v->is_number_unsigned()) {
        issues.push_back(path + ": expected a nonnegative integer");
        return false;
    }
    out = v->get<std::uint64_t>();
    return true;
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& json_text, const std::string& origin) {
    const json doc = json::parse(json_text);
    std::vector<std::string> issues;
    if (!doc.is_object()) {
        throw ValidationError({origin + ": top-level JSON object expected"});
    }

    ScenarioConfig config;
    if (doc.contains("name")) {
        if (doc["name"].is_string()) {
            config.name = doc["name"].get<std::string>();
        } else {
            issues.push_back("name: expected a string");
        }
    }

    std::uint64_t count = 0, dim = 0;
    std::vector<AgentRole> roles;
    const json* agents = need(doc, origin, "agents", issues);
    if (agents) {
        get_unsigned(need(*agents, "agents", "count", issues), "agents.count", issues, count);
        get_unsigned(need(*agents, "agents", "dim", issues), "agents.dim", issues, dim);
        if (const json* jr = need(*agents, "agents", "roles", issues)) {
            if (!jr->is_array()) {
                issues.push_back("agents.roles: expected an array");
            } else {
                for (std::size_t i = 0; i < jr->size(); ++i) {
                    const auto& r = (*jr)[i];
                    if (r == "leader") {
                        roles.push_back(AgentRole::Leader);
                    } else if (r == "follower") {
                        roles.push_back(AgentRole::Follower);
                    } else {
                        std::ostringstream os;
                        os << "agents.roles[" << i << "]: expected \"leader\" or \"follower\"";
                        issues.push_back(os.str());
                    }
                }
            }
        }
        if (const json* js = need(*agents, "agents", "initial_states", issues)) {
            if (!js->is_array()) {
                issues.push_back("agents.initial_states: expected an array of rows");
            } else {
                config.initial_states = StateSet(js->size(), dim);
                for (std::size_t i = 0; i < js->size(); ++i) {
                    const auto& row = (*js)[i];
                    std::ostringstream os;
                    os << "agents.initial_states[" << i << "]";
                    if (!row.is_array() || row.size() != dim) {
                        issues.push_back(os.str() + ": expected " + std::to_string(dim) +
                                         " coordinates");
                        continue;
                    }
                    for (std::size_t c = 0; c < dim; ++c) {
                        if (!row[c].is_number()) {
                            issues.push_back(os.str() + ": expected numbers");
                            break;
                        }
                        config.initial_states.row(i)[c] = row[c].get<double>();
                    }
                }
            }
        }
    }

    double delta = 0.0;
    std::vector<std::pair<std::size_t, std::size_t>> access;
    const json* edges = need(doc, origin, "edges", issues);
    if (edges) {
        get_number(need(*edges, "edges", "delta", issues), "edges.delta", issues, delta);
        if (edges->contains("edge_addition")) {
            if ((*edges)["edge_addition"].is_boolean()) {
                config.edge_addition = (*edges)["edge_addition"].get<bool>();
            } else {
                issues.push_back("edges.edge_addition: expected a boolean");
            }
        }
        if (const json* ja = need(*edges, "edges", "access", issues)) {
            if (!ja->is_array()) {
                issues.push_back("edges.access: expected an array of [from, to] pairs");
            } else {
                for (std::size_t e = 0; e < ja->size(); ++e) {
                    const auto& pair = (*ja)[e];
                    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_unsigned() ||
                        !pair[1].is_number_unsigned()) {
                        std::ostringstream os;
                        os << "edges.access[" << e << "]: expected [from, to] agent ids";
                        issues.push_back(os.str());
                        continue;
                    }
                    access.emplace_back(pair[0].get<std::size_t>(), pair[1].get<std::size_t>());
                }
            }
        }
    }

    const json* controller = need(doc, origin, "controller", issues);
    if (controller) {
        get_number(need(*controller, "controller", "k", issues), "controller.k", issues,
                   config.params.k);
        if (const json* jg = need(*controller, "controller", "gains", issues)) {
            if (!jg->is_array()) {
                issues.push_back("controller.gains: expected an array");
            } else {
                for (std::size_t i = 0; i < jg->size(); ++i) {
                    if (!(*jg)[i].is_number()) {
                        std::ostringstream os;
                        os << "controller.gains[" << i << "]: expected a number";
                        issues.push_back(os.str());
                        break;
                    }
                    config.params.gains.push_back((*jg)[i].get<double>());
                }
            }
        }
    }

    const json* solver = need(doc, origin, "solver", issues);
    if (solver) {
        get_number(need(*solver, "solver", "alpha", issues), "solver.alpha", issues, config.alpha);
        get_number(need(*solver, "solver", "step", issues), "solver.step", issues, config.step);
        get_number(need(*solver, "solver", "horizon", issues), "solver.horizon", issues,
                   config.horizon);
        if (solver->contains("memory_window") && !(*solver)["memory_window"].is_null()) {
            std::uint64_t w = 0;
            if (get_unsigned(&(*solver)["memory_window"], "solver.memory_window", issues, w)) {
                config.memory_window = w;
            }
        }
    }

    if (doc.contains("output")) {
        const auto& output = doc["output"];
        if (output.contains("record_every")) {
            std::uint64_t re = 0;
            if (get_unsigned(&output["record_every"], "output.record_every", issues, re)) {
                config.record_every = re;
            }
        }
    }
    if (doc.contains("seed")) {
        get_unsigned(&doc["seed"], "seed", issues, config.seed);
    }

    if (roles.size() != count) {
        std::ostringstream os;
        os << "agents.roles: expected " << count << " entries, got " << roles.size();
        issues.push_back(os.str());
    }
    if (config.initial_states.count != count) {
        std::ostringstream os;
        os << "agents.initial_states: expected " << count << " rows, got "
           << config.initial_states.count;
        issues.push_back(os.str());
    }

    if (issues.empty()) {
        try {
            config.topology = make_topology(count, std::move(roles), access, delta);
            config.params.delta = delta;
            validate_config(config);
        } catch (const ValidationError& e) {
            issues.insert(issues.end(), e.issues().begin(), e.issues().end());
        }
    }
    if (!issues.empty()) throw ValidationError(std::move(issues));
    return config;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open scenario file: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path.string());
}

std::string serialize_scenario(const ScenarioConfig& config) {
    return config_to_json(config).dump(2) + "\n";
}

std::uint64_t config_hash(const ScenarioConfig& config) {
    const std::string s = config_to_json(config).dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

namespace {

// Shared 10-agent demo network: followers 0..6, leaders 7, 8, 9. Every
// follower mixes at least two leaders (directly or one hop away), so
// equilibria sit strictly inside the leader triangle.
struct PresetBase {
    std::vector<AgentRole> roles;
    std::vector<std::pair<std::size_t, std::size_t>> access;
    std::array<std::array<double, 2>, 3> leaders;
    double delta;
    double k;
    double gain;
};

PresetBase karate_base() {
    PresetBase base;
    base.roles.assign(10, AgentRole::Follower);
    base.roles[7] = base.roles[8] = base.roles[9] = AgentRole::Leader;
    base.access = {{{0, 6}, {0, 7}, {0, 8}, {1, 0}, {1, 8}, {1, 9}, {2, 1}, {2, 7},
                    {2, 9}, {3, 7}, {3, 8}, {3, 9}, {4, 3}, {4, 8}, {4, 9}, {5, 4},
                    {5, 7}, {5, 9}, {6, 3}, {6, 4}, {6, 5}, {6, 7}}};
    base.leaders = {{{0.0, 0.0}, {4.0, 0.0}, {2.0, 3.0}}};
    base.delta = 22.0;
    base.k = 2.0;
    base.gain = 60.0;
    return base;
}

ScenarioConfig preset_from(const PresetBase& base, std::uint64_t seed, const std::string& name) {
    ScenarioConfig config;
    config.name = name;
    config.topology = make_topology(10, base.roles, base.access, base.delta);
    config.params.k = base.k;
    config.params.gains.assign(7, base.gain);
    config.params.delta = base.delta;
    config.seed = seed;
    config.initial_states = StateSet(10, 2);
    for (int l = 0; l < 3; ++l) {
        config.initial_states.row(7 + l)[0] = base.leaders[l][0];
        config.initial_states.row(7 + l)[1] = base.leaders[l][1];
    }
    return config;
}

}  // namespace

ScenarioConfig preset_karate(std::uint64_t seed) {
    const PresetBase base = karate_base();
    ScenarioConfig config = preset_from(base, seed, "karate");

    // Followers start in a disk near the leaders; redraw the whole set until
    // every declared edge clears a tenth of the threshold.
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double cx = 2.0, cy = 1.0, radius = 2.1;
    const double need_margin = 0.1 * base.delta;
    const auto edge_list = config.topology.edges();
    for (int attempt = 0; attempt < 10000; ++attempt) {
        for (int f = 0; f < 7; ++f) {
            const double r = radius * std::sqrt(unif(rng));
            const double theta = 2.0 * std::acos(-1.0) * unif(rng);
            config.initial_states.row(f)[0] = cx + r * std::cos(theta);
            config.initial_states.row(f)[1] = cy + r * std::sin(theta);
        }
        bool ok = true;
        for (const auto& [i, j] : edge_list) {
            const double margin = base.delta - social_difference(config.initial_states.row(i),
                                                                 config.initial_states.row(j));
            if (margin < need_margin) {
                ok = false;
                break;
            }
        }
        if (ok) return config;
    }
    throw std::logic_error("preset_karate: no valid initial draw found");
}

ScenarioConfig preset_karate_interior(std::uint64_t seed) {
    const PresetBase base = karate_base();
    ScenarioConfig config = preset_from(base, seed, "karate-interior");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const auto& A = base.leaders[0];
    const auto& B = base.leaders[1];
    const auto& C = base.leaders[2];
    const double cx = (A[0] + B[0] + C[0]) / 3.0, cy = (A[1] + B[1] + C[1]) / 3.0;
    auto edge_depth = [](const std::array<double, 2>& a, const std::array<double, 2>& b, double x,
                         double y) {
        const double ex = b[0] - a[0], ey = b[1] - a[1];
        return (ex * (y - a[1]) - ey * (x - a[0])) / std::hypot(ex, ey);
    };
    for (int f = 0; f < 7; ++f) {
        for (int attempt = 0;; ++attempt) {
            if (attempt >= 10000) {
                throw std::logic_error("preset_karate_interior: no valid initial draw found");
            }
            double u = unif(rng), v = unif(rng);
            if (u + v > 1.0) {
                u = 1.0 - u;
                v = 1.0 - v;
            }
            double x = A[0] + u * (B[0] - A[0]) + v * (C[0] - A[0]);
            double y = A[1] + u * (B[1] - A[1]) + v * (C[1] - A[1]);
            x = cx + 0.8 * (x - cx);
            y = cy + 0.8 * (y - cy);
            // Leaders run counterclockwise, so positive depth means inside.
            if (edge_depth(A, B, x, y) >= 0.3 && edge_depth(B, C, x, y) >= 0.3 &&
                edge_depth(C, A, x, y) >= 0.3) {
                config.initial_states.row(f)[0] = x;
                config.initial_states.row(f)[1] = y;
                break;
            }
        }
    }
    return config;
}

ScenarioConfig make_preset(const std::string& name, std::uint64_t seed) {
    if (name == "karate") return preset_karate(seed);
    if (name == "karate-interior") return preset_karate_interior(seed);
    throw ValidationError({"unknown preset '" + name + "' (available: karate, karate-interior)"});
}

std::string format_double(double value) {
    std::array<char, 32> buf;
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), res.ptr);
}

namespace {

std::string coordinate_name(std::size_t c) {
    if (c < 3) return std::string(1, "xyz"[c]);
    return "c" + std::to_string(c);
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (!path.parent_path().empty()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

json report_to_json(const ContainmentReport& rep) {
    json j;
    j["status"] = rep.status;
    j["complete"] = rep.complete;
    j["connectivity_preserved"] = rep.connectivity_preserved;
    j["min_margin_over_run"] = rep.min_margin_over_run;
    j["final_hull_distances"] = rep.final_hull_distances;
    j["hull_volume_series"] = rep.hull_volume_series;
    j["spread_series"] = rep.spread_series;
    j["equilibrium_residuals"] = rep.equilibrium_residuals;
    j["min_offdiagonal"] = rep.min_offdiagonal;
    j["max_row_sum_abs"] = rep.max_row_sum_abs;
    if (rep.breach) {
        j["breach"] = {{"step", rep.breach->step},
                       {"from", rep.breach->from},
                       {"to", rep.breach->to},
                       {"margin", rep.breach->margin}};
    } else {
        j["breach"] = nullptr;
    }
    j["note"] = rep.note;
    return j;
}

}  // namespace

void write_trajectory_csv(const TrajectoryRecord& trajectory, const NetworkTopology& topology,
                          const std::filesystem::path& path) {
    auto out = open_out(path);
    std::string line = "t";
    for (std::size_t i = 0; i < trajectory.agent_count; ++i) {
        const char role = topology.roles[i] == AgentRole::Leader ? 'l' : 'f';
        for (std::size_t c = 0; c < trajectory.dim; ++c) {
            line += ",";
            line += role;
            line += std::to_string(i);
            line += "_" + coordinate_name(c);
        }
    }
    for (const auto& [i, j] : trajectory.edge_list) {
        line += ",b_" + std::to_string(i) + "_" + std::to_string(j);
    }
    line += "\n";
    out << line;

    const std::size_t edges = trajectory.edge_list.size();
    for (std::size_t r = 0; r < trajectory.record_count(); ++r) {
        line.clear();
        line += format_double(trajectory.times[r]);
        const auto states = trajectory.states_at(r);
        for (double v : states) {
            line += ',';
            line += format_double(v);
        }
        for (std::size_t e = 0; e < edges; ++e) {
            line += ',';
            line += format_double(trajectory.edge_margins[r * edges + e]);
        }
        line += '\n';
        out << line;
    }
}

void write_report_json(const ContainmentReport& report, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << report_to_json(report).dump(2) << "\n";
}

void write_series_csv(std::span<const double> x, std::span<const double> y,
                      const std::string& x_name, const std::string& y_name,
                      const std::filesystem::path& path) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("write_series_csv: column length mismatch");
    }
    auto out = open_out(path);
    out << x_name << "," << y_name << "\n";
    for (std::size_t i = 0; i < x.size(); ++i) {
        out << format_double(x[i]) << "," << format_double(y[i]) << "\n";
    }
}

void write_manifest_json(const RunManifest& manifest, const std::filesystem::path& path) {
    auto out = open_out(path);
    std::ostringstream hash;
    hash << std::hex << std::setw(16) << std::setfill('0') << manifest.config_hash;
    json j;
    j["scenario_id"] = manifest.scenario_id;
    j["config_hash"] = hash.str();
    j["scheme"] = manifest.scheme;
    j["output_paths"] = manifest.output_paths;
    j["exit_status"] = manifest.exit_status;
    j["wall_seconds"] = manifest.wall_seconds;
    out << j.dump(2) << "\n";
}

}  // namespace focs
