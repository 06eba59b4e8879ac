#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "focs/engine.hpp"
#include "focs/errors.hpp"
#include "focs/geometry.hpp"
#include "focs/scenario.hpp"

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitBreach = 3;
constexpr int kExitDivergence = 4;
constexpr int kExitStepSize = 5;

int status_exit_code(focs::RunStatus status) {
    switch (status) {
        case focs::RunStatus::Completed: return kExitOk;
        case focs::RunStatus::BarrierBreach: return kExitBreach;
        case focs::RunStatus::Divergence: return kExitDivergence;
        case focs::RunStatus::StepSizeViolation: return kExitStepSize;
    }
    return kExitInvalid;
}

struct CommonOpts {
    std::string preset;
    std::string config_path;
    std::optional<double> alpha;
    std::optional<double> k;
    std::optional<double> gain;
    std::optional<double> delta;
    std::optional<double> step;
    std::optional<double> horizon;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> record_every;
    std::optional<std::uint64_t> memory_window;
    bool edge_addition = false;
    std::string scheme = "fractional";
    std::string out_dir;
};

void add_common_flags(CLI::App* cmd, CommonOpts& opts, const char* default_out) {
    auto* preset = cmd->add_option("--preset", opts.preset,
                                   "Built-in scenario (karate, karate-interior)");
    auto* config = cmd->add_option("--config", opts.config_path, "Scenario JSON file");
    preset->excludes(config);
    cmd->add_option("--delta", opts.delta, "Edge threshold override (> 0)");
    cmd->add_option("--step", opts.step, "Sampling period override (> 0)");
    cmd->add_option("--horizon", opts.horizon, "Simulated time span override (> 0)");
    cmd->add_option("--record-every", opts.record_every, "Record every N-th step");
    cmd->add_option("--memory-window", opts.memory_window,
                    "Cap the fractional history at N steps (default: unbounded)");
    cmd->add_flag("--edge-addition", opts.edge_addition,
                  "Adopt new edges when agents come within 0.8 * delta");
    cmd->add_option("--scheme", opts.scheme, "Integrator: fractional or discrete")
        ->check(CLI::IsMember({"fractional", "discrete"}));
    cmd->add_option("--out", opts.out_dir, "Output directory")->default_val(default_out);
}

// Builds the run config from a preset or file plus flag overrides. The seed
// reaches the preset generator, so it changes the drawn initial states.
focs::ScenarioConfig build_config(const CommonOpts& opts, std::optional<double> alpha,
                                  std::optional<double> k, std::optional<double> gain,
                                  std::optional<std::uint64_t> seed) {
    focs::ScenarioConfig config;
    if (!opts.preset.empty()) {
        config = focs::make_preset(opts.preset, seed.value_or(0));
    } else {
        config = focs::load_scenario(opts.config_path);
        if (seed) config.seed = *seed;
    }
    if (alpha) config.alpha = *alpha;
    if (k) config.params.k = *k;
    if (gain) config.params.gains.assign(config.topology.follower_ids.size(), *gain);
    if (opts.delta) {
        config.topology.delta = *opts.delta;
        config.params.delta = *opts.delta;
    }
    if (opts.step) config.step = *opts.step;
    if (opts.horizon) config.horizon = *opts.horizon;
    if (opts.record_every) config.record_every = *opts.record_every;
    if (opts.memory_window) config.memory_window = *opts.memory_window;
    if (opts.edge_addition) config.edge_addition = true;
    focs::validate_config(config);
    return config;
}

struct RunResult {
    focs::TrajectoryRecord trajectory;
    focs::ContainmentReport report;
    int exit_status = kExitOk;
    double wall_seconds = 0.0;
    std::vector<std::string> outputs;
};

// Runs one scenario and writes the full artifact set into dir.
RunResult execute_run(const focs::ScenarioConfig& config, const std::string& scheme,
                      const fs::path& dir) {
    const auto t0 = std::chrono::steady_clock::now();
    RunResult result;
    result.trajectory = scheme == "discrete" ? focs::run_integer_discrete(config)
                                             : focs::run_fractional(config);
    result.report = focs::build_report(result.trajectory, config.topology, config.params);
    result.exit_status = status_exit_code(result.trajectory.status);

    fs::create_directories(dir);
    auto emit = [&](const fs::path& name) {
        result.outputs.push_back((dir / name).string());
        return dir / name;
    };
    {
        std::ofstream out(emit("config.json"), std::ios::binary);
        out << focs::serialize_scenario(config);
    }
    focs::write_trajectory_csv(result.trajectory, config.topology, emit("trajectory.csv"));
    focs::write_report_json(result.report, emit("report.json"));

    const auto& times = result.trajectory.times;
    focs::write_series_csv(times, result.report.hull_volume_series, "t", "hull_volume",
                           emit("hull_volume.csv"));
    const std::size_t records = result.trajectory.record_count();
    const std::size_t edges = result.trajectory.edge_list.size();
    std::vector<double> min_margin(records, 0.0);
    for (std::size_t r = 0; r < records; ++r) {
        double lo = std::numeric_limits<double>::infinity();
        for (std::size_t e = 0; e < edges; ++e) {
            lo = std::min(lo, result.trajectory.edge_margins[r * edges + e]);
        }
        min_margin[r] = edges == 0 ? 0.0 : lo;
    }
    focs::write_series_csv(times, min_margin, "t", "min_margin", emit("min_margin.csv"));
    for (std::size_t c = 0; c < result.trajectory.dim; ++c) {
        std::vector<double> s(records);
        for (std::size_t r = 0; r < records; ++r) {
            s[r] = result.report.spread_series[r][c];
        }
        const std::string name = "spread_" + std::to_string(c) + ".csv";
        focs::write_series_csv(times, s, "t", "spread", emit(name));
    }

    const auto t1 = std::chrono::steady_clock::now();
    result.wall_seconds = std::chrono::duration<double>(t1 - t0).count();

    focs::RunManifest manifest;
    manifest.scenario_id = config.name;
    manifest.config_hash = focs::config_hash(config);
    manifest.scheme = scheme;
    manifest.output_paths = result.outputs;
    manifest.exit_status = result.exit_status;
    manifest.wall_seconds = result.wall_seconds;
    focs::write_manifest_json(manifest, dir / "manifest.json");
    return result;
}

int run_simulate(const CommonOpts& opts) {
    if (opts.preset.empty() && opts.config_path.empty()) {
        std::cerr << "simulate: either --preset or --config is required\n";
        return kExitUsage;
    }
    focs::ScenarioConfig config = build_config(opts, opts.alpha, opts.k, opts.gain, opts.seed);
    const RunResult result = execute_run(config, opts.scheme, opts.out_dir);

    std::cout << "scenario    " << config.name << "\n"
              << "scheme      " << opts.scheme << " (alpha " << focs::format_double(config.alpha)
              << ")\n"
              << "status      " << result.report.status << "\n"
              << "min margin  " << focs::format_double(result.report.min_margin_over_run) << "\n";
    if (!result.report.final_hull_distances.empty()) {
        const double worst = *std::max_element(result.report.final_hull_distances.begin(),
                                               result.report.final_hull_distances.end());
        std::cout << "final hull distance (worst follower)  " << focs::format_double(worst)
                  << "\n";
    }
    if (!result.trajectory.abort_message.empty()) {
        std::cerr << "aborted: " << result.trajectory.abort_message << "\n";
    }
    std::cout << "outputs in  " << opts.out_dir << "\n";
    return result.exit_status;
}

struct SweepRow {
    double alpha = 0.0;
    double k = 0.0;
    double gain = 0.0;
    std::uint64_t seed = 0;
    std::string status;
    bool connectivity_preserved = false;
    double min_margin = 0.0;
    double worst_final_distance = 0.0;
    int exit_status = kExitOk;
    std::string dir;
};

int run_sweep(const CommonOpts& opts, std::vector<double> alphas, std::vector<double> ks,
              std::vector<double> gains, std::vector<std::uint64_t> seeds, unsigned jobs) {
    if (opts.preset.empty() && opts.config_path.empty()) {
        std::cerr << "sweep: either --preset or --config is required\n";
        return kExitUsage;
    }
    if (alphas.empty() && ks.empty() && gains.empty() && seeds.empty()) {
        std::cerr << "sweep: empty grid; pass at least one of --alpha/--k/--gain/--seed\n";
        return kExitUsage;
    }

    // Unspecified axes collapse to the base config's value.
    const focs::ScenarioConfig base = build_config(opts, std::nullopt, std::nullopt, std::nullopt,
                                                   std::nullopt);
    if (alphas.empty()) alphas.push_back(base.alpha);
    if (ks.empty()) ks.push_back(base.params.k);
    if (gains.empty()) gains.push_back(base.params.gains.empty() ? 1.0 : base.params.gains[0]);
    if (seeds.empty()) seeds.push_back(base.seed);

    std::vector<SweepRow> rows;
    for (double a : alphas) {
        for (double k : ks) {
            for (double g : gains) {
                for (std::uint64_t s : seeds) {
                    SweepRow row;
                    row.alpha = a;
                    row.k = k;
                    row.gain = g;
                    row.seed = s;
                    row.dir = "run_a" + focs::format_double(a) + "_k" + focs::format_double(k) +
                              "_g" + focs::format_double(g) + "_s" + std::to_string(s);
                    rows.push_back(std::move(row));
                }
            }
        }
    }

    std::atomic<std::size_t> cursor{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t idx = cursor.fetch_add(1);
            if (idx >= rows.size()) return;
            SweepRow& row = rows[idx];
            try {
                const focs::ScenarioConfig config =
                    build_config(opts, row.alpha, row.k, row.gain, row.seed);
                const RunResult res =
                    execute_run(config, opts.scheme, fs::path(opts.out_dir) / row.dir);
                row.status = res.report.status;
                row.connectivity_preserved = res.report.connectivity_preserved;
                row.min_margin = res.report.min_margin_over_run;
                row.worst_final_distance =
                    res.report.final_hull_distances.empty()
                        ? 0.0
                        : *std::max_element(res.report.final_hull_distances.begin(),
                                            res.report.final_hull_distances.end());
                row.exit_status = res.exit_status;
            } catch (const std::exception& e) {
                row.status = std::string("error: ") + e.what();
                row.exit_status = kExitInvalid;
            }
        }
    };

    const unsigned n_threads = std::max(1u, std::min<unsigned>(jobs, rows.size()));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    fs::create_directories(opts.out_dir);
    const fs::path table = fs::path(opts.out_dir) / "sweep.csv";
    {
        std::ofstream out(table, std::ios::binary);
        out << "alpha,k,gain,seed,status,connectivity_preserved,min_margin,"
               "worst_final_distance,exit_status,dir\n";
        for (const auto& row : rows) {
            out << focs::format_double(row.alpha) << ',' << focs::format_double(row.k) << ','
                << focs::format_double(row.gain) << ',' << row.seed << ',' << row.status << ','
                << (row.connectivity_preserved ? "true" : "false") << ','
                << focs::format_double(row.min_margin) << ','
                << focs::format_double(row.worst_final_distance) << ',' << row.exit_status << ','
                << row.dir << '\n';
        }
    }

    int failures = 0;
    for (const auto& row : rows) {
        if (row.exit_status != kExitOk) ++failures;
    }
    std::cout << rows.size() << " runs, " << failures << " failed; table: " << table.string()
              << "\n";
    return failures == 0 ? kExitOk : kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Containment-control simulator for leader-follower networks with "
                 "fractional-order dynamics"};
    app.require_subcommand(1);

    CommonOpts sim_opts;
    CLI::App* simulate = app.add_subcommand("simulate", "Run one scenario and write artifacts");
    add_common_flags(simulate, sim_opts, "out");
    simulate->add_option("--alpha", sim_opts.alpha, "Derivative order in (0, 1]");
    simulate->add_option("--k", sim_opts.k, "Potential exponent override (> 0)");
    simulate->add_option("--gain", sim_opts.gain, "Uniform follower gain override (> 0)");
    simulate->add_option("--seed", sim_opts.seed, "Seed for preset initial states");

    CommonOpts sweep_opts;
    std::vector<double> sweep_alphas, sweep_ks, sweep_gains;
    std::vector<std::uint64_t> sweep_seeds;
    unsigned jobs = 1;
    CLI::App* sweep = app.add_subcommand("sweep", "Run a parameter grid and aggregate results");
    add_common_flags(sweep, sweep_opts, "sweep-out");
    sweep->add_option("--alpha", sweep_alphas, "Derivative orders to sweep");
    sweep->add_option("--k", sweep_ks, "Potential exponents to sweep");
    sweep->add_option("--gain", sweep_gains, "Uniform gains to sweep");
    sweep->add_option("--seed", sweep_seeds, "Seeds to sweep");
    sweep->add_option("--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (simulate->parsed()) return run_simulate(sim_opts);
        return run_sweep(sweep_opts, sweep_alphas, sweep_ks, sweep_gains, sweep_seeds, jobs);
    } catch (const focs::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return kExitInvalid;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config parse error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    }
}
