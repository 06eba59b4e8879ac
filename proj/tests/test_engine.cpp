#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"

#include "focs/engine.hpp"
#include "focs/errors.hpp"
#include "focs/geometry.hpp"
#include "focs/graph.hpp"
#include "focs/scenario.hpp"

using namespace focs;

namespace {

bool mentions(const ValidationError& e, const std::string& needle) {
    for (const auto& issue : e.issues()) {
        if (issue.find(needle) != std::string::npos) return true;
    }
    return false;
}

// One follower reading two leaders at (0,0) and (2,0), starting off-axis.
ScenarioConfig bridge_config() {
    ScenarioConfig config;
    config.name = "bridge";
    config.topology = make_topology(
        3, {AgentRole::Follower, AgentRole::Leader, AgentRole::Leader}, {{0, 1}, {0, 2}}, 10.0);
    config.initial_states = StateSet(3, 2);
    config.initial_states.row(0)[0] = 1.0;
    config.initial_states.row(0)[1] = 1.0;
    config.initial_states.row(2)[0] = 2.0;
    config.params = ControllerParams{2.0, {8.0}, 10.0};
    config.alpha = 1.0;
    config.step = 1e-3;
    config.horizon = 20.0;
    return config;
}

// Two followers chained to one leader: 0 reads {1, 2}, 1 reads {2}.
ScenarioConfig chain_config() {
    ScenarioConfig config;
    config.name = "chain";
    config.topology = make_topology(
        3, {AgentRole::Follower, AgentRole::Follower, AgentRole::Leader},
        {{0, 1}, {0, 2}, {1, 2}}, 12.0);
    config.initial_states = StateSet(3, 2);
    config.initial_states.row(0)[0] = -1.0;
    config.initial_states.row(0)[1] = 0.8;
    config.initial_states.row(1)[0] = 1.0;
    config.initial_states.row(1)[1] = -0.5;
    config.params = ControllerParams{2.0, {5.0, 5.0}, 12.0};
    config.alpha = 1.0;
    config.step = 1e-3;
    config.horizon = 10.0;
    return config;
}

}  // namespace

TEST_SUITE("engine") {

TEST_CASE("step count rounds the horizon to the grid") {
    ScenarioConfig config;
    config.step = 1e-3;
    config.horizon = 50.0;
    CHECK(config.steps() == 50000);
    config.step = 0.3;
    config.horizon = 1.0;
    CHECK(config.steps() == 3);
}

TEST_CASE("status names") {
    CHECK(std::string(run_status_name(RunStatus::Completed)) == "completed");
    CHECK(std::string(run_status_name(RunStatus::BarrierBreach)) == "barrier_breach");
    CHECK(std::string(run_status_name(RunStatus::Divergence)) == "divergence");
    CHECK(std::string(run_status_name(RunStatus::StepSizeViolation)) == "step_size_violation");
}

TEST_CASE("config validation catches every field individually") {
    auto config = bridge_config();
    config.alpha = 1.5;
    config.step = -1.0;
    config.params.k = 0.0;
    config.params.gains = {0.0};
    config.record_every = 0;
    config.memory_window = 0;
    try {
        validate_config(config);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(mentions(e, "solver.alpha"));
        CHECK(mentions(e, "solver.step"));
        CHECK(mentions(e, "controller.k"));
        CHECK(mentions(e, "controller.gains[0]"));
        CHECK(mentions(e, "output.record_every"));
        CHECK(mentions(e, "solver.memory_window"));
    }
}

TEST_CASE("config validation checks margins, reachability, and shapes") {
    // initial margin: follower sits too far from leader 1
    auto far = bridge_config();
    far.initial_states.row(0)[0] = 4.0;  // S to leader 1 = 17 > delta
    try {
        validate_config(far);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(mentions(e, "initial margin"));
    }

    // unreachable follower: 0 and 1 only read each other
    ScenarioConfig cut;
    cut.topology = make_topology(
        3, {AgentRole::Follower, AgentRole::Follower, AgentRole::Leader},
        {{0, 1}, {1, 0}}, 10.0);
    cut.initial_states = StateSet(3, 2);
    cut.params = ControllerParams{2.0, {1.0, 1.0}, 10.0};
    try {
        validate_config(cut);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(mentions(e, "no leader influences follower"));
    }

    auto shape = bridge_config();
    shape.initial_states = StateSet(2, 2);
    CHECK_THROWS_AS(validate_config(shape), ValidationError);

    auto mismatch = bridge_config();
    mismatch.params.delta = 9.0;
    try {
        validate_config(mismatch);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(mentions(e, "must equal edges.delta"));
    }

    auto nonfinite = bridge_config();
    nonfinite.initial_states.row(0)[1] = std::nan("");
    CHECK_THROWS_AS(validate_config(nonfinite), ValidationError);
}

TEST_CASE("a follower already at its goal never moves") {
    ScenarioConfig config;
    config.topology = make_topology(2, {AgentRole::Follower, AgentRole::Leader}, {{0, 1}}, 5.0);
    config.initial_states = StateSet(2, 2);
    config.initial_states.row(0)[0] = 0.75;
    config.initial_states.row(1)[0] = 0.75;  // follower sits on the leader
    config.params = ControllerParams{2.0, {3.0}, 5.0};
    config.horizon = 0.05;

    const auto rec = run_fractional(config);
    REQUIRE(rec.status == RunStatus::Completed);
    for (std::size_t r = 0; r < rec.record_count(); ++r) {
        const auto follower = rec.agent_at(r, 0);
        CHECK(follower[0] == 0.75);
        CHECK(follower[1] == 0.0);
    }
}

TEST_CASE("bridge follower settles between its leaders") {
    const auto config = bridge_config();
    const auto rec = run_fractional(config);
    REQUIRE(rec.status == RunStatus::Completed);
    CHECK(rec.completed_steps == config.steps());

    const auto follower = rec.agent_at(rec.record_count() - 1, 0);
    CHECK(std::abs(follower[0] - 1.0) <= 1e-6);  // symmetric pull
    CHECK(std::abs(follower[1]) <= 1e-3);        // drawn onto the hull

    const auto final_states = rec.snapshot(rec.record_count() - 1);
    const auto residuals = equilibrium_residual(final_states, config.topology, config.params);
    REQUIRE(residuals.size() == 1);
    CHECK(residuals[0] <= 1e-3);
}

TEST_CASE("leader rows are bit-identical across the whole record") {
    const auto config = chain_config();
    const auto rec = run_fractional(config);
    REQUIRE(rec.status == RunStatus::Completed);
    for (std::size_t r = 0; r < rec.record_count(); ++r) {
        const auto leader = rec.agent_at(r, 2);
        CHECK(leader[0] == 0.0);
        CHECK(leader[1] == 0.0);
    }
}

TEST_CASE("per-record matrix diagnostics stay Metzler with tiny row sums") {
    const auto rec = run_fractional(chain_config());
    REQUIRE(rec.record_count() > 0);
    for (std::size_t r = 0; r < rec.record_count(); ++r) {
        CHECK(rec.min_offdiagonal[r] >= 0.0);
        CHECK(rec.max_row_sum_abs[r] <= 1e-12);
        CHECK(rec.min_margin[r] > 0.0);
    }
}

TEST_CASE("identical configs give identical records") {
    const auto config = chain_config();
    const auto a = run_fractional(config);
    const auto b = run_fractional(config);
    CHECK(a.states == b.states);
    CHECK(a.edge_margins == b.edge_margins);
    CHECK(a.times == b.times);
    CHECK(a.recorded_steps == b.recorded_steps);
}

TEST_CASE("recording stride keeps the first and final steps") {
    auto config = bridge_config();
    config.horizon = 0.02;  // 20 steps
    config.record_every = 7;
    const auto rec = run_fractional(config);
    CHECK(rec.recorded_steps == std::vector<std::size_t>{0, 7, 14, 20});
    REQUIRE(rec.times.size() == 4);
    CHECK(rec.times[1] == doctest::Approx(7e-3).epsilon(1e-12));
    CHECK(rec.times.back() == doctest::Approx(0.02).epsilon(1e-12));
}

TEST_CASE("lower derivative order reaches half the initial hull distance sooner") {
    // Sub-unit orders respond algebraically fast at small t (the t^alpha
    // kernel), then pay for it with a heavy tail; both orders contain.
    for (std::uint64_t seed : {std::uint64_t{0}, std::uint64_t{2}}) {
        double t_half[2] = {-1.0, -1.0};
        int idx = 0;
        for (double alpha : {0.5, 1.0}) {
            ScenarioConfig config = preset_karate(seed);
            config.alpha = alpha;
            config.horizon = 5.0;
            const auto rec = run_fractional(config);
            REQUIRE(rec.status == RunStatus::Completed);

            std::vector<std::vector<double>> leader_pts;
            for (std::size_t l : config.topology.leader_ids) {
                const auto row = config.initial_states.row(l);
                leader_pts.push_back({row.begin(), row.end()});
            }
            const auto hull = convex_hull(leader_pts);
            auto worst = [&](std::size_t r) {
                double w = 0.0;
                for (std::size_t f : config.topology.follower_ids) {
                    w = std::max(w, hull_distance(rec.agent_at(r, f), hull));
                }
                return w;
            };
            const double d0 = worst(0);
            REQUIRE(d0 > 0.0);
            CHECK(worst(rec.record_count() - 1) <= 1e-3);  // same verdict either order
            for (std::size_t r = 0; r < rec.record_count(); ++r) {
                if (worst(r) <= 0.5 * d0) {
                    t_half[idx] = rec.times[r];
                    break;
                }
            }
            REQUIRE(t_half[idx] >= 0.0);
            ++idx;
        }
        CHECK(t_half[0] < t_half[1]);
    }
}

TEST_CASE("order-1 fractional and discrete stepping agree") {
    auto config = chain_config();
    config.horizon = 5.0;
    const auto frac = run_fractional(config);
    const auto disc = run_integer_discrete(config);
    REQUIRE(frac.status == RunStatus::Completed);
    REQUIRE(disc.status == RunStatus::Completed);

    const auto xf = frac.states_at(frac.record_count() - 1);
    const auto xd = disc.states_at(disc.record_count() - 1);
    REQUIRE(xf.size() == xd.size());
    for (std::size_t i = 0; i < xf.size(); ++i) {
        CHECK(std::abs(xf[i] - xd[i]) <= 10.0 * config.step);
    }
}

TEST_CASE("discrete scheme tracks convex-combination bookkeeping") {
    const auto rec = run_integer_discrete(chain_config());
    REQUIRE(rec.status == RunStatus::Completed);
    CHECK(rec.coeff_min >= 0.0);
    CHECK(rec.coeff_min <= 1.0);
    CHECK(rec.coeff_sum_err_max <= 1e-12);
}

TEST_CASE("oversized sampling period aborts as a step-size violation") {
    auto config = chain_config();
    config.step = 5.0;
    config.horizon = 50.0;
    config.params.gains = {60.0, 60.0};

    const auto disc = run_integer_discrete(config);
    CHECK(disc.status == RunStatus::StepSizeViolation);
    CHECK_FALSE(disc.abort_message.empty());
    CHECK(disc.completed_steps < config.steps());

    const auto frac = run_fractional(config);
    CHECK(frac.status == RunStatus::StepSizeViolation);
    CHECK(frac.completed_steps == 0);
}

TEST_CASE("violent half-order overshoot surfaces as a barrier breach") {
    auto config = chain_config();
    config.alpha = 0.5;
    config.step = 1.0;
    config.horizon = 20.0;
    config.params.gains = {500.0, 500.0};
    const auto rec = run_fractional(config);
    REQUIRE(rec.status == RunStatus::BarrierBreach);
    REQUIRE(rec.breach.has_value());
    CHECK(rec.breach->margin < 1e-9 * config.topology.delta);
    CHECK(rec.breach->step == rec.completed_steps + 1);
    const bool edge_known =
        config.topology.has_edge(rec.breach->from, rec.breach->to) ||
        rec.breach->from < config.topology.agent_count;
    CHECK(edge_known);
}

TEST_CASE("equilibrium residual is exact on a symmetric perturbation") {
    const auto config = bridge_config();
    StateSet s = config.initial_states;
    s.row(0)[0] = 1.0;
    s.row(0)[1] = 0.0;  // exactly the neighbor average
    auto residuals = equilibrium_residual(s, config.topology, config.params);
    CHECK(residuals[0] <= 1e-15);

    s.row(0)[1] = 0.3;  // same distance to both leaders: average stays (1,0)
    residuals = equilibrium_residual(s, config.topology, config.params);
    CHECK(residuals[0] == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("edge adoption changes the dynamics only after agents close in") {
    // Two followers approach the same leader from opposite sides; without
    // adoption they never interact, with it they couple once within range.
    ScenarioConfig config;
    config.topology = make_topology(
        3, {AgentRole::Follower, AgentRole::Follower, AgentRole::Leader},
        {{0, 2}, {1, 2}}, 8.0);
    config.initial_states = StateSet(3, 2);
    config.initial_states.row(0)[0] = -2.0;
    config.initial_states.row(1)[0] = 2.0;
    config.params = ControllerParams{2.0, {10.0, 10.0}, 8.0};
    config.horizon = 4.0;

    auto adopting = config;
    adopting.edge_addition = true;

    const auto plain = run_fractional(config);
    const auto adopted = run_fractional(adopting);
    REQUIRE(plain.status == RunStatus::Completed);
    REQUIRE(adopted.status == RunStatus::Completed);
    // S_01(0) = 16 > 0.8 * delta = 6.4: identical until they converge inward
    CHECK(plain.states_at(0).size() == adopted.states_at(0).size());
    bool diverged = false;
    for (std::size_t i = 0; i < plain.states.size(); ++i) {
        if (plain.states[i] != adopted.states[i]) {
            diverged = true;
            break;
        }
    }
    CHECK(diverged);
}

TEST_CASE("report on a completed run") {
    const auto config = chain_config();
    const auto rec = run_fractional(config);
    const auto report = build_report(rec, config.topology, config.params);

    CHECK(report.complete);
    CHECK(report.status == "completed");
    CHECK(report.connectivity_preserved);
    CHECK(report.min_margin_over_run > 0.0);
    CHECK(report.note.empty());
    REQUIRE(report.final_hull_distances.size() == 2);
    for (double dist : report.final_hull_distances) CHECK(dist <= 1e-3);
    CHECK(report.hull_volume_series.size() == rec.record_count());
    CHECK(report.spread_series.size() == rec.record_count());
    for (const auto& s : report.spread_series) CHECK(s.size() == 2);
    REQUIRE(report.equilibrium_residuals.size() == 2);
    for (double rres : report.equilibrium_residuals) CHECK(rres <= 1e-3);
    CHECK(report.min_offdiagonal >= 0.0);
    CHECK(report.max_row_sum_abs <= 1e-12);

    // hull volume can only shrink (within accumulation noise)
    for (std::size_t r = 1; r < report.hull_volume_series.size(); ++r) {
        CHECK(report.hull_volume_series[r] <=
              report.hull_volume_series[r - 1] + 1e-9);
    }
}

TEST_CASE("report on an aborted run carries the breach") {
    auto config = chain_config();
    config.alpha = 0.5;
    config.step = 1.0;
    config.horizon = 20.0;
    config.params.gains = {500.0, 500.0};
    const auto rec = run_fractional(config);
    REQUIRE(rec.status == RunStatus::BarrierBreach);
    const auto report = build_report(rec, config.topology, config.params);
    CHECK_FALSE(report.complete);
    CHECK(report.status == "barrier_breach");
    CHECK_FALSE(report.connectivity_preserved);
    REQUIRE(report.breach.has_value());
    CHECK(report.min_margin_over_run < 1e-9 * config.topology.delta);
}

}  // TEST_SUITE
