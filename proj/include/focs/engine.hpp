#ifndef FOCS_ENGINE_HPP
#define FOCS_ENGINE_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "focs/controller.hpp"
#include "focs/graph.hpp"

namespace focs {

struct ScenarioConfig {
    std::string name = "scenario";
    NetworkTopology topology;
    StateSet initial_states;
    ControllerParams params;
    double alpha = 1.0;
    double step = 1e-3;
    double horizon = 50.0;
    bool edge_addition = false;              // opt-in: add edges at S_ij <= 0.8*delta
    std::optional<std::size_t> memory_window;  // opt-in truncated solver memory
    std::uint64_t seed = 0;
    std::size_t record_every = 1;

    std::size_t steps() const;  // horizon / step, rounded
};

// Full load-time validation: state shape, parameter ranges, strictly
// positive initial margins on every declared edge, and leader reachability.
// Throws ValidationError listing every violation with a field path.
void validate_config(const ScenarioConfig& config);

enum class RunStatus { Completed, BarrierBreach, Divergence, StepSizeViolation };

const char* run_status_name(RunStatus status);

struct BreachInfo {
    std::size_t step = 0;       // step index at which the violation surfaced
    std::size_t from = 0;
    std::size_t to = 0;
    double margin = 0.0;
};

// Time-indexed record of a run. Recorded steps satisfy margin > 0 on every
// monitored edge; an aborted run simply stops recording at the last valid
// step and carries the abort metadata.
struct TrajectoryRecord {
    std::size_t agent_count = 0;
    std::size_t dim = 0;
    double step = 0.0;
    std::vector<AgentRole> roles;
    std::vector<std::size_t> follower_ids;
    std::vector<std::pair<std::size_t, std::size_t>> edge_list;  // canonical order

    std::vector<std::size_t> recorded_steps;
    std::vector<double> times;
    std::vector<double> states;        // [record][agent][dim]
    std::vector<double> edge_margins;  // [record][edge], edge_list order
    std::vector<double> min_margin;          // per record
    std::vector<double> min_offdiagonal;     // per record, embedded pi matrix
    std::vector<double> max_row_sum_abs;     // per record, follower rows

    RunStatus status = RunStatus::Completed;
    std::optional<BreachInfo> breach;
    std::string abort_message;
    std::size_t completed_steps = 0;

    // Discrete scheme bookkeeping: worst convex-combination coefficient and
    // worst |coefficient sum - 1| over all followers and steps.
    double coeff_min = 1.0;
    double coeff_sum_err_max = 0.0;

    std::size_t record_count() const { return recorded_steps.size(); }
    std::span<const double> states_at(std::size_t r) const {
        return {states.data() + r * agent_count * dim, agent_count * dim};
    }
    std::span<const double> agent_at(std::size_t r, std::size_t i) const {
        return {states.data() + (r * agent_count + i) * dim, dim};
    }
    StateSet snapshot(std::size_t r) const;
};

// Integrates every follower's fractional dynamics with the ABM solver over
// the stacked follower state; leaders are held constant. Margin and
// interaction-matrix diagnostics are recorded every record_every steps (the
// final step is always recorded). Barrier breaches and divergence abort the
// run and are reported through the record's status.
TrajectoryRecord run_fractional(const ScenarioConfig& config);

// Explicit convex-combination stepping of the sampled-data form: each
// follower moves to (1 - T*sum pi_ij) q_i + T*sum pi_ij q_j. Aborts with
// StepSizeViolation when a self-coefficient would go negative.
TrajectoryRecord run_integer_discrete(const ScenarioConfig& config);

// ||q_i - (1/-pi_ii) sum_j pi_ij q_j|| per follower; near-zero certifies an
// approximate equilibrium that is a convex combination of neighbor states.
// Throws UndefinedPointError when a diagonal entry vanishes.
std::vector<double> equilibrium_residual(const StateSet& states, const NetworkTopology& topology,
                                         const ControllerParams& params);

}  // namespace focs

#endif
