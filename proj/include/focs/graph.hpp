#ifndef FOCS_GRAPH_HPP
#define FOCS_GRAPH_HPP

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace focs {

enum class AgentRole { Leader, Follower };

// Directed access graph: edge (i, j) means agent i reads agent j's state.
// Influence flows the other way (j influences i), so reachability questions
// about leaders are asked on the reversed edges.
struct NetworkTopology {
    std::size_t agent_count = 0;
    std::vector<AgentRole> roles;
    std::vector<std::vector<std::size_t>> neighbors;  // sorted access lists
    double delta = 0.0;                               // social-difference threshold

    std::vector<std::size_t> leader_ids;    // ascending
    std::vector<std::size_t> follower_ids;  // ascending; row order everywhere
    std::vector<std::size_t> follower_row;  // agent id -> row, npos for leaders

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    bool is_follower(std::size_t i) const { return roles.at(i) == AgentRole::Follower; }
    bool has_edge(std::size_t i, std::size_t j) const;
    std::size_t edge_count() const;
    // Edges in canonical order: ascending i, then ascending j within i's list.
    std::vector<std::pair<std::size_t, std::size_t>> edges() const;
};

// Validates and builds the derived index structures. Throws ValidationError
// listing every violation (self-loop, out-of-range endpoint, duplicate edge,
// missing role, no leader/follower, follower with empty neighbor set,
// delta <= 0).
NetworkTopology make_topology(std::size_t agent_count, std::vector<AgentRole> roles,
                              const std::vector<std::pair<std::size_t, std::size_t>>& access_edges,
                              double delta);

// All agents' states, row-major: agent i occupies [i*dim, (i+1)*dim).
struct StateSet {
    std::size_t count = 0;
    std::size_t dim = 0;
    std::vector<double> data;

    StateSet() = default;
    StateSet(std::size_t n, std::size_t d) : count(n), dim(d), data(n * d, 0.0) {}

    std::span<double> row(std::size_t i) { return {data.data() + i * dim, dim}; }
    std::span<const double> row(std::size_t i) const { return {data.data() + i * dim, dim}; }
};

// Squared Euclidean distance between two equal-dimension states.
double social_difference(std::span<const double> q_i, std::span<const double> q_j);

// delta - S_ij for a declared access edge; positive means the bond is intact.
double edge_margin(const NetworkTopology& topology, const StateSet& states, std::size_t i,
                   std::size_t j);

// Followers not reachable from any leader along reversed access edges
// (empty result = the reachability assumption holds).
std::vector<std::size_t> check_assumption_one(const NetworkTopology& topology);

// Follower-rows interaction matrix over all agents: row r describes follower
// follower_index_map[r], with diagonal -K_i * sum_j m_ij and off-diagonal
// K_i * m_ik on access neighbors. Embedded with zero leader rows it is a
// Metzler matrix with zero row sums.
struct InteractionMatrix {
    std::size_t rows = 0;  // followers
    std::size_t cols = 0;  // all agents
    std::vector<double> entries;               // row-major rows x cols
    std::vector<std::size_t> follower_index_map;  // row -> agent id

    double entry(std::size_t r, std::size_t c) const { return entries[r * cols + c]; }
    // Smallest off-diagonal entry of the embedded n x n matrix (>= 0 means
    // Metzler holds; implicit leader rows are zero and cannot go below that).
    double min_offdiagonal() const;
    // Largest |row sum| over follower rows (leader rows sum to zero exactly).
    double max_abs_row_sum() const;
};

// gains has one entry per follower, in follower_ids order; k is the
// potential's tuning exponent. Throws BarrierBreachError if any edge margin
// of a follower is not strictly positive.
InteractionMatrix assemble_pi_matrix(const NetworkTopology& topology, const StateSet& states,
                                     std::span<const double> gains, double k);

// L = A - D for a nonnegative square adjacency with zero diagonal.
std::vector<std::vector<double>> metzler_laplacian(const std::vector<std::vector<double>>& adjacency);

}  // namespace focs

#endif
