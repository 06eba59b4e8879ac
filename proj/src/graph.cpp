#include "focs/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>
#include <stdexcept>

#include "focs/controller.hpp"
#include "focs/errors.hpp"

namespace focs {

bool NetworkTopology::has_edge(std::size_t i, std::size_t j) const {
    if (i >= agent_count) return false;
    const auto& ns = neighbors[i];
    return std::binary_search(ns.begin(), ns.end(), j);
}

std::size_t NetworkTopology::edge_count() const {
    std::size_t c = 0;
    for (const auto& ns : neighbors) c += ns.size();
    return c;
}

std::vector<std::pair<std::size_t, std::size_t>> NetworkTopology::edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    out.reserve(edge_count());
    for (std::size_t i = 0; i < agent_count; ++i) {
        for (std::size_t j : neighbors[i]) out.emplace_back(i, j);
    }
    return out;
}

NetworkTopology make_topology(std::size_t agent_count, std::vector<AgentRole> roles,
                              const std::vector<std::pair<std::size_t, std::size_t>>& access_edges,
                              double delta) {
    std::vector<std::string> issues;
    if (agent_count == 0) issues.push_back("agents.count: must be positive");
    if (roles.size() != agent_count) {
        std::ostringstream os;
        os << "agents.roles: expected " << agent_count << " entries, got " << roles.size();
        issues.push_back(os.str());
    }
    if (!(delta > 0.0)) issues.push_back("edges.delta: must be > 0");

    NetworkTopology topo;
    topo.agent_count = agent_count;
    topo.roles = std::move(roles);
    topo.delta = delta;
    topo.neighbors.assign(agent_count, {});

    for (std::size_t e = 0; e < access_edges.size(); ++e) {
        const auto [i, j] = access_edges[e];
        std::ostringstream os;
        os << "edges.access[" << e << "] = (" << i << "," << j << "): ";
        if (i >= agent_count || j >= agent_count) {
            issues.push_back(os.str() + "endpoint out of range");
            continue;
        }
        if (i == j) {
            issues.push_back(os.str() + "self-loop");
            continue;
        }
        topo.neighbors[i].push_back(j);
    }
    for (std::size_t i = 0; i < agent_count; ++i) {
        auto& ns = topo.neighbors[i];
        std::sort(ns.begin(), ns.end());
        if (std::adjacent_find(ns.begin(), ns.end()) != ns.end()) {
            std::ostringstream os;
            os << "edges.access: duplicate edge out of agent " << i;
            issues.push_back(os.str());
            ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
        }
    }

    topo.follower_row.assign(agent_count, NetworkTopology::npos);
    if (topo.roles.size() == agent_count) {
        for (std::size_t i = 0; i < agent_count; ++i) {
            if (topo.roles[i] == AgentRole::Follower) {
                topo.follower_row[i] = topo.follower_ids.size();
                topo.follower_ids.push_back(i);
            } else {
                topo.leader_ids.push_back(i);
            }
        }
        if (topo.leader_ids.empty()) issues.push_back("agents.roles: at least one leader required");
        if (topo.follower_ids.empty())
            issues.push_back("agents.roles: at least one follower required");
        for (std::size_t i : topo.follower_ids) {
            if (topo.neighbors[i].empty()) {
                std::ostringstream os;
                os << "edges.access: follower " << i << " has no neighbors";
                issues.push_back(os.str());
            }
        }
    }

    if (!issues.empty()) throw ValidationError(std::move(issues));
    return topo;
}

double social_difference(std::span<const double> q_i, std::span<const double> q_j) {
    if (q_i.size() != q_j.size()) {
        throw std::invalid_argument("social_difference: dimension mismatch");
    }
    double s = 0.0;
    for (std::size_t c = 0; c < q_i.size(); ++c) {
        const double d = q_i[c] - q_j[c];
        s += d * d;
    }
    return s;
}

double edge_margin(const NetworkTopology& topology, const StateSet& states, std::size_t i,
                   std::size_t j) {
    if (!topology.has_edge(i, j)) {
        std::ostringstream os;
        os << "edge_margin: (" << i << "," << j << ") is not an access edge";
        throw std::invalid_argument(os.str());
    }
    return topology.delta - social_difference(states.row(i), states.row(j));
}

std::vector<std::size_t> check_assumption_one(const NetworkTopology& topology) {
    // Influence runs opposite to access: i reads j  =>  j influences i.
    std::vector<std::vector<std::size_t>> influence(topology.agent_count);
    for (std::size_t i = 0; i < topology.agent_count; ++i) {
        for (std::size_t j : topology.neighbors[i]) influence[j].push_back(i);
    }
    std::vector<char> reached(topology.agent_count, 0);
    std::deque<std::size_t> frontier;
    for (std::size_t l : topology.leader_ids) {
        reached[l] = 1;
        frontier.push_back(l);
    }
    while (!frontier.empty()) {
        const std::size_t v = frontier.front();
        frontier.pop_front();
        for (std::size_t w : influence[v]) {
            if (!reached[w]) {
                reached[w] = 1;
                frontier.push_back(w);
            }
        }
    }
    std::vector<std::size_t> unreachable;
    for (std::size_t f : topology.follower_ids) {
        if (!reached[f]) unreachable.push_back(f);
    }
    return unreachable;
}

double InteractionMatrix::min_offdiagonal() const {
    double lo = 0.0;  // implicit leader rows are all zero
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t diag = follower_index_map[r];
        for (std::size_t c = 0; c < cols; ++c) {
            if (c == diag) continue;
            lo = std::min(lo, entries[r * cols + c]);
        }
    }
    return lo;
}

double InteractionMatrix::max_abs_row_sum() const {
    double hi = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < cols; ++c) s += entries[r * cols + c];
        hi = std::max(hi, std::abs(s));
    }
    return hi;
}

InteractionMatrix assemble_pi_matrix(const NetworkTopology& topology, const StateSet& states,
                                     std::span<const double> gains, double k) {
    if (gains.size() != topology.follower_ids.size()) {
        throw std::invalid_argument("assemble_pi_matrix: one gain per follower required");
    }
    ControllerParams params{k, {gains.begin(), gains.end()}, topology.delta};

    InteractionMatrix pi;
    pi.rows = topology.follower_ids.size();
    pi.cols = topology.agent_count;
    pi.entries.assign(pi.rows * pi.cols, 0.0);
    pi.follower_index_map = topology.follower_ids;

    for (std::size_t r = 0; r < pi.rows; ++r) {
        const std::size_t i = topology.follower_ids[r];
        const auto bd = potential_breakdown(states, topology, params, i);
        double diag = 0.0;
        for (std::size_t t = 0; t < bd.neighbor_ids.size(); ++t) {
            const double w = gains[r] * bd.m_coeffs[t];
            pi.entries[r * pi.cols + bd.neighbor_ids[t]] = w;
            diag -= w;
        }
        pi.entries[r * pi.cols + i] = diag;
    }
    return pi;
}

std::vector<std::vector<double>> metzler_laplacian(
    const std::vector<std::vector<double>>& adjacency) {
    const std::size_t n = adjacency.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (adjacency[i].size() != n) {
            throw std::invalid_argument("metzler_laplacian: adjacency must be square");
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (adjacency[i][j] < 0.0) {
                throw std::invalid_argument("metzler_laplacian: negative adjacency entry");
            }
        }
        if (adjacency[i][i] != 0.0) {
            throw std::invalid_argument("metzler_laplacian: nonzero diagonal entry");
        }
    }
    std::vector<std::vector<double>> L = adjacency;
    for (std::size_t i = 0; i < n; ++i) {
        double degree = 0.0;
        for (std::size_t j = 0; j < n; ++j) degree += adjacency[i][j];
        L[i][i] = -degree;
    }
    return L;
}

}  // namespace focs
