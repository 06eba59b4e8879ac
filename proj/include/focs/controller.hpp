#ifndef FOCS_CONTROLLER_HPP
#define FOCS_CONTROLLER_HPP

#include <cstddef>
#include <vector>

#include "focs/graph.hpp"

namespace focs {

struct ControllerParams {
    double k = 2.0;              // tuning exponent, >= 1 recommended
    std::vector<double> gains;   // per follower, follower_ids order, > 0
    double delta = 0.0;          // must match the topology threshold
};

// Everything the influence law computes for one follower at one snapshot.
struct PotentialBreakdown {
    double gamma = 0.0;  // consensus goal, >= 0
    double beta = 0.0;   // edge-maintenance constraint, > 0 inside the safe set
    double phi = 0.0;    // potential in [0, 1]
    std::vector<std::size_t> neighbor_ids;
    std::vector<double> m_coeffs;  // aligned with neighbor_ids, >= 0
    std::vector<double> gradient;  // d-vector
};

// gamma_i = sum over neighbors of ||q_i - q_j||^2 / 2. Throws RoleError for
// a leader id.
double goal_value(const StateSet& states, const NetworkTopology& topology, std::size_t i);

// beta_i = (1/2) * product over neighbors of (delta - S_ij). May be <= 0 if
// a bond already broke; the caller decides how to treat that.
double constraint_value(const StateSet& states, const NetworkTopology& topology, std::size_t i);

// phi = gamma / (gamma^k + beta)^(1/k), in [0, 1]. Throws
// UndefinedPointError at gamma = beta = 0.
double potential_value(double gamma, double beta, double k);

// m_ij = (k*beta + b_bar*gamma) / (k * (gamma^k + beta)^(1/k + 1)). Throws
// UndefinedPointError when the denominator vanishes.
double m_coefficient(double gamma, double beta, double b_bar, double k);

// Full evaluation for follower i: goal, constraint, potential, per-neighbor
// m coefficients (leave-one-out products computed without division), and the
// expanded-form gradient sum m_ij (q_i - q_j).
PotentialBreakdown potential_breakdown(const StateSet& states, const NetworkTopology& topology,
                                       const ControllerParams& params, std::size_t i);

std::vector<double> potential_gradient(const StateSet& states, const NetworkTopology& topology,
                                       const ControllerParams& params, std::size_t i);

// Quotient-rule form (k*beta*grad_gamma - gamma*grad_beta) / (k*(gamma^k+beta)^(1/k+1)),
// used to cross-check the expanded form.
std::vector<double> potential_gradient_quotient(const StateSet& states,
                                                const NetworkTopology& topology,
                                                const ControllerParams& params, std::size_t i);

// u_i = -K_i * grad phi_i for followers; identically zero for leaders.
std::vector<double> control_input(const StateSet& states, const NetworkTopology& topology,
                                  const ControllerParams& params, std::size_t i);

}  // namespace focs

#endif
