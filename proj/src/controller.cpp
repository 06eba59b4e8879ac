#include "focs/controller.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "focs/errors.hpp"

namespace focs {

namespace {

void require_follower(const NetworkTopology& topology, std::size_t i, const char* op) {
    if (i >= topology.agent_count) {
        std::ostringstream os;
        os << op << ": agent " << i << " out of range";
        throw std::invalid_argument(os.str());
    }
    if (!topology.is_follower(i)) {
        std::ostringstream os;
        os << op << ": agent " << i << " is a leader";
        throw RoleError(os.str());
    }
}

double gain_for(const ControllerParams& params, const NetworkTopology& topology, std::size_t i) {
    const std::size_t row = topology.follower_row[i];
    if (row == NetworkTopology::npos || row >= params.gains.size()) {
        throw std::invalid_argument("controller params: one gain per follower required");
    }
    return params.gains[row];
}

}  // namespace

double goal_value(const StateSet& states, const NetworkTopology& topology, std::size_t i) {
    require_follower(topology, i, "goal_value");
    double g = 0.0;
    for (std::size_t j : topology.neighbors[i]) {
        g += 0.5 * social_difference(states.row(i), states.row(j));
    }
    return g;
}

double constraint_value(const StateSet& states, const NetworkTopology& topology, std::size_t i) {
    require_follower(topology, i, "constraint_value");
    double product = 1.0;
    for (std::size_t j : topology.neighbors[i]) {
        product *= topology.delta - social_difference(states.row(i), states.row(j));
    }
    return 0.5 * product;
}

double potential_value(double gamma, double beta, double k) {
    if (!(k > 0.0)) throw std::invalid_argument("potential_value: k must be > 0");
    if (gamma == 0.0 && beta == 0.0) {
        throw UndefinedPointError("potential undefined at gamma = beta = 0");
    }
    const double base = std::pow(gamma, k) + beta;
    if (!(base > 0.0)) {
        throw UndefinedPointError("potential undefined: gamma^k + beta is not positive");
    }
    return gamma / std::pow(base, 1.0 / k);
}

double m_coefficient(double gamma, double beta, double b_bar, double k) {
    if (!(k > 0.0)) throw std::invalid_argument("m_coefficient: k must be > 0");
    const double base = std::pow(gamma, k) + beta;
    if (!(base > 0.0)) {
        throw UndefinedPointError("m_coefficient undefined: gamma^k + beta is not positive");
    }
    return (k * beta + b_bar * gamma) / (k * std::pow(base, 1.0 / k + 1.0));
}

PotentialBreakdown potential_breakdown(const StateSet& states, const NetworkTopology& topology,
                                       const ControllerParams& params, std::size_t i) {
    require_follower(topology, i, "potential_breakdown");
    const auto& ns = topology.neighbors[i];
    const std::size_t deg = ns.size();
    const std::size_t d = states.dim;
    const double cutoff = 1e-9 * topology.delta;

    PotentialBreakdown bd;
    bd.neighbor_ids.assign(ns.begin(), ns.end());
    bd.m_coeffs.resize(deg);
    bd.gradient.assign(d, 0.0);

    std::vector<double> b(deg);
    double gamma = 0.0;
    for (std::size_t t = 0; t < deg; ++t) {
        const double s = social_difference(states.row(i), states.row(ns[t]));
        gamma += 0.5 * s;
        b[t] = topology.delta - s;
        if (b[t] < cutoff) {
            std::ostringstream os;
            os << "edge (" << i << "," << ns[t] << ") margin " << b[t]
               << " inside the near-boundary guard band";
            throw BarrierBreachError(os.str(), static_cast<int>(i), static_cast<int>(ns[t]), b[t]);
        }
    }

    // Leave-one-out products via prefix/suffix, no division; empty product = 1.
    std::vector<double> prefix(deg + 1, 1.0), suffix(deg + 1, 1.0);
    for (std::size_t t = 0; t < deg; ++t) prefix[t + 1] = prefix[t] * b[t];
    for (std::size_t t = deg; t-- > 0;) suffix[t] = suffix[t + 1] * b[t];

    bd.gamma = gamma;
    bd.beta = 0.5 * prefix[deg];
    bd.phi = potential_value(gamma, bd.beta, params.k);

    const auto qi = states.row(i);
    for (std::size_t t = 0; t < deg; ++t) {
        const double b_bar = prefix[t] * suffix[t + 1];
        const double m = m_coefficient(gamma, bd.beta, b_bar, params.k);
        bd.m_coeffs[t] = m;
        const auto qj = states.row(ns[t]);
        for (std::size_t c = 0; c < d; ++c) bd.gradient[c] += m * (qi[c] - qj[c]);
    }
    return bd;
}

std::vector<double> potential_gradient(const StateSet& states, const NetworkTopology& topology,
                                       const ControllerParams& params, std::size_t i) {
    return potential_breakdown(states, topology, params, i).gradient;
}

std::vector<double> potential_gradient_quotient(const StateSet& states,
                                                const NetworkTopology& topology,
                                                const ControllerParams& params, std::size_t i) {
    require_follower(topology, i, "potential_gradient_quotient");
    const auto& ns = topology.neighbors[i];
    const std::size_t deg = ns.size();
    const std::size_t d = states.dim;

    std::vector<double> b(deg);
    double gamma = 0.0;
    for (std::size_t t = 0; t < deg; ++t) {
        const double s = social_difference(states.row(i), states.row(ns[t]));
        gamma += 0.5 * s;
        b[t] = topology.delta - s;
    }
    std::vector<double> prefix(deg + 1, 1.0), suffix(deg + 1, 1.0);
    for (std::size_t t = 0; t < deg; ++t) prefix[t + 1] = prefix[t] * b[t];
    for (std::size_t t = deg; t-- > 0;) suffix[t] = suffix[t + 1] * b[t];
    const double beta = 0.5 * prefix[deg];

    const auto qi = states.row(i);
    std::vector<double> grad_gamma(d, 0.0), grad_beta(d, 0.0);
    for (std::size_t t = 0; t < deg; ++t) {
        const double b_bar = prefix[t] * suffix[t + 1];
        const auto qj = states.row(ns[t]);
        for (std::size_t c = 0; c < d; ++c) {
            const double diff = qi[c] - qj[c];
            grad_gamma[c] += diff;
            grad_beta[c] -= b_bar * diff;
        }
    }

    const double k = params.k;
    const double base = std::pow(gamma, k) + beta;
    if (!(base > 0.0)) {
        throw UndefinedPointError("potential gradient undefined: gamma^k + beta is not positive");
    }
    const double denom = k * std::pow(base, 1.0 / k + 1.0);
    std::vector<double> grad(d);
    for (std::size_t c = 0; c < d; ++c) {
        grad[c] = (k * beta * grad_gamma[c] - gamma * grad_beta[c]) / denom;
    }
    return grad;
}

std::vector<double> control_input(const StateSet& states, const NetworkTopology& topology,
                                  const ControllerParams& params, std::size_t i) {
    if (i >= topology.agent_count) {
        throw std::invalid_argument("control_input: agent out of range");
    }
    if (!topology.is_follower(i)) {
        return std::vector<double>(states.dim, 0.0);  // leaders hold their state
    }
    auto grad = potential_gradient(states, topology, params, i);
    const double gain = gain_for(params, topology, i);
    for (double& g : grad) g *= -gain;
    return grad;
}

}  // namespace focs
