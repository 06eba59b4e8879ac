#include "focs/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "focs/errors.hpp"
#include "focs/fractional.hpp"

namespace focs {

std::size_t ScenarioConfig::steps() const {
    if (!(step > 0.0) || !(horizon > 0.0)) return 0;
    return static_cast<std::size_t>(std::llround(horizon / step));
}

const char* run_status_name(RunStatus status) {
    switch (status) {
        case RunStatus::Completed: return "completed";
        case RunStatus::BarrierBreach: return "barrier_breach";
        case RunStatus::Divergence: return "divergence";
        case RunStatus::StepSizeViolation: return "step_size_violation";
    }
    return "unknown";
}

StateSet TrajectoryRecord::snapshot(std::size_t r) const {
    StateSet s(agent_count, dim);
    const auto src = states_at(r);
    std::copy(src.begin(), src.end(), s.data.begin());
    return s;
}

void validate_config(const ScenarioConfig& config) {
    std::vector<std::string> issues;
    const auto& topo = config.topology;
    const auto& init = config.initial_states;

    if (init.count != topo.agent_count) {
        std::ostringstream os;
        os << "agents.initial_states: expected " << topo.agent_count << " rows, got " << init.count;
        issues.push_back(os.str());
    }
    if (init.dim < 1) issues.push_back("agents.dim: must be >= 1");
    for (std::size_t i = 0; i < init.count; ++i) {
        for (double v : init.row(i)) {
            if (!std::isfinite(v)) {
                std::ostringstream os;
                os << "agents.initial_states[" << i << "]: non-finite entry";
                issues.push_back(os.str());
                break;
            }
        }
    }
    if (config.params.delta != topo.delta) {
        issues.push_back("controller.delta: must equal edges.delta");
    }
    if (config.params.gains.size() != topo.follower_ids.size()) {
        std::ostringstream os;
        os << "controller.gains: expected " << topo.follower_ids.size() << " entries, got "
           << config.params.gains.size();
        issues.push_back(os.str());
    }
    for (std::size_t r = 0; r < config.params.gains.size(); ++r) {
        if (!(config.params.gains[r] > 0.0)) {
            std::ostringstream os;
            os << "controller.gains[" << r << "]: must be > 0";
            issues.push_back(os.str());
        }
    }
    if (!(config.params.k > 0.0)) issues.push_back("controller.k: must be > 0");
    if (!(config.alpha > 0.0) || !(config.alpha <= 1.0)) {
        issues.push_back("solver.alpha: must lie in (0, 1]");
    }
    if (!(config.step > 0.0)) issues.push_back("solver.step: must be > 0");
    if (!(config.horizon > 0.0)) issues.push_back("solver.horizon: must be > 0");
    const std::size_t steps = config.steps();
    if (config.step > 0.0 && config.horizon > 0.0) {
        if (steps < 1) issues.push_back("solver.horizon: shorter than one step");
        if (steps > 10'000'000) {
            issues.push_back("solver.step/horizon: more than 1e7 steps requested; "
                             "the full-memory solver cannot run at this scale");
        }
    }
    if (config.memory_window && *config.memory_window == 0) {
        issues.push_back("solver.memory_window: must be positive when set");
    }
    if (config.record_every < 1) issues.push_back("output.record_every: must be >= 1");

    if (init.count == topo.agent_count && init.dim >= 1) {
        for (const auto& [i, j] : topo.edges()) {
            const double margin = topo.delta - social_difference(init.row(i), init.row(j));
            if (!(margin > 0.0)) {
                std::ostringstream os;
                os << "edges.access (" << i << "," << j << "): initial margin " << margin
                   << " is not positive";
                issues.push_back(os.str());
            }
        }
    }
    const auto unreachable = check_assumption_one(topo);
    if (!unreachable.empty()) {
        std::ostringstream os;
        os << "edges.access: no leader influences follower";
        for (std::size_t f : unreachable) os << " " << f;
        issues.push_back(os.str());
    }

    if (!issues.empty()) throw ValidationError(std::move(issues));
}

namespace {

// Per-follower potential evaluation with preallocated scratch; hot path for
// both integration schemes and the per-step diagnostics.
class LoopEval {
public:
    LoopEval(const NetworkTopology& topo, const ControllerParams& params)
        : topo_(topo), params_(params), cutoff_(1e-9 * topo.delta) {
        const std::size_t cap = topo.agent_count + 1;
        b_.resize(cap);
        prefix_.resize(cap + 1);
        suffix_.resize(cap + 1);
        m_.resize(cap);
    }

    // Fills m coefficients for follower i's neighbors (in neighbor order)
    // and, when grad_out is nonempty, the potential gradient.
    void eval(const StateSet& states, std::size_t i, std::span<double> grad_out) {
        const auto& ns = topo_.neighbors[i];
        const std::size_t deg = ns.size();
        const auto qi = states.row(i);

        double gamma = 0.0;
        for (std::size_t t = 0; t < deg; ++t) {
            const double s = social_difference(qi, states.row(ns[t]));
            gamma += 0.5 * s;
            b_[t] = topo_.delta - s;
            if (b_[t] < cutoff_) {
                std::ostringstream os;
                os << "edge (" << i << "," << ns[t] << ") margin " << b_[t]
                   << " inside the near-boundary guard band";
                throw BarrierBreachError(os.str(), static_cast<int>(i),
                                         static_cast<int>(ns[t]), b_[t]);
            }
        }
        prefix_[0] = 1.0;
        for (std::size_t t = 0; t < deg; ++t) prefix_[t + 1] = prefix_[t] * b_[t];
        suffix_[deg] = 1.0;
        for (std::size_t t = deg; t-- > 0;) suffix_[t] = suffix_[t + 1] * b_[t];

        const double beta = 0.5 * prefix_[deg];
        const double k = params_.k;
        const double base = std::pow(gamma, k) + beta;
        if (!(base > 0.0)) {
            throw UndefinedPointError("potential undefined: gamma^k + beta is not positive");
        }
        const double denom = k * std::pow(base, 1.0 / k + 1.0);

        if (!grad_out.empty()) std::fill(grad_out.begin(), grad_out.end(), 0.0);
        for (std::size_t t = 0; t < deg; ++t) {
            const double b_bar = prefix_[t] * suffix_[t + 1];
            m_[t] = (k * beta + b_bar * gamma) / denom;
            if (!grad_out.empty()) {
                const auto qj = states.row(ns[t]);
                for (std::size_t c = 0; c < grad_out.size(); ++c) {
                    grad_out[c] += m_[t] * (qi[c] - qj[c]);
                }
            }
        }
    }

    std::span<const double> m_coeffs(std::size_t deg) const { return {m_.data(), deg}; }

private:
    const NetworkTopology& topo_;
    const ControllerParams& params_;
    double cutoff_;
    std::vector<double> b_, prefix_, suffix_, m_;
};

struct Recorder {
    TrajectoryRecord& rec;
    const NetworkTopology& monitored;  // initial topology: fixed margin columns
    const NetworkTopology& active;     // current topology: pi diagnostics
    const ControllerParams& params;
    LoopEval& eval;

    std::vector<double> margin_scratch;

    void capture(const StateSet& states, std::size_t step_index, double step_size) {
        // Evaluate everything (the controller pass may throw on a breach)
        // before committing, so an abort leaves whole records only.
        margin_scratch.clear();
        double min_margin = std::numeric_limits<double>::infinity();
        for (const auto& [i, j] : rec.edge_list) {
            const double m = monitored.delta - social_difference(states.row(i), states.row(j));
            margin_scratch.push_back(m);
            min_margin = std::min(min_margin, m);
        }

        // Embedded interaction matrix at this snapshot: smallest off-diagonal
        // entry (zeros included) and worst |row sum| over follower rows.
        double off_min = 0.0;
        double row_err = 0.0;
        for (std::size_t r = 0; r < active.follower_ids.size(); ++r) {
            const std::size_t i = active.follower_ids[r];
            eval.eval(states, i, {});
            const auto m = eval.m_coeffs(active.neighbors[i].size());
            const double gain = params.gains[r];
            double diag = 0.0;
            for (double mv : m) {
                const double w = gain * mv;
                off_min = std::min(off_min, w);
                diag -= w;
            }
            double sum = diag;
            for (double mv : m) sum += gain * mv;
            row_err = std::max(row_err, std::abs(sum));
        }

        rec.recorded_steps.push_back(step_index);
        rec.times.push_back(static_cast<double>(step_index) * step_size);
        rec.states.insert(rec.states.end(), states.data.begin(), states.data.end());
        rec.edge_margins.insert(rec.edge_margins.end(), margin_scratch.begin(),
                                margin_scratch.end());
        rec.min_margin.push_back(min_margin);
        rec.min_offdiagonal.push_back(off_min);
        rec.max_row_sum_abs.push_back(row_err);
    }
};

TrajectoryRecord init_record(const ScenarioConfig& config) {
    TrajectoryRecord rec;
    rec.agent_count = config.topology.agent_count;
    rec.dim = config.initial_states.dim;
    rec.step = config.step;
    rec.roles = config.topology.roles;
    rec.follower_ids = config.topology.follower_ids;
    rec.edge_list = config.topology.edges();
    const std::size_t records = config.steps() / config.record_every + 2;
    rec.recorded_steps.reserve(records);
    rec.times.reserve(records);
    rec.states.reserve(records * rec.agent_count * rec.dim);
    rec.edge_margins.reserve(records * rec.edge_list.size());
    rec.min_margin.reserve(records);
    rec.min_offdiagonal.reserve(records);
    rec.max_row_sum_abs.reserve(records);
    return rec;
}

// Opt-in hysteresis edge formation: a follower picks up a new access edge
// once the social difference falls to 0.8 * delta.
void add_close_edges(NetworkTopology& active, const StateSet& states) {
    const double bar = 0.8 * active.delta;
    for (std::size_t i : active.follower_ids) {
        for (std::size_t j = 0; j < active.agent_count; ++j) {
            if (j == i || active.has_edge(i, j)) continue;
            if (social_difference(states.row(i), states.row(j)) <= bar) {
                auto& ns = active.neighbors[i];
                ns.insert(std::upper_bound(ns.begin(), ns.end(), j), j);
            }
        }
    }
}

}  // namespace

TrajectoryRecord run_fractional(const ScenarioConfig& config) {
    validate_config(config);
    NetworkTopology active = config.topology;
    const auto& followers = config.topology.follower_ids;
    const std::size_t F = followers.size();
    const std::size_t d = config.initial_states.dim;
    const std::size_t total = config.steps();

    StateSet scratch = config.initial_states;  // leader rows never change
    LoopEval eval(active, config.params);
    TrajectoryRecord rec = init_record(config);
    Recorder recorder{rec, config.topology, active, config.params, eval};

    auto field = [&](std::span<const double> x, std::span<double> dx) {
        for (std::size_t r = 0; r < F; ++r) {
            auto row = scratch.row(followers[r]);
            std::copy_n(x.begin() + r * d, d, row.begin());
        }
        for (std::size_t r = 0; r < F; ++r) {
            eval.eval(scratch, followers[r], dx.subspan(r * d, d));
            const double gain = config.params.gains[r];
            for (std::size_t c = 0; c < d; ++c) dx[r * d + c] *= -gain;
        }
    };

    std::vector<double> x0(F * d);
    for (std::size_t r = 0; r < F; ++r) {
        const auto row = config.initial_states.row(followers[r]);
        std::copy(row.begin(), row.end(), x0.begin() + r * d);
    }

    try {
        recorder.capture(config.initial_states, 0, config.step);
        if (config.alpha == 1.0) {
            // At integer order the update only stays a convex combination when
            // step * gain * sum(m) <= 1; a step that already breaks that at the
            // initial configuration is rejected instead of integrated.
            for (std::size_t r = 0; r < F; ++r) {
                const std::size_t i = followers[r];
                eval.eval(config.initial_states, i, {});
                double weight_sum = 0.0;
                for (double mv : eval.m_coeffs(active.neighbors[i].size())) {
                    weight_sum += config.step * config.params.gains[r] * mv;
                }
                if (weight_sum > 1.0) {
                    std::ostringstream os;
                    os << "step " << config.step << " breaks the convex-combination bound for "
                       << "follower " << i << " at t = 0 (neighbor weight sum " << weight_sum
                       << "); reduce the sampling period";
                    throw StepSizeError(os.str(), 0, static_cast<int>(i));
                }
            }
        }
        CaputoAbmStepper stepper(field, std::move(x0), FracOrder(config.alpha), config.step,
                                 total, config.memory_window);
        for (std::size_t n = 1; n <= total; ++n) {
            stepper.advance();
            const auto x = stepper.state();
            for (std::size_t r = 0; r < F; ++r) {
                auto row = scratch.row(followers[r]);
                std::copy_n(x.begin() + r * d, d, row.begin());
            }
            rec.completed_steps = n;
            if (config.edge_addition) add_close_edges(active, scratch);
            if (n % config.record_every == 0 || n == total) {
                recorder.capture(scratch, n, config.step);
            }
        }
        rec.status = RunStatus::Completed;
    } catch (const BarrierBreachError& e) {
        rec.status = RunStatus::BarrierBreach;
        rec.breach = BreachInfo{rec.completed_steps + 1, static_cast<std::size_t>(e.edge_from()),
                                static_cast<std::size_t>(e.edge_to()), e.margin()};
        rec.abort_message = e.what();
    } catch (const DivergenceError& e) {
        rec.status = RunStatus::Divergence;
        rec.abort_message = e.what();
    } catch (const StepSizeError& e) {
        rec.status = RunStatus::StepSizeViolation;
        rec.abort_message = e.what();
    }
    return rec;
}

TrajectoryRecord run_integer_discrete(const ScenarioConfig& config) {
    validate_config(config);
    NetworkTopology active = config.topology;
    const auto& followers = config.topology.follower_ids;
    const std::size_t F = followers.size();
    const std::size_t d = config.initial_states.dim;
    const std::size_t total = config.steps();
    const double T = config.step;

    StateSet cur = config.initial_states;
    StateSet next = cur;
    LoopEval eval(active, config.params);
    TrajectoryRecord rec = init_record(config);
    Recorder recorder{rec, config.topology, active, config.params, eval};

    try {
        recorder.capture(cur, 0, T);
        for (std::size_t n = 1; n <= total; ++n) {
            for (std::size_t r = 0; r < F; ++r) {
                const std::size_t i = followers[r];
                eval.eval(cur, i, {});
                const auto& ns = active.neighbors[i];
                const auto m = eval.m_coeffs(ns.size());
                const double gain = config.params.gains[r];

                double weight_sum = 0.0;
                for (double mv : m) weight_sum += T * gain * mv;
                const double self = 1.0 - weight_sum;
                if (self < 0.0) {
                    std::ostringstream os;
                    os << "update for follower " << i << " at step " << n
                       << " is not a convex combination (self-coefficient " << self
                       << "); reduce the sampling period";
                    throw StepSizeError(os.str(), n, static_cast<int>(i));
                }
                double check = self;
                rec.coeff_min = std::min(rec.coeff_min, self);
                for (double mv : m) {
                    const double w = T * gain * mv;
                    rec.coeff_min = std::min(rec.coeff_min, w);
                    check += w;
                }
                rec.coeff_sum_err_max = std::max(rec.coeff_sum_err_max, std::abs(check - 1.0));

                auto out = next.row(i);
                const auto qi = cur.row(i);
                for (std::size_t c = 0; c < d; ++c) out[c] = self * qi[c];
                for (std::size_t t = 0; t < ns.size(); ++t) {
                    const double w = T * gain * m[t];
                    const auto qj = cur.row(ns[t]);
                    for (std::size_t c = 0; c < d; ++c) out[c] += w * qj[c];
                }
            }
            std::swap(cur.data, next.data);
            // leader rows were copied on construction and never written
            rec.completed_steps = n;
            if (config.edge_addition) add_close_edges(active, cur);
            if (n % config.record_every == 0 || n == total) {
                recorder.capture(cur, n, T);
            }
        }
        rec.status = RunStatus::Completed;
    } catch (const BarrierBreachError& e) {
        rec.status = RunStatus::BarrierBreach;
        rec.breach = BreachInfo{rec.completed_steps + 1, static_cast<std::size_t>(e.edge_from()),
                                static_cast<std::size_t>(e.edge_to()), e.margin()};
        rec.abort_message = e.what();
    } catch (const StepSizeError& e) {
        rec.status = RunStatus::StepSizeViolation;
        rec.abort_message = e.what();
    }
    return rec;
}

std::vector<double> equilibrium_residual(const StateSet& states, const NetworkTopology& topology,
                                         const ControllerParams& params) {
    std::vector<double> residuals;
    residuals.reserve(topology.follower_ids.size());
    for (std::size_t i : topology.follower_ids) {
        const auto bd = potential_breakdown(states, topology, params, i);
        double m_sum = 0.0;
        for (double m : bd.m_coeffs) m_sum += m;
        if (m_sum == 0.0) {
            std::ostringstream os;
            os << "interaction row for follower " << i << " is degenerate (no active neighbor)";
            throw UndefinedPointError(os.str());
        }
        const auto qi = states.row(i);
        double dist2 = 0.0;
        for (std::size_t c = 0; c < states.dim; ++c) {
            double target = 0.0;
            for (std::size_t t = 0; t < bd.neighbor_ids.size(); ++t) {
                target += bd.m_coeffs[t] * states.row(bd.neighbor_ids[t])[c];
            }
            const double diff = qi[c] - target / m_sum;
            dist2 += diff * diff;
        }
        residuals.push_back(std::sqrt(dist2));
    }
    return residuals;
}

}  // namespace focs
