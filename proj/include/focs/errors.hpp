#ifndef FOCS_ERRORS_HPP
#define FOCS_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace focs {

// Series or iteration failed to converge; carries what was accumulated so far.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& what, double partial_sum, int terms)
        : std::runtime_error(what), partial_sum_(partial_sum), terms_(terms) {}
    double partial_sum() const noexcept { return partial_sum_; }
    int terms() const noexcept { return terms_; }

private:
    double partial_sum_;
    int terms_;
};

// Non-finite state produced while integrating.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, std::size_t step)
        : std::runtime_error(what), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

// An edge margin b_ij = delta - S_ij reached zero (or the near-boundary guard).
class BarrierBreachError : public std::runtime_error {
public:
    BarrierBreachError(const std::string& what, int from, int to, double margin)
        : std::runtime_error(what), from_(from), to_(to), margin_(margin) {}
    int edge_from() const noexcept { return from_; }
    int edge_to() const noexcept { return to_; }
    double margin() const noexcept { return margin_; }

private:
    int from_;
    int to_;
    double margin_;
};

// Discrete-time update lost the convex-combination property; the sampling
// period is too large for the current interaction weights.
class StepSizeError : public std::runtime_error {
public:
    StepSizeError(const std::string& what, std::size_t step, int agent)
        : std::runtime_error(what), step_(step), agent_(agent) {}
    std::size_t step() const noexcept { return step_; }
    int agent() const noexcept { return agent_; }

private:
    std::size_t step_;
    int agent_;
};

// Evaluation requested at a point where the expression is undefined
// (e.g. goal and constraint both zero).
class UndefinedPointError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A follower-only operation was invoked on a leader (or vice versa).
class RoleError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Scenario/topology validation failure; carries one message per offending
// field or edge.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<std::string> issues)
        : std::runtime_error(join(issues)), issues_(std::move(issues)) {}
    const std::vector<std::string>& issues() const noexcept { return issues_; }

private:
    static std::string join(const std::vector<std::string>& issues) {
        std::string out = "scenario validation failed:";
        for (const auto& s : issues) {
            out += "\n  - ";
            out += s;
        }
        return out;
    }
    std::vector<std::string> issues_;
};

}  // namespace focs

#endif
