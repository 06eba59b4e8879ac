#ifndef FOCS_FRACTIONAL_HPP
#define FOCS_FRACTIONAL_HPP

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace focs {

// Differentiation order alpha in (0, 1]; alpha = 1 is the integer-order
// reduction.
struct FracOrder {
    double alpha;

    explicit FracOrder(double a);
    bool is_integer_order() const noexcept { return alpha == 1.0; }
};

struct MlOptions {
    double tol = 1e-12;  // absolute series tolerance
    int term_cap = 500;
};

// E_{alpha,beta}(z) = sum_k z^k / Gamma(k*alpha + beta), evaluated by plain
// series with extended-precision accumulation. Arguments restricted to
// |z| <= 30; throws NumericError (carrying the partial sum and term count)
// if the series does not settle within the term cap.
double mittag_leffler(double alpha, double beta, double z, const MlOptions& opts = {});

// Grunwald-Letnikov convolution weights w_k = (-1)^k C(alpha, k), generated
// by the recurrence w_k = w_{k-1} * (1 - (alpha + 1)/k).
struct MemoryKernel {
    std::vector<double> weights;
    FracOrder order;
    double step;
};

MemoryKernel gl_weights(FracOrder order, std::size_t count, double step = 1.0);

// Riemann-Liouville fractional integral of order alpha over [0, t_end],
// t_end = (samples.size()-1)*step, with the integrand given by uniform
// samples. Product-trapezoidal rule: the kernel (t-tau)^(alpha-1) is
// integrated exactly against the piecewise-linear interpolant.
double fractional_integral(std::span<const double> samples, FracOrder order, double step);

struct FdeSolution {
    std::vector<double> times;
    std::vector<std::vector<double>> values;
    FracOrder order;
};

// Adams-Bashforth-Moulton predictor-corrector stepper for the Caputo
// initial value problem  D^alpha x = f(x), x(0) = x0,  with zero
// pre-history. Full memory by default: every step convolves the entire
// f-history (cost O(steps^2) per run). An optional fixed memory window
// truncates the convolution to the most recent `window` steps; that is an
// approximation of a different operator and is opt-in only.
//
// The field is autonomous: field(x, dxdt) writes f(x) into dxdt.
class CaputoAbmStepper {
public:
    using Field = std::function<void(std::span<const double>, std::span<double>)>;

    CaputoAbmStepper(Field field, std::vector<double> x0, FracOrder order, double step,
                     std::size_t max_steps, std::optional<std::size_t> memory_window = {});

    // Completes one PECE step. Throws DivergenceError when the corrected
    // state is non-finite; exceptions from the field propagate.
    void advance();

    std::span<const double> state() const noexcept { return x_; }
    std::size_t step_index() const noexcept { return n_; }
    double time() const noexcept { return static_cast<double>(n_) * h_; }
    std::size_t dim() const noexcept { return dim_; }
    double step_size() const noexcept { return h_; }

private:
    void history_sums(std::size_t n, std::size_t corr_lags, bool j0_in_window);

    Field field_;
    std::size_t dim_;
    std::size_t max_steps_;
    std::size_t cap_;  // history slots = max_steps + 1
    double alpha_;
    double h_;
    double c_pred_;  // h^alpha / Gamma(alpha+1)
    double c_corr_;  // h^alpha / Gamma(alpha+2)
    std::optional<std::size_t> window_;
    bool fast_integer_path_;

    std::size_t n_ = 0;  // completed steps
    std::vector<double> x0_, x_, xp_, fcur_;
    std::vector<double> acc_a_, acc_b_;
    std::vector<double> wa_, wb_;  // corrector/predictor lag weights
    std::vector<double> rev_;     // f history, step j stored at row cap_-1-j
    std::vector<double> f0_, run_sum_;  // alpha = 1 running sums
};

FdeSolution solve_caputo_fde(CaputoAbmStepper::Field field, std::vector<double> x0,
                             FracOrder order, double step, std::size_t steps,
                             std::optional<std::size_t> memory_window = {});

// Scalar convenience overload.
FdeSolution solve_caputo_fde(const std::function<double(double)>& field, double x0,
                             FracOrder order, double step, std::size_t steps,
                             std::optional<std::size_t> memory_window = {});

}  // namespace focs

#endif
