#include "focs/fractional.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

#include "focs/errors.hpp"

namespace focs {

FracOrder::FracOrder(double a) : alpha(a) {
    if (!(a > 0.0) || !(a <= 1.0)) {
        std::ostringstream os;
        os << "fractional order alpha must lie in (0, 1], got " << a;
        throw std::invalid_argument(os.str());
    }
}

double mittag_leffler(double alpha, double beta, double z, const MlOptions& opts) {
    if (!(alpha > 0.0) || !(beta > 0.0)) {
        throw std::invalid_argument("mittag_leffler requires alpha > 0 and beta > 0");
    }
    if (!std::isfinite(z)) {
        throw std::invalid_argument("mittag_leffler requires finite z");
    }
    if (std::abs(z) > 30.0) {
        throw std::invalid_argument("mittag_leffler series evaluation is restricted to |z| <= 30");
    }

    long double sum = 0.0L;
    long double zk = 1.0L;  // z^k
    long double prev_mag = std::numeric_limits<long double>::infinity();
    for (int k = 0; k < opts.term_cap; ++k) {
        const long double g = std::tgammal(static_cast<long double>(k) * alpha + beta);
        const long double term = zk / g;
        sum += term;
        const long double mag = std::abs(term);
        if (mag < opts.tol && mag <= prev_mag) {
            return static_cast<double>(sum);
        }
        prev_mag = mag;
        zk *= z;
    }
    std::ostringstream os;
    os << "mittag_leffler series did not settle within " << opts.term_cap
       << " terms for alpha=" << alpha << " beta=" << beta << " z=" << z;
    throw NumericError(os.str(), static_cast<double>(sum), opts.term_cap);
}

MemoryKernel gl_weights(FracOrder order, std::size_t count, double step) {
    if (count < 1) {
        throw std::invalid_argument("gl_weights requires count >= 1");
    }
    std::vector<double> w(count);
    w[0] = 1.0;
    for (std::size_t k = 1; k < count; ++k) {
        w[k] = w[k - 1] * (1.0 - (order.alpha + 1.0) / static_cast<double>(k));
    }
    return MemoryKernel{std::move(w), order, step};
}

double fractional_integral(std::span<const double> samples, FracOrder order, double step) {
    if (samples.empty()) {
        throw std::invalid_argument("fractional_integral requires a nonempty sample list");
    }
    if (!(step > 0.0)) {
        throw std::invalid_argument("fractional_integral requires step > 0");
    }
    const std::size_t n = samples.size();
    if (n == 1) {
        return 0.0;  // zero-length interval
    }
    const long double a = order.alpha;
    const long double h = step;
    const long double t_end = static_cast<long double>(n - 1) * h;

    // On [jh, (j+1)h] with u = t_end - tau running over [lo, hi], hi = lo + h:
    //   A_j = integral of kernel, B_j = integral of kernel * (tau - jh)/h.
    long double acc = 0.0L;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const long double lo = t_end - static_cast<long double>(j + 1) * h;
        const long double hi = t_end - static_cast<long double>(j) * h;
        const long double pa_lo = std::pow(lo, a);
        const long double pa_hi = std::pow(hi, a);
        const long double A = (pa_hi - pa_lo) / a;
        const long double B =
            (hi * (pa_hi - pa_lo) / a - (hi * pa_hi - lo * pa_lo) / (a + 1.0L)) / h;
        acc += samples[j] * A + (samples[j + 1] - samples[j]) * B;
    }
    return static_cast<double>(acc / std::tgammal(a));
}

namespace {

bool all_finite(std::span<const double> v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

}  // namespace

CaputoAbmStepper::CaputoAbmStepper(Field field, std::vector<double> x0, FracOrder order,
                                   double step, std::size_t max_steps,
                                   std::optional<std::size_t> memory_window)
    : field_(std::move(field)),
      dim_(x0.size()),
      max_steps_(max_steps),
      cap_(max_steps + 1),
      alpha_(order.alpha),
      h_(step),
      window_(memory_window),
      x0_(std::move(x0)) {
    if (!(step > 0.0)) {
        throw std::invalid_argument("CaputoAbmStepper requires step > 0");
    }
    if (dim_ == 0) {
        throw std::invalid_argument("CaputoAbmStepper requires a nonempty state");
    }
    if (window_ && *window_ == 0) {
        throw std::invalid_argument("memory window must be positive");
    }
    c_pred_ = std::pow(h_, alpha_) / std::tgamma(alpha_ + 1.0);
    c_corr_ = std::pow(h_, alpha_) / std::tgamma(alpha_ + 2.0);

    x_ = x0_;
    xp_.resize(dim_);
    fcur_.resize(dim_);
    acc_a_.resize(dim_);
    acc_b_.resize(dim_);

    // alpha = 1 makes every lag weight constant (predictor 1, corrector 2),
    // so the history convolutions collapse to running sums.
    fast_integer_path_ = (alpha_ == 1.0) && !window_;
    if (fast_integer_path_) {
        f0_.resize(dim_);
        run_sum_.assign(dim_, 0.0);
        field_(x_, f0_);
    } else {
        wa_.resize(max_steps_ + 1);
        wb_.resize(max_steps_ + 1);
        const long double ap1 = alpha_ + 1.0L;
        long double p_a_prev = 0.0L;                // s^alpha at s=0
        long double p1_prev = 0.0L;                 // s^(alpha+1) at s=0
        long double p1_cur = 1.0L;                  // (s+1)^(alpha+1) at s=0
        for (std::size_t s = 0; s <= max_steps_; ++s) {
            const long double p_a_next = std::pow(static_cast<long double>(s + 1), (long double)alpha_);
            const long double p1_next = std::pow(static_cast<long double>(s + 2), ap1);
            wb_[s] = static_cast<double>(p_a_next - p_a_prev);
            wa_[s] = static_cast<double>(p1_next + p1_prev - 2.0L * p1_cur);
            p_a_prev = p_a_next;
            p1_prev = p1_cur;
            p1_cur = p1_next;
        }
        rev_.assign(cap_ * dim_, 0.0);
        field_(x_, fcur_);
        std::copy(fcur_.begin(), fcur_.end(), rev_.begin() + (cap_ - 1) * dim_);
    }
}

void CaputoAbmStepper::history_sums(std::size_t n, std::size_t corr_lags, bool j0_in_window) {
    std::fill(acc_a_.begin(), acc_a_.end(), 0.0);
    std::fill(acc_b_.begin(), acc_b_.end(), 0.0);
    const double* base = rev_.data() + (cap_ - 1 - n) * dim_;
    double* __restrict aa = acc_a_.data();
    double* __restrict ab = acc_b_.data();
    const std::size_t d = dim_;
    for (std::size_t s = 0; s < corr_lags; ++s) {
        const double was = wa_[s];
        const double wbs = wb_[s];
        const double* __restrict row = base + s * d;
        for (std::size_t i = 0; i < d; ++i) {
            aa[i] += was * row[i];
            ab[i] += wbs * row[i];
        }
    }
    if (j0_in_window) {
        // j = 0 sits at lag n: regular weight for the predictor, the
        // closed-form first coefficient for the corrector.
        const double* row0 = base + n * d;
        const long double nl = static_cast<long double>(n);
        const double a0 = static_cast<double>(
            std::pow(nl, alpha_ + 1.0L) - (nl - alpha_) * std::pow(nl + 1.0L, (long double)alpha_));
        const double wbn = wb_[n];
        for (std::size_t i = 0; i < d; ++i) {
            aa[i] += a0 * row0[i];
            ab[i] += wbn * row0[i];
        }
    }
}

void CaputoAbmStepper::advance() {
    if (n_ >= max_steps_) {
        throw std::logic_error("CaputoAbmStepper: advance() past max_steps");
    }
    const std::size_t n = n_;

    if (fast_integer_path_) {
        const double h = h_;
        for (std::size_t i = 0; i < dim_; ++i) {
            xp_[i] = x0_[i] + h * (f0_[i] + run_sum_[i]);
        }
        field_(xp_, fcur_);
        for (std::size_t i = 0; i < dim_; ++i) {
            x_[i] = x0_[i] + 0.5 * h * (fcur_[i] + f0_[i] + 2.0 * run_sum_[i]);
        }
        if (!all_finite(x_)) {
            throw DivergenceError("non-finite state in ABM step", n + 1);
        }
        field_(x_, fcur_);
        for (std::size_t i = 0; i < dim_; ++i) {
            run_sum_[i] += fcur_[i];
        }
        n_ = n + 1;
        return;
    }

    const std::size_t w = window_ ? *window_ : std::numeric_limits<std::size_t>::max();
    const bool j0_in_window = n < w;
    const std::size_t corr_lags = std::min(n, w);
    history_sums(n, corr_lags, j0_in_window);

    for (std::size_t i = 0; i < dim_; ++i) {
        xp_[i] = x0_[i] + c_pred_ * acc_b_[i];
    }
    field_(xp_, fcur_);
    for (std::size_t i = 0; i < dim_; ++i) {
        x_[i] = x0_[i] + c_corr_ * (fcur_[i] + acc_a_[i]);
    }
    if (!all_finite(x_)) {
        throw DivergenceError("non-finite state in ABM step", n + 1);
    }
    field_(x_, fcur_);
    std::copy(fcur_.begin(), fcur_.end(), rev_.begin() + (cap_ - 2 - n) * dim_);
    n_ = n + 1;
}

FdeSolution solve_caputo_fde(CaputoAbmStepper::Field field, std::vector<double> x0,
                             FracOrder order, double step, std::size_t steps,
                             std::optional<std::size_t> memory_window) {
    if (steps == 0) {
        throw std::invalid_argument("solve_caputo_fde requires steps >= 1");
    }
    CaputoAbmStepper stepper(std::move(field), std::move(x0), order, step, steps, memory_window);
    FdeSolution sol{{}, {}, order};
    sol.times.reserve(steps + 1);
    sol.values.reserve(steps + 1);
    sol.times.push_back(0.0);
    sol.values.emplace_back(stepper.state().begin(), stepper.state().end());
    for (std::size_t k = 0; k < steps; ++k) {
        stepper.advance();
        sol.times.push_back(static_cast<double>(k + 1) * step);
        sol.values.emplace_back(stepper.state().begin(), stepper.state().end());
    }
    return sol;
}

FdeSolution solve_caputo_fde(const std::function<double(double)>& field, double x0,
                             FracOrder order, double step, std::size_t steps,
                             std::optional<std::size_t> memory_window) {
    auto wrapped = [&field](std::span<const double> x, std::span<double> dx) {
        dx[0] = field(x[0]);
    };
    return solve_caputo_fde(wrapped, std::vector<double>{x0}, order, step, steps, memory_window);
}

}  // namespace focs
