#include "fracspde/fractional.hpp"

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fracspde/error.hpp"

namespace fracspde {

FracOrder::FracOrder(double beta) : beta_(beta) {
    if (!(beta > 0.0 && beta <= 1.0)) {
        std::ostringstream msg;
        msg << "fractional order beta must lie in (0, 1], got " << beta;
        throw InvalidParameter(msg.str());
    }
}

double gamma_fn(double x) { return std::tgamma(x); }

namespace {

// j^b - (j-1)^b without the cancellation of the direct difference for large j.
double power_difference(double beta, std::size_t j) {
    if (j == 1) return 1.0;
    const double jd = static_cast<double>(j);
    return -std::pow(jd, beta) * std::expm1(beta * std::log1p(-1.0 / jd));
}

double kernel_scale(double beta, double dt) {
    if (beta == 1.0) return dt;
    return std::pow(dt, beta) / gamma_fn(beta + 1.0);
}

void check_step(double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        std::ostringstream msg;
        msg << "time step must be positive and finite, got " << dt;
        throw InvalidParameter(msg.str());
    }
}

}  // namespace

KernelWeights rl_kernel_weights(FracOrder beta, double dt, std::size_t n) {
    check_step(dt);
    if (n == 0) throw InvalidParameter("kernel weights need a step index n >= 1");
    KernelWeights row;
    row.beta = beta.value();
    row.dt = dt;
    row.weights.resize(n);
    const double scale = kernel_scale(beta.value(), dt);
    for (std::size_t k = 0; k < n; ++k) {
        row.weights[k] = beta.is_classical() ? dt : scale * power_difference(beta.value(), n - k);
    }
    return row;
}

VolterraAccumulator::VolterraAccumulator(FracOrder beta, double dt, std::size_t width)
    : beta_(beta.value()),
      dt_(dt),
      scale_(0.0),
      width_(width),
      classical_(beta.is_classical()) {
    check_step(dt);
    if (width == 0) throw InvalidParameter("Volterra accumulator width must be positive");
    scale_ = kernel_scale(beta_, dt_);
    if (classical_) history_.assign(width_, 0.0);
}

void VolterraAccumulator::reserve(std::size_t steps) {
    if (!classical_) {
        history_.reserve(steps * width_);
        diffs_.reserve(steps + 1);
    }
}

double VolterraAccumulator::difference(std::size_t j) const { return diffs_[j - 1]; }

void VolterraAccumulator::push(std::span<const double> h) {
    if (h.size() != width_) throw ShapeError("Volterra history entry has the wrong width");
    ++count_;
    if (classical_) {
        for (std::size_t i = 0; i < width_; ++i) history_[i] += h[i];
        return;
    }
    history_.insert(history_.end(), h.begin(), h.end());
    diffs_.push_back(power_difference(beta_, count_));
}

void VolterraAccumulator::evaluate(std::span<double> out) const {
    if (out.size() != width_) throw ShapeError("Volterra output has the wrong width");
    if (classical_) {
        for (std::size_t i = 0; i < width_; ++i) out[i] = dt_ * history_[i];
        return;
    }
    std::fill(out.begin(), out.end(), 0.0);
    const std::size_t n = count_;
    for (std::size_t k = 0; k < n; ++k) {
        const double w = difference(n - k);
        const double* row = history_.data() + k * width_;
        for (std::size_t i = 0; i < width_; ++i) out[i] += w * row[i];
    }
    for (auto& v : out) v *= scale_;
}

namespace {

// Owning MPFR scalar.
class Mpfr {
public:
    explicit Mpfr(mpfr_prec_t prec) { mpfr_init2(v_, prec); }
    ~Mpfr() { mpfr_clear(v_); }
    Mpfr(const Mpfr&) = delete;
    Mpfr& operator=(const Mpfr&) = delete;

    mpfr_ptr get() { return v_; }
    mpfr_srcptr get() const { return v_; }

private:
    mpfr_t v_;
};

constexpr std::size_t kMaxSeriesTerms = 60000;

double log_term(double alpha, double gamma, double log_abs_z, std::size_t k) {
    const double kd = static_cast<double>(k);
    return kd * log_abs_z - std::lgamma(alpha * kd + gamma);
}

}  // namespace

MittagLefflerResult mittag_leffler_series(double alpha, double gamma, double z) {
    if (!(alpha > 0.0) || !(gamma > 0.0) || !std::isfinite(alpha) || !std::isfinite(gamma)) {
        std::ostringstream msg;
        msg << "Mittag-Leffler parameters must be positive, got alpha=" << alpha
            << " gamma=" << gamma;
        throw InvalidParameter(msg.str());
    }
    if (!std::isfinite(z) || std::abs(z) > kMittagLefflerMaxArg) {
        std::ostringstream msg;
        msg << "Mittag-Leffler argument " << z << " outside validated range |z| <= "
            << kMittagLefflerMaxArg;
        throw OutOfRange(msg.str());
    }

    MittagLefflerResult result;
    if (z == 0.0) {
        result.value = 1.0 / gamma_fn(gamma);
        result.terms = 1;
        result.tail_term = 0.0;
        return result;
    }

    // Plan the truncation in double precision: the log-magnitude of the terms is
    // concave in k, so once it decreases below the target it stays there.
    const double log_abs_z = std::log(std::abs(z));
    const double log_tol = std::log(kMittagLefflerTolerance) - 4.0;
    double log_peak = log_term(alpha, gamma, log_abs_z, 0);
    std::size_t terms = 1;
    double prev = log_peak;
    for (;; ++terms) {
        if (terms > kMaxSeriesTerms) {
            std::ostringstream msg;
            msg << "Mittag-Leffler series for alpha=" << alpha << " z=" << z
                << " needs more than " << kMaxSeriesTerms << " terms";
            throw OutOfRange(msg.str());
        }
        const double cur = log_term(alpha, gamma, log_abs_z, terms);
        log_peak = std::max(log_peak, cur);
        if (cur < log_tol && cur < prev) break;
        prev = cur;
    }
    result.terms = terms;
    result.tail_term = std::exp(log_term(alpha, gamma, log_abs_z, terms));

    // Cancellation in the alternating case costs log2(peak) bits.
    const double peak_bits = std::max(0.0, log_peak / std::log(2.0));
    const auto prec = static_cast<mpfr_prec_t>(96 + std::ceil(peak_bits));

    Mpfr sum(prec), power(prec), arg(prec), g(prec), term(prec), zz(prec);
    mpfr_set_d(zz.get(), z, MPFR_RNDN);
    mpfr_set_ui(power.get(), 1, MPFR_RNDN);
    mpfr_set_ui(sum.get(), 0, MPFR_RNDN);
    for (std::size_t k = 0; k < terms; ++k) {
        // alpha * k + gamma, exact at this precision
        mpfr_set_d(arg.get(), alpha, MPFR_RNDN);
        mpfr_mul_ui(arg.get(), arg.get(), static_cast<unsigned long>(k), MPFR_RNDN);
        mpfr_add_d(arg.get(), arg.get(), gamma, MPFR_RNDN);
        mpfr_gamma(g.get(), arg.get(), MPFR_RNDN);
        mpfr_div(term.get(), power.get(), g.get(), MPFR_RNDN);
        mpfr_add(sum.get(), sum.get(), term.get(), MPFR_RNDN);
        mpfr_mul(power.get(), power.get(), zz.get(), MPFR_RNDN);
    }
    result.value = mpfr_get_d(sum.get(), MPFR_RNDN);
    return result;
}

ScalarTrajectory solve_caputo_scalar_ode(const ScalarRhs& rhs, FracOrder beta, double x0, double dt,
                                         double t_end, double blowup_threshold) {
    check_step(dt);
    if (!(t_end > 0.0)) throw InvalidParameter("t_end must be positive");
    if (!(blowup_threshold > std::abs(x0))) {
        throw InvalidParameter("blow-up threshold must exceed |x0|");
    }
    const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));

    ScalarTrajectory traj;
    traj.dt = dt;
    traj.times.reserve(steps + 1);
    traj.values.reserve(steps + 1);
    traj.times.push_back(0.0);
    traj.values.push_back(x0);

    VolterraAccumulator history(beta, dt, 1);
    history.reserve(steps);
    double x = x0;
    double acc = 0.0;
    for (std::size_t n = 1; n <= steps; ++n) {
        const double f = rhs(x);
        history.push(std::span<const double>(&f, 1));
        history.evaluate(std::span<double>(&acc, 1));
        x = x0 + acc;
        const double t = static_cast<double>(n) * dt;
        if (!std::isfinite(x)) {
            traj.blew_up = true;
            traj.blowup_time = t;
            break;
        }
        traj.times.push_back(t);
        traj.values.push_back(x);
        if (std::abs(x) > blowup_threshold) {
            traj.blew_up = true;
            traj.blowup_time = t;
            break;
        }
    }
    return traj;
}

bool comparison_oracle(const ScalarTrajectory& a, const ScalarTrajectory& b) {
    if (a.times.size() != b.times.size()) {
        throw ShapeError("comparison_oracle: trajectories have different lengths");
    }
    for (std::size_t i = 0; i < a.times.size(); ++i) {
        if (a.times[i] != b.times[i]) {
            throw ShapeError("comparison_oracle: trajectories live on different grids");
        }
    }
    constexpr double kTol = 1e-9;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        if (a.values[i] < b.values[i] - kTol) return false;
    }
    return true;
}

}  // namespace fracspde
