#pragma once

// Fractional-calculus primitives: Riemann-Liouville convolution weights,
// Mittag-Leffler evaluation and an explicit Volterra-Euler solver for scalar
// Caputo equations D^beta x = f(x).

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace fracspde {

/// Caputo order beta in (0, 1].
class FracOrder {
public:
    explicit FracOrder(double beta);

    double value() const { return beta_; }
    bool is_classical() const { return beta_ == 1.0; }

private:
    double beta_;
};

/// Gamma function used for every kernel normalization.
double gamma_fn(double x);

/// One row of the convolution quadrature: weights[k] multiplies F(t_k), k < n.
struct KernelWeights {
    double beta = 1.0;
    double dt = 0.0;
    std::vector<double> weights;
};

/// Weights ((n-k)^b - (n-k-1)^b) dt^b / Gamma(b+1) for k = 0..n-1.
KernelWeights rl_kernel_weights(FracOrder beta, double dt, std::size_t n);

/// Running sum H -> sum_{k<n} w[n][k] H_k over a history of fixed-width vectors.
///
/// The weights depend only on n-k, so the accumulator keeps the scaled
/// differences a_j = j^b - (j-1)^b once and replays the stored history at each
/// evaluation (O(n) per step, O(n^2) per trajectory). At beta == 1 every weight
/// is dt and only the plain sum of the history is kept.
class VolterraAccumulator {
public:
    VolterraAccumulator(FracOrder beta, double dt, std::size_t width);

    /// Append H_n; its length must equal width().
    void push(std::span<const double> h);

    /// Writes sum_{k<n} w[n][k] H_k into out, with n = size().
    void evaluate(std::span<double> out) const;

    std::size_t size() const { return count_; }
    std::size_t width() const { return width_; }
    double dt() const { return dt_; }
    double beta() const { return beta_; }

    void reserve(std::size_t steps);

private:
    double difference(std::size_t j) const;

    double beta_;
    double dt_;
    double scale_;
    std::size_t width_;
    std::size_t count_ = 0;
    bool classical_;
    std::vector<double> history_;
    mutable std::vector<double> diffs_;
};

struct MittagLefflerResult {
    double value = 0.0;
    std::size_t terms = 0;
    /// Magnitude of the first omitted series term.
    double tail_term = 0.0;
};

/// Largest |z| for which mittag_leffler() is validated.
inline constexpr double kMittagLefflerMaxArg = 20.0;
/// Absolute accuracy target of mittag_leffler().
inline constexpr double kMittagLefflerTolerance = 1e-12;

/// E_{alpha,gamma}(z) = sum_k z^k / Gamma(alpha k + gamma) by a multiprecision
/// Taylor series. Throws OutOfRange when |z| > 20 or the series would need an
/// impractical number of terms.
MittagLefflerResult mittag_leffler_series(double alpha, double gamma, double z);

inline double mittag_leffler(double alpha, double gamma, double z) {
    return mittag_leffler_series(alpha, gamma, z).value;
}

struct ScalarTrajectory {
    std::vector<double> times;
    std::vector<double> values;
    std::optional<double> blowup_time;
    bool blew_up = false;
    double dt = 0.0;
};

using ScalarRhs = std::function<double(double)>;

inline constexpr double kDefaultBlowupThreshold = 1e6;

/// Explicit Volterra-Euler iterate x_n = x_0 + sum_{k<n} w[n][k] f(x_k).
/// Stops at the first step where |x_n| exceeds the threshold or is non-finite.
ScalarTrajectory solve_caputo_scalar_ode(const ScalarRhs& rhs, FracOrder beta, double x0, double dt,
                                         double t_end,
                                         double blowup_threshold = kDefaultBlowupThreshold);

/// True when a(t) >= b(t) - 1e-9 on every common grid point.
bool comparison_oracle(const ScalarTrajectory& a, const ScalarTrajectory& b);

}  // namespace fracspde
