#pragma once

// Galerkin system on Fourier modes |k|_inf <= M:
//
//   D^beta u = [ -(-Lap)^s u + b Lap u + L_S(|u|_{H^-gamma}) P_M zeta(u) ] dt
//              + A sum_{m,j} theta_m (sigma_{m,j} . grad u) dW^{m,j}
//
// integrated in its Volterra form with piecewise-constant integrands.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fracspde/fractional.hpp"
#include "fracspde/noise.hpp"
#include "fracspde/spectral.hpp"

namespace fracspde {

enum class Nonlinearity { none, fisher, keller_segel };

std::string to_string(Nonlinearity z);
Nonlinearity nonlinearity_from_string(const std::string& name);

/// Explicit coefficients; each entry also sets its conjugate partner.
struct ModesInit {
    std::vector<std::pair<Wavevector, Complex>> modes;
};

/// random_field(decay, amplitude, mean) drawn from the config seed.
struct RandomInit {
    double decay = 2.0;
    double amplitude = 1.0;
    double mean = 0.0;
};

/// Mean value plus a random fluctuation with |u - mean|_{L2} = sqrt(delta0).
struct FisherInit {
    double mean = 0.0;
    double delta0 = 0.0;
};

using InitialCondition = std::variant<ModesInit, RandomInit, FisherInit>;

inline constexpr std::size_t kMaxSteps = 100000;

struct SimConfig {
    int d = 2;
    int M = 8;
    double s = 1.0;
    double beta = 1.0;
    double b = 0.0;
    double S = 10.0;
    double gamma = 0.1;
    double dt = 1e-3;
    double t_end = 1.0;
    Nonlinearity zeta = Nonlinearity::none;
    int noise_N = 0;
    std::uint64_t seed = 0;
    double blowup_threshold = kDefaultBlowupThreshold;
    std::size_t snapshot_stride = 0;
    InitialCondition init = FisherInit{};

    std::size_t steps() const;
    bool noise_on() const { return noise_N > 0; }
};

/// Throws InvalidParameter naming the first violated constraint.
void validate(const SimConfig& cfg);

SpectralField initial_field(const SimConfig& cfg);

/// Quintic smoothstep cut-off: 1 on [0,S], 0 on [S+1, inf).
double cutoff_value(double r, double S);

SpectralField zeta_fisher(const SpectralField& u);
SpectralField zeta_keller_segel(const SpectralField& rho);
SpectralField apply_zeta(Nonlinearity z, const SpectralField& u);

/// Deterministic right-hand side with precomputed Fourier multipliers.
class DriftOperator {
public:
    explicit DriftOperator(const SimConfig& cfg);

    /// Drift at u; the cut-off value used is written to *cutoff when given.
    SpectralField apply(const SpectralField& u, double* cutoff = nullptr) const;

    /// Cut-off forced to 1 (test hook for step-equivalence checks).
    void force_cutoff_on(bool on) { force_on_ = on; }

private:
    SimConfig cfg_;
    std::vector<double> linear_;  // -(4pi^2|k|^2)^s - b 4pi^2 |k|^2
    std::vector<double> hneg_weight_;
    bool force_on_ = false;
};

SpectralField drift(const SpectralField& u, const SimConfig& cfg);

struct Snapshot {
    std::size_t step;
    double time;
    SpectralField field;
};

struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<double> l2_norm;
    std::vector<double> hs_norm;
    std::vector<double> hneg_gamma_norm;
    std::vector<double> mean_mode;
    std::vector<double> cutoff_value;
    std::vector<Snapshot> snapshots;
    bool blew_up = false;
    std::optional<double> blowup_time;
    std::string config_hash;
    std::uint64_t seed = 0;
    double dt = 0.0;
    std::optional<SpectralField> final_field;

    std::size_t size() const { return times.size(); }
};

struct IntegrateOptions {
    bool force_cutoff_on = false;
    /// Overrides the config initial data when set.
    std::optional<SpectralField> initial;
};

/// Explicit Volterra-Euler recursion
///   u_n = u_0 + sum_{k<n} w[n][k] (drift(u_k) + transport(u_k, dW_k) / dt),
/// one Brownian increment per step drawn from `rng`.
TrajectoryRecord integrate(const SimConfig& cfg, std::mt19937_64& rng,
                           const IntegrateOptions& options = {});

}  // namespace fracspde
