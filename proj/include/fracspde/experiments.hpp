#pragma once

// Blow-up statistics and hypothesis probes built on top of integrate().

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fracspde/dynamics.hpp"
#include "fracspde/fractional.hpp"

namespace fracspde {

/// Earliest recorded time with l2_norm > threshold or non-finite; nullopt if
/// the run completed below the threshold.
std::optional<double> detect_blowup(const TrajectoryRecord& traj, double threshold);

struct EnsembleOptions {
    /// Worker threads; 0 means hardware concurrency.
    unsigned threads = 0;
    /// Number of points of the survival time grid (including t = 0 and t_end).
    std::size_t grid_points = 501;
};

struct SurvivalCurve {
    int noise_N = 0;
    double b = 0.0;
    double A = 0.0;
    std::vector<double> times;
    std::vector<double> fraction;
    std::size_t n_runs = 0;
    /// Blow-up time per run index; nullopt for runs that reached t_end.
    std::vector<std::optional<double>> blowup_times;

    /// Share of runs still alive at time t.
    double survival_at(double t) const;
    /// Median blow-up time, counting surviving runs as +infinity.
    double median_blowup_time() const;
};

/// Runs n_runs trajectories; run k draws its noise from derive_seed(base_seed, k).
/// The initial field comes from cfg.seed, so it is shared by all runs.
SurvivalCurve ensemble_survival(const SimConfig& cfg, std::size_t n_runs, std::uint64_t base_seed,
                                const EnsembleOptions& options = {});

struct DecayFit {
    double K = 0.0;
    double lambda = 0.0;
    /// RMS residual of the log-linear fit.
    double residual = 0.0;
};

/// Least-squares fit of log |u(t)|_{L2} = log(K |u_0|) - lambda t.
DecayFit decay_rate_fit(const TrajectoryRecord& traj);

struct DelayRow {
    int noise_N = 0;
    double b = 0.0;
    double A = 0.0;
    /// |theta|_inf / |theta|_2; nullopt when the noise is off.
    std::optional<double> ratio;
    double median_blowup = 0.0;
    double survival_at_deterministic = 0.0;
    SurvivalCurve curve;
};

struct DelayStudy {
    double deterministic_blowup = 0.0;
    std::vector<DelayRow> rows;
    bool median_strictly_increasing = false;
    bool survival_non_decreasing = false;
    bool survival_strict_increase = false;
    /// Exponential-decay premise fit for the deterministic b-augmented run,
    /// nullopt when that run blows up.
    std::optional<DecayFit> premise_fit;
};

/// Ensembles over theta = make_theta_cutoff(N) for each N with A matched to b.
/// Level N = 0 is the noise-free equation (no Ito corrector). Runs with equal
/// index share their seed across levels.
DelayStudy delay_study(const SimConfig& base_cfg, const std::vector<int>& noise_levels,
                       std::size_t n_runs, std::uint64_t base_seed,
                       const EnsembleOptions& options = {});

struct HypothesisExponents {
    double a1 = 1.0, g1 = 0.5;
    double a2 = 1.5, g2 = 1.5;
    double a3 = 1.0, g3 = 1.0, eta = 1.0;
};

/// Exponents established for the Keller-Segel and Fisher-KPP nonlinearities.
HypothesisExponents keller_segel_exponents();
HypothesisExponents fisher_exponents();

struct ProbeStats {
    std::vector<double> amplitudes;
    std::vector<double> ratios;
    double max_ratio = 0.0;
    double median_ratio = 0.0;
    std::size_t violations = 0;
    /// Median ratio of the top amplitude decile over the bottom decile.
    double growth = 0.0;
};

struct HypothesisReport {
    Nonlinearity nonlinearity = Nonlinearity::fisher;
    HypothesisExponents exponents;
    std::size_t n_samples = 0;
    std::array<ProbeStats, 3> probes;
    std::size_t degenerate_pairs = 0;
    std::size_t violations = 0;
};

struct ProbeFieldSpec {
    int d = 3;
    int M = 4;
    double s = 1.0;
    double decay = 2.0;
    double amp_min = 0.1;
    double amp_max = 10.0;
    /// Reuse u as v in probe (iii); exercises the degenerate-pair guard.
    bool identical_pairs = false;
};

/// Samples log-spaced amplitudes in [amp_min, amp_max]; a ratio is a violation
/// when it is non-finite or exceeds ten times the probe median.
HypothesisReport probe_hypothesis(Nonlinearity zeta, const HypothesisExponents& exponents,
                                  std::size_t n_samples, std::mt19937_64& rng,
                                  const ProbeFieldSpec& spec = {});

struct DichotomyRow {
    double x0 = 0.0;
    bool blew_up = false;
    std::optional<double> blowup_time;
    double final_value = 0.0;
    double min_value = 0.0;
    double max_value = 0.0;
    bool monotone_decreasing = false;
};

/// Solves D^beta x = x^2 - x for each x0.
std::vector<DichotomyRow> fisher_mean_dichotomy(double beta, const std::vector<double>& x0_list,
                                                double dt, double t_end,
                                                double threshold = kDefaultBlowupThreshold);

}  // namespace fracspde
