#include "fracspde/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "fracspde/error.hpp"
#include "fracspde/seed.hpp"

namespace fracspde {

std::optional<double> detect_blowup(const TrajectoryRecord& traj, double threshold) {
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double v = traj.l2_norm[i];
        if (!std::isfinite(v) || v > threshold) return traj.times[i];
    }
    // Non-finite states are not recorded; the flag carries their time.
    if (traj.blew_up && traj.blowup_time) {
        if (traj.times.empty() || *traj.blowup_time > traj.times.back()) return traj.blowup_time;
    }
    return std::nullopt;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// Calls job(i) for i in [0, n) on a fixed pool; results must be written by index.
template <typename Job>
void parallel_for(std::size_t n, unsigned threads, Job&& job) {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                job(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(n);
                return;
            }
        }
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);
}

double median_of(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    const double lo = v[n / 2 - 1];
    const double hi = v[n / 2];
    if (std::isinf(lo) || std::isinf(hi)) return hi;
    return 0.5 * (lo + hi);
}

}  // namespace

double SurvivalCurve::survival_at(double t) const {
    if (n_runs == 0) return 1.0;
    std::size_t alive = 0;
    for (const auto& bt : blowup_times) {
        if (!bt || *bt > t) ++alive;
    }
    return static_cast<double>(alive) / static_cast<double>(n_runs);
}

double SurvivalCurve::median_blowup_time() const {
    std::vector<double> v;
    v.reserve(blowup_times.size());
    for (const auto& bt : blowup_times) v.push_back(bt ? *bt : kInf);
    return median_of(std::move(v));
}

SurvivalCurve ensemble_survival(const SimConfig& cfg, std::size_t n_runs, std::uint64_t base_seed,
                                const EnsembleOptions& options) {
    if (n_runs == 0) throw InvalidParameter("ensemble needs at least one run");
    if (options.grid_points < 2) throw InvalidParameter("survival grid needs at least two points");
    validate(cfg);

    SurvivalCurve curve;
    curve.noise_N = cfg.noise_N;
    curve.b = cfg.b;
    if (cfg.noise_on()) curve.A = amplitude_A(cfg.b, make_theta_cutoff(cfg.noise_N, cfg.d), cfg.d);
    curve.n_runs = n_runs;
    curve.blowup_times.assign(n_runs, std::nullopt);

    const SpectralField initial = initial_field(cfg);
    parallel_for(n_runs, resolve_threads(options.threads), [&](std::size_t k) {
        std::mt19937_64 rng(derive_seed(base_seed, k));
        IntegrateOptions opts;
        opts.initial = initial;
        const TrajectoryRecord rec = integrate(cfg, rng, opts);
        curve.blowup_times[k] = detect_blowup(rec, cfg.blowup_threshold);
    });

    curve.times.resize(options.grid_points);
    curve.fraction.resize(options.grid_points);
    const double horizon = static_cast<double>(cfg.steps()) * cfg.dt;
    for (std::size_t i = 0; i < options.grid_points; ++i) {
        const double t = horizon * static_cast<double>(i) / static_cast<double>(options.grid_points - 1);
        curve.times[i] = t;
        curve.fraction[i] = curve.survival_at(t);
    }
    return curve;
}

DecayFit decay_rate_fit(const TrajectoryRecord& traj) {
    if (traj.blew_up) throw InvalidParameter("decay_rate_fit: trajectory blew up");
    if (traj.size() < 2) throw InvalidParameter("decay_rate_fit: need at least two samples");
    const std::size_t n = traj.size();
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = traj.l2_norm[i];
        if (!(v > 0.0)) throw InvalidParameter("decay_rate_fit: norms must be positive");
        const double t = traj.times[i];
        const double y = std::log(v);
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    const double nd = static_cast<double>(n);
    const double denom = nd * stt - st * st;
    const double slope = (nd * sty - st * sy) / denom;
    const double intercept = (sy - slope * st) / nd;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = std::log(traj.l2_norm[i]) - (intercept + slope * traj.times[i]);
        ss += r * r;
    }
    DecayFit fit;
    fit.lambda = -slope;
    fit.K = std::exp(intercept) / traj.l2_norm.front();
    fit.residual = std::sqrt(ss / nd);
    return fit;
}

DelayStudy delay_study(const SimConfig& base_cfg, const std::vector<int>& noise_levels,
                       std::size_t n_runs, std::uint64_t base_seed,
                       const EnsembleOptions& options) {
    if (noise_levels.empty()) throw InvalidParameter("delay_study needs at least one noise level");
    for (int N : noise_levels) {
        if (N < 0) throw InvalidParameter("noise levels must be non-negative");
    }

    auto level_config = [&](int N) {
        SimConfig cfg = base_cfg;
        cfg.noise_N = N;
        if (N == 0) cfg.b = 0.0;
        return cfg;
    };

    DelayStudy study;
    {
        SimConfig det = level_config(0);
        std::mt19937_64 rng(derive_seed(base_seed, 0));
        const auto bt = detect_blowup(integrate(det, rng), det.blowup_threshold);
        if (!bt) throw InvalidParameter("delay_study: base configuration does not blow up without noise");
        study.deterministic_blowup = *bt;
    }

    for (int N : noise_levels) {
        const SimConfig cfg = level_config(N);
        DelayRow row;
        row.noise_N = N;
        row.b = cfg.b;
        row.curve = ensemble_survival(cfg, n_runs, base_seed, options);
        row.A = row.curve.A;
        if (N > 0) {
            const ThetaSequence theta = make_theta_cutoff(N, cfg.d);
            row.ratio = theta.linf_norm() / theta.l2_norm();
        }
        row.median_blowup = row.curve.median_blowup_time();
        row.survival_at_deterministic = row.curve.survival_at(study.deterministic_blowup);
        study.rows.push_back(std::move(row));
    }

    study.median_strictly_increasing = true;
    study.survival_non_decreasing = true;
    study.survival_strict_increase = false;
    for (std::size_t i = 1; i < study.rows.size(); ++i) {
        const auto& prev = study.rows[i - 1];
        const auto& cur = study.rows[i];
        if (!(cur.median_blowup > prev.median_blowup)) study.median_strictly_increasing = false;
        if (cur.survival_at_deterministic < prev.survival_at_deterministic) {
            study.survival_non_decreasing = false;
        }
        if (cur.survival_at_deterministic > prev.survival_at_deterministic) {
            study.survival_strict_increase = true;
        }
    }

    {
        SimConfig premise = base_cfg;
        premise.noise_N = 0;
        std::mt19937_64 rng(derive_seed(base_seed, 0));
        const TrajectoryRecord rec = integrate(premise, rng);
        if (!rec.blew_up) study.premise_fit = decay_rate_fit(rec);
    }
    return study;
}

HypothesisExponents keller_segel_exponents() {
    HypothesisExponents e;
    e.a1 = 1.0;
    e.g1 = 0.25;
    e.a2 = 1.5;
    e.g2 = 1.5;
    e.a3 = 1.0;
    e.g3 = 1.0;
    e.eta = 1.0;
    return e;
}

HypothesisExponents fisher_exponents() {
    HypothesisExponents e;
    e.a1 = 1.0;
    e.g1 = 0.5;
    e.a2 = 1.5;
    e.g2 = 1.5;
    e.a3 = 1.0;
    e.g3 = 1.0;
    e.eta = 1.0;
    return e;
}

namespace {

void summarize(ProbeStats& p) {
    std::vector<double> finite;
    for (double r : p.ratios) {
        if (std::isfinite(r)) finite.push_back(r);
    }
    p.median_ratio = median_of(finite);
    p.max_ratio = finite.empty() ? 0.0 : *std::max_element(finite.begin(), finite.end());
    p.violations = 0;
    for (double r : p.ratios) {
        if (!std::isfinite(r) || r > 10.0 * p.median_ratio) ++p.violations;
    }
    const std::size_t n = p.ratios.size();
    if (n == 0) return;
    const std::size_t decile = std::max<std::size_t>(1, n / 10);
    // ratios are stored in increasing amplitude order
    std::vector<double> low(p.ratios.begin(), p.ratios.begin() + static_cast<std::ptrdiff_t>(decile));
    std::vector<double> high(p.ratios.end() - static_cast<std::ptrdiff_t>(decile), p.ratios.end());
    p.growth = median_of(high) / median_of(low);
}

}  // namespace

HypothesisReport probe_hypothesis(Nonlinearity zeta, const HypothesisExponents& ex,
                                  std::size_t n_samples, std::mt19937_64& rng,
                                  const ProbeFieldSpec& spec) {
    if (zeta == Nonlinearity::none) throw InvalidParameter("probe_hypothesis needs a nonlinearity");
    if (n_samples == 0) throw InvalidParameter("probe_hypothesis needs at least one sample");
    if (!(spec.amp_min > 0.0 && spec.amp_max >= spec.amp_min)) {
        throw InvalidParameter("probe amplitudes must satisfy 0 < amp_min <= amp_max");
    }

    HypothesisReport report;
    report.nonlinearity = zeta;
    report.exponents = ex;
    report.n_samples = n_samples;

    std::uniform_real_distribution<double> mean_dist(-1.0, 1.0);
    auto draw = [&](double amp) {
        const double mean = mean_dist(rng);
        SpectralField f = random_field(rng, spec.d, spec.M, spec.decay, 1.0, mean);
        f *= amp;
        return f;
    };

    for (std::size_t i = 0; i < n_samples; ++i) {
        const double frac = n_samples == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n_samples - 1);
        const double amp = spec.amp_min * std::pow(spec.amp_max / spec.amp_min, frac);
        const SpectralField u = draw(amp);
        const SpectralField v = spec.identical_pairs ? u : draw(amp);

        const SpectralField zu = apply_zeta(zeta, u);
        const double l2u = sobolev_norm(u, 0.0);
        const double hsu = sobolev_norm(u, spec.s);
        const double hsv = sobolev_norm(v, spec.s);

        const double r1 = sobolev_norm(zu, -spec.s) /
                          ((1.0 + std::pow(l2u, ex.a1)) * (1.0 + hsu));
        const double r2 = std::abs(inner_product(zu, u)) /
                          ((1.0 + std::pow(l2u, ex.a2)) * (1.0 + std::pow(hsu, ex.g2)));
        report.probes[0].amplitudes.push_back(amp);
        report.probes[0].ratios.push_back(r1);
        report.probes[1].amplitudes.push_back(amp);
        report.probes[1].ratios.push_back(r2);

        const SpectralField w = u - v;
        const double l2w = sobolev_norm(w, 0.0);
        if (l2w == 0.0) {
            ++report.degenerate_pairs;
            continue;
        }
        const SpectralField zdiff = zu - apply_zeta(zeta, v);
        const double r3 = std::abs(inner_product(w, zdiff)) /
                          (std::pow(l2w, ex.a3) * std::pow(sobolev_norm(w, spec.s), ex.g3) *
                           (1.0 + std::pow(hsu, ex.eta) + std::pow(hsv, ex.eta)));
        report.probes[2].amplitudes.push_back(amp);
        report.probes[2].ratios.push_back(r3);
    }

    report.violations = 0;
    for (auto& p : report.probes) {
        summarize(p);
        report.violations += p.violations;
    }
    return report;
}

std::vector<DichotomyRow> fisher_mean_dichotomy(double beta, const std::vector<double>& x0_list,
                                                double dt, double t_end, double threshold) {
    if (x0_list.empty()) throw InvalidParameter("fisher_mean_dichotomy needs at least one x0");
    const FracOrder order(beta);
    const ScalarRhs rhs = [](double x) { return x * x - x; };
    std::vector<DichotomyRow> rows;
    for (double x0 : x0_list) {
        const ScalarTrajectory traj = solve_caputo_scalar_ode(rhs, order, x0, dt, t_end, threshold);
        DichotomyRow row;
        row.x0 = x0;
        row.blew_up = traj.blew_up;
        row.blowup_time = traj.blowup_time;
        row.final_value = traj.values.back();
        row.min_value = *std::min_element(traj.values.begin(), traj.values.end());
        row.max_value = *std::max_element(traj.values.begin(), traj.values.end());
        row.monotone_decreasing = true;
        for (std::size_t i = 1; i < traj.values.size(); ++i) {
            if (traj.values[i] > traj.values[i - 1]) {
                row.monotone_decreasing = false;
                break;
            }
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace fracspde
