#include "fracspde/dynamics.hpp"

#include <cmath>
#include <sstream>

#include "fracspde/error.hpp"
#include "fracspde/seed.hpp"

namespace fracspde {

std::string to_string(Nonlinearity z) {
    switch (z) {
        case Nonlinearity::none: return "none";
        case Nonlinearity::fisher: return "fisher";
        case Nonlinearity::keller_segel: return "keller_segel";
    }
    return "none";
}

Nonlinearity nonlinearity_from_string(const std::string& name) {
    if (name == "none") return Nonlinearity::none;
    if (name == "fisher") return Nonlinearity::fisher;
    if (name == "keller_segel" || name == "ks") return Nonlinearity::keller_segel;
    throw InvalidParameter("unknown nonlinearity '" + name + "' (expected fisher|keller_segel|none)");
}

std::size_t SimConfig::steps() const {
    return static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
}

void validate(const SimConfig& cfg) {
    auto fail = [](const std::string& what) { throw InvalidParameter(what); };
    std::ostringstream msg;
    if (cfg.d < 2 || cfg.d > 3) {
        msg << "d must be 2 or 3, got " << cfg.d;
        fail(msg.str());
    }
    if (cfg.M < 1) {
        msg << "M must be at least 1, got " << cfg.M;
        fail(msg.str());
    }
    if (!(cfg.s >= 1.0)) {
        msg << "s must be at least 1, got " << cfg.s;
        fail(msg.str());
    }
    if (cfg.noise_N < 0) fail("noise_N must be non-negative");
    if (cfg.noise_N > 0) {
        if (!(cfg.beta > 0.5 && cfg.beta <= 1.0)) {
            msg << "beta must satisfy 1/2 < beta <= 1 when noise is on (noise_N > 0), got "
                << cfg.beta;
            fail(msg.str());
        }
    } else if (!(cfg.beta > 0.0 && cfg.beta <= 1.0)) {
        msg << "beta must satisfy 0 < beta <= 1, got " << cfg.beta;
        fail(msg.str());
    }
    if (!(cfg.b >= 0.0)) fail("b must be non-negative");
    if (!(cfg.S > 0.0)) fail("S must be positive");
    if (!(cfg.gamma > 0.0)) fail("gamma must be positive");
    if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) fail("dt must be positive");
    if (!(cfg.t_end >= cfg.dt)) fail("t_end must be at least dt");
    if (cfg.steps() > kMaxSteps) {
        msg << "t_end/dt = " << cfg.steps() << " exceeds the step cap " << kMaxSteps;
        fail(msg.str());
    }
    if (!(cfg.blowup_threshold > 0.0)) fail("blowup_threshold must be positive");
    if (const auto* f = std::get_if<FisherInit>(&cfg.init); f != nullptr && f->delta0 < 0.0) {
        fail("init.delta0 must be non-negative");
    }
    if (const auto* r = std::get_if<RandomInit>(&cfg.init); r != nullptr && r->decay < 0.0) {
        fail("init.decay must be non-negative");
    }
}

SpectralField initial_field(const SimConfig& cfg) {
    std::mt19937_64 rng(derive_seed(cfg.seed, kInitialDataStream));
    if (const auto* modes = std::get_if<ModesInit>(&cfg.init)) {
        SpectralField f(cfg.d, cfg.M);
        for (const auto& [k, c] : modes->modes) {
            if (!f.contains(k)) throw InvalidParameter("initial mode outside the cutoff M");
            if (squared_norm(k) == 0) {
                f[k] = c.real();
                continue;
            }
            f[k] = c;
            f[negate(k)] = std::conj(c);
        }
        return f;
    }
    if (const auto* r = std::get_if<RandomInit>(&cfg.init)) {
        return random_field(rng, cfg.d, cfg.M, r->decay, r->amplitude, r->mean);
    }
    const auto& fk = std::get<FisherInit>(cfg.init);
    SpectralField f = random_field(rng, cfg.d, cfg.M, 2.0, 1.0, 0.0);
    const double norm = sobolev_norm(f, 0.0);
    if (norm > 0.0) f *= std::sqrt(fk.delta0) / norm;
    f.coeffs()[f.zero_index()] = fk.mean;
    return f;
}

double cutoff_value(double r, double S) {
    if (r <= S) return 1.0;
    if (r >= S + 1.0) return 0.0;
    const double x = r - S;
    const double smooth = x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
    return 1.0 - smooth;
}

SpectralField zeta_fisher(const SpectralField& u) { return multiply(u, u) - u; }

SpectralField zeta_keller_segel(const SpectralField& rho) {
    const SpectralField c = laplacian_inverse(rho);
    const auto grad_c = gradient(c);
    std::vector<SpectralField> flux;
    flux.reserve(grad_c.size());
    for (const auto& g : grad_c) flux.push_back(multiply(rho, g));
    SpectralField out = divergence(flux);
    out *= -1.0;
    return out;
}

SpectralField apply_zeta(Nonlinearity z, const SpectralField& u) {
    switch (z) {
        case Nonlinearity::fisher: return zeta_fisher(u);
        case Nonlinearity::keller_segel: return zeta_keller_segel(u);
        case Nonlinearity::none: break;
    }
    return SpectralField(u.dim(), u.cutoff());
}

DriftOperator::DriftOperator(const SimConfig& cfg) : cfg_(cfg) {
    SpectralField probe(cfg.d, cfg.M);
    linear_.resize(probe.size());
    hneg_weight_.resize(probe.size());
    for (std::size_t i = 0; i < probe.size(); ++i) {
        const int k2 = squared_norm(probe.wavevector(i));
        const double lap = kFourPiSq * k2;
        const double frac = (k2 == 0) ? 0.0 : (cfg.s == 1.0 ? lap : std::pow(lap, cfg.s));
        linear_[i] = -frac - cfg.b * lap;
        hneg_weight_[i] = std::pow(1.0 + k2, -cfg.gamma);
    }
}

SpectralField DriftOperator::apply(const SpectralField& u, double* cutoff) const {
    if (u.dim() != cfg_.d || u.cutoff() != cfg_.M) throw ShapeError("drift: field shape differs from config");
    SpectralField out(u.dim(), u.cutoff());
    for (std::size_t i = 0; i < u.size(); ++i) out.coeffs()[i] = linear_[i] * u.coeffs()[i];

    double hneg2 = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) hneg2 += hneg_weight_[i] * std::norm(u.coeffs()[i]);
    const double level = force_on_ ? 1.0 : cutoff_value(std::sqrt(hneg2), cfg_.S);
    if (cutoff != nullptr) *cutoff = level;

    if (cfg_.zeta != Nonlinearity::none && level > 0.0) {
        const SpectralField z = apply_zeta(cfg_.zeta, u);
        for (std::size_t i = 0; i < u.size(); ++i) out.coeffs()[i] += level * z.coeffs()[i];
    }
    return out;
}

SpectralField drift(const SpectralField& u, const SimConfig& cfg) {
    return DriftOperator(cfg).apply(u);
}

namespace {

struct NormWeights {
    std::vector<double> hs;
    std::vector<double> hneg;

    NormWeights(const SimConfig& cfg) {
        SpectralField probe(cfg.d, cfg.M);
        hs.resize(probe.size());
        hneg.resize(probe.size());
        for (std::size_t i = 0; i < probe.size(); ++i) {
            const double w = 1.0 + squared_norm(probe.wavevector(i));
            hs[i] = std::pow(w, cfg.s);
            hneg[i] = std::pow(w, -cfg.gamma);
        }
    }
};

}  // namespace

TrajectoryRecord integrate(const SimConfig& cfg, std::mt19937_64& rng,
                           const IntegrateOptions& options) {
    validate(cfg);
    const FracOrder beta(cfg.beta);
    const std::size_t steps = cfg.steps();

    SpectralField u0 = options.initial ? resize_modes(*options.initial, cfg.M) : initial_field(cfg);
    if (u0.dim() != cfg.d) throw ShapeError("initial field dimension differs from config");

    DriftOperator drift_op(cfg);
    drift_op.force_cutoff_on(options.force_cutoff_on);

    std::optional<ThetaSequence> theta;
    std::optional<NoiseBasis> basis;
    double A = 0.0;
    if (cfg.noise_on()) {
        theta.emplace(make_theta_cutoff(cfg.noise_N, cfg.d));
        basis.emplace(*theta);
        A = amplitude_A(cfg.b, *theta, cfg.d);
    }

    const NormWeights weights(cfg);
    TrajectoryRecord rec;
    rec.dt = cfg.dt;
    rec.times.reserve(steps + 1);

    auto record = [&](std::size_t n, const SpectralField& u) -> bool {
        double l2 = 0.0, hs = 0.0, hneg = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double a2 = std::norm(u.coeffs()[i]);
            l2 += a2;
            hs += weights.hs[i] * a2;
            hneg += weights.hneg[i] * a2;
        }
        l2 = std::sqrt(l2);
        hs = std::sqrt(hs);
        hneg = std::sqrt(hneg);
        const double t = static_cast<double>(n) * cfg.dt;
        if (!std::isfinite(l2) || !std::isfinite(hs) || !std::isfinite(hneg)) {
            rec.blew_up = true;
            rec.blowup_time = t;
            return false;
        }
        rec.times.push_back(t);
        rec.l2_norm.push_back(l2);
        rec.hs_norm.push_back(hs);
        rec.hneg_gamma_norm.push_back(hneg);
        rec.mean_mode.push_back(u.mean());
        rec.cutoff_value.push_back(options.force_cutoff_on ? 1.0 : cutoff_value(hneg, cfg.S));
        if (cfg.snapshot_stride > 0 && n % cfg.snapshot_stride == 0) {
            rec.snapshots.push_back({n, t, u});
        }
        if (l2 > cfg.blowup_threshold) {
            rec.blew_up = true;
            rec.blowup_time = t;
            return false;
        }
        return true;
    };

    SpectralField u = u0;
    rec.final_field = u;
    if (!record(0, u)) return rec;

    VolterraAccumulator history(beta, cfg.dt, 2 * u.size());
    history.reserve(steps);
    std::vector<double> h(2 * u.size());
    std::vector<double> acc(2 * u.size());
    const double inv_dt = 1.0 / cfg.dt;

    for (std::size_t n = 0; n < steps; ++n) {
        const SpectralField f = drift_op.apply(u);
        const auto fr = f.raw();
        std::copy(fr.begin(), fr.end(), h.begin());
        if (theta) {
            const NoiseIncrements inc = sample_increments(*theta, cfg.dt, rng);
            const SpectralField g = transport_term(u, *theta, *basis, inc, A);
            const auto gr = g.raw();
            for (std::size_t i = 0; i < h.size(); ++i) h[i] += gr[i] * inv_dt;
        }
        history.push(h);
        history.evaluate(acc);
        const auto base = u0.raw();
        auto ur = u.raw();
        for (std::size_t i = 0; i < ur.size(); ++i) ur[i] = base[i] + acc[i];
        if (!record(n + 1, u)) break;
        rec.final_field = u;
    }
    return rec;
}

}  // namespace fracspde
