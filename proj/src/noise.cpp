#include "fracspde/noise.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "fracspde/error.hpp"

namespace fracspde {

namespace {

bool lex_less(const Wavevector& a, const Wavevector& b) { return a < b; }

Wavevector canonical(const Wavevector& m) { return is_canonical(m) ? m : negate(m); }

double dot(const Direction& q, const Wavevector& k, int d) {
    double s = 0.0;
    for (int c = 0; c < d; ++c) s += q[c] * static_cast<double>(k[c]);
    return s;
}

}  // namespace

ThetaSequence::ThetaSequence(int d, std::vector<ThetaEntry> entries)
    : d_(d), entries_(std::move(entries)) {
    if (d < 2 || d > 3) throw InvalidParameter("theta sequence dimension must be 2 or 3");
    std::sort(entries_.begin(), entries_.end(),
              [](const ThetaEntry& a, const ThetaEntry& b) { return lex_less(a.m, b.m); });
    std::map<Wavevector, std::size_t> where;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto& m = entries_[i].m;
        if (squared_norm(m) == 0) throw InvalidParameter("theta support must exclude m = 0");
        for (int c = d_; c < 3; ++c) {
            if (m[c] != 0) throw InvalidParameter("theta wavevector exceeds the dimension");
        }
        if (!where.emplace(m, i).second) throw InvalidParameter("duplicate theta wavevector");
    }
    mirror_.resize(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        auto it = where.find(negate(entries_[i].m));
        if (it == where.end()) {
            throw InvalidParameter("theta support must be closed under m -> -m");
        }
        if (entries_[it->second].theta != entries_[i].theta) {
            throw InvalidParameter("theta must satisfy theta_m = theta_{-m}");
        }
        mirror_[i] = it->second;
    }
}

int ThetaSequence::radius() const {
    int r = 0;
    for (const auto& e : entries_) r = std::max(r, max_norm(e.m));
    return r;
}

double ThetaSequence::l2_norm() const {
    double s = 0.0;
    for (const auto& e : entries_) s += e.theta * e.theta;
    return std::sqrt(s);
}

double ThetaSequence::linf_norm() const {
    double s = 0.0;
    for (const auto& e : entries_) s = std::max(s, std::abs(e.theta));
    return s;
}

ThetaSequence make_theta_cutoff(int N, int d) {
    if (N < 0) throw InvalidParameter("theta cutoff radius must be non-negative");
    std::vector<ThetaEntry> entries;
    const int hi2 = (d == 3) ? N : 0;
    for (int a = -N; a <= N; ++a) {
        for (int b = -N; b <= N; ++b) {
            for (int c = -hi2; c <= hi2; ++c) {
                const Wavevector m{a, b, c};
                if (squared_norm(m) == 0) continue;
                entries.push_back({m, 1.0});
            }
        }
    }
    return ThetaSequence(d, std::move(entries));
}

std::vector<Direction> build_orthonormal_complement(const Wavevector& m, int d) {
    if (squared_norm(m) == 0) throw InvalidParameter("orthonormal complement of m = 0");
    if (d < 2 || d > 3) throw InvalidParameter("noise basis dimension must be 2 or 3");
    const Wavevector rep = canonical(m);
    if (d == 2) {
        const double len = std::sqrt(static_cast<double>(squared_norm(rep)));
        return {Direction{-rep[1] / len, rep[0] / len, 0.0}};
    }

    const double len = std::sqrt(static_cast<double>(squared_norm(rep)));
    const Direction unit{rep[0] / len, rep[1] / len, rep[2] / len};
    std::array<int, 3> axes{0, 1, 2};
    std::stable_sort(axes.begin(), axes.end(),
                     [&](int a, int b) { return std::abs(rep[a]) < std::abs(rep[b]); });

    std::vector<Direction> basis;
    for (int pick = 0; pick < 2; ++pick) {
        Direction v{0.0, 0.0, 0.0};
        v[axes[pick]] = 1.0;
        auto project_out = [&v](const Direction& e) {
            const double p = v[0] * e[0] + v[1] * e[1] + v[2] * e[2];
            for (int c = 0; c < 3; ++c) v[c] -= p * e[c];
        };
        project_out(unit);
        for (const auto& prev : basis) project_out(prev);
        const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        for (auto& c : v) c /= n;
        basis.push_back(v);
    }
    return basis;
}

NoiseBasis::NoiseBasis(const ThetaSequence& theta) : d_(theta.dim()) {
    support_.reserve(theta.size());
    vectors_.reserve(theta.size());
    for (const auto& e : theta.entries()) {
        support_.push_back(e.m);
        vectors_.push_back(build_orthonormal_complement(e.m, d_));
    }
}

namespace {

void check_basis(const ThetaSequence& theta, const NoiseBasis& basis) {
    if (theta.dim() != basis.dim() || theta.size() != basis.size()) {
        throw ShapeError("noise basis was not built on this theta sequence");
    }
    for (std::size_t i = 0; i < theta.size(); ++i) {
        if (theta.entries()[i].m != basis.wavevector(i)) {
            throw ShapeError("noise basis support differs from theta support");
        }
    }
}

}  // namespace

SquareMatrix isotropy_matrix(const ThetaSequence& theta, const NoiseBasis& basis) {
    check_basis(theta, basis);
    const int d = theta.dim();
    SquareMatrix out(d);
    for (std::size_t e = 0; e < theta.size(); ++e) {
        const double w = theta.entries()[e].theta * theta.entries()[e].theta;
        for (const auto& q : basis.at(e)) {
            for (int i = 0; i < d; ++i) {
                for (int j = 0; j < d; ++j) out(i, j) += w * q[i] * q[j];
            }
        }
    }
    return out;
}

double amplitude_A(double b, const ThetaSequence& theta, int d) {
    if (b < 0.0) throw InvalidParameter("corrector strength b must be non-negative");
    const double norm2 = theta.l2_norm() * theta.l2_norm();
    if (!(norm2 > 0.0)) throw InvalidParameter("amplitude_A needs a nonzero theta sequence");
    return std::sqrt(static_cast<double>(d) * b / ((d - 1.0) * norm2));
}

NoiseIncrements sample_increments(const ThetaSequence& theta, double dt, std::mt19937_64& rng) {
    if (!(dt > 0.0)) throw InvalidParameter("noise increments need dt > 0");
    NoiseIncrements inc;
    inc.dt = dt;
    inc.components = theta.dim() - 1;
    inc.dW.assign(theta.size() * inc.components, Complex{0.0, 0.0});
    std::normal_distribution<double> normal(0.0, std::sqrt(dt));
    for (std::size_t e = 0; e < theta.size(); ++e) {
        if (!is_canonical(theta.entries()[e].m)) continue;
        const std::size_t partner = theta.mirror(e);
        for (int j = 0; j < inc.components; ++j) {
            const double re = normal(rng);
            const double im = normal(rng);
            inc.at(e, j) = Complex{re, im};
            inc.at(partner, j) = Complex{re, -im};
        }
    }
    return inc;
}

SpectralField transport_mode(const SpectralField& u, const Wavevector& m, const Direction& q,
                             int out_cutoff) {
    const int d = u.dim();
    SpectralField out(d, out_cutoff);
    for (std::size_t i = 0; i < u.size(); ++i) {
        const Wavevector k = u.wavevector(i);
        const Wavevector l = add(k, m);
        if (!out.contains(l)) continue;
        out[l] += Complex{0.0, kTwoPi * dot(q, k, d)} * u.coeffs()[i];
    }
    return out;
}

SpectralField transport_term(const SpectralField& u, const ThetaSequence& theta,
                             const NoiseBasis& basis, const NoiseIncrements& inc, double A,
                             int out_cutoff) {
    check_basis(theta, basis);
    if (u.dim() != theta.dim()) throw ShapeError("transport: field and noise dimensions differ");
    if (inc.dW.size() != theta.size() * static_cast<std::size_t>(theta.dim() - 1)) {
        throw ShapeError("transport: increments do not match the theta support");
    }
    const int d = u.dim();
    const int M = u.cutoff();
    const int outM = out_cutoff < 0 ? M : out_cutoff;
    SpectralField out(d, outM);
    const auto side = static_cast<std::size_t>(2 * outM + 1);

    std::vector<Wavevector> ks(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) ks[i] = u.wavevector(i);

    for (std::size_t e = 0; e < theta.size(); ++e) {
        const auto& m = theta.entries()[e].m;
        const double th = theta.entries()[e].theta;
        for (int j = 0; j < d - 1; ++j) {
            const auto& q = basis.at(e)[j];
            const Complex coef = A * th * inc.at(e, j);
            if (coef == Complex{0.0, 0.0}) continue;
            for (std::size_t i = 0; i < u.size(); ++i) {
                std::size_t idx = 0;
                bool inside = true;
                for (int c = 0; c < d; ++c) {
                    const int lc = ks[i][c] + m[c];
                    if (lc < -outM || lc > outM) {
                        inside = false;
                        break;
                    }
                    idx = idx * side + static_cast<std::size_t>(lc + outM);
                }
                if (!inside) continue;
                const double qk = dot(q, ks[i], d);
                out.coeffs()[idx] += Complex{0.0, kTwoPi * qk} * u.coeffs()[i] * coef;
            }
        }
    }
    // q.m = 0 removes the l = 0 contribution analytically.
    out.coeffs()[out.zero_index()] = 0.0;
    out.mirror_canonical_half();
    return out;
}

SpectralField ito_corrector(const SpectralField& u, const ThetaSequence& theta,
                            const NoiseBasis& basis, double A) {
    check_basis(theta, basis);
    const int wide = u.cutoff() + theta.radius();
    SpectralField acc(u.dim(), u.cutoff());
    for (std::size_t e = 0; e < theta.size(); ++e) {
        const auto& m = theta.entries()[e].m;
        const double th = theta.entries()[e].theta;
        for (const auto& q : basis.at(e)) {
            const SpectralField once = transport_mode(u, m, q, wide);
            SpectralField twice = transport_mode(once, negate(m), q, u.cutoff());
            twice *= A * A * th * th;
            acc += twice;
        }
    }
    return acc;
}

}  // namespace fracspde
