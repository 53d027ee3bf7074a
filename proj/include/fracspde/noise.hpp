#pragma once

// Transport noise  A sum_{m,j} theta_m sigma_{m,j} . grad u  dW^{m,j}
// with divergence-free Fourier vector fields sigma_{m,j} = q_{m,j} e^{2 pi i m.x}
// and complex Brownian motions satisfying W^{-m,j} = conj(W^{m,j}).

#include <array>
#include <random>
#include <vector>

#include "fracspde/spectral.hpp"

namespace fracspde {

using Direction = std::array<double, 3>;

struct ThetaEntry {
    Wavevector m;
    double theta;
};

/// Finite symmetric sequence theta_m = theta_{-m} on nonzero wavevectors.
/// Entries are kept in lexicographic order of m.
class ThetaSequence {
public:
    ThetaSequence(int d, std::vector<ThetaEntry> entries);

    int dim() const { return d_; }
    const std::vector<ThetaEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    /// Index of the entry holding -m for entry i.
    std::size_t mirror(std::size_t i) const { return mirror_[i]; }
    /// Largest |m|_inf in the support.
    int radius() const;

    double l2_norm() const;
    double linf_norm() const;

private:
    int d_;
    std::vector<ThetaEntry> entries_;
    std::vector<std::size_t> mirror_;
};

/// theta_m = 1 for 0 < |m|_inf <= N. N = 0 gives the empty sequence.
ThetaSequence make_theta_cutoff(int N, int d);

/// Orthonormal basis of m-perp, identical for m and -m.
///   d = 2: q = (-m2, m1)/|m| evaluated on the canonical member of {m, -m}.
///   d = 3: Gram-Schmidt of the two coordinate axes least aligned with m
///          (ties broken by axis order e1, e2, e3).
std::vector<Direction> build_orthonormal_complement(const Wavevector& m, int d);

/// q_{m,j} for every entry of a theta sequence, same order as the entries.
class NoiseBasis {
public:
    explicit NoiseBasis(const ThetaSequence& theta);

    int dim() const { return d_; }
    std::size_t size() const { return vectors_.size(); }
    const std::vector<Direction>& at(std::size_t entry) const { return vectors_[entry]; }
    const Wavevector& wavevector(std::size_t entry) const { return support_[entry]; }

private:
    int d_;
    std::vector<Wavevector> support_;
    std::vector<std::vector<Direction>> vectors_;
};

/// Complex increments over one step, indexed [entry * (d-1) + j].
struct NoiseIncrements {
    double dt = 0.0;
    int components = 1;  // d - 1
    std::vector<Complex> dW;

    const Complex& at(std::size_t entry, int j) const { return dW[entry * components + j]; }
    Complex& at(std::size_t entry, int j) { return dW[entry * components + j]; }
};

/// Row-major d x d matrix.
struct SquareMatrix {
    int n = 0;
    std::vector<double> a;

    explicit SquareMatrix(int size) : n(size), a(static_cast<std::size_t>(size * size), 0.0) {}
    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i * n + j)]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i * n + j)]; }
};

/// sum_m theta_m^2 sum_j q_{m,j} (x) q_{m,j}
SquareMatrix isotropy_matrix(const ThetaSequence& theta, const NoiseBasis& basis);

/// sqrt(d b / ((d-1) |theta|_2^2)); zero when b = 0.
double amplitude_A(double b, const ThetaSequence& theta, int d);

/// Draws Re and Im of dW^{m,j} ~ N(0, dt) independently for canonical m and
/// mirrors the conjugate onto -m.
NoiseIncrements sample_increments(const ThetaSequence& theta, double dt, std::mt19937_64& rng);

/// (sigma_{m,j} . grad) u, shifted by m, on an output cutoff (no truncation
/// when out_cutoff >= M + |m|_inf).
SpectralField transport_mode(const SpectralField& u, const Wavevector& m, const Direction& q,
                             int out_cutoff);

/// A sum_{m,j} theta_m (sigma_{m,j} . grad u) dW^{m,j}, truncated to out_cutoff
/// (default: the cutoff of u). Exactly Hermitian with zero mean mode.
SpectralField transport_term(const SpectralField& u, const ThetaSequence& theta,
                             const NoiseBasis& basis, const NoiseIncrements& inc, double A,
                             int out_cutoff = -1);

/// A^2 sum_{m,j} theta_m^2 (sigma_{-m,j}.grad)(sigma_{m,j}.grad) u computed by
/// applying the shift rule twice without intermediate truncation. With A from
/// amplitude_A and an isotropic support this equals b Laplacian(u).
SpectralField ito_corrector(const SpectralField& u, const ThetaSequence& theta,
                            const NoiseBasis& basis, double A);

}  // namespace fracspde
