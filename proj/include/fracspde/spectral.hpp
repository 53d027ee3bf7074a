#pragma once

// Real scalar fields on the d-torus [0,1)^d stored as truncated Fourier series
//   u(x) = sum_{|k|_inf <= M} u_k exp(2 pi i k.x),   u_{-k} = conj(u_k).
// Coefficients are kept densely in lexicographic k order (k_1 slowest, each
// component running from -M to M).

#include <array>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

namespace fracspde {

using Complex = std::complex<double>;
/// Integer wavevector; components beyond the field dimension are zero.
using Wavevector = std::array<int, 3>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kFourPiSq = 4.0 * kPi * kPi;

int squared_norm(const Wavevector& k);
int max_norm(const Wavevector& k);
Wavevector negate(const Wavevector& k);
Wavevector add(const Wavevector& a, const Wavevector& b);
/// True for the lexicographically larger member of {k, -k}; false for k = 0.
bool is_canonical(const Wavevector& k);

class SpectralField {
public:
    SpectralField(int d, int M);

    static SpectralField constant(int d, int M, double c);
    /// 2 cos(2 pi k.x): unit coefficients at +k and -k.
    static SpectralField cosine_mode(int d, int M, const Wavevector& k);

    int dim() const { return d_; }
    int cutoff() const { return M_; }
    std::size_t size() const { return coeffs_.size(); }

    bool contains(const Wavevector& k) const;
    std::size_t index(const Wavevector& k) const;
    Wavevector wavevector(std::size_t i) const;

    Complex& operator[](const Wavevector& k) { return coeffs_[index(k)]; }
    const Complex& operator[](const Wavevector& k) const { return coeffs_[index(k)]; }
    /// Coefficient at k, zero outside the stored ball.
    Complex coeff(const Wavevector& k) const;

    std::span<Complex> coeffs() { return coeffs_; }
    std::span<const Complex> coeffs() const { return coeffs_; }

    /// Interleaved (re, im) view for bulk arithmetic.
    std::span<double> raw();
    std::span<const double> raw() const;

    double mean() const { return coeffs_[zero_index_].real(); }
    std::size_t zero_index() const { return zero_index_; }

    /// Index of -k for the entry at index i.
    std::size_t mirror(std::size_t i) const { return size() - 1 - i; }

    /// Largest |c_{-k} - conj(c_k)| and |Im c_0|.
    double hermitian_defect() const;
    /// Averages conjugate pairs so the symmetry holds exactly.
    void symmetrize();
    /// Copies the canonical half onto its mirror and zeroes Im c_0.
    void mirror_canonical_half();

    bool same_shape(const SpectralField& other) const;

    SpectralField& operator+=(const SpectralField& other);
    SpectralField& operator-=(const SpectralField& other);
    SpectralField& operator*=(double a);

    friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
    friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
    friend SpectralField operator*(double a, SpectralField f) { return f *= a; }

    bool operator==(const SpectralField& other) const = default;

private:
    int d_;
    int M_;
    int side_;
    std::size_t zero_index_;
    std::vector<Complex> coeffs_;
};

/// Real values at the equispaced points j/n of [0,1)^d, natural x-ordering
/// (x_1 slowest).
struct GridField {
    int d = 2;
    int n = 0;
    std::vector<double> values;
    /// Largest |Im u(x_j)| discarded when the field was synthesized.
    double max_imag = 0.0;
};

/// (sum_k (1+|k|^2)^s |f_k|^2)^{1/2}; s may be negative.
double sobolev_norm(const SpectralField& f, double s);
/// (sum_k (4 pi^2 |k|^2)^s |f_k|^2)^{1/2} over k != 0.
double homogeneous_seminorm(const SpectralField& f, double s);
/// Real L^2 pairing <f, g> = sum_k f_k conj(g_k).
double inner_product(const SpectralField& f, const SpectralField& g);

/// Multiplier -(4 pi^2 |k|^2)^s, i.e. -(-Laplacian)^s.
SpectralField frac_laplacian_apply(const SpectralField& f, double s);
/// (-Laplacian)^{-1} on the mean-free part: c_k = f_k / (4 pi^2 |k|^2), c_0 = 0.
SpectralField laplacian_inverse(const SpectralField& f);
std::vector<SpectralField> gradient(const SpectralField& f);
/// sum_j d_j v_j for a d-tuple of fields on a common cutoff.
SpectralField divergence(std::span<const SpectralField> v);
/// Zeroes every coefficient with |k|_inf > cutoff.
SpectralField project_modes(const SpectralField& f, int cutoff);
/// Same field re-embedded with another cutoff (truncating or zero-padding).
SpectralField resize_modes(const SpectralField& f, int cutoff);

/// Smallest power of two >= 3M + 1 (2/3-rule padding for quadratic products).
int dealiased_resolution(int M);
/// Smallest power of two >= 2M + 1.
int minimal_resolution(int M);

GridField to_grid(const SpectralField& f, bool dealias = true);
GridField to_grid(const SpectralField& f, int resolution);
SpectralField from_grid(const GridField& g, int M);

/// Pseudospectral product f*g truncated to the cutoff of f (dealiased).
SpectralField multiply(const SpectralField& f, const SpectralField& g);

/// Complex Gaussian coefficients with E|c_k|^2 = (amplitude (1+|k|^2)^{-decay/2})^2
/// for k != 0, Hermitian-symmetrized; the mean mode is set to `mean`.
SpectralField random_field(std::mt19937_64& rng, int d, int M, double decay, double amplitude,
                           double mean = 0.0);

/// Flat little-endian snapshot: uint64 d, uint64 M, then (re, im) float64 pairs
/// in lexicographic k order.
std::vector<std::uint8_t> encode_field(const SpectralField& f);
SpectralField decode_field(std::span<const std::uint8_t> bytes);
void write_field_binary(const SpectralField& f, const std::filesystem::path& path);
SpectralField read_field_binary(const std::filesystem::path& path);
/// CSV with columns k1..kd, re, im.
void write_field_csv(const SpectralField& f, const std::filesystem::path& path);

}  // namespace fracspde
