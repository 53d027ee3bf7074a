#include "fracspde/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <tuple>

#include "fracspde/error.hpp"

namespace fracspde {

int squared_norm(const Wavevector& k) { return k[0] * k[0] + k[1] * k[1] + k[2] * k[2]; }

int max_norm(const Wavevector& k) {
    return std::max({std::abs(k[0]), std::abs(k[1]), std::abs(k[2])});
}

Wavevector negate(const Wavevector& k) { return {-k[0], -k[1], -k[2]}; }

Wavevector add(const Wavevector& a, const Wavevector& b) {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}

bool is_canonical(const Wavevector& k) {
    for (int c : k) {
        if (c != 0) return c > 0;
    }
    return false;
}

namespace {

void check_shape(int d, int M) {
    if (d < 2 || d > 3) {
        std::ostringstream msg;
        msg << "torus dimension must be 2 or 3, got " << d;
        throw InvalidParameter(msg.str());
    }
    if (M < 0) throw InvalidParameter("mode cutoff must be non-negative");
}

std::size_t ipow(int base, int exp) {
    std::size_t r = 1;
    for (int i = 0; i < exp; ++i) r *= static_cast<std::size_t>(base);
    return r;
}

}  // namespace

SpectralField::SpectralField(int d, int M) : d_(d), M_(M), side_(2 * M + 1) {
    check_shape(d, M);
    const std::size_t n = ipow(side_, d_);
    coeffs_.assign(n, Complex{0.0, 0.0});
    zero_index_ = (n - 1) / 2;
}

SpectralField SpectralField::constant(int d, int M, double c) {
    SpectralField f(d, M);
    f.coeffs_[f.zero_index_] = c;
    return f;
}

SpectralField SpectralField::cosine_mode(int d, int M, const Wavevector& k) {
    SpectralField f(d, M);
    if (squared_norm(k) == 0) {
        f.coeffs_[f.zero_index_] = 2.0;
        return f;
    }
    f[k] = 1.0;
    f[negate(k)] = 1.0;
    return f;
}

bool SpectralField::contains(const Wavevector& k) const {
    for (int i = 0; i < 3; ++i) {
        if (i >= d_) {
            if (k[i] != 0) return false;
        } else if (std::abs(k[i]) > M_) {
            return false;
        }
    }
    return true;
}

std::size_t SpectralField::index(const Wavevector& k) const {
    if (!contains(k)) {
        std::ostringstream msg;
        msg << "wavevector (" << k[0] << "," << k[1] << "," << k[2] << ") outside cutoff " << M_;
        throw ShapeError(msg.str());
    }
    std::size_t idx = 0;
    for (int i = 0; i < d_; ++i) idx = idx * side_ + static_cast<std::size_t>(k[i] + M_);
    return idx;
}

Wavevector SpectralField::wavevector(std::size_t i) const {
    Wavevector k{0, 0, 0};
    for (int c = d_ - 1; c >= 0; --c) {
        k[c] = static_cast<int>(i % side_) - M_;
        i /= side_;
    }
    return k;
}

Complex SpectralField::coeff(const Wavevector& k) const {
    return contains(k) ? coeffs_[index(k)] : Complex{0.0, 0.0};
}

std::span<double> SpectralField::raw() {
    return {reinterpret_cast<double*>(coeffs_.data()), 2 * coeffs_.size()};
}

std::span<const double> SpectralField::raw() const {
    return {reinterpret_cast<const double*>(coeffs_.data()), 2 * coeffs_.size()};
}

double SpectralField::hermitian_defect() const {
    double worst = std::abs(coeffs_[zero_index_].imag());
    for (std::size_t i = zero_index_ + 1; i < size(); ++i) {
        worst = std::max(worst, std::abs(coeffs_[mirror(i)] - std::conj(coeffs_[i])));
    }
    return worst;
}

void SpectralField::symmetrize() {
    coeffs_[zero_index_] = coeffs_[zero_index_].real();
    for (std::size_t i = zero_index_ + 1; i < size(); ++i) {
        const Complex avg = 0.5 * (coeffs_[i] + std::conj(coeffs_[mirror(i)]));
        coeffs_[i] = avg;
        coeffs_[mirror(i)] = std::conj(avg);
    }
}

void SpectralField::mirror_canonical_half() {
    coeffs_[zero_index_] = coeffs_[zero_index_].real();
    for (std::size_t i = zero_index_ + 1; i < size(); ++i) {
        coeffs_[mirror(i)] = std::conj(coeffs_[i]);
    }
}

bool SpectralField::same_shape(const SpectralField& other) const {
    return d_ == other.d_ && M_ == other.M_;
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
    if (!same_shape(other)) throw ShapeError("field addition with mismatched shapes");
    for (std::size_t i = 0; i < size(); ++i) coeffs_[i] += other.coeffs_[i];
    return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
    if (!same_shape(other)) throw ShapeError("field subtraction with mismatched shapes");
    for (std::size_t i = 0; i < size(); ++i) coeffs_[i] -= other.coeffs_[i];
    return *this;
}

SpectralField& SpectralField::operator*=(double a) {
    for (auto& c : coeffs_) c *= a;
    return *this;
}

double sobolev_norm(const SpectralField& f, double s) {
    double sum = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double weight = std::pow(1.0 + squared_norm(f.wavevector(i)), s);
        sum += weight * std::norm(f.coeffs()[i]);
    }
    return std::sqrt(sum);
}

double homogeneous_seminorm(const SpectralField& f, double s) {
    double sum = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const int k2 = squared_norm(f.wavevector(i));
        if (k2 == 0) continue;
        sum += std::pow(kFourPiSq * k2, s) * std::norm(f.coeffs()[i]);
    }
    return std::sqrt(sum);
}

double inner_product(const SpectralField& f, const SpectralField& g) {
    if (!f.same_shape(g)) throw ShapeError("inner product of mismatched fields");
    double sum = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        sum += (f.coeffs()[i] * std::conj(g.coeffs()[i])).real();
    }
    return sum;
}

SpectralField frac_laplacian_apply(const SpectralField& f, double s) {
    SpectralField out(f.dim(), f.cutoff());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const int k2 = squared_norm(f.wavevector(i));
        if (k2 == 0) continue;
        const double symbol = (s == 1.0) ? kFourPiSq * k2 : std::pow(kFourPiSq * k2, s);
        out.coeffs()[i] = -symbol * f.coeffs()[i];
    }
    return out;
}

SpectralField laplacian_inverse(const SpectralField& f) {
    SpectralField out(f.dim(), f.cutoff());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const int k2 = squared_norm(f.wavevector(i));
        if (k2 == 0) continue;
        out.coeffs()[i] = f.coeffs()[i] / (kFourPiSq * k2);
    }
    return out;
}

std::vector<SpectralField> gradient(const SpectralField& f) {
    std::vector<SpectralField> out(static_cast<std::size_t>(f.dim()),
                                   SpectralField(f.dim(), f.cutoff()));
    for (std::size_t i = 0; i < f.size(); ++i) {
        const Wavevector k = f.wavevector(i);
        for (int j = 0; j < f.dim(); ++j) {
            out[j].coeffs()[i] = Complex{0.0, kTwoPi * k[j]} * f.coeffs()[i];
        }
    }
    return out;
}

SpectralField divergence(std::span<const SpectralField> v) {
    if (v.empty()) throw ShapeError("divergence of an empty tuple");
    const int d = v[0].dim();
    if (static_cast<int>(v.size()) != d) throw ShapeError("divergence needs d components");
    SpectralField out(d, v[0].cutoff());
    for (const auto& comp : v) {
        if (!comp.same_shape(out)) throw ShapeError("divergence components differ in shape");
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        const Wavevector k = out.wavevector(i);
        Complex acc{0.0, 0.0};
        for (int j = 0; j < d; ++j) acc += Complex{0.0, kTwoPi * k[j]} * v[j].coeffs()[i];
        out.coeffs()[i] = acc;
    }
    return out;
}

SpectralField project_modes(const SpectralField& f, int cutoff) {
    if (cutoff < 0) throw InvalidParameter("projection cutoff must be non-negative");
    SpectralField out = f;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (max_norm(out.wavevector(i)) > cutoff) out.coeffs()[i] = 0.0;
    }
    return out;
}

SpectralField resize_modes(const SpectralField& f, int cutoff) {
    SpectralField out(f.dim(), cutoff);
    for (std::size_t i = 0; i < out.size(); ++i) out.coeffs()[i] = f.coeff(out.wavevector(i));
    return out;
}

int dealiased_resolution(int M) {
    int n = 1;
    while (n < 3 * M + 1) n *= 2;
    return n;
}

int minimal_resolution(int M) {
    int n = 1;
    while (n < 2 * M + 1) n *= 2;
    return n;
}

namespace {

// FFTW planning is not thread-safe; execution on fresh arrays is. Plans are
// created once per (d, n, sign) under a lock and live for the process.
class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(int d, int n, int sign) {
        std::lock_guard<std::mutex> lock(mutex_);
        const auto key = std::make_tuple(d, n, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        std::vector<int> dims(static_cast<std::size_t>(d), n);
        const std::size_t total = ipow(n, d);
        auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * total));
        fftw_plan plan = fftw_plan_dft(d, dims.data(), buf, buf, sign,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(buf);
        if (plan == nullptr) throw InvalidParameter("FFTW could not plan the transform");
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

void execute_inplace(int d, int n, int sign, std::vector<Complex>& data) {
    fftw_plan plan = PlanCache::instance().get(d, n, sign);
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, ptr, ptr);
}

std::size_t grid_index(const Wavevector& k, int d, int n) {
    std::size_t idx = 0;
    for (int c = 0; c < d; ++c) {
        const int wrapped = ((k[c] % n) + n) % n;
        idx = idx * static_cast<std::size_t>(n) + static_cast<std::size_t>(wrapped);
    }
    return idx;
}

std::vector<Complex> synthesize(const SpectralField& f, int n) {
    std::vector<Complex> data(ipow(n, f.dim()), Complex{0.0, 0.0});
    for (std::size_t i = 0; i < f.size(); ++i) {
        data[grid_index(f.wavevector(i), f.dim(), n)] = f.coeffs()[i];
    }
    execute_inplace(f.dim(), n, FFTW_BACKWARD, data);
    return data;
}

}  // namespace

GridField to_grid(const SpectralField& f, int resolution) {
    if (resolution < 2 * f.cutoff() + 1) {
        std::ostringstream msg;
        msg << "grid resolution " << resolution << " cannot represent cutoff " << f.cutoff();
        throw InvalidParameter(msg.str());
    }
    const auto data = synthesize(f, resolution);
    GridField g;
    g.d = f.dim();
    g.n = resolution;
    g.values.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        g.values[i] = data[i].real();
        g.max_imag = std::max(g.max_imag, std::abs(data[i].imag()));
    }
    return g;
}

GridField to_grid(const SpectralField& f, bool dealias) {
    return to_grid(f, dealias ? dealiased_resolution(f.cutoff()) : minimal_resolution(f.cutoff()));
}

SpectralField from_grid(const GridField& g, int M) {
    if (g.n < 2 * M + 1) {
        std::ostringstream msg;
        msg << "grid resolution " << g.n << " too small for cutoff " << M;
        throw InvalidParameter(msg.str());
    }
    if (g.values.size() != ipow(g.n, g.d)) throw ShapeError("grid value count mismatch");
    std::vector<Complex> data(g.values.begin(), g.values.end());
    execute_inplace(g.d, g.n, FFTW_FORWARD, data);
    const double norm = 1.0 / static_cast<double>(data.size());
    SpectralField out(g.d, M);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.coeffs()[i] = data[grid_index(out.wavevector(i), g.d, g.n)] * norm;
    }
    out.symmetrize();
    return out;
}

SpectralField multiply(const SpectralField& f, const SpectralField& g) {
    if (f.dim() != g.dim()) throw ShapeError("product of fields with different dimensions");
    const int M = std::max(f.cutoff(), g.cutoff());
    const int n = dealiased_resolution(M);
    GridField a = to_grid(f, n);
    const GridField b = to_grid(g, n);
    for (std::size_t i = 0; i < a.values.size(); ++i) a.values[i] *= b.values[i];
    return from_grid(a, f.cutoff());
}

SpectralField random_field(std::mt19937_64& rng, int d, int M, double decay, double amplitude,
                           double mean) {
    if (decay < 0.0) throw InvalidParameter("random_field decay must be non-negative");
    SpectralField f(d, M);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t i = f.zero_index() + 1; i < f.size(); ++i) {
        const double k2 = squared_norm(f.wavevector(i));
        const double sigma = amplitude * std::pow(1.0 + k2, -0.5 * decay);
        const double re = normal(rng);
        const double im = normal(rng);
        f.coeffs()[i] = Complex{re, im} * (sigma * std::sqrt(0.5));
    }
    f.coeffs()[f.zero_index()] = mean;
    f.mirror_canonical_half();
    return f;
}

namespace {

template <typename T>
void append_le(std::vector<std::uint8_t>& out, T value) {
    std::array<std::uint8_t, sizeof(T)> bytes{};
    std::memcpy(bytes.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    out.insert(out.end(), bytes.begin(), bytes.end());
}

template <typename T>
T read_le(std::span<const std::uint8_t> bytes, std::size_t offset) {
    std::array<std::uint8_t, sizeof(T)> buf{};
    std::memcpy(buf.data(), bytes.data() + offset, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf.begin(), buf.end());
    T value;
    std::memcpy(&value, buf.data(), sizeof(T));
    return value;
}

}  // namespace

std::vector<std::uint8_t> encode_field(const SpectralField& f) {
    std::vector<std::uint8_t> out;
    out.reserve(16 + 16 * f.size());
    append_le<std::uint64_t>(out, static_cast<std::uint64_t>(f.dim()));
    append_le<std::uint64_t>(out, static_cast<std::uint64_t>(f.cutoff()));
    for (const auto& c : f.coeffs()) {
        append_le<double>(out, c.real());
        append_le<double>(out, c.imag());
    }
    return out;
}

SpectralField decode_field(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 16) throw ShapeError("field snapshot shorter than its header");
    const auto d = read_le<std::uint64_t>(bytes, 0);
    const auto M = read_le<std::uint64_t>(bytes, 8);
    if (d < 2 || d > 3 || M > 4096) throw ShapeError("field snapshot header is corrupt");
    SpectralField f(static_cast<int>(d), static_cast<int>(M));
    if (bytes.size() != 16 + 16 * f.size()) throw ShapeError("field snapshot has wrong length");
    for (std::size_t i = 0; i < f.size(); ++i) {
        f.coeffs()[i] = Complex{read_le<double>(bytes, 16 + 16 * i),
                                read_le<double>(bytes, 24 + 16 * i)};
    }
    return f;
}

void write_field_binary(const SpectralField& f, const std::filesystem::path& path) {
    const auto bytes = encode_field(f);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing " + path.string());
}

SpectralField read_field_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return decode_field(bytes);
}

void write_field_csv(const SpectralField& f, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    for (int j = 0; j < f.dim(); ++j) out << "k" << (j + 1) << ",";
    out << "re,im\n";
    out.precision(17);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const Wavevector k = f.wavevector(i);
        for (int j = 0; j < f.dim(); ++j) out << k[j] << ",";
        out << f.coeffs()[i].real() << "," << f.coeffs()[i].imag() << "\n";
    }
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace fracspde
