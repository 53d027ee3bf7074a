#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "fracspde/error.hpp"
#include "fracspde/spectral.hpp"
#include "oracles.hpp"

using namespace fracspde;

namespace {

SpectralField sample(std::uint64_t seed, int d, int M, double decay = 1.0, double mean = 0.3) {
    std::mt19937_64 rng(seed);
    return random_field(rng, d, M, decay, 1.0, mean);
}

}  // namespace

TEST_SUITE("spectral") {

TEST_CASE("layout and Hermitian storage") {
    SpectralField f(2, 3);
    CHECK(f.size() == 49);
    CHECK(f.wavevector(f.zero_index()) == Wavevector{0, 0, 0});
    for (std::size_t i = 0; i < f.size(); ++i) {
        CHECK(f.index(f.wavevector(i)) == i);
        CHECK(f.wavevector(f.mirror(i)) == negate(f.wavevector(i)));
    }
    CHECK_FALSE(f.contains({4, 0, 0}));
    CHECK(f.coeff({4, 0, 0}) == Complex(0.0));
    SpectralField g(3, 2);
    CHECK(g.size() == 125);
    CHECK(g.index({-2, -2, -2}) == 0);
}

TEST_CASE("Sobolev norms") {
    const auto c = SpectralField::constant(2, 4, -3.0);
    for (double s : {-1.0, 0.0, 0.5, 2.0}) CHECK(sobolev_norm(c, s) == doctest::Approx(3.0));
    const auto e = SpectralField::cosine_mode(2, 4, {1, 0, 0});
    CHECK(sobolev_norm(e, 0.0) == doctest::Approx(std::sqrt(2.0)));
    CHECK(sobolev_norm(e, 1.0) == doctest::Approx(2.0));
}

TEST_CASE("fractional Laplacian") {
    const auto e = SpectralField::cosine_mode(2, 4, {1, 0, 0});
    const auto le = frac_laplacian_apply(e, 1.0);
    CHECK(le[Wavevector{1, 0, 0}].real() == doctest::Approx(-4.0 * M_PI * M_PI));
    CHECK(sobolev_norm(frac_laplacian_apply(SpectralField::constant(3, 2, 5.0), 1.5), 0.0) == 0.0);

    SUBCASE("matches second differences on a fine grid") {
        const auto f = sample(11, 2, 1);
        const int n = 256;
        const auto g = to_grid(f, n);
        const auto lap = to_grid(frac_laplacian_apply(f, 1.0), n);
        const double h = 1.0 / n;
        double worst = 0.0, scale = 0.0;
        auto at = [&](int i, int j) { return g.values[((i + n) % n) * n + (j + n) % n]; };
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                const double fd = (at(i + 1, j) + at(i - 1, j) + at(i, j + 1) + at(i, j - 1) - 4 * at(i, j)) / (h * h);
                worst = std::max(worst, std::abs(fd - lap.values[i * n + j]));
                scale = std::max(scale, std::abs(lap.values[i * n + j]));
            }
        }
        CHECK(worst <= 1e-4 * scale);
    }
}

TEST_CASE("inverse Laplacian") {
    const auto e = SpectralField::cosine_mode(3, 2, {0, 1, 0});
    CHECK(laplacian_inverse(e)[Wavevector{0, 1, 0}].real() == doctest::Approx(1.0 / (4 * M_PI * M_PI)));
    CHECK(sobolev_norm(laplacian_inverse(SpectralField::constant(2, 3, 2.0)), 0.0) == 0.0);
    for (int d : {2, 3}) {
        const auto f = sample(5 + d, d, 4, 0.5, 1.7);
        auto r = frac_laplacian_apply(laplacian_inverse(f), 1.0);
        r += f;
        r.coeffs()[r.zero_index()] -= f.mean();
        CHECK(sobolev_norm(r, 0.0) <= 1e-12 * sobolev_norm(f, 0.0));
    }
}

TEST_CASE("gradient") {
    CHECK(sobolev_norm(gradient(SpectralField::constant(2, 3, 1.0))[0], 0.0) == 0.0);
    const auto e = SpectralField::cosine_mode(2, 3, {1, 0, 0});
    const auto gr = gradient(e);
    REQUIRE(gr.size() == 2);
    CHECK(sobolev_norm(gr[1], 0.0) == 0.0);
    for (double x : {0.0, 0.1, 0.37, 0.8}) {
        CHECK(oracle::evaluate(gr[0], {x, 0.2}) == doctest::Approx(-4 * M_PI * std::sin(2 * M_PI * x)).epsilon(1e-10));
    }
    const auto f = sample(21, 3, 3);
    double lhs = 0.0;
    for (const auto& c : gradient(f)) {
        lhs += std::pow(sobolev_norm(c, 0.0), 2);
        CHECK(c.hermitian_defect() == 0.0);
    }
    double rhs = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) rhs += 4 * M_PI * M_PI * squared_norm(f.wavevector(i)) * std::norm(f.coeffs()[i]);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    const auto div = divergence(gradient(f));
    CHECK(oracle::max_abs_diff(div, frac_laplacian_apply(f, 1.0)) < 1e-9);
}

TEST_CASE("projection") {
    const auto f = sample(3, 2, 5);
    const auto g = sample(4, 2, 5);
    CHECK(project_modes(f, 5) == f);
    const auto p0 = project_modes(f, 0);
    CHECK(sobolev_norm(p0, 0.0) == doctest::Approx(std::abs(f.mean())));
    CHECK(project_modes(project_modes(f, 2), 2) == project_modes(f, 2));
    CHECK(inner_product(project_modes(f, 3), g) == doctest::Approx(inner_product(f, project_modes(g, 3))).epsilon(1e-12));
    for (double s : {-1.0, 0.0, 1.0, 2.0}) CHECK(sobolev_norm(project_modes(f, 2), s) <= sobolev_norm(f, s));
    CHECK(resize_modes(resize_modes(f, 7), 5) == f);
}

TEST_CASE("multipliers preserve Hermitian symmetry") {
    for (int d : {2, 3}) {
        const auto f = sample(31 + d, d, 3);
        CHECK(f.hermitian_defect() == 0.0);
        CHECK(frac_laplacian_apply(f, 1.3).hermitian_defect() == 0.0);
        CHECK(laplacian_inverse(f).hermitian_defect() == 0.0);
        CHECK(project_modes(f, 1).hermitian_defect() == 0.0);
        CHECK(to_grid(frac_laplacian_apply(f, 1.0)).max_imag < 1e-12 * sobolev_norm(f, 2.0));
    }
}

TEST_CASE("grid transforms") {
    CHECK(dealiased_resolution(8) == 32);
    CHECK(dealiased_resolution(1) == 4);
    CHECK(minimal_resolution(8) == 32);
    CHECK(minimal_resolution(3) == 8);
    for (int d : {2, 3}) {
        const auto f = sample(41 + d, d, 4);
        const auto back = from_grid(to_grid(f, true), 4);
        CHECK(oracle::max_abs_diff(back, f) <= 1e-12 * sobolev_norm(f, 0.0));
        const auto g = to_grid(f, false);
        double sum2 = 0.0;
        for (double v : g.values) sum2 += v * v;
        CHECK(std::sqrt(sum2 / static_cast<double>(g.values.size())) == doctest::Approx(sobolev_norm(f, 0.0)).epsilon(1e-10));
    }
    CHECK_THROWS_AS(to_grid(sample(1, 2, 4), 8), InvalidParameter);
}

TEST_CASE("dealiased products") {
    const auto e2 = SpectralField::cosine_mode(2, 2, {1, 0, 0});
    const auto p = multiply(e2, e2);
    CHECK(p.mean() == doctest::Approx(2.0));
    CHECK(p[Wavevector{2, 0, 0}].real() == doctest::Approx(1.0));
    CHECK(std::abs(p[Wavevector{1, 0, 0}]) < 1e-14);

    const auto e1 = SpectralField::cosine_mode(2, 1, {1, 0, 0});
    const auto p1 = multiply(e1, e1);
    CHECK(p1.mean() == 2.0);
    CHECK(std::abs(p1[Wavevector{-1, 0, 0}]) < 1e-15);
    CHECK(oracle::max_abs_diff(p1, oracle::convolve(e1, e1)) < 1e-14);

    for (int d : {2, 3}) {
        const auto f = sample(51 + d, d, 3);
        const auto g = sample(61 + d, d, 3);
        CHECK(oracle::max_abs_diff(multiply(f, g), oracle::convolve(f, g)) < 1e-12);
    }
}

TEST_CASE("random fields") {
    std::mt19937_64 rng(1);
    CHECK(sobolev_norm(random_field(rng, 2, 4, 2.0, 0.0), 0.0) == 0.0);
    std::mt19937_64 a(99), b(99);
    CHECK(random_field(a, 3, 3, 1.0, 2.0, 0.5) == random_field(b, 3, 3, 1.0, 2.0, 0.5));

    // E|f|_{H^1}^2 = sum_{k != 0} (1+|k|^2) (1+|k|^2)^{-2}
    const int M = 8;
    double expect = 0.0;
    for (int i = -M; i <= M; ++i)
        for (int j = -M; j <= M; ++j)
            if (i != 0 || j != 0) expect += 1.0 / (1.0 + i * i + j * j);
    double mean = 0.0;
    std::mt19937_64 r(2024);
    for (int n = 0; n < 1000; ++n) mean += std::pow(sobolev_norm(random_field(r, 2, M, 2.0, 1.0), 1.0), 2);
    mean /= 1000.0;
    CHECK(mean == doctest::Approx(expect).epsilon(0.05));
}

TEST_CASE("interpolation inequality") {
    std::mt19937_64 rng(77);
    int violations = 0;
    for (int n = 0; n < 200; ++n) {
        const auto f = random_field(rng, 2 + n % 2, 4, 0.5 + 0.01 * n, 1.0, 0.2);
        const double lhs = sobolev_norm(f, 0.0);
        const double rhs = std::sqrt(sobolev_norm(f, 1.0) * sobolev_norm(f, -1.0));
        if (lhs > rhs * (1 + 1e-14)) ++violations;
    }
    CHECK(violations == 0);
}

TEST_CASE("snapshot formats") {
    const auto f = sample(8, 3, 2);
    const auto bytes = encode_field(f);
    CHECK(bytes.size() == 16 + 16 * f.size());
    CHECK(bytes[0] == 3);
    CHECK(bytes[8] == 2);
    CHECK(decode_field(bytes) == f);
    const auto dir = std::filesystem::temp_directory_path() / "fracspde_spectral_test";
    std::filesystem::create_directories(dir);
    write_field_binary(f, dir / "f.bin");
    CHECK(read_field_binary(dir / "f.bin") == f);
    write_field_csv(f, dir / "f.csv");
    std::ifstream in(dir / "f.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "k1,k2,k3,re,im");
    std::vector<std::uint8_t> bad(bytes.begin(), bytes.end() - 8);
    CHECK_THROWS(decode_field(bad));
    CHECK_THROWS_AS(read_field_binary(dir / "missing.bin"), IoError);
}

TEST_CASE("shape errors") {
    SpectralField a(2, 3), b(2, 4);
    CHECK_THROWS_AS(a += b, ShapeError);
    CHECK_THROWS_AS(SpectralField(1, 3), InvalidParameter);
}

}  // TEST_SUITE
