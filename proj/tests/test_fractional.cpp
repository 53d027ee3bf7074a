#include <doctest.h>

#include <cmath>

#include "fracspde/error.hpp"
#include "fracspde/fractional.hpp"
#include "oracles.hpp"

using namespace fracspde;

TEST_SUITE("fractional") {

TEST_CASE("gamma matches a multiprecision reference") {
    CHECK(gamma_fn(0.5) == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-12));
    CHECK(gamma_fn(1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(gamma_fn(1.75) == doctest::Approx(oracle::gamma_mp(1.75)).epsilon(1e-12));
    for (double x = 0.05; x < 3.0; x += 0.137) {
        CHECK(gamma_fn(x) == doctest::Approx(oracle::gamma_mp(x)).epsilon(1e-12));
    }
}

TEST_CASE("order validation") {
    CHECK_THROWS_AS(FracOrder(0.0), InvalidParameter);
    CHECK_THROWS_AS(FracOrder(1.01), InvalidParameter);
    CHECK_THROWS_AS(FracOrder(-0.5), InvalidParameter);
    CHECK(FracOrder(1.0).is_classical());
    CHECK_FALSE(FracOrder(0.9).is_classical());
}

TEST_CASE("kernel weights") {
    SUBCASE("classical order gives dt") {
        const auto w = rl_kernel_weights(FracOrder(1.0), 0.1, 3);
        REQUIRE(w.weights.size() == 3);
        for (double v : w.weights) CHECK(v == 0.1);
    }
    SUBCASE("half order first weight") {
        const auto w = rl_kernel_weights(FracOrder(0.5), 1.0, 1);
        CHECK(w.weights[0] == doctest::Approx(1.0 / oracle::gamma_mp(1.5)).epsilon(1e-13));
        CHECK(w.weights[0] == doctest::Approx(2.0 / std::sqrt(M_PI)).epsilon(1e-13));
    }
    SUBCASE("two steps sum to the telescoped power") {
        const auto w = rl_kernel_weights(FracOrder(0.75), 0.01, 2);
        const double expect = std::pow(0.02, 0.75) / oracle::gamma_mp(1.75);
        CHECK(w.weights[0] + w.weights[1] == doctest::Approx(expect).epsilon(1e-13));
        const double direct0 = (std::pow(2.0, 0.75) - 1.0) * std::pow(0.01, 0.75) / oracle::gamma_mp(1.75);
        CHECK(w.weights[0] == doctest::Approx(direct0).epsilon(1e-13));
    }
    SUBCASE("positivity and telescoping over a parameter sweep") {
        for (double beta : {0.1, 0.3, 0.55, 0.8, 0.99, 1.0}) {
            for (double dt : {1e-4, 1e-2, 0.5}) {
                for (std::size_t n : {1u, 2u, 17u, 500u}) {
                    const auto w = rl_kernel_weights(FracOrder(beta), dt, n);
                    double sum = 0.0;
                    for (double v : w.weights) {
                        CHECK(v > 0.0);
                        sum += v;
                    }
                    const double expect = std::pow(n * dt, beta) / oracle::gamma_mp(beta + 1.0);
                    CHECK(std::abs(sum - expect) <= 1e-12 * expect);
                }
            }
        }
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(rl_kernel_weights(FracOrder(0.5), 0.0, 3), InvalidParameter);
        CHECK_THROWS_AS(rl_kernel_weights(FracOrder(0.5), 0.1, 0), InvalidParameter);
    }
}

TEST_CASE("accumulator reproduces the explicit weight rows") {
    const double beta = 0.65, dt = 0.03;
    VolterraAccumulator acc(FracOrder(beta), dt, 2);
    std::vector<std::array<double, 2>> hist;
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    for (std::size_t n = 1; n <= 40; ++n) {
        std::array<double, 2> h{nd(rng), nd(rng)};
        hist.push_back(h);
        acc.push(h);
        std::array<double, 2> out{};
        acc.evaluate(out);
        const auto w = rl_kernel_weights(FracOrder(beta), dt, n);
        for (int c = 0; c < 2; ++c) {
            double ref = 0.0;
            for (std::size_t k = 0; k < n; ++k) ref += w.weights[k] * hist[k][c];
            CHECK(out[c] == doctest::Approx(ref).epsilon(1e-12));
        }
    }
}

TEST_CASE("Mittag-Leffler special cases") {
    CHECK(mittag_leffler(1, 1, 1) == doctest::Approx(std::exp(1.0)).epsilon(1e-14));
    CHECK(mittag_leffler(1, 1, 0) == 1.0);
    CHECK(mittag_leffler(2, 1, 1) == doctest::Approx(std::cosh(1.0)).epsilon(1e-14));
    CHECK(mittag_leffler(1, 2, 2.0) == doctest::Approx((std::exp(2.0) - 1.0) / 2.0).epsilon(1e-14));
    CHECK(mittag_leffler(0.5, 1, -1.0) == doctest::Approx(std::exp(1.0) * std::erfc(1.0)).epsilon(1e-12));
    for (double a : {0.3, 0.75, 1.6}) {
        for (double z : {-1.5, -0.2, 0.4, 1.3}) {
            CHECK(mittag_leffler(a, 1.0, z) == doctest::Approx(oracle::mittag_leffler_naive(a, 1.0, z)).epsilon(1e-12));
        }
    }
}

TEST_CASE("Mittag-Leffler accuracy on the validated range") {
    for (double z = -20.0; z <= 20.0; z += 0.5) {
        CHECK(std::abs(mittag_leffler(1, 1, z) - std::exp(z)) <= 1e-10 * std::max(1.0, std::exp(z)));
    }
}

TEST_CASE("Mittag-Leffler truncation criterion") {
    for (double z : {-19.0, -3.0, 0.5, 7.0, 20.0}) {
        const auto r = mittag_leffler_series(0.8, 1.0, z);
        CHECK(r.terms > 0);
        // the first omitted term is below the declared tolerance
        CHECK(r.tail_term < kMittagLefflerTolerance);
        const double next = std::abs(std::pow(z, static_cast<double>(r.terms))) /
                            oracle::gamma_mp(0.8 * static_cast<double>(r.terms) + 1.0);
        CHECK(next == doctest::Approx(r.tail_term).epsilon(1e-6));
    }
}

TEST_CASE("Mittag-Leffler errors") {
    CHECK_THROWS_AS(mittag_leffler(0.0, 1.0, 1.0), InvalidParameter);
    CHECK_THROWS_AS(mittag_leffler(1.0, -1.0, 1.0), InvalidParameter);
    CHECK_THROWS_AS(mittag_leffler(1.0, 1.0, 20.5), OutOfRange);
    CHECK_THROWS_AS(mittag_leffler(0.5, 1.0, -25.0), OutOfRange);
}

TEST_CASE("scalar solver") {
    const ScalarRhs decay = [](double x) { return -x; };
    const ScalarRhs logistic = [](double x) { return x * x - x; };

    SUBCASE("classical linear decay") {
        const auto tr = solve_caputo_scalar_ode(decay, FracOrder(1.0), 1.0, 1e-4, 1.0);
        CHECK_FALSE(tr.blew_up);
        CHECK(tr.times.back() == doctest::Approx(1.0));
        CHECK(std::abs(tr.values.back() - std::exp(-1.0)) < 1e-3);
    }
    SUBCASE("classical blow-up near ln 2") {
        const auto tr = solve_caputo_scalar_ode(logistic, FracOrder(1.0), 2.0, 1e-5, 2.0, 1e6);
        REQUIRE(tr.blew_up);
        REQUIRE(tr.blowup_time.has_value());
        CHECK(std::abs(*tr.blowup_time - std::log(2.0)) < 0.02 * std::log(2.0));
        CHECK(std::abs(tr.values.back()) > 1e6);
    }
    SUBCASE("fractional linear decay follows Mittag-Leffler") {
        const auto tr = solve_caputo_scalar_ode(decay, FracOrder(0.75), 1.0, 1e-4, 1.0);
        double worst = 0.0;
        for (std::size_t i = 0; i < tr.times.size(); i += 50) {
            const double ref = oracle::mittag_leffler_naive(0.75, 1.0, -std::pow(tr.times[i], 0.75));
            worst = std::max(worst, std::abs(tr.values[i] - ref));
        }
        CHECK(worst < 1e-3);
    }
    SUBCASE("classical order equals forward Euler") {
        const double dt = 1e-3;
        const auto tr = solve_caputo_scalar_ode(logistic, FracOrder(1.0), 0.7, dt, 1.0);
        double x = 0.7;
        for (std::size_t n = 1; n < tr.values.size(); ++n) {
            x += dt * (x * x - x);
            CHECK(std::abs(tr.values[n] - x) <= 1e-12);
        }
    }
    SUBCASE("times increase and values stay finite") {
        const auto tr = solve_caputo_scalar_ode(logistic, FracOrder(0.6), 1.5, 1e-3, 5.0);
        for (std::size_t i = 1; i < tr.times.size(); ++i) CHECK(tr.times[i] > tr.times[i - 1]);
        for (double v : tr.values) CHECK(std::isfinite(v));
        CHECK(tr.blew_up);
        CHECK(*tr.blowup_time == doctest::Approx(tr.times.back()));
    }
    SUBCASE("parameter validation") {
        CHECK_THROWS_AS(solve_caputo_scalar_ode(decay, FracOrder(1.0), 1.0, 0.0, 1.0), InvalidParameter);
        CHECK_THROWS_AS(solve_caputo_scalar_ode(decay, FracOrder(1.0), 1.0, 0.1, 0.0), InvalidParameter);
        CHECK_THROWS_AS(solve_caputo_scalar_ode(decay, FracOrder(1.0), 10.0, 0.1, 1.0, 5.0), InvalidParameter);
    }
}

TEST_CASE("blow-up time is non-increasing in the initial value") {
    const ScalarRhs logistic = [](double x) { return x * x - x; };
    for (double beta : {0.6, 0.8, 1.0}) {
        double prev = 1e300;
        for (double x0 : {1.2, 1.5, 2.0}) {
            const auto tr = solve_caputo_scalar_ode(logistic, FracOrder(beta), x0, 1e-3, 20.0);
            REQUIRE(tr.blew_up);
            CHECK(*tr.blowup_time <= prev);
            prev = *tr.blowup_time;
        }
        const auto low = solve_caputo_scalar_ode(logistic, FracOrder(beta), 0.5, 1e-3, 5.0);
        CHECK_FALSE(low.blew_up);
        for (std::size_t i = 1; i < low.values.size(); ++i) {
            CHECK(low.values[i] <= low.values[i - 1]);
            CHECK(low.values[i] > 0.0);
        }
    }
}

TEST_CASE("comparison oracle") {
    const auto slow = solve_caputo_scalar_ode([](double x) { return -x; }, FracOrder(0.7), 1.0, 1e-3, 1.0);
    const auto fast = solve_caputo_scalar_ode([](double x) { return -2 * x; }, FracOrder(0.7), 1.0, 1e-3, 1.0);
    CHECK(comparison_oracle(slow, fast));
    CHECK(comparison_oracle(slow, slow));
    CHECK_FALSE(comparison_oracle(fast, slow));
    // analytic ordering of the closed forms on the same grid
    for (std::size_t i = 0; i < slow.times.size(); i += 100) {
        const double t = std::pow(slow.times[i], 0.7);
        CHECK(oracle::mittag_leffler_naive(0.7, 1, -t) >= oracle::mittag_leffler_naive(0.7, 1, -2 * t));
    }
    const auto other = solve_caputo_scalar_ode([](double x) { return -x; }, FracOrder(0.7), 1.0, 1e-3, 0.5);
    CHECK_THROWS_AS(comparison_oracle(slow, other), ShapeError);
}

}  // TEST_SUITE
