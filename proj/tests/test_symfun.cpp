#include <doctest.h>

#include "starpinch/errors.hpp"
#include "starpinch/rng.hpp"
#include "starpinch/symfun.hpp"

#include <cmath>
#include <sstream>
#include <vector>

using namespace starpinch;

namespace {

// sigma_k by enumerating all k-subsets.
double sigma_bruteforce(const std::vector<double>& x, int k) {
    const int n = static_cast<int>(x.size());
    double total = 0.0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (__builtin_popcount(mask) != k) continue;
        double p = 1.0;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) p *= x[static_cast<std::size_t>(i)];
        total += p;
    }
    return total;
}

std::vector<double> random_kappa(const CounterRng& rng, std::uint64_t i, int n, double scale = 2.0) {
    std::vector<double> k(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) k[static_cast<std::size_t>(a)] = scale * rng.normal(3, i * 16 + static_cast<std::uint64_t>(a));
    return k;
}

double H_of(const std::vector<double>& k, int l) {
    const auto p = curvature_profile(PrincipalCurvatures(k));
    return p.H[static_cast<std::size_t>(l)];
}

} // namespace

TEST_CASE("principal curvatures are sorted and validated") {
    PrincipalCurvatures k({3.0, -1.0, 2.0});
    CHECK(k[0] == -1.0);
    CHECK(k[2] == 3.0);
    CHECK(k.spectral_norm() == 3.0);
    CHECK_THROWS_AS(PrincipalCurvatures({1.0, NAN}), NumericalError);
}

TEST_CASE("binomial coefficients") {
    CHECK(binomial(5, 2) == 10.0);
    CHECK(binomial(6, 0) == 1.0);
    CHECK(binomial(3, 4) == 0.0);
}

TEST_CASE("elementary symmetric polynomials match subset enumeration") {
    const CounterRng rng(1);
    for (int n = 1; n <= 7; ++n) {
        for (std::uint64_t s = 0; s < 30; ++s) {
            const auto x = random_kappa(rng, s + 100 * n, n);
            const auto sigma = elementary_symmetric(std::span<const double>(x));
            REQUIRE(sigma.size() == static_cast<std::size_t>(n + 1));
            for (int k = 0; k <= n; ++k)
                CHECK(sigma[k] == doctest::Approx(sigma_bruteforce(x, k)).epsilon(1e-12).scale(1.0));
        }
    }
}

TEST_CASE("curvature profile basics") {
    const auto p = curvature_profile(PrincipalCurvatures({0.0, 2.0}));
    CHECK(p.H[1] == doctest::Approx(1.0));
    CHECK(p.H[2] == doctest::Approx(0.0));
    CHECK(p.tau_sq == doctest::Approx(2.0));
    const auto u = curvature_profile(PrincipalCurvatures({1.5, 1.5, 1.5}));
    CHECK(u.tau_sq == 0.0);
    for (int k = 0; k <= 3; ++k) CHECK(u.H[k] == doctest::Approx(std::pow(1.5, k)));
}

TEST_CASE("Gauss algebraic identity on random curvature vectors") {
    const CounterRng rng(2);
    for (int n = 2; n <= 6; ++n) {
        for (std::uint64_t s = 0; s < 2000; ++s) {
            const auto p = curvature_profile(PrincipalCurvatures(random_kappa(rng, s + 10000 * n, n)));
            double scale = 0.0;
            for (double k : p.kappa) scale += k * k;
            const double residual = std::abs(p.tau_sq - n * (n - 1.0) * (p.H[1] * p.H[1] - p.H[2]));
            CHECK(residual <= 1e-12 * scale);
        }
    }
}

TEST_CASE("partial curvatures equal mixed second derivatives of H_l") {
    const CounterRng rng(3);
    for (int n = 3; n <= 5; ++n) {
        const auto x = random_kappa(rng, 7 + n, n, 1.0);
        const PrincipalCurvatures kappa(x);
        const auto& v = kappa.values();
        for (int l = 2; l <= n; ++l) {
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    if (i == j) continue;
                    // H_l is affine in each variable: the mixed difference is exact.
                    const double e = 0.5;
                    auto shifted = [&](double di, double dj) {
                        auto y = v;
                        y[static_cast<std::size_t>(i)] += di;
                        y[static_cast<std::size_t>(j)] += dj;
                        return H_of(y, l);
                    };
                    const double fd = (shifted(e, e) - shifted(e, -e) - shifted(-e, e) + shifted(-e, -e)) / (4 * e * e);
                    CHECK(partial_H(l, i, j, kappa).value == doctest::Approx(fd).epsilon(1e-10).scale(1.0));
                }
            }
        }
        CHECK(partial_H(n + 1, 0, 1, kappa).value == 0.0);
        CHECK(partial_H_extremal(2, v) == doctest::Approx(1.0 / binomial(n, 2)));
        for (int l = 2; l <= n + 1; ++l)
            CHECK(partial_H_extremal(l, v) == doctest::Approx(partial_H(l, n - 1, 0, kappa).value).epsilon(1e-14));
    }
    CHECK_THROWS_AS(partial_H(1, 0, 1, PrincipalCurvatures({1, 2, 3})), std::out_of_range);
    CHECK_THROWS_AS(partial_H(2, 1, 1, PrincipalCurvatures({1, 2, 3})), std::out_of_range);
}

TEST_CASE("Newton and Maclaurin inequalities in the positive cone") {
    const CounterRng rng(4);
    for (int n = 2; n <= 6; ++n) {
        for (std::uint64_t s = 0; s < 2000; ++s) {
            const auto p = curvature_profile(PrincipalCurvatures(positive_curvature_sample(rng, 9, s, n)));
            for (int k = 1; k <= n - 1; ++k) CHECK(newton_gap(p, k) >= -1e-12);
            for (double g : maclaurin_gaps(p, n - 1)) CHECK(g >= -1e-12);
        }
    }
}

TEST_CASE("Maclaurin gaps require the Garding cone") {
    const auto p = curvature_profile(PrincipalCurvatures({-3.0, 1.0, 1.0}));
    CHECK_THROWS_AS(maclaurin_gaps(p, 1), HypothesisError);
    const auto q = curvature_profile(PrincipalCurvatures({1.0, 1.0, 1.0}));
    for (double g : maclaurin_gaps(q, 2)) CHECK(g == doctest::Approx(0.0).scale(1.0));
    CHECK_THROWS_AS(maclaurin_gaps(q, 3), std::out_of_range);
}

TEST_CASE("lemma constant: r = 1 exact value and the factor's dependence on h") {
    CHECK(K1(3, 1, 0.0, 0.5, 2.0, 0.3, {}) == 6.0);
    CHECK(K1_prime(4, 1, 0.0, 0.5, 2.0, 0.3, {}) == 12.0);
    const std::vector<double> b{1, 1, 1, 0.8};
    const double f1 = k1_factor(3, 2, 0.4, 1e-3, 2.0, 0.3, b);
    const double f2 = k1_factor(3, 2, 0.4, 2e-3, 2.0, 0.3, b);
    CHECK(f2 == doctest::Approx(2 * f1));
    CHECK(k1_factor(3, 2, 0.4, 1e-9, 2.0, 0.3, b) < 1e-8);
    CHECK(K1(3, 2, 0.4, 1.0, 2.0, 0.3, b) == doctest::Approx(1.0 / k1_factor(3, 2, 0.4, 1.0, 2.0, 0.3, b)));
    // c_n min b^{2(k-1)} (1 + (m/B)^2) h/(2B) for r = 2
    const double expected = 0.3 * std::pow(0.8, 2) * (1.0 + std::pow(0.4 / 2.0, 2)) * 1.0 / 4.0;
    CHECK(k1_factor(3, 2, 0.4, 1.0, 2.0, 0.3, b) == doctest::Approx(expected));
    CHECK_THROWS_AS(K1(3, 2, 0.0, 1.0, 2.0, 0.3, b), HypothesisError);
    CHECK_THROWS_AS(K1(3, 2, 0.4, -1.0, 2.0, 0.3, b), HypothesisError);
    CHECK_THROWS_AS(K1(3, 3, 0.4, 1.0, 2.0, 0.3, b), std::out_of_range);
}

TEST_CASE("lemma inequality holds pointwise with calibrated constants") {
    const auto cal = calibrate(3, 2, 20000, 17, 0.1);
    const CounterRng rng(99);
    for (std::uint64_t s = 0; s < 3000; ++s) {
        const auto kappa = positive_curvature_sample(rng, 5, s, 3);
        const auto p = curvature_profile(PrincipalCurvatures(kappa));
        const double B = p.kappa.back();
        const double m = partial_H_extremal(3, p.kappa);
        const double k1 = K1_prime(3, 2, m, p.H[3], B, cal.c_n, cal.b);
        CHECK(k1 * (p.H[1] * p.H[2] - p.H[3]) - p.tau_sq >= -1e-10);
    }
}

TEST_CASE("calibration: n = 2 closed form, determinism, margin and I/O") {
    const auto c2 = calibrate(2, 1, 10000, 3, 0.0);
    CHECK(c2.c_n_raw == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(c2.c_n == c2.c_n_raw);
    const auto a = calibrate(4, 3, 10000, 8, 0.1, 1);
    const auto b = calibrate(4, 3, 10000, 8, 0.1, 3);
    CHECK(a.c_n == b.c_n);
    CHECK(a.b == b.b);
    CHECK(a.c_n == doctest::Approx(a.c_n_raw * 0.9));
    std::ostringstream os1, os2;
    write_calibration(os1, a);
    write_calibration(os2, b);
    CHECK(os1.str() == os2.str());
    std::istringstream is(os1.str());
    const auto back = read_calibration(is);
    CHECK(back.c_n == a.c_n);
    CHECK(back.b == a.b);
    CHECK(back.seed == 8);
    CHECK_THROWS_AS(calibrate(3, 2, 9999, 1), ConfigError);
    std::istringstream bad("[calibration]\nn = x\n");
    CHECK_THROWS_AS(read_calibration(bad), ConfigError);
}

TEST_CASE("sharpened Newton inequality on held-out samples") {
    for (int n = 2; n <= 5; ++n) {
        const auto cal = calibrate(n, 1, 10000, 21, 0.1);
        const CounterRng held(1234);
        for (std::uint64_t s = 0; s < 10000; ++s) {
            const auto p = curvature_profile(PrincipalCurvatures(positive_curvature_sample(held, 2, s, n)));
            for (int k = 1; k <= n - 1; ++k) CHECK(sharpened_newton_gap(p, k, cal.c_n) >= -1e-10);
        }
    }
}

TEST_CASE("b_consts parsing") {
    const auto b = parse_b_consts("3:0.5, 4:0.25", 3);
    CHECK(b.size() == 5);
    CHECK(b[3] == 0.5);
    CHECK(b[4] == 0.25);
    CHECK_THROWS_AS(parse_b_consts("2:1", 3), ConfigError);
    CHECK_THROWS_AS(parse_b_consts("garbage", 3), ConfigError);
}
