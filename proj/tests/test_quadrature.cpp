#include <doctest.h>

#include "starpinch/errors.hpp"
#include "starpinch/quadrature.hpp"

#include <cmath>
#include <vector>

using namespace starpinch;

namespace {

// int_{S^n} prod u_i^{a_i} = 2 prod Gamma(b_i) / Gamma(sum b_i), b_i = (a_i + 1)/2; zero if any a_i is odd.
double monomial_integral(const std::vector<int>& alpha) {
    double num = 2.0;
    double bsum = 0.0;
    for (int a : alpha) {
        if (a % 2) return 0.0;
        const double b = 0.5 * (a + 1);
        num *= std::tgamma(b);
        bsum += b;
    }
    return num / std::tgamma(bsum);
}

void for_each_exponent(int dim, int max_degree, std::vector<int>& cur, const auto& fn) {
    if (static_cast<int>(cur.size()) == dim) {
        fn(cur);
        return;
    }
    int used = 0;
    for (int a : cur) used += a;
    for (int a = 0; a + used <= max_degree; ++a) {
        cur.push_back(a);
        for_each_exponent(dim, max_degree, cur, fn);
        cur.pop_back();
    }
}

double apply(const SphericalRule& rule, const std::vector<int>& alpha) {
    double s = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        double v = rule.weights[i];
        for (std::size_t k = 0; k < alpha.size(); ++k) v *= std::pow(rule.nodes[i](static_cast<Eigen::Index>(k)), alpha[k]);
        s += v;
    }
    return s;
}

} // namespace

TEST_CASE("Gauss-Legendre integrates polynomials up to degree 2m-1") {
    std::vector<double> x, w;
    for (int m : {1, 4, 9, 20}) {
        gauss_legendre(m, x, w);
        for (int k = 0; k <= 2 * m - 1; ++k) {
            double s = 0.0;
            for (int i = 0; i < m; ++i) s += w[i] * std::pow(x[i], k);
            const double exact = k % 2 ? 0.0 : 2.0 / (k + 1);
            CHECK(s == doctest::Approx(exact).epsilon(1e-13));
        }
        for (int i = 1; i < m; ++i) CHECK(x[i] > x[i - 1]);
    }
}

TEST_CASE("unit sphere areas") {
    CHECK(unit_sphere_area(1) == doctest::Approx(2 * M_PI));
    CHECK(unit_sphere_area(2) == doctest::Approx(4 * M_PI));
    CHECK(unit_sphere_area(3) == doctest::Approx(2 * M_PI * M_PI));
}

TEST_CASE("spherical rules: weights, nodes and exactness") {
    for (int n : {2, 3}) {
        for (int order : {4, 7, 12}) {
            const auto rule = build_rule(n, order);
            double wsum = 0.0;
            for (std::size_t i = 0; i < rule.size(); ++i) {
                CHECK(rule.weights[i] > 0.0);
                CHECK(rule.nodes[i].norm() == doctest::Approx(1.0).epsilon(1e-15));
                CHECK(rule.nodes[i].size() == n + 1);
                wsum += rule.weights[i];
            }
            CHECK(std::abs(wsum - unit_sphere_area(n)) <= 1e-12 * unit_sphere_area(n));
            std::vector<int> cur;
            for_each_exponent(n + 1, rule.exact_degree(), cur, [&](const std::vector<int>& alpha) {
                const double exact = monomial_integral(alpha);
                CHECK(std::abs(apply(rule, alpha) - exact) <= 1e-12 * unit_sphere_area(n));
            });
        }
    }
}

TEST_CASE("spec examples for the n = 2 rule") {
    const auto rule = build_rule(2, 8);
    CHECK(apply(rule, {2, 0, 0}) == doctest::Approx(4 * M_PI / 3).epsilon(1e-13));
    CHECK(std::abs(apply(rule, {1, 0, 0})) < 1e-14);
    CHECK(std::abs(apply(rule, {0, 3, 0})) < 1e-14);
}

TEST_CASE("rule construction errors") {
    CHECK_THROWS_AS(build_rule(2, 3), ConfigError);
    CHECK_THROWS_AS(build_rule(4, 8), ConfigError);
    CHECK_THROWS_AS(build_rule(1, 8), ConfigError);
}
