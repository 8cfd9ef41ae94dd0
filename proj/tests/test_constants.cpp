#include <doctest.h>

#include "starpinch/constants.hpp"
#include "starpinch/errors.hpp"
#include "starpinch/quadrature.hpp"
#include "starpinch/symfun.hpp"

#include <cmath>

using namespace starpinch;

TEST_CASE("K2 three-case formula") {
    CHECK(K2(0.0, 1.0, 1.0, 2.0, 3.0) == doctest::Approx(7.0));
    CHECK(K2(1.0, 1.0, 1.0, 0.0, 0.5) == doctest::Approx(1.0));
    CHECK(K2(-1.0, 2.0, 4.0, 1.0, 0.0) == doctest::Approx(0.5));
    CHECK(K2(4.0, 1.0, 2.0, 1.0, 1.0) == doctest::Approx(0.5 * 1.5));
    CHECK(K2(-1.0, 1.0, 1.0, 1.0, 1.0) == doctest::Approx(std::cosh(1.0) + std::sinh(1.0)));
    CHECK_THROWS_AS(K2(0.0, 1.0, 0.0, 1.0, 1.0), HypothesisError);
    // monotone in B_sup and R for delta <= 0
    for (double delta : {-1.0, 0.0}) {
        CHECK(K2(delta, 1.0, 1.0, 2.0, 1.0) > K2(delta, 1.0, 1.0, 1.0, 1.0));
        CHECK(K2(delta, 1.0, 1.0, 1.0, 2.0) > K2(delta, 1.0, 1.0, 1.0, 1.0));
    }
}

TEST_CASE("K3 and eps1") {
    CHECK(K3(1.0, 1.0, 1.0, 2, 1.0) == doctest::Approx(1.0));
    CHECK(K3(1.0, 1.0, 2.0, 3, 1.0) == doctest::Approx(std::pow(2.0, 8.0 / 3.0)));
    CHECK(K3(7.0, 2.0, 4 * M_PI, 2, 1.0) == doctest::Approx(7.0 * 4.0 * std::pow(4 * M_PI, 3)));
    CHECK(K3(1.0, 1.0, 1.0, 2, 2.0) == doctest::Approx(16.0));
    CHECK_THROWS(K3(0.0, 1.0, 1.0, 2, 1.0));
    CHECK(eps1(0.1, 10.0, 2) == doctest::Approx(1e-7));
    CHECK(eps1(1.0, 1.0, 3) == 1.0);
    CHECK(eps1(0.2, 1.0, 2) > eps1(0.1, 1.0, 2));
    CHECK(eps1(0.1, 1e300, 2) < 1e-300);
    CHECK_THROWS(eps1(0.0, 1.0, 2));
}

TEST_CASE("final bound") {
    ProofConstants pc;
    pc.c_RS = 1.0;
    pc.K3 = 1.0;
    pc.gamma = 1.0 / 6.0;
    pc.eps1 = 1.0;
    CHECK(final_bound(1e-4, 1.0, pc).value == doctest::Approx(std::pow(1e-4, 1.0 / 6.0)));
    CHECK(final_bound(1e-4, 1.0, pc).value == doctest::Approx(0.2154).epsilon(1e-3));
    CHECK(final_bound(0.0, 1.0, pc).value == 0.0);
    CHECK(final_bound(0.0, 1.0, pc).applicable);
    pc.eps1 = 1e-5;
    CHECK_FALSE(final_bound(1e-4, 1.0, pc).applicable);
    // monotone and concave
    const double a = final_bound(0.1, 1.0, pc).value, b = final_bound(0.2, 1.0, pc).value, c = final_bound(0.3, 1.0, pc).value;
    CHECK(b > a);
    CHECK(c > b);
    CHECK(b - a > c - b);
}

TEST_CASE("assembled constants: invariants, dependency ledger and determinism") {
    SurfaceQuantities q;
    q.n = 3;
    q.r = 2;
    q.delta = -1.0;
    q.h = 2.0;
    q.minH_partial = 0.4;
    q.minH_rplus1 = 1.5;
    q.B_sup = 1.8;
    q.volume = 3.0;
    q.R0 = 0.7;
    q.R = 0.9;
    ConstantsConfig cfg;
    cfg.c_n = 0.1;
    cfg.b = {1, 1, 1, 0.7};
    const auto a = assemble_constants(q, cfg);
    const auto b = assemble_constants(q, cfg);
    CHECK(a.K3 == b.K3);
    CHECK(a.eps1 == std::pow(cfg.eps0, 8.0) / a.K3);
    CHECK(a.gamma == cfg.alpha / 8.0);
    CHECK(a.K1 == doctest::Approx(K1(3, 2, 0.4, 2.0, 1.8, 0.1, cfg.b)));
    CHECK(a.K2 == doctest::Approx(K2(-1.0, a.K1, 0.7, 1.8, 0.9)));
    const SpaceFormModel m(-1.0, 4);
    CHECK(a.c_n_phi == doctest::Approx(default_c_n_phi(std::pow(unit_sphere_area(3), -1.0 / 3), m, 0.9, 3)));
    CHECK(a.dependencies.size() == 10);
    CHECK(a.dependencies.at("R0") == 0.7);
    CHECK(a.provenance.count("alpha") == 1);
    CHECK(a.K1 > 0);
    CHECK(a.K2 > 0);
    CHECK(a.K3 > 0);
    cfg.k1_mode = K1Mode::HrPlus1;
    const auto c = assemble_constants(q, cfg);
    CHECK(c.K1 == doctest::Approx(K1_prime(3, 2, 0.4, 1.5, 1.8, 0.1, cfg.b)));
    cfg.c_n = 0.0;
    CHECK_THROWS_AS(assemble_constants(q, cfg), ConfigError);
    q.r = 1;
    CHECK(assemble_constants(q, cfg).K1 == 6.0);
    CHECK(parse_k1_mode("Hr1") == K1Mode::HrPlus1);
    CHECK_THROWS_AS(parse_k1_mode("x"), ConfigError);
}

TEST_CASE("c_{n,phi} default") {
    CHECK(default_c_n_phi(2.0, SpaceFormModel(0.0, 3), 5.0, 2) == 2.0);
    const SpaceFormModel hyp(-1.0, 3);
    const double s = hyp.chart_norm(1.0);
    CHECK(default_c_n_phi(1.0, hyp, 1.0, 2) == doctest::Approx(std::pow(1.0 / (1.0 - s * s / 4), 2)));
}
