#include <doctest.h>

#include "starpinch/errors.hpp"
#include "starpinch/integrals.hpp"
#include "starpinch/rng.hpp"
#include "starpinch/surface.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>
#include <Eigen/QR>
#include <cmath>

using namespace starpinch;

namespace {

RadialSurface sphere(int n, double delta, double rho) {
    return RadialSurface(n, SpaceFormModel(delta, n + 1), rho);
}

// Harmonic index l^2 + l + m.
int harmonic(int l, int m) { return l * l + l + m; }

Eigen::VectorXd random_direction(const CounterRng& rng, std::uint64_t i, int dim) {
    Eigen::VectorXd u(dim);
    for (int a = 0; a < dim; ++a) u(a) = rng.normal(4, i * 8 + static_cast<std::uint64_t>(a));
    return u.normalized();
}

// Fundamental forms from Richardson-extrapolated central differences of X(w(s)).
struct FdForms {
    Eigen::MatrixXd g, B;
};

FdForms finite_difference_forms(const RadialSurface& surf, const Eigen::VectorXd& u) {
    const int n = surf.n();
    const Eigen::MatrixXd E = tangent_frame(u);
    auto X = [&](const Eigen::VectorXd& s) {
        const Eigen::VectorXd w = (u + E * s) / std::sqrt(1.0 + s.squaredNorm());
        return surf.point(w);
    };
    auto d1 = [&](int i, double h) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
        e(i) = h;
        return Eigen::VectorXd((X(e) - X(-e)) / (2 * h));
    };
    auto d2 = [&](int i, int j, double h) {
        Eigen::VectorXd ei = Eigen::VectorXd::Zero(n), ej = Eigen::VectorXd::Zero(n);
        ei(i) = h;
        ej(j) = h;
        return Eigen::VectorXd((X(ei + ej) - X(ei - ej) - X(ej - ei) + X(-ei - ej)) / (4 * h * h));
    };
    const double h = 1e-3;
    Eigen::MatrixXd T(n + 1, n);
    for (int i = 0; i < n; ++i) T.col(i) = (4 * d1(i, h / 2) - d1(i, h)) / 3;
    // normal: orthogonal complement of the tangent columns, pointing towards the origin
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(T);
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n + 1, n + 1);
    Eigen::VectorXd nf = Q.col(n);
    const Eigen::VectorXd X0 = X(Eigen::VectorXd::Zero(n));
    if (nf.dot(X0) > 0) nf = -nf;
    FdForms out;
    const SpaceFormModel& m = surf.model();
    const double lam = m.conformal_factor(X0);
    const double dphi = m.grad_log_conformal_factor(X0).dot(nf);
    Eigen::MatrixXd gf = T.transpose() * T, Bf(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) Bf(i, j) = ((4 * d2(i, j, h / 2) - d2(i, j, h)) / 3).dot(nf);
    out.g = lam * lam * gf;
    out.B = lam * (Bf - dphi * gf);
    return out;
}

} // namespace

TEST_CASE("round Euclidean sphere") {
    for (double rho : {0.5, 2.0}) {
        const auto s = sphere(2, 0.0, rho);
        const auto p = evaluate_point(s, Eigen::Vector3d(0.0, 0.6, 0.8));
        for (double k : p.kappa) CHECK(k == doctest::Approx(1.0 / rho).epsilon(1e-14));
        CHECK(p.support == doctest::Approx(-rho).epsilon(1e-14));
        CHECK(p.area_element == doctest::Approx(rho * rho).epsilon(1e-14));
        CHECK(p.r == doctest::Approx(rho));
    }
    const auto rep = starshape_report(sphere(2, 0.0, 2.0), build_rule(2, 8));
    CHECK(rep.sign == -1);
    CHECK(rep.R0 == doctest::Approx(2.0));
    CHECK(rep.R == doctest::Approx(2.0));
}

TEST_CASE("geodesic spheres: principal curvatures c_delta / s_delta") {
    const auto rule = build_rule(2, 6);
    for (double delta : {-1.0, 0.0, 1.0}) {
        for (double rho : {0.3, 0.7, 1.2}) {
            const auto sampled = sample_surface(sphere(2, delta, rho), rule);
            const double expected = c_delta(rho, delta) / s_delta(rho, delta);
            for (const auto& p : sampled.points)
                for (double k : p.kappa) CHECK(std::abs(k - expected) <= 1e-9);
            CHECK(B_sup_norm(sampled) == doctest::Approx(expected).epsilon(1e-12));
        }
    }
    const auto p = evaluate_point(sphere(3, 1.0, M_PI / 4), Eigen::Vector4d(0.5, 0.5, 0.5, 0.5));
    for (double k : p.kappa) CHECK(k == doctest::Approx(1.0).epsilon(1e-12));
    const auto q = evaluate_point(sphere(2, -1.0, 0.9), Eigen::Vector3d(1, 0, 0));
    CHECK(q.kappa[0] == doctest::Approx(1.0 / std::tanh(0.9)).epsilon(1e-12));
}

TEST_CASE("exact derivatives agree with finite differences") {
    const CounterRng rng(42);
    for (double delta : {-1.0, 0.0, 1.0}) {
        RadialSurface s2(2, SpaceFormModel(delta, 3), 0.8, BasisKind::Harmonic,
                         {{harmonic(2, 1), 0.1}, {harmonic(3, -2), 0.07}, {harmonic(1, 0), 0.05}});
        RadialSurface s3(3, SpaceFormModel(delta, 4), 0.7, BasisKind::Monomial, {{2, 0.1}, {7, 0.08}, {12, -0.05}});
        for (const RadialSurface* s : {&s2, &s3}) {
            for (std::uint64_t i = 0; i < 5; ++i) {
                const auto u = random_direction(rng, i + 10 * static_cast<std::uint64_t>(s->n()), s->n() + 1);
                const auto p = evaluate_point(*s, u);
                const auto fd = finite_difference_forms(*s, u);
                CHECK((p.g_mat - fd.g).cwiseAbs().maxCoeff() <= 1e-7);
                CHECK((p.B_mat - fd.B).cwiseAbs().maxCoeff() <= 1e-7);
                CHECK(s->model().inner(p.X, p.nu, p.nu) == doctest::Approx(1.0).epsilon(1e-12));
                CHECK((p.g_mat - p.g_mat.transpose()).norm() == 0.0);
                CHECK((p.B_mat - p.B_mat.transpose()).norm() <= 1e-14);
                Eigen::LLT<Eigen::MatrixXd> llt(p.g_mat);
                CHECK(llt.info() == Eigen::Success);
                // kappa are the pencil eigenvalues
                for (double k : p.kappa) CHECK(std::abs((p.B_mat - k * p.g_mat).determinant()) <= 1e-10);
                for (std::size_t a = 1; a < p.kappa.size(); ++a) CHECK(p.kappa[a] >= p.kappa[a - 1]);
            }
        }
    }
}

TEST_CASE("flat model reproduces the flat data exactly") {
    RadialSurface s(2, SpaceFormModel(0.0, 3), 1.0, BasisKind::Harmonic, {{harmonic(2, 0), 0.2}});
    const auto p = evaluate_point(s, Eigen::Vector3d(0.6, 0.0, 0.8));
    CHECK(p.kappa == p.kappa_flat);
    CHECK(p.area_element == p.area_element_flat);
}

TEST_CASE("rotation equivariance of pointwise data") {
    RadialSurface s(2, SpaceFormModel(-1.0, 3), 0.8, BasisKind::Harmonic, {{harmonic(3, 1), 0.1}});
    const Eigen::Matrix3d q = Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, 3).normalized()).toRotationMatrix();
    const auto sr = s.rotated(q);
    const Eigen::Vector3d u = Eigen::Vector3d(0.3, -0.5, 0.8).normalized();
    const auto a = evaluate_point(s, u);
    const auto b = evaluate_point(sr, q * u);
    for (int i = 0; i < 2; ++i) CHECK(a.kappa[i] == doctest::Approx(b.kappa[i]).epsilon(1e-12));
    CHECK(a.support == doctest::Approx(b.support).epsilon(1e-12));
    CHECK((q * a.X - b.X).norm() <= 1e-13);
}

TEST_CASE("starshapedness and validity failures") {
    const auto rule = build_rule(2, 8);
    RadialSurface mild(2, SpaceFormModel(0.0, 3), 1.0, BasisKind::Harmonic, {{harmonic(2, 0), 0.1}});
    const auto rep = starshape_report(mild, rule);
    CHECK(rep.sign == -1);
    CHECK(rep.R0 > 0.8);
    CHECK(rep.R0 < 1.2);
    RadialSurface broken(2, SpaceFormModel(0.0, 3), 1.0, BasisKind::Harmonic, {{harmonic(2, 0), -3.0}});
    CHECK_THROWS_AS(starshape_report(broken, rule), HypothesisError);
    CHECK_THROWS_AS(broken.validate_on(rule), HypothesisError);
    RadialSurface outside(2, SpaceFormModel(1.0, 3), 1.6);
    CHECK_THROWS_AS(sample_surface(outside, rule), HypothesisError);
    CHECK_THROWS_AS(RadialSurface(3, SpaceFormModel(0.0, 4), 1.0, BasisKind::Harmonic), ConfigError);
    CHECK_THROWS_AS(RadialSurface(2, SpaceFormModel(0.0, 3), -1.0), ConfigError);
    CHECK_THROWS_AS(RadialSurface(2, SpaceFormModel(0.0, 3), 1.0, BasisKind::Monomial, {{10, 0.1}}), ConfigError);
}

TEST_CASE("B_sup grows under a non-umbilic perturbation") {
    RadialSurface s(2, SpaceFormModel(0.0, 3), 1.0, BasisKind::Monomial, {{9, 0.3}});  // 1 + 0.3 z^2
    const auto sampled = sample_surface(s, build_rule(2, 16));
    double rmax = 0.0;
    for (const auto& p : sampled.points) rmax = std::max(rmax, p.r);
    CHECK(B_sup_norm(sampled) > 1.0 / rmax);
}

TEST_CASE("surface integrals and normalized norms") {
    for (double rho : {1.0, 2.0}) {
        const auto s = sphere(2, 0.0, rho);
        const auto area = surface_integral(s, [](const SurfacePointData&) { return 1.0; }, 8, 16);
        CHECK(area.value == doctest::Approx(4 * M_PI * rho * rho).epsilon(1e-13));
        CHECK(area.refinement_error <= 1e-12);
    }
    const auto support = surface_integral(sphere(2, 0.0, 1.0), [](const SurfacePointData& p) { return p.support; }, 8, 16);
    CHECK(support.value == doctest::Approx(-4 * M_PI).epsilon(1e-13));
    // geodesic sphere areas: |S^n| s_delta(rho)^n
    for (double delta : {-1.0, 1.0}) {
        const auto sampled = sample_surface(sphere(3, delta, 0.7), build_rule(3, 6));
        CHECK(surface_volume(sampled) == doctest::Approx(2 * M_PI * M_PI * std::pow(s_delta(0.7, delta), 3)).epsilon(1e-12));
    }

    RadialSurface s(2, SpaceFormModel(-1.0, 3), 0.9, BasisKind::Harmonic, {{harmonic(2, 1), 0.15}});
    const auto sampled = sample_surface(s, build_rule(2, 16));
    const std::vector<double> ones(sampled.points.size(), 1.0);
    for (double p : {1.0, 2.0, 3.0}) CHECK(std::abs(lp_norm(sampled, ones, p) - 1.0) <= 1e-13);
    const std::vector<double> c(sampled.points.size(), -2.5);
    CHECK(lp_norm(sampled, c, 2.0) == doctest::Approx(2.5).epsilon(1e-13));
    const auto f = node_field(sampled, [](const SurfacePointData& p) { return p.kappa[1] - p.kappa[0]; });
    double prev = 0.0;
    for (double p : {1.0, 1.5, 2.0, 3.0, 5.0}) {
        const double v = lp_norm(sampled, f, p);
        CHECK(v >= prev - 1e-12);
        prev = v;
    }
    CHECK(lp_norm(sampled, f, INFINITY) >= prev - 1e-12);
    const auto tau = node_field(sample_surface(sphere(2, 0.0, 1.3), build_rule(2, 8)), [](const SurfacePointData& p) {
        return std::sqrt(curvature_profile(p.principal()).tau_sq);
    });
    CHECK(lp_norm(sample_surface(sphere(2, 0.0, 1.3), build_rule(2, 8)), tau, 2.0) <= 1e-14);
}

TEST_CASE("batch evaluation is independent of the thread count") {
    RadialSurface s(3, SpaceFormModel(1.0, 4), 0.6, BasisKind::Monomial, {{3, 0.1}, {9, 0.05}});
    const auto rule = build_rule(3, 6);
    const auto a = sample_surface(s, rule, {}, 1);
    const auto b = sample_surface(s, rule, {}, 4);
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        CHECK(a.points[i].kappa == b.points[i].kappa);
        CHECK(a.points[i].area_element == b.points[i].area_element);
    }
}
