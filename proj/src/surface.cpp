#include "starpinch/surface.hpp"

#include "starpinch/errors.hpp"
#include "starpinch/parallel.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <stdexcept>

namespace starpinch {

RadialSurface::RadialSurface(int n, SpaceFormModel model, double rho0, BasisKind basis,
                             std::vector<PerturbationTerm> terms)
    : n_(n), model_(model), rho0_(rho0), basis_(basis), terms_(std::move(terms)),
      rotation_(Eigen::MatrixXd::Identity(n + 1, n + 1)) {
    if (n < 2) throw ConfigError("surface dimension n must be at least 2");
    if (model.ambient_dim() != n + 1) throw ConfigError("space form dimension must be n + 1");
    if (!(rho0 > 0.0) || !std::isfinite(rho0)) throw ConfigError("rho0 must be positive and finite");
    if (basis == BasisKind::Harmonic && n != 2) throw ConfigError("harmonic basis requires n = 2 (use monomial)");
    for (const auto& t : terms_) {
        if (t.index < 0) throw ConfigError(fmt::format("negative basis index {}", t.index));
        if (basis == BasisKind::Monomial && t.index >= monomial_count(n))
            throw ConfigError(fmt::format("monomial index {} out of range (max {})", t.index, monomial_count(n) - 1));
        if (!std::isfinite(t.amplitude)) throw ConfigError("perturbation amplitude must be finite");
    }
}

RadialSurface RadialSurface::rotated(const Eigen::MatrixXd& q) const {
    RadialSurface copy = *this;
    copy.rotation_ = q * rotation_;
    copy.rotated_ = !copy.rotation_.isIdentity(0.0);
    return copy;
}

RadialSurface RadialSurface::with_perturbation_scale(double s) const {
    RadialSurface copy = *this;
    for (auto& t : copy.terms_) t.amplitude *= s;
    return copy;
}

double RadialSurface::radius_at(const Eigen::VectorXd& u) const {
    std::vector<double> v(u.data(), u.data() + u.size());
    return radius(v);
}

AmbientPoint RadialSurface::point(const Eigen::VectorXd& u) const {
    return model_.chart_norm(radius_at(u)) * u;
}

void RadialSurface::validate_on(const SphericalRule& rule) const {
    const double rmax = model_.max_geodesic_radius();
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double rho = radius_at(rule.nodes[i]);
        if (!(rho > 0.0))
            throw HypothesisError(fmt::format("radial function nonpositive (rho = {:.6g}) at node {}", rho, i));
        if (!(rho < rmax))
            throw HypothesisError(fmt::format("surface leaves the chart (rho = {:.6g} >= {:.6g}) at node {}", rho, rmax, i));
    }
}

double SurfacePointData::mean_flat() const {
    double s = 0.0;
    for (double k : kappa_flat) s += k;
    return s / static_cast<double>(kappa_flat.size());
}

Eigen::MatrixXd tangent_frame(const Eigen::VectorXd& u) {
    const Eigen::Index d = u.size();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(u);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
    return q.rightCols(d - 1);
}

namespace {

std::vector<double> pencil_eigenvalues(const Eigen::MatrixXd& B, const Eigen::MatrixXd& g) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(B, g, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
    if (es.info() != Eigen::Success) throw NumericalError("eigen-solve of (B, g) failed");
    std::vector<double> k(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(k.begin(), k.end());
    return k;
}

} // namespace

SurfacePointData evaluate_point(const RadialSurface& surface, const Eigen::VectorXd& u, const EvalOptions& opts) {
    const int n = surface.n();
    const int d = n + 1;
    const SpaceFormModel& model = surface.model();
    const Eigen::MatrixXd E = tangent_frame(u);

    // w(s) = (u + E s) / sqrt(1 + |s|^2): orthonormal chart of S^n centred at u.
    std::vector<Jet> s;
    for (int i = 0; i < n; ++i) s.push_back(Jet::variable(0.0, i, n));
    Jet norm2 = Jet::constant(1.0, n);
    for (const auto& si : s) norm2 += si * si;
    const Jet inv = inverse(sqrt(norm2));
    std::vector<Jet> w(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a) {
        Jet c = Jet::constant(u(a), n);
        for (int i = 0; i < n; ++i) c += E(a, i) * s[static_cast<std::size_t>(i)];
        w[static_cast<std::size_t>(a)] = c * inv;
    }

    const Jet rho = surface.radius(w);
    if (!(rho.v > 0.0)) throw HypothesisError(fmt::format("radial function nonpositive (rho = {:.6g})", rho.v));
    if (!(rho.v < model.max_geodesic_radius()))
        throw HypothesisError(fmt::format("surface leaves the chart (rho = {:.6g})", rho.v));
    const Jet chi = model.chart_norm(rho);

    SurfacePointData out;
    out.u = u;
    out.X = chi.v * u;
    out.r = rho.v;

    Eigen::MatrixXd Xs(d, n);  // tangent vectors X_i
    std::vector<Eigen::MatrixXd> Xss(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a) {
        const Jet xa = chi * w[static_cast<std::size_t>(a)];
        Xs.row(a) = xa.g.transpose();
        Xss[static_cast<std::size_t>(a)] = xa.h;
    }

    // Outward flat normal of a radial graph: chi u - grad_S chi.
    Eigen::VectorXd outward = chi.v * u - E * chi.g;
    const Eigen::VectorXd n_flat = -outward.normalized();

    Eigen::MatrixXd g_flat = Xs.transpose() * Xs;
    Eigen::MatrixXd B_flat(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int a = 0; a < d; ++a) acc += Xss[static_cast<std::size_t>(a)](i, j) * n_flat(a);
            B_flat(i, j) = acc;
        }
    B_flat = 0.5 * (B_flat + B_flat.transpose()).eval();

    out.kappa_flat = pencil_eigenvalues(B_flat, g_flat);
    out.area_element_flat = std::sqrt(g_flat.determinant());

    // h = lambda^2 |dx|^2:  nu = n_flat / lambda,  g = lambda^2 g_flat,
    // B = lambda (B_flat - <grad phi, n_flat> g_flat).
    const double lambda = model.conformal_factor(out.X);
    const double dphi_n = model.grad_log_conformal_factor(out.X).dot(n_flat);
    out.nu = n_flat / lambda;
    if (model.delta() == 0.0) {
        out.g_mat = g_flat;
        out.B_mat = B_flat;
    } else {
        out.g_mat = (lambda * lambda) * g_flat;
        out.B_mat = lambda * (B_flat - dphi_n * g_flat);
    }
    if (opts.wrong_sign_convention) out.B_mat = -out.B_mat;

    out.kappa = pencil_eigenvalues(out.B_mat, out.g_mat);
    out.area_element = std::sqrt(out.g_mat.determinant());
    out.support = lambda * out.X.dot(n_flat);

    for (double k : out.kappa)
        if (!std::isfinite(k)) throw NumericalError("non-finite principal curvature");
    return out;
}

SampledSurface sample_surface(const RadialSurface& surface, const SphericalRule& rule, const EvalOptions& opts,
                              int threads) {
    if (rule.n != surface.n()) throw ConfigError("quadrature rule dimension does not match the surface");
    SampledSurface out;
    out.rule = rule;
    out.points.resize(rule.size());
    parallel_for(rule.size(), threads, [&](std::size_t i) {
        try {
            out.points[i] = evaluate_point(surface, rule.nodes[i], opts);
        } catch (const HypothesisError& e) {
            throw HypothesisError(fmt::format("{} at node {}", e.what(), i));
        }
    });
    return out;
}

StarshapeReport starshape_report(const SampledSurface& sampled) {
    StarshapeReport rep;
    rep.R0 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < sampled.points.size(); ++i) {
        const auto& p = sampled.points[i];
        const int sgn = p.support > 0.0 ? 1 : (p.support < 0.0 ? -1 : 0);
        if (sgn == 0 || (rep.sign != 0 && sgn != rep.sign))
            throw HypothesisError(fmt::format("not starshaped: <Z, nu> = {:.6g} at node {} (u = [{:.6g}])", p.support,
                                              i, fmt::join(p.u.data(), p.u.data() + p.u.size(), ", ")));
        rep.sign = sgn;
        rep.R0 = std::min(rep.R0, std::abs(p.support));
        rep.R = std::max(rep.R, p.r);
    }
    return rep;
}

StarshapeReport starshape_report(const RadialSurface& surface, const SphericalRule& rule, int threads) {
    return starshape_report(sample_surface(surface, rule, {}, threads));
}

double B_sup_norm(const SampledSurface& sampled) {
    double m = 0.0;
    for (const auto& p : sampled.points)
        for (double k : p.kappa) m = std::max(m, std::abs(k));
    return m;
}

double B_sup_norm(const RadialSurface& surface, const SphericalRule& rule, int threads) {
    return B_sup_norm(sample_surface(surface, rule, {}, threads));
}

} // namespace starpinch
