#include "starpinch/identities.hpp"

#include "starpinch/errors.hpp"
#include "starpinch/parallel.hpp"
#include "starpinch/spaceform.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace starpinch {

ResidualReport identity_report(std::string name, double value, double tolerance, double refinement_error) {
    ResidualReport rep{std::move(name), value, tolerance, refinement_error, false, false};
    rep.pass = std::isfinite(value) && std::abs(value) <= tolerance + refinement_error;
    return rep;
}

ResidualReport inequality_report(std::string name, double value, double tolerance, double refinement_error) {
    ResidualReport rep{std::move(name), value, tolerance, refinement_error, false, true};
    rep.pass = std::isfinite(value) && value >= -(tolerance + refinement_error);
    return rep;
}

namespace {

std::vector<CurvatureProfile> profiles(const SampledSurface& sampled) {
    std::vector<CurvatureProfile> out;
    out.reserve(sampled.points.size());
    for (const auto& p : sampled.points) out.push_back(curvature_profile(p.principal()));
    return out;
}

} // namespace

double hsiung_minkowski_value(const SampledSurface& sampled, int k, double delta) {
    const int n = sampled.rule.n;
    if (k < 0 || k > n - 1) throw std::out_of_range(fmt::format("Hsiung-Minkowski: k = {} outside 0..{}", k, n - 1));
    std::vector<double> f(sampled.points.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto& p = sampled.points[i];
        const auto prof = curvature_profile(p.principal());
        f[i] = prof.H[static_cast<std::size_t>(k + 1)] * p.support + c_delta(p.r, delta) * prof.H[static_cast<std::size_t>(k)];
    }
    return mean_value(sampled, f);
}

ResidualReport hsiung_minkowski_residual(const RadialSurface& surface, int k, int order, int check_order,
                                         double tolerance, const EvalOptions& opts, int threads) {
    const double delta = surface.model().delta();
    const auto coarse = sample_surface(surface, build_rule(surface.n(), order), opts, threads);
    const auto fine = sample_surface(surface, build_rule(surface.n(), check_order), opts, threads);
    const double v = hsiung_minkowski_value(coarse, k, delta);
    const double vf = hsiung_minkowski_value(fine, k, delta);
    return identity_report(fmt::format("hsiung_minkowski_k{}", k), v, tolerance, std::abs(v - vf));
}

GaussCheck gauss_algebraic_check(const PrincipalCurvatures& kappa, double delta, double tolerance) {
    const auto p = curvature_profile(kappa);
    const int n = p.n();
    double scale = 0.0;
    for (double k : p.kappa) scale += k * k;
    const double raw = std::abs(p.tau_sq - n * (n - 1.0) * (p.H[1] * p.H[1] - p.H[2]));
    GaussCheck out;
    out.report = identity_report("gauss_algebraic", scale > 0.0 ? raw / scale : raw, tolerance);
    out.scal = n * (n - 1.0) * (p.H[2] + delta);
    return out;
}

GaussCheck gauss_algebraic_check(const SurfacePointData& point, double delta, double tolerance) {
    return gauss_algebraic_check(point.principal(), delta, tolerance);
}

CauchySchwarzTerms cauchy_schwarz_terms(const SampledSurface& sampled) {
    const int n = sampled.rule.n;
    const auto prof = profiles(sampled);
    std::vector<double> tau(prof.size());
    for (std::size_t i = 0; i < prof.size(); ++i) tau[i] = std::sqrt(prof[i].tau_sq);
    const double B = B_sup_norm(sampled);
    const double l2 = lp_norm(sampled, tau, 2.0);
    const double lp = lp_norm(sampled, tau, n + 1.0);
    return {std::pow(lp, 2.0 * (n + 1)), std::pow(B, 2.0 * n) * l2 * l2};
}

ResidualReport cauchy_schwarz_chain_check(const SampledSurface& sampled, double tolerance) {
    const auto t = cauchy_schwarz_terms(sampled);
    const double scale = std::max(t.rhs, t.lhs);
    return inequality_report("cauchy_schwarz_chain", scale > 0.0 ? (t.rhs - t.lhs) / scale : 0.0, tolerance);
}

ResidualReport lemma1_gap(const SurfacePointData& point, int r, double K1, double tolerance) {
    const auto p = curvature_profile(point.principal());
    const int n = p.n();
    if (r < 1 || r > n - 1) throw std::out_of_range("lemma1_gap: r must satisfy 1 <= r <= n - 1");
    if (r > 1 && !(p.H[static_cast<std::size_t>(r + 1)] > 0.0))
        throw HypothesisError(fmt::format("lemma1_gap: H_{} = {:.6g} <= 0", r + 1, p.H[static_cast<std::size_t>(r + 1)]));
    const double gap = K1 * (p.H[1] * p.H[static_cast<std::size_t>(r)] - p.H[static_cast<std::size_t>(r + 1)]) - p.tau_sq;
    return inequality_report(fmt::format("lemma_tau_bound_r{}", r), gap, tolerance);
}

ResidualReport lemma1_gap(const SampledSurface& sampled, int r, double K1, double tolerance) {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < sampled.points.size(); ++i) {
        try {
            worst = std::min(worst, lemma1_gap(sampled.points[i], r, K1, tolerance).value);
        } catch (const HypothesisError& e) {
            throw HypothesisError(fmt::format("{} at node {}", e.what(), i));
        }
    }
    return inequality_report(fmt::format("lemma_tau_bound_r{}", r), worst, tolerance);
}

ResidualReport tau_l2_epsilon_bound(const SampledSurface& sampled, int r, double h, double K2, double tolerance) {
    const auto prof = profiles(sampled);
    std::vector<double> eps(prof.size()), tau_sq(prof.size());
    for (std::size_t i = 0; i < prof.size(); ++i) {
        eps[i] = std::abs(prof[i].H[static_cast<std::size_t>(r)] - h);
        tau_sq[i] = prof[i].tau_sq;
    }
    const double lhs = mean_value(sampled, tau_sq);
    const double rhs = K2 * mean_value(sampled, eps);
    return inequality_report(fmt::format("tau_l2_eps_bound_r{}", r), rhs - lhs, tolerance);
}

ResidualReport michael_simon_ratio(const SampledSurface& sampled, double Kn) {
    const int n = sampled.rule.n;
    CompensatedSum H, V;
    for (std::size_t i = 0; i < sampled.points.size(); ++i) {
        const auto& p = sampled.points[i];
        const double w = p.area_element_flat * sampled.rule.weights[i];
        H.add(std::abs(p.mean_flat()) * w);
        V.add(w);
    }
    const double value = Kn * H.value() - std::pow(V.value(), (n - 1.0) / n);
    return inequality_report("michael_simon", value, 0.0);
}

double default_michael_simon_constant(int n) { return std::pow(unit_sphere_area(n), -1.0 / n); }

void write_residual_csv(std::ostream& os, const std::vector<ResidualReport>& rows) {
    os << "name,value,tolerance,refinement_error,pass\n";
    for (const auto& r : rows)
        os << fmt::format("{},{:.17g},{:.17g},{:.17g},{}\n", r.name, r.value, r.tolerance, r.refinement_error,
                          r.pass ? "true" : "false");
}

} // namespace starpinch
