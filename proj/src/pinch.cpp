#include "starpinch/pinch.hpp"

#include "starpinch/errors.hpp"
#include "starpinch/integrals.hpp"
#include "starpinch/optimize.hpp"
#include "starpinch/parallel.hpp"
#include "starpinch/rng.hpp"
#include "starpinch/symfun.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <numeric>

namespace starpinch {

namespace {

constexpr std::uint64_t kFitStream = 20;

std::vector<CurvatureProfile> profiles_of(const SampledSurface& sampled) {
    std::vector<CurvatureProfile> out;
    out.reserve(sampled.points.size());
    for (const auto& p : sampled.points) out.push_back(curvature_profile(p.principal()));
    return out;
}

std::vector<double> curvature_field(const std::vector<CurvatureProfile>& prof, int k) {
    std::vector<double> f(prof.size());
    for (std::size_t i = 0; i < prof.size(); ++i) f[i] = prof[i].H[static_cast<std::size_t>(k)];
    return f;
}

} // namespace

EpsilonField epsilon_field(const SampledSurface& sampled, int r, std::optional<double> h) {
    const int n = sampled.rule.n;
    if (r < 1 || r > n - 1) throw ConfigError(fmt::format("r = {} outside 1..{}", r, n - 1));
    const auto prof = profiles_of(sampled);
    if (r > 1) {
        for (std::size_t i = 0; i < prof.size(); ++i)
            if (!(prof[i].H[static_cast<std::size_t>(r + 1)] > 0.0))
                throw HypothesisError(fmt::format("H_{} = {:.6g} <= 0 at node {}", r + 1,
                                                  prof[i].H[static_cast<std::size_t>(r + 1)], i));
    }
    const auto Hr = curvature_field(prof, r);
    EpsilonField out;
    out.h = h ? *h : mean_value(sampled, Hr);
    out.eps.resize(Hr.size());
    for (std::size_t i = 0; i < Hr.size(); ++i) out.eps[i] = Hr[i] - out.h;
    return out;
}

SurfaceQuantities surface_quantities(const SampledSurface& sampled, double delta, int r, std::optional<double> h) {
    const int n = sampled.rule.n;
    if (r < 1 || r > n - 1) throw ConfigError(fmt::format("r = {} outside 1..{}", r, n - 1));
    const auto star = starshape_report(sampled);
    const auto prof = profiles_of(sampled);
    SurfaceQuantities q;
    q.n = n;
    q.r = r;
    q.delta = delta;
    q.minH_rplus1 = std::numeric_limits<double>::infinity();
    q.minH_partial = std::numeric_limits<double>::infinity();
    for (const auto& p : prof) {
        q.minH_rplus1 = std::min(q.minH_rplus1, p.H[static_cast<std::size_t>(r + 1)]);
        q.minH_partial = std::min(q.minH_partial, partial_H_extremal(r + 1, p.kappa));
    }
    q.h = h ? *h : mean_value(sampled, curvature_field(prof, r));
    q.B_sup = B_sup_norm(sampled);
    q.volume = surface_volume(sampled);
    q.R0 = star.R0;
    q.R = star.R;
    return q;
}

bool GateResult::pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const GateCheck& c) { return c.pass; });
}

bool GateResult::structural_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const GateCheck& c) { return c.pass || c.name == "eps_l1_le_eps1"; });
}

GateResult hypothesis_gate(const GateInputs& in) {
    GateResult g;
    g.checks.push_back({"starshaped", in.starshaped, in.starshaped ? "<Z,nu> has constant sign" : "<Z,nu> changes sign"});
    g.checks.push_back({"R0_positive", in.R0 > 0.0, fmt::format("R0 = {:.6g}", in.R0)});
    g.checks.push_back({"eps_linf_le_h_half", in.h > 0.0 && in.eps_linf <= 0.5 * in.h,
                        fmt::format("||eps||_inf = {:.6g}, h/2 = {:.6g}", in.eps_linf, 0.5 * in.h)});
    g.checks.push_back({"eps_l1_le_eps1", in.eps_l1 <= in.eps1,
                        fmt::format("||eps||_1 = {:.6g}, eps1 = {:.6g}", in.eps_l1, in.eps1)});
    if (in.r > 1)
        g.checks.push_back({"H_rplus1_positive", in.minH_rplus1 > 0.0, fmt::format("min H_{} = {:.6g}", in.r + 1, in.minH_rplus1)});
    else
        g.checks.push_back({"H_rplus1_positive", true, "not required for r = 1"});
    const bool inside = std::isfinite(in.R) && in.R < in.max_radius;
    g.checks.push_back({"contained_in_ball", inside, fmt::format("R = {:.6g}, chart limit {:.6g}", in.R, in.max_radius)});
    return g;
}

// ---------------------------------------------------------------------------
// Sphere fitting

namespace {

double fit_objective(const AmbientPoint& c, const std::vector<AmbientPoint>& samples, const std::vector<double>& w,
                     double wsum, const SpaceFormModel& model, double* mean_out = nullptr) {
    if (!model.contains(c)) return std::numeric_limits<double>::infinity();
    std::vector<double> d(samples.size());
    const std::vector<double> cv(c.data(), c.data() + c.size());
    CompensatedSum m;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        d[i] = geodesic_distance_generic(cv, samples[i], model);
        m.add(w[i] * d[i]);
    }
    const double mean = m.value() / wsum;
    CompensatedSum v;
    for (std::size_t i = 0; i < samples.size(); ++i) v.add(w[i] * (d[i] - mean) * (d[i] - mean));
    if (mean_out) *mean_out = mean;
    return v.value() / wsum;
}

Jet fit_objective_jet(const AmbientPoint& c, const std::vector<AmbientPoint>& samples, const std::vector<double>& w,
                      double wsum, const SpaceFormModel& model) {
    const int d = static_cast<int>(c.size());
    std::vector<Jet> cj;
    for (int a = 0; a < d; ++a) cj.push_back(Jet::variable(c(a), a, d));
    std::vector<Jet> dist;
    dist.reserve(samples.size());
    Jet mean = Jet::constant(0.0, d);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        dist.push_back(geodesic_distance_generic(cj, samples[i], model));
        mean += w[i] * dist.back();
    }
    mean = mean / wsum;
    Jet acc = Jet::constant(0.0, d);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const Jet e = dist[i] - mean;
        acc += w[i] * (e * e);
    }
    return acc / wsum;
}

} // namespace

SphereFit fit_geodesic_sphere(const std::vector<AmbientPoint>& samples, const SpaceFormModel& model,
                              const std::vector<double>& weights, const FitOptions& opts) {
    if (samples.empty()) throw ConfigError("sphere fit: no samples");
    const int d = static_cast<int>(samples.front().size());
    if (d > Jet::max_vars) throw ConfigError("sphere fit: ambient dimension too large");
    if (static_cast<int>(samples.size()) < d + 1) throw ConfigError("sphere fit: need at least n + 2 samples");
    std::vector<double> w = weights.empty() ? std::vector<double>(samples.size(), 1.0) : weights;
    if (w.size() != samples.size()) throw std::invalid_argument("sphere fit: weight count mismatch");
    CompensatedSum ws;
    for (double x : w) ws.add(x);
    const double wsum = ws.value();

    AmbientPoint centroid = AmbientPoint::Zero(d);
    for (std::size_t i = 0; i < samples.size(); ++i) centroid += w[i] * samples[i];
    centroid /= wsum;
    double spread = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) spread += w[i] * (samples[i] - centroid).squaredNorm();
    const double scale = std::max(std::sqrt(spread / wsum), 1e-12);

    const CounterRng rng(opts.seed);
    auto objective = [&](const Eigen::VectorXd& c) {
        const double f = fit_objective(c, samples, w, wsum, model);
        return std::isfinite(f) ? f : 1e30;
    };

    SimplexResult best;
    best.f = std::numeric_limits<double>::infinity();
    bool any_converged = false;
    for (int s = 0; s < opts.starts; ++s) {
        AmbientPoint start = centroid;
        if (s > 0)
            for (int a = 0; a < d; ++a)
                start(a) += 0.1 * scale * rng.normal(kFitStream, static_cast<std::uint64_t>(s * 8 + a));
        if (!model.contains(start)) start = centroid;
        const auto res = nelder_mead(objective, start, 0.1 * scale, 1e-8 * scale, opts.max_iter);
        any_converged = any_converged || res.converged;
        if (res.f < best.f) best = res;
    }
    if (!std::isfinite(best.f) || best.f >= 1e30) throw NumericalError("sphere fit: no start produced a finite objective");

    // Newton polish on the exact gradient and Hessian.
    AmbientPoint c = best.x;
    double fc = fit_objective(c, samples, w, wsum, model);
    for (int it = 0; it < 40; ++it) {
        const Jet F = fit_objective_jet(c, samples, w, wsum, model);
        const Eigen::MatrixXd H = F.h;
        const Eigen::VectorXd g = F.g;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
        Eigen::VectorXd step = -ldlt.solve(g);
        if (ldlt.info() != Eigen::Success || !step.allFinite() || g.dot(step) >= 0.0) step = -g;
        double t = 1.0;
        bool improved = false;
        for (int k = 0; k < 40; ++k, t *= 0.5) {
            const AmbientPoint trial = c + t * step;
            const double ft = fit_objective(trial, samples, w, wsum, model);
            if (ft < fc || (ft == fc && t * step.norm() < 1e-14 * (1.0 + c.norm()))) {
                c = trial;
                improved = ft < fc;
                fc = ft;
                break;
            }
        }
        if (!improved || t * step.norm() <= 1e-15 * (1.0 + c.norm())) break;
    }

    SphereFit out;
    double mean = 0.0;
    const double f = fit_objective(c, samples, w, wsum, model, &mean);
    out.center = c;
    out.rho0 = mean;
    out.rms = std::sqrt(std::max(f, 0.0));
    // Stationary point with a positive definite Hessian and a negligible Newton step.
    const Jet F = fit_objective_jet(c, samples, w, wsum, model);
    Eigen::LLT<Eigen::MatrixXd> llt(F.h);
    const bool stationary = llt.info() == Eigen::Success && llt.solve(F.g).norm() <= 1e-8 * scale;
    out.converged = any_converged || stationary;
    if (!out.converged) throw NumericalError("sphere fit: simplex descent did not converge within the iteration budget");
    return out;
}

ChartSphere chart_sphere(const AmbientPoint& center, double rho, const SpaceFormModel& model) {
    if (!(rho > 0.0)) throw HypothesisError("geodesic sphere radius must be positive");
    model.require_inside(center);
    const double s = center.norm();
    AmbientPoint axis = AmbientPoint::Zero(center.size());
    if (s > 0.0)
        axis = center / s;
    else
        axis(0) = 1.0;
    const double tc = model.radial_distance(s);
    const double tp = tc + rho;
    const double tm = tc - rho;
    const double lim = model.max_geodesic_radius();
    if (!(tp < lim) || !(-tm < lim)) throw HypothesisError("geodesic sphere leaves the chart");
    const double xp = model.chart_norm(tp);
    const double xm = model.chart_norm(tm);
    return {0.5 * (xp + xm) * axis, 0.5 * (xp - xm)};
}

std::vector<AmbientPoint> geodesic_sphere_samples(const AmbientPoint& center, double rho, const SpaceFormModel& model,
                                                  const SphericalRule& rule) {
    const auto cs = chart_sphere(center, rho, model);
    std::vector<AmbientPoint> out;
    out.reserve(rule.size());
    for (const auto& v : rule.nodes) out.push_back(cs.center + cs.radius * v);
    return out;
}

// ---------------------------------------------------------------------------
// Hausdorff distances

namespace {

double directed_hausdorff(const std::vector<AmbientPoint>& A, const std::vector<AmbientPoint>& B,
                          const SpaceFormModel& model) {
    double cmax = 0.0;
    const std::size_t nb = B.size();
    for (std::size_t i = 0; i < A.size(); ++i) {
        const std::vector<double> a(A[i].data(), A[i].data() + A[i].size());
        // start near the corresponding index; early exit once below the running max
        const std::size_t start = nb * i / A.size();
        double cmin = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < nb; ++k) {
            const std::size_t j = (start + k) % nb;
            const double dist = geodesic_distance_generic(a, B[j], model);
            if (dist < cmin) cmin = dist;
            if (cmin < cmax) break;
        }
        cmax = std::max(cmax, cmin);
    }
    return cmax;
}

Eigen::VectorXd tangent_move(const Eigen::VectorXd& u0, const Eigen::MatrixXd& E, const Eigen::VectorXd& s) {
    return (u0 + E * s).normalized();
}

struct LevelResult {
    double to_sphere = 0.0;
    double to_surface = 0.0;
};

class SurfaceSphereDistance {
public:
    SurfaceSphereDistance(const RadialSurface& surface, const AmbientPoint& center, double rho)
        : surface_(surface), model_(surface.model()), center_(center), rho_(rho),
          sphere_(chart_sphere(center, rho, surface.model())) {}

    // Surface point X(w(s)), w(s) = (u0 + E s) / sqrt(1 + |s|^2).
    template <class T>
    std::vector<T> surface_point(const Eigen::VectorXd& u0, const Eigen::MatrixXd& E, const std::vector<T>& s) const {
        const int d = static_cast<int>(u0.size());
        T norm2 = constant_like(s[0], 1.0);
        for (const auto& si : s) norm2 += si * si;
        using std::sqrt;
        const T inv = 1.0 / sqrt(norm2);
        std::vector<T> w(static_cast<std::size_t>(d));
        for (int a = 0; a < d; ++a) {
            T c = constant_like(s[0], u0(a));
            for (std::size_t i = 0; i < s.size(); ++i) c += E(a, static_cast<Eigen::Index>(i)) * s[i];
            w[static_cast<std::size_t>(a)] = c * inv;
        }
        const T chi = model_.chart_norm(surface_.radius(w));
        for (auto& wa : w) wa = chi * wa;
        return w;
    }

    // |d(X(u), c) - rho|: distance from a surface point to the geodesic sphere.
    double to_sphere(const Eigen::VectorXd& u) const {
        const AmbientPoint x = surface_.point(u);
        const std::vector<double> xv(x.data(), x.data() + x.size());
        return std::abs(geodesic_distance_generic(xv, center_, model_) - rho_);
    }

    // Local maximum of to_sphere near u0.
    double refine_to_sphere(const Eigen::VectorXd& u0) const {
        const Eigen::MatrixXd E = tangent_frame(u0);
        auto neg = [&](const std::vector<Jet>& s) {
            const Jet e = geodesic_distance_generic(surface_point(u0, E, s), center_, model_) - rho_;
            return -(e * e);
        };
        const auto res = newton_minimize(neg, Eigen::VectorXd::Zero(E.cols()), 0.25);
        return std::sqrt(std::max(-res.f, 0.0));
    }

    AmbientPoint sphere_point(const Eigen::VectorXd& v) const { return sphere_.center + sphere_.radius * v; }

    // min over the surface of d(y, X(u)), by Newton descent from radial seeds.
    double to_surface(const AmbientPoint& y, const Eigen::VectorXd& v) const {
        auto proxy_at = [&](const Eigen::VectorXd& u) {
            const AmbientPoint x = surface_.point(u);
            const std::vector<double> xv(x.data(), x.data() + x.size());
            return distance_proxy_generic(xv, y, model_);
        };
        Eigen::VectorXd u0 = y.norm() > 1e-12 ? Eigen::VectorXd(y.normalized()) : Eigen::VectorXd(v);
        if (proxy_at(v) < proxy_at(u0)) u0 = v;
        const Eigen::MatrixXd E = tangent_frame(u0);
        auto f = [&](const std::vector<Jet>& s) { return distance_proxy_generic(surface_point(u0, E, s), y, model_); };
        const auto res = newton_minimize(f, Eigen::VectorXd::Zero(E.cols()), 0.25);
        return distance_from_proxy(std::min(res.f, proxy_at(u0)), model_);
    }

    // Local maximum over the sphere of to_surface near v0.
    double refine_to_surface(const Eigen::VectorXd& v0, double step) const {
        const Eigen::MatrixXd E = tangent_frame(v0);
        auto neg = [&](const Eigen::VectorXd& s) {
            const Eigen::VectorXd v = tangent_move(v0, E, s);
            return -to_surface(sphere_point(v), v);
        };
        const auto res = nelder_mead(neg, Eigen::VectorXd::Zero(E.cols()), step, 1e-9, 400);
        return -res.f;
    }

    LevelResult level(int order) const {
        const auto rule = build_rule(surface_.n(), order);
        const double step = 0.5 * M_PI / order;
        const std::size_t m = rule.size();
        constexpr std::size_t kTop = 4;
        LevelResult out;

        std::vector<double> f(m);
        for (std::size_t i = 0; i < m; ++i) f[i] = to_sphere(rule.nodes[i]);
        for (std::size_t i : top_indices(f, kTop))
            out.to_sphere = std::max({out.to_sphere, f[i], refine_to_sphere(rule.nodes[i])});

        std::vector<double> g(m);
        for (std::size_t i = 0; i < m; ++i) g[i] = to_surface(sphere_point(rule.nodes[i]), rule.nodes[i]);
        for (std::size_t i : top_indices(g, kTop))
            out.to_surface = std::max({out.to_surface, g[i], refine_to_surface(rule.nodes[i], step)});
        return out;
    }

private:
    static std::vector<std::size_t> top_indices(const std::vector<double>& f, std::size_t k) {
        std::vector<std::size_t> idx(f.size());
        std::iota(idx.begin(), idx.end(), 0);
        k = std::min(k, idx.size());
        std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                          [&](std::size_t a, std::size_t b) { return f[a] > f[b] || (f[a] == f[b] && a < b); });
        idx.resize(k);
        return idx;
    }

    const RadialSurface& surface_;
    const SpaceFormModel& model_;
    AmbientPoint center_;
    double rho_;
    ChartSphere sphere_;
};

} // namespace

double hausdorff_distance(const std::vector<AmbientPoint>& A, const std::vector<AmbientPoint>& B,
                          const SpaceFormModel& model) {
    if (A.empty() || B.empty()) throw std::invalid_argument("hausdorff_distance: empty sample set");
    return std::max(directed_hausdorff(A, B, model), directed_hausdorff(B, A, model));
}

HausdorffEstimate surface_sphere_hausdorff(const RadialSurface& surface, const AmbientPoint& center, double rho,
                                           int order) {
    const SurfaceSphereDistance dist(surface, center, rho);
    const auto coarse = dist.level(order);
    const auto fine = dist.level(2 * order);
    HausdorffEstimate est;
    est.surface_to_sphere = std::max(coarse.to_sphere, fine.to_sphere);
    est.sphere_to_surface = std::max(coarse.to_surface, fine.to_surface);
    est.value = std::max(est.surface_to_sphere, est.sphere_to_surface);
    est.refinement_error = std::abs(std::max(coarse.to_sphere, coarse.to_surface) - std::max(fine.to_sphere, fine.to_surface));
    return est;
}

// ---------------------------------------------------------------------------
// Experiment

PinchReport run_pinch(const RadialSurface& surface, int r, const PinchConfig& cfg) {
    const int n = surface.n();
    if (r < 1 || r > n - 1) throw ConfigError(fmt::format("r = {} outside 1..{}", r, n - 1));
    const SpaceFormModel& model = surface.model();
    const auto rule = build_rule(n, cfg.quad_order);
    surface.validate_on(rule);
    const auto sampled = sample_surface(surface, rule, {}, cfg.threads);
    const auto star = starshape_report(sampled);  // hard failure when not starshaped

    PinchReport rep;
    rep.n = n;
    rep.r = r;
    rep.delta = model.delta();
    rep.R0 = star.R0;
    rep.R = star.R;
    rep.B_sup = B_sup_norm(sampled);
    rep.volume = surface_volume(sampled);

    const auto prof = profiles_of(sampled);
    rep.minH_rplus1 = std::numeric_limits<double>::infinity();
    rep.minH_partial = std::numeric_limits<double>::infinity();
    std::vector<double> tau(prof.size()), Hr(prof.size());
    for (std::size_t i = 0; i < prof.size(); ++i) {
        rep.minH_rplus1 = std::min(rep.minH_rplus1, prof[i].H[static_cast<std::size_t>(r + 1)]);
        rep.minH_partial = std::min(rep.minH_partial, partial_H_extremal(r + 1, prof[i].kappa));
        tau[i] = std::sqrt(prof[i].tau_sq);
        Hr[i] = prof[i].H[static_cast<std::size_t>(r)];
    }
    rep.h_default = !cfg.h.has_value();
    rep.h = cfg.h ? *cfg.h : mean_value(sampled, Hr);
    std::vector<double> eps(Hr.size());
    for (std::size_t i = 0; i < Hr.size(); ++i) eps[i] = Hr[i] - rep.h;
    rep.eps_l1 = lp_norm(sampled, eps, 1.0);
    rep.eps_linf = lp_norm(sampled, eps, std::numeric_limits<double>::infinity());
    rep.eps_mean = mean_value(sampled, eps);
    if (cfg.quad_order_check > cfg.quad_order) {
        const auto fine = sample_surface(surface, build_rule(n, cfg.quad_order_check), {}, cfg.threads);
        std::vector<double> Hf(fine.points.size());
        for (std::size_t i = 0; i < Hf.size(); ++i)
            Hf[i] = curvature_profile(fine.points[i].principal()).H[static_cast<std::size_t>(r)];
        const double hf = cfg.h ? *cfg.h : mean_value(fine, Hf);
        for (auto& x : Hf) x -= hf;
        rep.eps_l1_refinement = std::abs(lp_norm(fine, Hf, 1.0) - rep.eps_l1);
    }
    rep.tau_l2 = lp_norm(sampled, tau, 2.0);
    rep.tau_lnp1 = lp_norm(sampled, tau, n + 1.0);

    SurfaceQuantities q;
    q.n = n;
    q.r = r;
    q.delta = model.delta();
    q.h = rep.h;
    q.minH_partial = rep.minH_partial;
    q.minH_rplus1 = rep.minH_rplus1;
    q.B_sup = rep.B_sup;
    q.volume = rep.volume;
    q.R0 = rep.R0;
    q.R = rep.R;
    try {
        rep.constants = assemble_constants(q, cfg.constants);
        rep.constants_available = true;
    } catch (const HypothesisError& e) {
        rep.constants_error = e.what();
    }

    GateInputs gi;
    gi.r = r;
    gi.starshaped = star.sign != 0;
    gi.R0 = rep.R0;
    gi.R = rep.R;
    gi.max_radius = model.max_geodesic_radius();
    gi.h = rep.h;
    gi.eps_linf = rep.eps_linf;
    gi.eps_l1 = rep.eps_l1;
    gi.eps1 = rep.constants_available ? rep.constants.eps1 : 0.0;
    gi.minH_rplus1 = rep.minH_rplus1;
    rep.gates = hypothesis_gate(gi);
    if (!rep.constants_available) rep.gates.checks.push_back({"constants_defined", false, rep.constants_error});
    rep.structural_pass = rep.gates.structural_pass();

    std::vector<AmbientPoint> pts;
    std::vector<double> wts;
    pts.reserve(sampled.points.size());
    for (std::size_t i = 0; i < sampled.points.size(); ++i) {
        pts.push_back(sampled.points[i].X);
        wts.push_back(sampled.rule.weights[i] * sampled.points[i].area_element);
    }
    FitOptions fo;
    fo.seed = cfg.seed;
    const auto fit = fit_geodesic_sphere(pts, model, wts, fo);
    rep.sphere_center = fit.center;
    rep.rho0 = fit.rho0;
    rep.fit_rms = fit.rms;

    const auto dh = surface_sphere_hausdorff(surface, fit.center, fit.rho0, cfg.hausdorff_order);
    rep.dH = dh.value;
    rep.dH_surface_to_sphere = dh.surface_to_sphere;
    rep.dH_sphere_to_surface = dh.sphere_to_surface;
    rep.dH_refinement = dh.refinement_error;

    if (rep.constants_available) {
        rep.constants.C = rep.constants.c_RS * rep.rho0 * std::pow(rep.constants.K3, rep.constants.gamma);
        const auto fb = final_bound(rep.eps_l1, rep.rho0, rep.constants);
        rep.bound = fb.value;
        rep.applicable = fb.applicable && rep.gates.pass();
    }
    // the exact sphere has eps = 0 and dH at the fit tolerance
    rep.bound_holds = rep.dH <= rep.bound + rep.dH_refinement + 1e-9;
    return rep;
}

Regression log_log_regression(const std::vector<double>& x, const std::vector<double>& y) {
    Regression reg;
    reg.points = static_cast<int>(x.size());
    if (x.size() != y.size() || x.size() < 2) return reg;
    double mx = 0.0, my = 0.0;
    std::vector<double> lx(x.size()), ly(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
        mx += lx[i];
        my += ly[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (!(sxx > 0.0)) return reg;
    reg.defined = true;
    reg.slope = sxy / sxx;
    reg.intercept = my - reg.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = ly[i] - (reg.intercept + reg.slope * lx[i]);
        ss += e * e;
    }
    reg.residual = std::sqrt(ss / static_cast<double>(x.size()));
    return reg;
}

ScalingResult scaling_study(const RadialSurface& base, const std::vector<double>& amplitudes, int r,
                            const PinchConfig& cfg) {
    if (amplitudes.empty()) throw ConfigError("scaling: amplitude list is empty");
    for (std::size_t i = 0; i < amplitudes.size(); ++i) {
        if (!(amplitudes[i] >= 0.0)) throw ConfigError("scaling: amplitudes must be nonnegative");
        if (i > 0 && !(amplitudes[i] < amplitudes[i - 1])) throw ConfigError("scaling: amplitudes must be strictly decreasing");
    }
    ScalingResult out;
    out.rows.resize(amplitudes.size());
    PinchConfig inner = cfg;
    inner.threads = 1;
    parallel_for(amplitudes.size(), cfg.threads, [&](std::size_t i) {
        ScalingRow& row = out.rows[i];
        row.amplitude = amplitudes[i];
        try {
            const auto rep = run_pinch(base.with_perturbation_scale(amplitudes[i]), r, inner);
            row.eps_l1 = rep.eps_l1;
            row.eps_l1_refinement = rep.eps_l1_refinement;
            row.eps1 = rep.constants_available ? rep.constants.eps1 : 0.0;
            row.eps_linf = rep.eps_linf;
            row.tau_l2 = rep.tau_l2;
            row.tau_lnp1 = rep.tau_lnp1;
            row.R0 = rep.R0;
            row.B_sup = rep.B_sup;
            row.rho0 = rep.rho0;
            row.dH = rep.dH;
            row.dH_refinement = rep.dH_refinement;
            row.bound = rep.bound;
            row.applicable = rep.applicable;
            row.structural_pass = rep.structural_pass;
        } catch (const HypothesisError& e) {
            row.failure = e.what();
        }
    });

    std::vector<double> xs, ys;
    out.monotone = true;
    const ScalingRow* prev = nullptr;
    for (const auto& row : out.rows) {
        if (!row.failure.empty() || !row.structural_pass) continue;
        if (row.dH > 0.0 && row.eps_l1 > 0.0) {
            xs.push_back(row.eps_l1);
            ys.push_back(row.dH);
        }
        if (prev && row.dH > prev->dH + row.dH_refinement + prev->dH_refinement + 1e-12) out.monotone = false;
        prev = &row;
    }
    out.regression = log_log_regression(xs, ys);
    return out;
}

} // namespace starpinch
