#pragma once

// Starshaped hypersurfaces as radial graphs over the base point:
//     X(u) = chart_norm(rho(u)) u,   u in S^n,
// where rho is the geodesic distance from the base point along the ray u,
//     rho(u) = rho0 (1 + sum_j a_j B_j(R^T u)).
// R is an optional rotation of the whole surface.
//
// Sign convention: B(X, Y) = -h(Dbar_X nu, Y) with nu the inward normal, so
// geodesic spheres have positive principal curvatures and <Z, nu> < 0.

#include "starpinch/basis.hpp"
#include "starpinch/quadrature.hpp"
#include "starpinch/spaceform.hpp"
#include "starpinch/symfun.hpp"

#include <Eigen/Core>
#include <optional>
#include <vector>

namespace starpinch {

struct PerturbationTerm {
    int index = 0;
    double amplitude = 0.0;
};

class RadialSurface {
public:
    RadialSurface(int n, SpaceFormModel model, double rho0, BasisKind basis = BasisKind::Monomial,
                  std::vector<PerturbationTerm> terms = {});

    int n() const { return n_; }
    const SpaceFormModel& model() const { return model_; }
    double rho0() const { return rho0_; }
    BasisKind basis() const { return basis_; }
    const std::vector<PerturbationTerm>& terms() const { return terms_; }
    const Eigen::MatrixXd& rotation() const { return rotation_; }

    /// Copy with the surface rotated by the orthogonal matrix q.
    RadialSurface rotated(const Eigen::MatrixXd& q) const;
    /// Copy with every perturbation amplitude multiplied by s.
    RadialSurface with_perturbation_scale(double s) const;

    /// Geodesic radial function rho(u); u is a unit vector (double or jets).
    template <class T>
    T radius(const std::vector<T>& u) const {
        std::vector<T> v = u;
        if (rotated_) {
            for (int i = 0; i <= n_; ++i) {
                T acc = constant_like(u[0], 0.0);
                for (int j = 0; j <= n_; ++j) acc += rotation_(j, i) * u[static_cast<std::size_t>(j)];
                v[static_cast<std::size_t>(i)] = acc;
            }
        }
        T shape = constant_like(u[0], 1.0);
        for (const auto& t : terms_) shape += t.amplitude * basis_function(basis_, t.index, v);
        return rho0_ * shape;
    }

    double radius_at(const Eigen::VectorXd& u) const;
    /// Chart point X(u).
    AmbientPoint point(const Eigen::VectorXd& u) const;

    /// min/max of rho on the nodes of a rule; throws HypothesisError when
    /// rho <= 0 or the surface leaves the chart.
    void validate_on(const SphericalRule& rule) const;

private:
    int n_;
    SpaceFormModel model_;
    double rho0_;
    BasisKind basis_;
    std::vector<PerturbationTerm> terms_;
    Eigen::MatrixXd rotation_;
    bool rotated_ = false;
};

struct SurfacePointData {
    Eigen::VectorXd u;          // parameter direction
    AmbientPoint X;             // chart position
    Eigen::VectorXd nu;         // unit normal (h-metric), chart components
    Eigen::MatrixXd g_mat;      // first fundamental form (h-metric), orthonormal tangent chart at u
    Eigen::MatrixXd B_mat;      // second fundamental form (h-metric)
    std::vector<double> kappa;  // eigenvalues of (B, g), ascending
    double support = 0.0;       // <Z, nu>_h
    double r = 0.0;             // geodesic distance to the base point
    double area_element = 0.0;  // h-volume density relative to the unit sphere

    // Flat-metric data of the same immersion (used by the Michael-Simon check).
    std::vector<double> kappa_flat;
    double area_element_flat = 0.0;

    PrincipalCurvatures principal() const { return PrincipalCurvatures(kappa); }
    double mean_flat() const;
};

struct EvalOptions {
    /// Debug switch: use B(X, Y) = +h(Dbar_X nu, Y) while keeping nu.
    bool wrong_sign_convention = false;
};

/// Orthonormal basis of the tangent space u^perp, as columns.
Eigen::MatrixXd tangent_frame(const Eigen::VectorXd& u);

SurfacePointData evaluate_point(const RadialSurface& surface, const Eigen::VectorXd& u, const EvalOptions& opts = {});

/// A surface evaluated at all nodes of a rule.
struct SampledSurface {
    SphericalRule rule;
    std::vector<SurfacePointData> points;
};

SampledSurface sample_surface(const RadialSurface& surface, const SphericalRule& rule, const EvalOptions& opts = {},
                              int threads = 1);

struct StarshapeReport {
    int sign = 0;     // common sign of <Z, nu>
    double R0 = 0.0;  // min |<Z, nu>|
    double R = 0.0;   // max geodesic radius
};

/// Throws HypothesisError naming the offending node when <Z, nu> changes sign.
StarshapeReport starshape_report(const SampledSurface& sampled);
StarshapeReport starshape_report(const RadialSurface& surface, const SphericalRule& rule, int threads = 1);

/// max over nodes of max_i |kappa_i|.
double B_sup_norm(const SampledSurface& sampled);
double B_sup_norm(const RadialSurface& surface, const SphericalRule& rule, int threads = 1);

} // namespace starpinch
