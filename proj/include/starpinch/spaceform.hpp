#pragma once

// The simply connected space forms M^{n+1}(delta) realized in one conformally
// flat chart: a Euclidean ball with metric
//     h = (1 + (delta/4)|x|^2)^{-2} |dx|^2 .
// delta < 0 gives the Poincare ball, delta = 0 flat space and delta > 0 the
// stereographic chart, restricted to |x| < 2/sqrt(delta) (the open upper
// half-sphere). The base point p0 is the chart origin.

#include "starpinch/errors.hpp"
#include "starpinch/jet.hpp"

#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <vector>

namespace starpinch {

using AmbientPoint = Eigen::VectorXd;

double c_delta(double t, double delta);
double s_delta(double t, double delta);

class SpaceFormModel {
public:
    SpaceFormModel(double delta, int ambient_dim);

    double delta() const { return delta_; }
    int ambient_dim() const { return dim_; }

    /// 2/sqrt(|delta|), infinite for delta = 0.
    double model_radius() const;
    /// Largest admissible geodesic distance from the base point (pi/(2 sqrt(delta))
    /// on the half-sphere, infinite otherwise).
    double max_geodesic_radius() const;

    bool contains(const AmbientPoint& x) const;
    /// Throws HypothesisError when x is not inside the chart.
    void require_inside(const AmbientPoint& x) const;

    /// e^{phi(x)} with h = e^{2 phi} |dx|^2.
    double conformal_factor(const AmbientPoint& x) const;
    double log_conformal_factor(const AmbientPoint& x) const;
    /// Euclidean gradient of phi.
    AmbientPoint grad_log_conformal_factor(const AmbientPoint& x) const;
    /// sup |phi| over the chart ball of geodesic radius R about the base point.
    double log_conformal_sup(double R) const;

    /// h-inner product of chart vectors v, w at x.
    double inner(const AmbientPoint& x, const AmbientPoint& v, const AmbientPoint& w) const;

    /// Geodesic distance from the base point to a chart point of Euclidean norm s.
    double radial_distance(double s) const;
    /// Inverse of radial_distance, extended as an odd function of t.
    double chart_norm(double t) const;
    /// chart_norm applied to a jet (derivatives follow chi' = 1 + delta chi^2 / 4).
    Jet chart_norm(const Jet& t) const;

private:
    double delta_;
    int dim_;
};

double geodesic_radius(const AmbientPoint& x, const SpaceFormModel& model);

/// Closed-form distance in the conformal ball model. The first argument may be
/// a jet vector so that derivatives with respect to it are available.
template <class T>
T geodesic_distance_generic(const std::vector<T>& x, const AmbientPoint& y, const SpaceFormModel& model) {
    const double delta = model.delta();
    T diff2 = constant_like(x[0], 0.0);
    T xx = constant_like(x[0], 0.0);
    T xy = constant_like(x[0], 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        T d = x[i] - y(static_cast<Eigen::Index>(i));
        diff2 += d * d;
        xx += x[i] * x[i];
        xy += x[i] * y(static_cast<Eigen::Index>(i));
    }
    using std::sqrt;
    using std::asinh;
    using std::atan;
    if (delta == 0.0) return sqrt(diff2);
    const double yy = y.squaredNorm();
    const double k = std::sqrt(std::abs(delta));
    const double q = delta / 4.0;  // |y_scaled|^2 = |q| |x|^2
    if (delta < 0.0) {
        // sinh(k d / 2) = |y1 - y2| / sqrt((1 - |y1|^2)(1 - |y2|^2)), y = k x / 2
        T denom = (1.0 + q * xx) * (1.0 + q * yy);
        return (2.0 / k) * asinh(sqrt(-q * diff2 / denom));
    }
    // tan(k d / 2) = |y1 - y2| / sqrt(1 + 2<y1,y2> + |y1|^2 |y2|^2)
    T denom = 1.0 + 2.0 * q * xy + (q * q * yy) * xx;
    return (2.0 / k) * atan(sqrt(q * diff2 / denom));
}

double geodesic_distance(const AmbientPoint& x, const AmbientPoint& y, const SpaceFormModel& model);

/// Smooth increasing function of the geodesic distance, without the square
/// root: |x - y|^2 (delta = 0), sinh^2(k d / 2) (delta < 0), tan^2(k d / 2)
/// (delta > 0), k = sqrt|delta|. Minimizing it minimizes the distance.
template <class T>
T distance_proxy_generic(const std::vector<T>& x, const AmbientPoint& y, const SpaceFormModel& model) {
    const double delta = model.delta();
    T diff2 = constant_like(x[0], 0.0);
    T xx = constant_like(x[0], 0.0);
    T xy = constant_like(x[0], 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        T d = x[i] - y(static_cast<Eigen::Index>(i));
        diff2 += d * d;
        xx += x[i] * x[i];
        xy += x[i] * y(static_cast<Eigen::Index>(i));
    }
    if (delta == 0.0) return diff2;
    const double q = delta / 4.0;
    const double yy = y.squaredNorm();
    if (delta < 0.0) return (-q * diff2) / ((1.0 + q * xx) * (1.0 + q * yy));
    return (q * diff2) / (1.0 + 2.0 * q * xy + (q * q * yy) * xx);
}

/// Inverse of the proxy transform.
double distance_from_proxy(double proxy, const SpaceFormModel& model);

/// Components of Z = s_delta(r) grad r in the chart. Equals x itself in this
/// model; computed from the defining formula.
AmbientPoint position_vector(const AmbientPoint& x, const SpaceFormModel& model);

} // namespace starpinch
