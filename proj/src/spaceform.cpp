#include "starpinch/spaceform.hpp"

#include <algorithm>
#include <string>

namespace starpinch {

namespace {

// Below this value of |delta| t^2 the kernels use their Taylor series.
constexpr double kSeriesThreshold = 1e-8;

} // namespace

double c_delta(double t, double delta) {
    const double z = delta * t * t;
    if (std::abs(z) < kSeriesThreshold) return 1.0 - z / 2.0 + z * z / 24.0 - z * z * z / 720.0;
    if (delta > 0.0) return std::cos(std::sqrt(delta) * t);
    return std::cosh(std::sqrt(-delta) * t);
}

double s_delta(double t, double delta) {
    const double z = delta * t * t;
    if (std::abs(z) < kSeriesThreshold) return t * (1.0 - z / 6.0 + z * z / 120.0 - z * z * z / 5040.0);
    if (delta > 0.0) {
        const double k = std::sqrt(delta);
        return std::sin(k * t) / k;
    }
    const double k = std::sqrt(-delta);
    return std::sinh(k * t) / k;
}

SpaceFormModel::SpaceFormModel(double delta, int ambient_dim) : delta_(delta), dim_(ambient_dim) {
    if (!std::isfinite(delta)) throw ConfigError("space form curvature must be finite");
    if (ambient_dim < 2) throw ConfigError("ambient dimension must be at least 2");
}

double SpaceFormModel::model_radius() const {
    if (delta_ == 0.0) return std::numeric_limits<double>::infinity();
    return 2.0 / std::sqrt(std::abs(delta_));
}

double SpaceFormModel::max_geodesic_radius() const {
    if (delta_ > 0.0) return M_PI / (2.0 * std::sqrt(delta_));
    return std::numeric_limits<double>::infinity();
}

bool SpaceFormModel::contains(const AmbientPoint& x) const {
    if (x.size() != dim_ || !x.allFinite()) return false;
    return x.norm() < model_radius();
}

void SpaceFormModel::require_inside(const AmbientPoint& x) const {
    if (!contains(x))
        throw HypothesisError("point outside model domain (|x| = " + std::to_string(x.norm()) +
                              ", model radius " + std::to_string(model_radius()) + ")");
}

double SpaceFormModel::conformal_factor(const AmbientPoint& x) const {
    return 1.0 / (1.0 + 0.25 * delta_ * x.squaredNorm());
}

double SpaceFormModel::log_conformal_factor(const AmbientPoint& x) const {
    return -std::log1p(0.25 * delta_ * x.squaredNorm());
}

AmbientPoint SpaceFormModel::grad_log_conformal_factor(const AmbientPoint& x) const {
    return (-0.5 * delta_ * conformal_factor(x)) * x;
}

double SpaceFormModel::log_conformal_sup(double R) const {
    const double s = chart_norm(std::min(R, max_geodesic_radius()));
    return std::abs(std::log1p(0.25 * delta_ * s * s));
}

double SpaceFormModel::inner(const AmbientPoint& x, const AmbientPoint& v, const AmbientPoint& w) const {
    const double lambda = conformal_factor(x);
    return lambda * lambda * v.dot(w);
}

double SpaceFormModel::radial_distance(double s) const {
    if (delta_ == 0.0) return s;
    const double k = std::sqrt(std::abs(delta_));
    if (delta_ > 0.0) return (2.0 / k) * std::atan(0.5 * k * s);
    return (2.0 / k) * std::atanh(0.5 * k * s);
}

double SpaceFormModel::chart_norm(double t) const {
    if (delta_ == 0.0) return t;
    const double k = std::sqrt(std::abs(delta_));
    if (delta_ > 0.0) return (2.0 / k) * std::tan(0.5 * k * t);
    return (2.0 / k) * std::tanh(0.5 * k * t);
}

Jet SpaceFormModel::chart_norm(const Jet& t) const {
    const double chi = chart_norm(t.v);
    const double d1 = 1.0 + 0.25 * delta_ * chi * chi;
    const double d2 = 0.5 * delta_ * chi * d1;
    return t.chain(chi, d1, d2);
}

double geodesic_radius(const AmbientPoint& x, const SpaceFormModel& model) {
    model.require_inside(x);
    return model.radial_distance(x.norm());
}

double geodesic_distance(const AmbientPoint& x, const AmbientPoint& y, const SpaceFormModel& model) {
    model.require_inside(x);
    model.require_inside(y);
    std::vector<double> xs(x.data(), x.data() + x.size());
    return geodesic_distance_generic(xs, y, model);
}

double distance_from_proxy(double proxy, const SpaceFormModel& model) {
    const double p = std::sqrt(std::max(proxy, 0.0));
    const double delta = model.delta();
    if (delta == 0.0) return p;
    const double k = std::sqrt(std::abs(delta));
    return delta < 0.0 ? (2.0 / k) * std::asinh(p) : (2.0 / k) * std::atan(p);
}

AmbientPoint position_vector(const AmbientPoint& x, const SpaceFormModel& model) {
    model.require_inside(x);
    const double s = x.norm();
    if (s == 0.0) return AmbientPoint::Zero(x.size());
    const double r = model.radial_distance(s);
    // grad r is radial with h-length one, i.e. Euclidean length 1/lambda.
    return (s_delta(r, model.delta()) / (model.conformal_factor(x) * s)) * x;
}

} // namespace starpinch
