#include "starpinch/integrals.hpp"

#include "starpinch/errors.hpp"
#include "starpinch/parallel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace starpinch {

std::vector<double> node_field(const SampledSurface& sampled, const PointField& f) {
    std::vector<double> out;
    out.reserve(sampled.points.size());
    for (const auto& p : sampled.points) out.push_back(f(p));
    return out;
}

double integrate(const SampledSurface& sampled, std::span<const double> f) {
    if (f.size() != sampled.points.size()) throw std::invalid_argument("integrate: field size mismatch");
    CompensatedSum acc;
    for (std::size_t i = 0; i < f.size(); ++i) acc.add(f[i] * sampled.points[i].area_element * sampled.rule.weights[i]);
    return acc.value();
}

double integrate(const SampledSurface& sampled, const PointField& f) {
    const auto values = node_field(sampled, f);
    return integrate(sampled, values);
}

double surface_volume(const SampledSurface& sampled) {
    CompensatedSum acc;
    for (std::size_t i = 0; i < sampled.points.size(); ++i)
        acc.add(sampled.points[i].area_element * sampled.rule.weights[i]);
    return acc.value();
}

IntegralEstimate surface_integral(const RadialSurface& surface, const PointField& f, int order, int check_order,
                                  int threads) {
    const auto coarse = sample_surface(surface, build_rule(surface.n(), order), {}, threads);
    const auto fine = sample_surface(surface, build_rule(surface.n(), check_order), {}, threads);
    IntegralEstimate est;
    est.value = integrate(coarse, f);
    est.refinement_error = std::abs(est.value - integrate(fine, f));
    return est;
}

double lp_norm(const SampledSurface& sampled, std::span<const double> f, double p) {
    if (std::isinf(p)) {
        double m = 0.0;
        for (double v : f) m = std::max(m, std::abs(v));
        return m;
    }
    if (!(p >= 1.0)) throw ConfigError("lp_norm requires p >= 1");
    std::vector<double> powered(f.size());
    double scale = 0.0;
    for (double v : f) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) powered[i] = std::pow(std::abs(f[i]) / scale, p);
    return scale * std::pow(integrate(sampled, powered) / surface_volume(sampled), 1.0 / p);
}

double lp_norm(const SampledSurface& sampled, const PointField& f, double p) {
    const auto values = node_field(sampled, f);
    return lp_norm(sampled, values, p);
}

double mean_value(const SampledSurface& sampled, std::span<const double> f) {
    return integrate(sampled, f) / surface_volume(sampled);
}

} // namespace starpinch
