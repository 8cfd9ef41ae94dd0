#pragma once

// Surface integrals over sampled radial graphs and the volume-normalized
// L^p norms  ||f||_p = ((1/V) int |f|^p dv_g)^{1/p}.

#include "starpinch/quadrature.hpp"
#include "starpinch/surface.hpp"

#include <functional>
#include <span>
#include <vector>

namespace starpinch {

using PointField = std::function<double(const SurfacePointData&)>;

/// Values of f at every node.
std::vector<double> node_field(const SampledSurface& sampled, const PointField& f);

/// sum_i f_i area_element_i w_i with compensated summation in node order.
double integrate(const SampledSurface& sampled, std::span<const double> f);
double integrate(const SampledSurface& sampled, const PointField& f);
double surface_volume(const SampledSurface& sampled);

/// Integral at `order` with refinement error against `check_order`.
IntegralEstimate surface_integral(const RadialSurface& surface, const PointField& f, int order, int check_order,
                                  int threads = 1);

/// Volume-normalized L^p norm; p = +inf gives the sup over nodes.
double lp_norm(const SampledSurface& sampled, std::span<const double> f, double p);
double lp_norm(const SampledSurface& sampled, const PointField& f, double p);

/// Volume-normalized mean.
double mean_value(const SampledSurface& sampled, std::span<const double> f);

} // namespace starpinch
