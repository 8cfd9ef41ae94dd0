#pragma once

// The stability experiment: eps = H_r - h, hypothesis gates, the constant
// chain, the fitted geodesic sphere, the Hausdorff distance in the model
// metric, and scaling studies over perturbation families.

#include "starpinch/constants.hpp"
#include "starpinch/spaceform.hpp"
#include "starpinch/surface.hpp"

#include <optional>
#include <string>
#include <vector>

namespace starpinch {

struct EpsilonField {
    double h = 0.0;
    std::vector<double> eps;  // H_r - h at each node
};

/// h defaults to the volume-normalized mean of H_r. Throws HypothesisError
/// (node reported) when r > 1 and H_{r+1} <= 0 somewhere.
EpsilonField epsilon_field(const SampledSurface& sampled, int r, std::optional<double> h = std::nullopt);

/// Curvature and support data of a sampled surface consumed by the constant
/// chain. Throws HypothesisError when the surface is not starshaped.
SurfaceQuantities surface_quantities(const SampledSurface& sampled, double delta, int r,
                                     std::optional<double> h = std::nullopt);

struct GateCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct GateInputs {
    int r = 1;
    bool starshaped = false;
    double R0 = 0.0;
    double R = 0.0;
    double max_radius = 0.0;  // geodesic radius allowed by the chart
    double h = 0.0;
    double eps_linf = 0.0;
    double eps_l1 = 0.0;
    double eps1 = 0.0;
    double minH_rplus1 = 0.0;
};

struct GateResult {
    std::vector<GateCheck> checks;
    /// Conjunction of all checks.
    bool pass() const;
    /// Conjunction of all checks except the smallness gate ||eps||_1 <= eps1.
    bool structural_pass() const;
};

GateResult hypothesis_gate(const GateInputs& in);

struct SphereFit {
    AmbientPoint center;
    double rho0 = 0.0;
    double rms = 0.0;
    bool converged = false;
};

struct FitOptions {
    std::uint64_t seed = 0;
    int starts = 5;
    int max_iter = 4000;
};

/// Minimizes the (weighted) mean squared deviation of the geodesic distance
/// from the center to the samples about its mean. Multistart simplex
/// descent from the chart centroid plus seeded perturbations, then a Newton
/// polish. Throws NumericalError when no start converges.
SphereFit fit_geodesic_sphere(const std::vector<AmbientPoint>& samples, const SpaceFormModel& model,
                              const std::vector<double>& weights = {}, const FitOptions& opts = {});

/// A geodesic sphere is a Euclidean sphere in the chart.
struct ChartSphere {
    AmbientPoint center;
    double radius = 0.0;
};

ChartSphere chart_sphere(const AmbientPoint& center, double rho, const SpaceFormModel& model);

/// Points of the geodesic sphere at the nodes of a spherical rule.
std::vector<AmbientPoint> geodesic_sphere_samples(const AmbientPoint& center, double rho, const SpaceFormModel& model,
                                                  const SphericalRule& rule);

/// Symmetric Hausdorff distance between finite point sets in the model metric.
double hausdorff_distance(const std::vector<AmbientPoint>& A, const std::vector<AmbientPoint>& B,
                          const SpaceFormModel& model);

struct HausdorffEstimate {
    double value = 0.0;
    double surface_to_sphere = 0.0;
    double sphere_to_surface = 0.0;
    double refinement_error = 0.0;  // |value(order) - value(2 order)|
};

/// Hausdorff distance between a radial surface and the geodesic sphere
/// S(center, rho): grid sampling at `order` followed by local refinement of
/// the extremal candidates; refinement error from the doubled grid.
HausdorffEstimate surface_sphere_hausdorff(const RadialSurface& surface, const AmbientPoint& center, double rho,
                                           int order);

struct PinchConfig {
    int quad_order = 24;
    int quad_order_check = 48;
    int hausdorff_order = 16;
    std::optional<double> h;
    ConstantsConfig constants;
    std::uint64_t seed = 0;
    int threads = 1;
};

struct PinchReport {
    int n = 0;
    int r = 0;
    double delta = 0.0;
    double h = 0.0;
    bool h_default = true;
    double eps_l1 = 0.0;
    double eps_l1_refinement = 0.0;  // |eps_l1(quad_order) - eps_l1(quad_order_check)|
    double eps_linf = 0.0;
    double eps_mean = 0.0;
    double tau_l2 = 0.0;
    double tau_lnp1 = 0.0;
    double R0 = 0.0;
    double R = 0.0;
    double B_sup = 0.0;
    double volume = 0.0;
    double minH_rplus1 = 0.0;
    double minH_partial = 0.0;
    AmbientPoint sphere_center;
    double rho0 = 0.0;
    double fit_rms = 0.0;
    double dH = 0.0;
    double dH_surface_to_sphere = 0.0;
    double dH_sphere_to_surface = 0.0;
    double dH_refinement = 0.0;
    double bound = 0.0;
    bool applicable = false;
    bool structural_pass = false;
    /// dH <= bound + dH_refinement; only asserted when applicable.
    bool bound_holds = false;
    bool constants_available = false;
    std::string constants_error;
    GateResult gates;
    ProofConstants constants;
};

PinchReport run_pinch(const RadialSurface& surface, int r, const PinchConfig& cfg);

struct ScalingRow {
    double amplitude = 0.0;
    double eps_l1 = 0.0;
    double eps_l1_refinement = 0.0;
    double eps_linf = 0.0;
    double tau_l2 = 0.0;
    double tau_lnp1 = 0.0;
    double R0 = 0.0;
    double B_sup = 0.0;
    double rho0 = 0.0;
    double dH = 0.0;
    double dH_refinement = 0.0;
    double bound = 0.0;
    double eps1 = 0.0;  // smallness threshold of the run (0 when the constants are unavailable)
    bool applicable = false;
    bool structural_pass = false;
    std::string failure;  // non-empty when the run raised a hypothesis violation
};

struct Regression {
    bool defined = false;
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  // root-mean-square residual in log space
    int points = 0;
};

/// Least-squares line through (log x, log y).
Regression log_log_regression(const std::vector<double>& x, const std::vector<double>& y);

struct ScalingResult {
    std::vector<ScalingRow> rows;
    Regression regression;
    bool monotone = false;
};

/// Family member for amplitude a: the base surface with every perturbation
/// coefficient multiplied by a. Amplitudes must be strictly decreasing.
ScalingResult scaling_study(const RadialSurface& base, const std::vector<double>& amplitudes, int r,
                            const PinchConfig& cfg);

} // namespace starpinch
