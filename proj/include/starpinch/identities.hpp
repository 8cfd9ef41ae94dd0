#pragma once

// Integral identities and inequalities on concrete surfaces, reported as
// residuals (identities) or gaps (inequalities).

#include "starpinch/integrals.hpp"
#include "starpinch/surface.hpp"
#include "starpinch/symfun.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace starpinch {

struct ResidualReport {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    double refinement_error = 0.0;
    bool pass = false;
    bool inequality = false;  // pass means value >= -(tol + refinement) instead of |value| <= tol + refinement
};

ResidualReport identity_report(std::string name, double value, double tolerance, double refinement_error = 0.0);
ResidualReport inequality_report(std::string name, double value, double tolerance, double refinement_error = 0.0);

/// (1/V) int (H_{k+1} <Z, nu> + c_delta(r) H_k) on a sampled surface.
double hsiung_minkowski_value(const SampledSurface& sampled, int k, double delta);

/// Hsiung-Minkowski residual at `order`, refinement error from `check_order`.
ResidualReport hsiung_minkowski_residual(const RadialSurface& surface, int k, int order, int check_order,
                                         double tolerance = 1e-8, const EvalOptions& opts = {}, int threads = 1);

struct GaussCheck {
    ResidualReport report;
    double scal = 0.0;  // n(n-1)(H_2 + delta)
};

/// | |tau|^2 - n(n-1)(H^2 - H_2) | relative to sum kappa_i^2.
GaussCheck gauss_algebraic_check(const PrincipalCurvatures& kappa, double delta, double tolerance = 1e-12);
GaussCheck gauss_algebraic_check(const SurfacePointData& point, double delta, double tolerance = 1e-12);

struct CauchySchwarzTerms {
    double lhs = 0.0;  // ||tau||_{n+1}^{2(n+1)}
    double rhs = 0.0;  // ||B||_inf^{2n} ||tau||_2^2
};

CauchySchwarzTerms cauchy_schwarz_terms(const SampledSurface& sampled);
/// Normalized gap (rhs - lhs) / max(rhs, lhs); zero when both sides vanish.
ResidualReport cauchy_schwarz_chain_check(const SampledSurface& sampled, double tolerance = 1e-8);

/// Pointwise K1 (H H_r - H_{r+1}) - |tau|^2. Requires H_{r+1} > 0 when r > 1.
ResidualReport lemma1_gap(const SurfacePointData& point, int r, double K1, double tolerance = 1e-10);
/// Minimum of the pointwise gap over all nodes.
ResidualReport lemma1_gap(const SampledSurface& sampled, int r, double K1, double tolerance = 1e-10);

/// K2 ||eps||_1 - ||tau||_2^2 (volume-normalized), eps = H_r - h.
ResidualReport tau_l2_epsilon_bound(const SampledSurface& sampled, int r, double h, double K2,
                                    double tolerance = 1e-8);

/// Flat-metric check Kn int |H~| dv~ - V~^{(n-1)/n} (diagnostic).
ResidualReport michael_simon_ratio(const SampledSurface& sampled, double Kn);

/// Default Michael-Simon constant: |S^n|^{-1/n}.
double default_michael_simon_constant(int n);

/// CSV table: name,value,tolerance,refinement_error,pass
void write_residual_csv(std::ostream& os, const std::vector<ResidualReport>& rows);

} // namespace starpinch
