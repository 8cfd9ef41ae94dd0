#pragma once

// The explicit constant chain K1 -> K2 -> K3 -> eps1 and the final bound
// C ||eps||_1^gamma. Constants that the argument imports from outside
// (eps0, c, alpha, the Michael-Simon constant) are configuration values.

#include "starpinch/spaceform.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace starpinch {

enum class K1Mode { H, HrPlus1 };

std::string to_string(K1Mode mode);
K1Mode parse_k1_mode(const std::string& text);

struct ConstantsConfig {
    double eps0 = 0.1;
    double c_RS = 1.0;
    double alpha = 0.5;
    std::optional<double> Kn_MS;    // default |S^n|^{-1/n}
    std::optional<double> c_n_phi;  // default Kn_MS exp(n sup|phi|)
    double c_n = 0.0;               // sharpened Newton constant (calibrated)
    std::vector<double> b;          // b_{n,k,r} indexed by k
    K1Mode k1_mode = K1Mode::H;
    std::string c_n_source = "unset";  // provenance of c_n / b
};

/// Surface quantities the constants depend on.
struct SurfaceQuantities {
    int n = 0;
    int r = 0;
    double delta = 0.0;
    double h = 0.0;
    double minH_partial = 0.0;  // min H_{r+1;n,1}
    double minH_rplus1 = 0.0;   // min H_{r+1}
    double B_sup = 0.0;
    double volume = 0.0;
    double R0 = 0.0;
    double R = 0.0;
};

struct ProofConstants {
    double K1 = 0.0;
    double K2 = 0.0;
    double K3 = 0.0;
    double eps1 = 0.0;
    double eps0 = 0.0;
    double c_RS = 0.0;
    double alpha = 0.0;
    double gamma = 0.0;
    double c_n_phi = 0.0;
    double Kn_MS = 0.0;
    double C = 0.0;
    double c_n = 0.0;
    std::vector<double> b;
    K1Mode k1_mode = K1Mode::H;
    /// Inputs consumed by the chain (name -> value).
    std::map<std::string, double> dependencies;
    /// Where each externally sourced constant came from.
    std::map<std::string, std::string> provenance;
};

/// Three-case constant of the integral estimate int |tau|^2 <= K2 int |eps|.
double K2(double delta, double K1, double R0, double B_sup, double R);

/// K3 = B_sup^{2n} K2 c_{n,phi}^2 V^{(2n+2)/n}.
double K3(double K2, double c_n_phi, double volume, int n, double B_sup);

/// eps1 = eps0^{2(n+1)} / K3.
double eps1(double eps0, double K3, int n);

/// Kn exp(n sup|phi|) over the chart ball of geodesic radius R.
double default_c_n_phi(double Kn, const SpaceFormModel& model, double R, int n);

struct FinalBound {
    double value = 0.0;
    bool applicable = false;
};

/// C eps_l1^gamma with C = c_RS rho0 K3^gamma; applicable iff eps_l1 <= eps1.
FinalBound final_bound(double eps_l1, double rho0, const ProofConstants& consts);

/// Runs the whole chain. C is filled in later by final_bound's caller via rho0.
ProofConstants assemble_constants(const SurfaceQuantities& q, const ConstantsConfig& cfg);

} // namespace starpinch
