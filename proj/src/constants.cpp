#include "starpinch/constants.hpp"

#include "starpinch/errors.hpp"
#include "starpinch/identities.hpp"
#include "starpinch/symfun.hpp"

#include <cmath>
#include <fmt/format.h>

namespace starpinch {

std::string to_string(K1Mode mode) { return mode == K1Mode::H ? "h" : "Hr1"; }

K1Mode parse_k1_mode(const std::string& text) {
    if (text == "h") return K1Mode::H;
    if (text == "Hr1") return K1Mode::HrPlus1;
    throw ConfigError(fmt::format("K1_mode must be 'h' or 'Hr1', got '{}'", text));
}

double K2(double delta, double K1, double R0, double B_sup, double R) {
    if (!(R0 > 0.0)) throw HypothesisError(fmt::format("K2: R0 = {:.6g} is not positive (not starshaped)", R0));
    if (!(K1 > 0.0) || !(B_sup >= 0.0) || !(R >= 0.0)) throw std::invalid_argument("K2: invalid inputs");
    if (delta > 0.0) return K1 / R0 * (1.0 + B_sup / std::sqrt(delta));
    if (delta == 0.0) return K1 / R0 * (1.0 + B_sup * R);
    return K1 / R0 * (c_delta(R, delta) + B_sup * s_delta(R, delta));
}

double K3(double K2, double c_n_phi, double volume, int n, double B_sup) {
    if (!(K2 > 0.0) || !(c_n_phi > 0.0) || !(volume > 0.0) || !(B_sup > 0.0) || n < 1)
        throw std::invalid_argument("K3: inputs must be positive");
    return std::pow(B_sup, 2.0 * n) * K2 * c_n_phi * c_n_phi * std::pow(volume, (2.0 * n + 2.0) / n);
}

double eps1(double eps0, double K3, int n) {
    if (!(eps0 > 0.0) || !(K3 > 0.0)) throw std::invalid_argument("eps1: inputs must be positive");
    return std::pow(eps0, 2.0 * (n + 1)) / K3;
}

double default_c_n_phi(double Kn, const SpaceFormModel& model, double R, int n) {
    return Kn * std::exp(n * model.log_conformal_sup(R));
}

FinalBound final_bound(double eps_l1, double rho0, const ProofConstants& consts) {
    if (!(eps_l1 >= 0.0)) throw std::invalid_argument("final_bound: eps_l1 must be nonnegative");
    FinalBound out;
    const double C = consts.c_RS * rho0 * std::pow(consts.K3, consts.gamma);
    out.value = eps_l1 == 0.0 ? 0.0 : C * std::pow(eps_l1, consts.gamma);
    out.applicable = eps_l1 <= consts.eps1;
    return out;
}

ProofConstants assemble_constants(const SurfaceQuantities& q, const ConstantsConfig& cfg) {
    if (!(cfg.eps0 > 0.0 && cfg.eps0 <= 1.0)) throw ConfigError("eps0 must lie in (0, 1]");
    if (!(cfg.c_RS > 0.0)) throw ConfigError("c_RS must be positive");
    if (!(cfg.alpha > 0.0)) throw ConfigError("alpha must be positive");
    ProofConstants pc;
    pc.eps0 = cfg.eps0;
    pc.c_RS = cfg.c_RS;
    pc.alpha = cfg.alpha;
    pc.gamma = cfg.alpha / (2.0 * (q.n + 1));
    pc.c_n = cfg.c_n;
    pc.b = cfg.b;
    pc.k1_mode = cfg.k1_mode;
    pc.provenance["eps0"] = "configured (external theorem, no value given)";
    pc.provenance["c_RS"] = "configured (external theorem, no value given)";
    pc.provenance["alpha"] = "configured placeholder (external theorem, no value given)";

    if (q.r == 1) {
        pc.provenance["K1"] = "exact n(n-1) for r = 1";
    } else {
        if (!(cfg.c_n > 0.0)) throw ConfigError("c_n must be positive for r >= 2 (calibrate or configure it)");
        pc.provenance["c_n"] = cfg.c_n_source;
        pc.provenance["b_consts"] = cfg.c_n_source;
        pc.provenance["K1"] = cfg.k1_mode == K1Mode::H ? "lemma constant, h route" : "lemma constant, min H_{r+1} route";
    }
    pc.K1 = cfg.k1_mode == K1Mode::H ? K1(q.n, q.r, q.minH_partial, q.h, q.B_sup, cfg.c_n, cfg.b)
                                     : K1_prime(q.n, q.r, q.minH_partial, q.minH_rplus1, q.B_sup, cfg.c_n, cfg.b);

    const SpaceFormModel model(q.delta, q.n + 1);
    pc.K2 = K2(q.delta, pc.K1, q.R0, q.B_sup, q.R);
    pc.Kn_MS = cfg.Kn_MS.value_or(default_michael_simon_constant(q.n));
    pc.provenance["Kn_MS"] = cfg.Kn_MS ? "configured" : "default |S^n|^(-1/n)";
    pc.c_n_phi = cfg.c_n_phi.value_or(default_c_n_phi(pc.Kn_MS, model, q.R, q.n));
    pc.provenance["c_n_phi"] = cfg.c_n_phi ? "configured" : "default Kn_MS exp(n sup|phi|) on the ball of radius R";
    pc.K3 = K3(pc.K2, pc.c_n_phi, q.volume, q.n, q.B_sup);
    pc.eps1 = eps1(pc.eps0, pc.K3, q.n);

    pc.dependencies = {{"n", q.n},
                       {"r", q.r},
                       {"delta", q.delta},
                       {"h", q.h},
                       {"min_H_partial", q.minH_partial},
                       {"min_H_rplus1", q.minH_rplus1},
                       {"B_sup", q.B_sup},
                       {"volume", q.volume},
                       {"R0", q.R0},
                       {"R", q.R}};
    return pc;
}

} // namespace starpinch
