#pragma once

// Command-line front end: configuration parsing, hashing, and the report,
// identities, pinch, scaling and calibrate commands.
//
// Configuration is an INI file:
//
//   [surface]     n, delta, rho0, basis (harmonic | monomial),
//                 perturbation = "index:amplitude, index:amplitude"
//   [experiment]  r, h, seed, amplitudes, hausdorff_order, threads
//   [quadrature]  order, check_order
//   [constants]   eps0, c_RS, alpha, Kn_MS, c_n_phi, c_n, b_consts,
//                 calibration (file), calibration_samples, calibration_margin,
//                 K1_mode (h | Hr1)
//   [output]      dir
//
// Exit codes: 0 success, 1 hypothesis violation, 2 numerical failure,
// 3 configuration error.

#include "starpinch/basis.hpp"
#include "starpinch/constants.hpp"
#include "starpinch/surface.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace starpinch {

struct ExperimentConfig {
    int n = 2;
    double delta = 0.0;
    double rho0 = 1.0;
    BasisKind basis = BasisKind::Monomial;
    std::vector<PerturbationTerm> perturbation;

    int r = 1;
    std::optional<double> h;
    std::uint64_t seed = 0;
    std::vector<double> amplitudes;
    int hausdorff_order = 16;

    int quad_order = 24;
    int quad_order_check = 48;

    double eps0 = 0.1;
    double c_RS = 1.0;
    double alpha = 0.5;
    std::optional<double> Kn_MS;
    std::optional<double> c_n_phi;
    std::optional<double> c_n;
    std::string b_consts;
    std::string c_n_source;  // set when c_n comes from the config or a calibration file
    std::uint64_t calibration_samples = 100000;
    double calibration_margin = 0.1;
    K1Mode k1_mode = K1Mode::H;

    // Not part of the hash.
    std::string out_dir = "out";
    int threads = 1;
};

/// Parses and validates a configuration. `base_dir` resolves a relative
/// calibration file path. Throws ConfigError naming the line or key.
ExperimentConfig parse_config(std::istream& is, const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path);

/// Checks the invariants between fields; throws ConfigError.
void validate_config(const ExperimentConfig& cfg);

/// Deterministic text form of every field that affects results.
std::string canonical_config(const ExperimentConfig& cfg);
/// Hex SHA-256 of a string.
std::string sha256_hex(const std::string& text);
std::string config_hash(const ExperimentConfig& cfg);

RadialSurface make_surface(const ExperimentConfig& cfg);
/// Proof-constant configuration; calibrates c_n and b when r >= 2 and the
/// config supplies neither.
ConstantsConfig resolve_constants(const ExperimentConfig& cfg);

/// Runs the command line; returns the exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace starpinch
