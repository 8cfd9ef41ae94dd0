#pragma once

// Symmetric-function calculus on principal-curvature vectors: elementary
// symmetric polynomials, normalized higher mean curvatures H_k, the partial
// curvatures H_{l;i,j}, Newton/Maclaurin gaps, the lemma constant K1 and the
// brute-force calibration of the constants c_n and b_{n,k,r}.

#include "starpinch/rng.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace starpinch {

/// Principal curvatures sorted ascending.
class PrincipalCurvatures {
public:
    explicit PrincipalCurvatures(std::vector<double> kappa);

    int n() const { return static_cast<int>(kappa_.size()); }
    const std::vector<double>& values() const { return kappa_; }
    double operator[](int i) const { return kappa_[static_cast<std::size_t>(i)]; }
    /// max_i |kappa_i|, the spectral norm of the shape operator.
    double spectral_norm() const;

private:
    std::vector<double> kappa_;
};

double binomial(int n, int k);

/// sigma_0..sigma_n by the one-root-at-a-time recurrence.
std::vector<double> elementary_symmetric(std::span<const double> kappa);
std::vector<double> elementary_symmetric(const PrincipalCurvatures& kappa);

/// H_k = sigma_k / binom(n, k).
std::vector<double> normalized_mean_curvatures(const std::vector<double>& sigma, int n);

struct CurvatureProfile {
    std::vector<double> kappa;  // ascending
    std::vector<double> sigma;  // sigma_0..sigma_n
    std::vector<double> H;      // H_0..H_n
    double tau_sq = 0.0;        // |S - H Id|^2

    int n() const { return static_cast<int>(kappa.size()); }
    double mean() const { return H[1]; }
};

CurvatureProfile curvature_profile(const PrincipalCurvatures& kappa);

struct PartialMeanCurvature {
    double value;
    int l;
    int i;
    int j;
};

/// d^2 H_l / d kappa_i d kappa_j = sigma_{l-2}(kappa without i, j) / binom(n, l).
/// Indices are zero-based; requires 2 <= l <= n + 1 (the value vanishes for l = n + 1).
PartialMeanCurvature partial_H(int l, int i, int j, const PrincipalCurvatures& kappa);

/// H_{l;n,1}: the partial curvature with respect to the largest and smallest
/// principal curvature.
double partial_H_extremal(int l, std::span<const double> sorted_kappa);

/// H_k^{1/k} - H_{k+1}^{1/(k+1)} for k = 1..r. Requires the curvature vector to
/// lie in the cone H_1, ..., H_{r+1} > 0 (HypothesisError otherwise).
std::vector<double> maclaurin_gaps(const CurvatureProfile& profile, int r);

/// H_k^2 - H_{k+1} H_{k-1} for 1 <= k <= n - 1.
double newton_gap(const CurvatureProfile& profile, int k);

/// newton_gap - c_n |tau|^2 H_{k+1;n,1}^2.
double sharpened_newton_gap(const CurvatureProfile& profile, int k, double c_n);

// ---------------------------------------------------------------------------
// Lemma constant.
//
// The proof establishes  H H_r - H_{r+1} >= F |tau|^2  with the printed factor
// F (k1_factor, or k1_prime_factor for the min H_{r+1} route). The lemma
// constant used in  |tau|^2 <= K1 (H H_r - H_{r+1})  is therefore K1 = 1/F for
// r >= 2, and the exact value n(n-1) for r = 1.
//
// b holds b_{n,k,r} indexed by k (entries k <= 2 are unused).

double k1_factor(int n, int r, double minH_partial, double h, double B_sup, double c_n,
                 const std::vector<double>& b);
double k1_prime_factor(int n, int r, double minH_partial, double minH_rplus1, double B_sup, double c_n,
                       const std::vector<double>& b);
double K1(int n, int r, double minH_partial, double h, double B_sup, double c_n, const std::vector<double>& b);
double K1_prime(int n, int r, double minH_partial, double minH_rplus1, double B_sup, double c_n,
                const std::vector<double>& b);

// ---------------------------------------------------------------------------
// Calibration.

/// Sorted curvature vector with entries uniform on (0, 1); the distribution
/// used for calibration and for held-out checks (on a different stream).
std::vector<double> positive_curvature_sample(const CounterRng& rng, std::uint64_t stream, std::uint64_t index,
                                              int n);

/// Infimum over k of the sharpened-Newton ratio at one sample; +inf when undefined
/// or when |tau|^2 < 1e-6 |kappa|^2 (too close to umbilic to resolve).
double sharpened_newton_ratio(const CurvatureProfile& profile);
/// H_{k;n,1}^{1/(k-2)} / H_{r+1;n,1}^{1/(r-1)} at one sample (3 <= k <= r+1).
double maclaurin_chain_ratio(const std::vector<double>& sorted_kappa, int k, int r);

struct Calibration {
    int n = 0;
    int r = 0;
    double c_n = 0.0;
    double c_n_raw = 0.0;    // infimum before the margin
    std::vector<double> b;   // b_{n,k,r} indexed by k, size r + 2
    std::uint64_t seed = 0;
    std::uint64_t samples = 0;
    double margin = 0.1;
};

inline constexpr std::uint64_t kCalibrationStream = 1;

Calibration calibrate(int n, int r, std::uint64_t samples, std::uint64_t seed, double margin = 0.1,
                      int threads = 1);

/// Parses "k:value, k:value" into b indexed by k (missing entries default to 1).
std::vector<double> parse_b_consts(const std::string& text, int r);

void write_calibration(std::ostream& os, const Calibration& cal);
Calibration read_calibration(std::istream& is);

} // namespace starpinch
