#include "starpinch/symfun.hpp"

#include "starpinch/errors.hpp"
#include "starpinch/parallel.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace starpinch {

PrincipalCurvatures::PrincipalCurvatures(std::vector<double> kappa) : kappa_(std::move(kappa)) {
    if (kappa_.empty()) throw std::invalid_argument("principal curvatures: empty vector");
    for (double k : kappa_)
        if (!std::isfinite(k)) throw NumericalError("principal curvatures: non-finite entry");
    std::sort(kappa_.begin(), kappa_.end());
}

double PrincipalCurvatures::spectral_norm() const {
    return std::max(std::abs(kappa_.front()), std::abs(kappa_.back()));
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double b = 1.0;
    for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
    return std::round(b);
}

std::vector<double> elementary_symmetric(std::span<const double> kappa) {
    std::vector<double> sigma(kappa.size() + 1, 0.0);
    sigma[0] = 1.0;
    for (std::size_t i = 0; i < kappa.size(); ++i)
        for (std::size_t k = i + 1; k >= 1; --k) sigma[k] += kappa[i] * sigma[k - 1];
    return sigma;
}

std::vector<double> elementary_symmetric(const PrincipalCurvatures& kappa) {
    return elementary_symmetric(std::span<const double>(kappa.values()));
}

std::vector<double> normalized_mean_curvatures(const std::vector<double>& sigma, int n) {
    if (static_cast<int>(sigma.size()) != n + 1) throw std::invalid_argument("sigma must have n + 1 entries");
    std::vector<double> H(sigma.size());
    for (int k = 0; k <= n; ++k) H[k] = sigma[k] / binomial(n, k);
    return H;
}

CurvatureProfile curvature_profile(const PrincipalCurvatures& kappa) {
    CurvatureProfile p;
    p.kappa = kappa.values();
    p.sigma = elementary_symmetric(kappa);
    p.H = normalized_mean_curvatures(p.sigma, kappa.n());
    CompensatedSum tau;
    for (double k : p.kappa) tau.add((k - p.H[1]) * (k - p.H[1]));
    p.tau_sq = tau.value();
    return p;
}

PartialMeanCurvature partial_H(int l, int i, int j, const PrincipalCurvatures& kappa) {
    const int n = kappa.n();
    if (l < 2 || l > n + 1) throw std::out_of_range("partial_H: l must satisfy 2 <= l <= n + 1");
    if (i < 0 || j < 0 || i >= n || j >= n || i == j)
        throw std::out_of_range("partial_H: indices must be distinct and in range");
    if (l == n + 1) return {0.0, l, i, j};
    std::vector<double> rest;
    rest.reserve(static_cast<std::size_t>(n));
    for (int m = 0; m < n; ++m)
        if (m != i && m != j) rest.push_back(kappa[m]);
    const auto sigma = elementary_symmetric(std::span<const double>(rest));
    return {sigma[static_cast<std::size_t>(l - 2)] / binomial(n, l), l, i, j};
}

double partial_H_extremal(int l, std::span<const double> sorted_kappa) {
    const int n = static_cast<int>(sorted_kappa.size());
    if (l < 2 || l > n + 1) throw std::out_of_range("partial_H: l must satisfy 2 <= l <= n + 1");
    if (l == n + 1) return 0.0;
    const auto sigma = elementary_symmetric(sorted_kappa.subspan(1, static_cast<std::size_t>(n - 2)));
    return sigma[static_cast<std::size_t>(l - 2)] / binomial(n, l);
}

std::vector<double> maclaurin_gaps(const CurvatureProfile& profile, int r) {
    const int n = profile.n();
    if (r < 1 || r > n - 1) throw std::out_of_range("maclaurin_gaps: r must satisfy 1 <= r <= n - 1");
    if (!(profile.H[r + 1] > 0.0)) throw HypothesisError("maclaurin_gaps: H_{r+1} must be positive");
    for (int s = 1; s <= r; ++s)
        if (!(profile.H[s] > 0.0))
            throw HypothesisError(fmt::format("maclaurin_gaps: H_{} <= 0, curvature vector outside the cone", s));
    std::vector<double> gaps;
    gaps.reserve(static_cast<std::size_t>(r));
    for (int k = 1; k <= r; ++k)
        gaps.push_back(std::pow(profile.H[k], 1.0 / k) - std::pow(profile.H[k + 1], 1.0 / (k + 1)));
    return gaps;
}

double newton_gap(const CurvatureProfile& profile, int k) {
    if (k < 1 || k > profile.n() - 1) throw std::out_of_range("newton_gap: k must satisfy 1 <= k <= n - 1");
    return profile.H[k] * profile.H[k] - profile.H[k + 1] * profile.H[k - 1];
}

double sharpened_newton_gap(const CurvatureProfile& profile, int k, double c_n) {
    const double gap = newton_gap(profile, k);
    const double partial = partial_H_extremal(k + 1, profile.kappa);
    return gap - c_n * profile.tau_sq * partial * partial;
}

namespace {

void check_k1_inputs(int n, int r, double minH_partial, double B_sup) {
    if (n < 2 || r < 1 || r > n - 1) throw std::out_of_range("K1: need n >= 2 and 1 <= r <= n - 1");
    if (!(B_sup > 0.0)) throw HypothesisError("K1: |B|_inf must be positive");
    if (r >= 2 && !(minH_partial > 0.0)) throw HypothesisError("K1: min H_{r+1;n,1} must be positive");
}

// c_n min_k b_{n,k+1,r}^{2(k-1)} sum_k (m^{1/(r-1)} / B)^{2(k-1)}, without the h/2 or H_{r+1} factor.
double k1_common(int r, double minH_partial, double B_sup, double c_n, const std::vector<double>& b) {
    double bmin = 1.0;  // k = 1 contributes b^0 = 1
    double sum = 1.0;
    if (r >= 2) {
        if (static_cast<int>(b.size()) < r + 2) throw std::invalid_argument("K1: need b_{n,k,r} for k <= r + 1");
        const double base = std::pow(minH_partial, 1.0 / (r - 1)) / B_sup;
        for (int k = 2; k <= r; ++k) {
            bmin = std::min(bmin, std::pow(b[static_cast<std::size_t>(k + 1)], 2.0 * (k - 1)));
            sum += std::pow(base, 2.0 * (k - 1));
        }
    }
    return c_n * bmin * sum;
}

} // namespace

double k1_factor(int n, int r, double minH_partial, double h, double B_sup, double c_n,
                 const std::vector<double>& b) {
    check_k1_inputs(n, r, minH_partial, B_sup);
    if (!(h > 0.0)) throw HypothesisError("K1: h must be positive");
    return k1_common(r, minH_partial, B_sup, c_n, b) * h / (2.0 * B_sup);
}

double k1_prime_factor(int n, int r, double minH_partial, double minH_rplus1, double B_sup, double c_n,
                       const std::vector<double>& b) {
    check_k1_inputs(n, r, minH_partial, B_sup);
    if (!(minH_rplus1 > 0.0)) throw HypothesisError("K1': min H_{r+1} must be positive");
    return k1_common(r, minH_partial, B_sup, c_n, b) * std::pow(minH_rplus1, double(r) / (r + 1)) / B_sup;
}

double K1(int n, int r, double minH_partial, double h, double B_sup, double c_n, const std::vector<double>& b) {
    if (r == 1) {
        check_k1_inputs(n, r, minH_partial, B_sup);
        return n * (n - 1.0);
    }
    return 1.0 / k1_factor(n, r, minH_partial, h, B_sup, c_n, b);
}

double K1_prime(int n, int r, double minH_partial, double minH_rplus1, double B_sup, double c_n,
                const std::vector<double>& b) {
    if (r == 1) {
        check_k1_inputs(n, r, minH_partial, B_sup);
        return n * (n - 1.0);
    }
    return 1.0 / k1_prime_factor(n, r, minH_partial, minH_rplus1, B_sup, c_n, b);
}

std::vector<double> positive_curvature_sample(const CounterRng& rng, std::uint64_t stream, std::uint64_t index,
                                              int n) {
    std::vector<double> kappa(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        // (0, 1]: never exactly zero
        kappa[static_cast<std::size_t>(i)] = 1.0 - rng.uniform(stream, index * 16 + static_cast<std::uint64_t>(i));
    }
    std::sort(kappa.begin(), kappa.end());
    return kappa;
}

namespace {
constexpr double kUmbilicCutoff = 1e-6;
} // namespace

double sharpened_newton_ratio(const CurvatureProfile& profile) {
    double best = std::numeric_limits<double>::infinity();
    double scale = 0.0;
    for (double k : profile.kappa) scale += k * k;
    // near-umbilic samples: the Newton gap is lost to cancellation
    if (!(profile.tau_sq > kUmbilicCutoff * scale)) return best;
    for (int k = 1; k <= profile.n() - 1; ++k) {
        const double partial = partial_H_extremal(k + 1, profile.kappa);
        const double denom = profile.tau_sq * partial * partial;
        if (denom > 0.0) best = std::min(best, newton_gap(profile, k) / denom);
    }
    return best;
}

double maclaurin_chain_ratio(const std::vector<double>& sorted_kappa, int k, int r) {
    if (k < 3 || k > r + 1) throw std::out_of_range("maclaurin_chain_ratio: need 3 <= k <= r + 1");
    const double num = partial_H_extremal(k, sorted_kappa);
    const double den = partial_H_extremal(r + 1, sorted_kappa);
    return std::pow(num, 1.0 / (k - 2)) / std::pow(den, 1.0 / (r - 1));
}

Calibration calibrate(int n, int r, std::uint64_t samples, std::uint64_t seed, double margin, int threads) {
    if (n < 2 || r < 1 || r > n - 1) throw ConfigError("calibrate: need n >= 2 and 1 <= r <= n - 1");
    if (samples < 10000) throw ConfigError("calibrate: at least 10^4 samples required");
    if (!(margin >= 0.0 && margin < 1.0)) throw ConfigError("calibrate: margin must lie in [0, 1)");
    const CounterRng rng(seed);
    const std::size_t nb = static_cast<std::size_t>(r + 2);
    // per-sample ratios in pre-assigned slots; slot layout [c_n ratio, b_3 .. b_{r+1}]
    std::vector<double> ratios(samples * nb, std::numeric_limits<double>::infinity());
    parallel_for(samples, threads, [&](std::size_t s) {
        const auto kappa = positive_curvature_sample(rng, kCalibrationStream, s, n);
        const auto profile = curvature_profile(PrincipalCurvatures(kappa));
        ratios[s * nb] = sharpened_newton_ratio(profile);
        for (int k = 3; k <= r + 1; ++k) ratios[s * nb + static_cast<std::size_t>(k)] = maclaurin_chain_ratio(kappa, k, r);
    });

    Calibration cal;
    cal.n = n;
    cal.r = r;
    cal.seed = seed;
    cal.samples = samples;
    cal.margin = margin;
    cal.b.assign(nb, 1.0);
    double cmin = std::numeric_limits<double>::infinity();
    std::vector<double> bmin(nb, std::numeric_limits<double>::infinity());
    for (std::size_t s = 0; s < samples; ++s) {
        cmin = std::min(cmin, ratios[s * nb]);
        for (std::size_t k = 3; k < nb; ++k) bmin[k] = std::min(bmin[k], ratios[s * nb + k]);
    }
    if (!std::isfinite(cmin) || !(cmin > 0.0)) throw NumericalError("calibrate: degenerate sampling for c_n");
    cal.c_n_raw = cmin;
    cal.c_n = cmin * (1.0 - margin);
    for (std::size_t k = 3; k < nb; ++k) {
        if (!std::isfinite(bmin[k]) || !(bmin[k] > 0.0))
            throw NumericalError(fmt::format("calibrate: degenerate sampling for b_{{n,{},r}}", k));
        cal.b[k] = bmin[k] * (1.0 - margin);
    }
    return cal;
}

void write_calibration(std::ostream& os, const Calibration& cal) {
    os << "[calibration]\n";
    os << fmt::format("n = {}\nr = {}\n", cal.n, cal.r);
    os << fmt::format("c_n = {:.17g}\nc_n_raw = {:.17g}\n", cal.c_n, cal.c_n_raw);
    std::string b;
    for (std::size_t k = 3; k < cal.b.size(); ++k) b += fmt::format("{}{}:{:.17g}", b.empty() ? "" : ", ", k, cal.b[k]);
    os << "b_consts = " << b << "\n";
    os << fmt::format("seed = {}\nsamples = {}\nmargin = {:.17g}\n", cal.seed, cal.samples, cal.margin);
}

std::vector<double> parse_b_consts(const std::string& text, int r) {
    std::vector<double> b(static_cast<std::size_t>(r + 2), 1.0);
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.find_first_not_of(" \t") == std::string::npos) continue;
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw ConfigError("b_consts: expected entries of the form k:value");
        const int k = std::stoi(item.substr(0, colon));
        if (k < 3 || k > r + 1) throw ConfigError(fmt::format("b_consts: index {} outside 3..r+1", k));
        b[static_cast<std::size_t>(k)] = std::stod(item.substr(colon + 1));
    }
    return b;
}

Calibration read_calibration(std::istream& is) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(fmt::format("calibration file, line {}: {}", e.line(), e.message()));
    }
    try {
        Calibration cal;
        cal.n = tree.get<int>("calibration.n");
        cal.r = tree.get<int>("calibration.r");
        cal.c_n = tree.get<double>("calibration.c_n");
        cal.c_n_raw = tree.get<double>("calibration.c_n_raw", cal.c_n);
        cal.b = parse_b_consts(tree.get<std::string>("calibration.b_consts", ""), cal.r);
        cal.seed = tree.get<std::uint64_t>("calibration.seed", 0);
        cal.samples = tree.get<std::uint64_t>("calibration.samples", 0);
        cal.margin = tree.get<double>("calibration.margin", 0.0);
        return cal;
    } catch (const pt::ptree_error& e) {
        throw ConfigError(std::string("calibration file: ") + e.what());
    } catch (const std::logic_error& e) {
        throw ConfigError(std::string("calibration file: ") + e.what());
    }
}

} // namespace starpinch
