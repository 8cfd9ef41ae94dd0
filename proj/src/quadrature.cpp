#include "starpinch/quadrature.hpp"

#include "starpinch/errors.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace starpinch {

void gauss_legendre(int count, std::vector<double>& nodes, std::vector<double>& weights) {
    if (count < 1) throw std::invalid_argument("gauss_legendre: count must be positive");
    nodes.assign(static_cast<std::size_t>(count), 0.0);
    weights.assign(static_cast<std::size_t>(count), 0.0);
    const int half = (count + 1) / 2;
    for (int i = 1; i <= half; ++i) {
        double z = std::cos(M_PI * (i - 0.25) / (count + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = 1.0;
            double p2 = 0.0;
            for (int j = 1; j <= count; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
            }
            pp = count * (z * p1 - p2) / (z * z - 1.0);
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= 1e-15) {
                // one more derivative evaluation at the converged node
                p1 = 1.0;
                p2 = 0.0;
                for (int j = 1; j <= count; ++j) {
                    const double p3 = p2;
                    p2 = p1;
                    p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
                }
                pp = count * (z * p1 - p2) / (z * z - 1.0);
                break;
            }
        }
        const double w = 2.0 / ((1.0 - z * z) * pp * pp);
        nodes[static_cast<std::size_t>(i - 1)] = -z;
        nodes[static_cast<std::size_t>(count - i)] = z;
        weights[static_cast<std::size_t>(i - 1)] = w;
        weights[static_cast<std::size_t>(count - i)] = w;
    }
    if (count % 2 == 1) nodes[static_cast<std::size_t>(count / 2)] = 0.0;
}

double unit_sphere_area(int n) {
    // 2 pi^{(n+1)/2} / Gamma((n+1)/2)
    return 2.0 * std::pow(M_PI, 0.5 * (n + 1)) / std::tgamma(0.5 * (n + 1));
}

namespace {

void append_s2(int order, double t_weight, double sin_chi, double cos_chi, bool lift, SphericalRule& rule) {
    std::vector<double> z, wz;
    gauss_legendre(order, z, wz);
    const int naz = 2 * order;
    const double waz = 2.0 * M_PI / naz;
    for (int i = 0; i < order; ++i) {
        const double st = std::sqrt(std::max(0.0, 1.0 - z[i] * z[i]));
        for (int j = 0; j < naz; ++j) {
            const double phi = waz * (j + 0.5);
            Eigen::VectorXd u(lift ? 4 : 3);
            u(0) = st * std::cos(phi);
            u(1) = st * std::sin(phi);
            u(2) = z[i];
            if (lift) {
                u.head<3>() *= sin_chi;
                u(3) = cos_chi;
            }
            rule.nodes.push_back(u.normalized());
            rule.weights.push_back(t_weight * wz[i] * waz);
        }
    }
}

} // namespace

SphericalRule build_rule(int n, int order) {
    if (order < 4) throw ConfigError("quadrature order must be at least 4");
    SphericalRule rule;
    rule.n = n;
    rule.order = order;
    if (n == 2) {
        append_s2(order, 1.0, 1.0, 0.0, false, rule);
    } else if (n == 3) {
        for (int k = 1; k <= order; ++k) {
            const double theta = k * M_PI / (order + 1);
            const double w = M_PI / (order + 1) * std::sin(theta) * std::sin(theta);
            append_s2(order, w, std::sin(theta), std::cos(theta), true, rule);
        }
    } else {
        throw ConfigError("quadrature: unsupported sphere dimension n = " + std::to_string(n) + " (need 2 or 3)");
    }
    return rule;
}

} // namespace starpinch
