#pragma once

// Tensor-product quadrature on the parameter sphere S^n (n = 2, 3).
//
//   n = 2: Gauss-Legendre in the polar cosine (order nodes) times a uniform
//          periodic rule with 2*order azimuthal nodes.
//   n = 3: u = (sin(chi) v, cos(chi)), v in S^2; Gauss-Chebyshev (second kind)
//          in t = cos(chi), which absorbs the sin^2(chi) density, times the
//          S^2 rule above.
// Both rules integrate every polynomial of degree <= 2*order - 1 exactly.

#include <Eigen/Core>
#include <vector>

namespace starpinch {

struct SphericalRule {
    int n = 2;
    int order = 0;
    std::vector<Eigen::VectorXd> nodes;  // unit vectors in R^{n+1}
    std::vector<double> weights;         // sum to the area of S^n

    std::size_t size() const { return nodes.size(); }
    /// Highest polynomial degree integrated exactly.
    int exact_degree() const { return 2 * order - 1; }
};

struct IntegralEstimate {
    double value = 0.0;
    double refinement_error = 0.0;  // |value(order) - value(check order)|
};

/// Gauss-Legendre nodes and weights on [-1, 1], nodes ascending.
void gauss_legendre(int count, std::vector<double>& nodes, std::vector<double>& weights);

double unit_sphere_area(int n);

SphericalRule build_rule(int n, int order);

} // namespace starpinch
