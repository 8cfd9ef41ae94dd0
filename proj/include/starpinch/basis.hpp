#pragma once

// Smooth basis functions on the parameter sphere S^n, written as polynomials
// in the Cartesian coordinates of the unit direction so that they can be
// evaluated on jets.
//
//  - Harmonic (n = 2 only): real orthonormal spherical harmonics, index
//    j = l^2 + l + m with -l <= m <= l. m < 0 selects the sine-type function.
//  - Monomial (any n): 1, x_0..x_n, then x_i x_j for i <= j in lexicographic order.

#include "starpinch/jet.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace starpinch {

enum class BasisKind { Harmonic, Monomial };

inline std::string to_string(BasisKind kind) { return kind == BasisKind::Harmonic ? "harmonic" : "monomial"; }

/// Number of monomials of degree <= 2 in n + 1 variables.
inline int monomial_count(int n) { return 1 + (n + 1) + (n + 1) * (n + 2) / 2; }

/// Exponent pattern of monomial index: a list of 0, 1 or 2 coordinate indices.
inline std::vector<int> monomial_factors(int index, int n) {
    const int d = n + 1;
    if (index < 0 || index >= monomial_count(n)) throw std::out_of_range("monomial index out of range");
    if (index == 0) return {};
    if (index <= d) return {index - 1};
    int k = index - d - 1;
    for (int i = 0; i < d; ++i) {
        const int row = d - i;
        if (k < row) return {i, i + k};
        k -= row;
    }
    throw std::out_of_range("monomial index out of range");
}

inline std::pair<int, int> harmonic_degree_order(int index) {
    if (index < 0) throw std::out_of_range("harmonic index out of range");
    int l = static_cast<int>(std::sqrt(static_cast<double>(index)));
    while (l * l > index) --l;
    while ((l + 1) * (l + 1) <= index) ++l;
    return {l, index - l * l - l};
}

template <class T>
T monomial_basis(int index, const std::vector<T>& u) {
    const int n = static_cast<int>(u.size()) - 1;
    T value = constant_like(u[0], 1.0);
    for (int i : monomial_factors(index, n)) value *= u[static_cast<std::size_t>(i)];
    return value;
}

template <class T>
T harmonic_basis(int index, const std::vector<T>& u) {
    if (u.size() != 3) throw std::invalid_argument("spherical harmonics require n = 2");
    const auto [l, m] = harmonic_degree_order(index);
    const int am = std::abs(m);
    const T& x = u[0];
    const T& y = u[1];
    const T& z = u[2];

    // Re/Im of (x + i y)^|m| = sin^|m|(theta) (cos, sin)(|m| phi)
    T c = constant_like(x, 1.0);
    T s = constant_like(x, 0.0);
    for (int k = 0; k < am; ++k) {
        T cn = x * c - y * s;
        T sn = x * s + y * c;
        c = cn;
        s = sn;
    }

    // P_l^m(z) / (1 - z^2)^{m/2}, without the Condon-Shortley phase
    double pmm = 1.0;
    for (int k = 1; k <= am; ++k) pmm *= (2.0 * k - 1.0);
    T p_prev = constant_like(x, pmm);
    T p = p_prev;
    if (l > am) {
        p = (2.0 * am + 1.0) * z * p_prev;
        for (int ll = am + 2; ll <= l; ++ll) {
            T next = ((2.0 * ll - 1.0) * z * p - (ll + am - 1.0) * p_prev) / double(ll - am);
            p_prev = p;
            p = next;
        }
    }

    double ratio = 1.0;  // (l - |m|)! / (l + |m|)!
    for (int k = l - am + 1; k <= l + am; ++k) ratio /= k;
    double norm = std::sqrt((2.0 * l + 1.0) / (4.0 * M_PI) * ratio);
    if (m == 0) return norm * p;
    norm *= std::sqrt(2.0);
    return m > 0 ? norm * p * c : norm * p * s;
}

template <class T>
T basis_function(BasisKind kind, int index, const std::vector<T>& u) {
    return kind == BasisKind::Harmonic ? harmonic_basis(index, u) : monomial_basis(index, u);
}

} // namespace starpinch
