#pragma once

// Second-order forward-mode jets: value, gradient and Hessian with respect to
// up to four independent variables. Used for exact first and second
// derivatives of the immersion and for Newton polishing of the sphere fit.

#include <Eigen/Core>
#include <cmath>

namespace starpinch {

class Jet {
public:
    static constexpr int max_vars = 4;
    using Grad = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, max_vars, 1>;
    using Hess = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, max_vars, max_vars>;

    double v = 0.0;
    Grad g;
    Hess h;

    Jet() = default;

    static Jet constant(double value, int nvars) {
        Jet j;
        j.v = value;
        j.g = Grad::Zero(nvars);
        j.h = Hess::Zero(nvars, nvars);
        return j;
    }

    static Jet variable(double value, int index, int nvars) {
        Jet j = constant(value, nvars);
        j.g(index) = 1.0;
        return j;
    }

    int nvars() const { return static_cast<int>(g.size()); }

    /// Chain rule for a scalar function with derivatives f1 = f'(v), f2 = f''(v).
    Jet chain(double f0, double f1, double f2) const {
        Jet r;
        r.v = f0;
        r.g = f1 * g;
        r.h = f1 * h + f2 * (g * g.transpose());
        return r;
    }

    Jet operator-() const { return chain(-v, -1.0, 0.0); }

    Jet& operator+=(const Jet& o) { v += o.v; g += o.g; h += o.h; return *this; }
    Jet& operator-=(const Jet& o) { v -= o.v; g -= o.g; h -= o.h; return *this; }
    Jet& operator+=(double c) { v += c; return *this; }
    Jet& operator-=(double c) { v -= c; return *this; }
    Jet& operator*=(double c) { v *= c; g *= c; h *= c; return *this; }

    Jet& operator*=(const Jet& o) {
        Hess cross = g * o.g.transpose();
        h = v * o.h + o.v * h + cross + cross.transpose();
        g = v * o.g + o.v * g;
        v *= o.v;
        return *this;
    }
};

inline Jet operator+(Jet a, const Jet& b) { return a += b; }
inline Jet operator-(Jet a, const Jet& b) { return a -= b; }
inline Jet operator*(Jet a, const Jet& b) { return a *= b; }
inline Jet operator+(Jet a, double c) { return a += c; }
inline Jet operator+(double c, Jet a) { return a += c; }
inline Jet operator-(Jet a, double c) { return a -= c; }
inline Jet operator-(double c, const Jet& a) { return (-a) += c; }
inline Jet operator*(Jet a, double c) { return a *= c; }
inline Jet operator*(double c, Jet a) { return a *= c; }

inline Jet inverse(const Jet& a) {
    const double i = 1.0 / a.v;
    return a.chain(i, -i * i, 2.0 * i * i * i);
}
inline Jet operator/(const Jet& a, const Jet& b) { return a * inverse(b); }
inline Jet operator/(Jet a, double c) { return a *= (1.0 / c); }
inline Jet operator/(double c, const Jet& a) { return c * inverse(a); }

inline Jet sqrt(const Jet& a) {
    const double s = std::sqrt(a.v);
    return a.chain(s, 0.5 / s, -0.25 / (s * a.v));
}

inline Jet asinh(const Jet& a) {
    const double q = 1.0 + a.v * a.v;
    return a.chain(std::asinh(a.v), 1.0 / std::sqrt(q), -a.v / (q * std::sqrt(q)));
}

inline Jet atan(const Jet& a) {
    const double q = 1.0 + a.v * a.v;
    return a.chain(std::atan(a.v), 1.0 / q, -2.0 * a.v / (q * q));
}

inline double value_of(double x) { return x; }
inline double value_of(const Jet& x) { return x.v; }

/// Builds a constant of the same shape as `like` (double stays double).
inline double constant_like(double, double c) { return c; }
inline Jet constant_like(const Jet& like, double c) { return Jet::constant(c, like.nvars()); }

} // namespace starpinch
