#include "starpinch/optimize.hpp"

#include "starpinch/errors.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>
#include <memory>

namespace starpinch {

namespace {

using Objective = std::function<double(const Eigen::VectorXd&)>;

double trampoline(const gsl_vector* v, void* params) {
    const auto& f = *static_cast<const Objective*>(params);
    Eigen::VectorXd x(static_cast<Eigen::Index>(v->size));
    for (std::size_t i = 0; i < v->size; ++i) x(static_cast<Eigen::Index>(i)) = gsl_vector_get(v, i);
    return f(x);
}

struct VectorDeleter {
    void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};
struct MinimizerDeleter {
    void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};

} // namespace

SimplexResult nelder_mead(const Objective& f, const Eigen::VectorXd& x0, double step, double size_tol, int max_iter) {
    static const bool handler_off = [] {
        gsl_set_error_handler_off();
        return true;
    }();
    (void)handler_off;

    const std::size_t dim = static_cast<std::size_t>(x0.size());
    std::unique_ptr<gsl_vector, VectorDeleter> x(gsl_vector_alloc(dim));
    std::unique_ptr<gsl_vector, VectorDeleter> ss(gsl_vector_alloc(dim));
    for (std::size_t i = 0; i < dim; ++i) gsl_vector_set(x.get(), i, x0(static_cast<Eigen::Index>(i)));
    gsl_vector_set_all(ss.get(), step);

    Objective copy = f;
    gsl_multimin_function fn;
    fn.n = dim;
    fn.f = &trampoline;
    fn.params = &copy;

    std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> m(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim));
    if (gsl_multimin_fminimizer_set(m.get(), &fn, x.get(), ss.get()) != GSL_SUCCESS)
        throw NumericalError("simplex minimizer could not be initialized");

    SimplexResult out;
    int status = GSL_CONTINUE;
    for (out.iterations = 0; out.iterations < max_iter && status == GSL_CONTINUE; ++out.iterations) {
        if (gsl_multimin_fminimizer_iterate(m.get()) != GSL_SUCCESS) break;
        status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(m.get()), size_tol);
    }
    out.converged = status == GSL_SUCCESS;
    out.x.resize(x0.size());
    for (std::size_t i = 0; i < dim; ++i) out.x(static_cast<Eigen::Index>(i)) = gsl_vector_get(m->x, i);
    out.f = m->fval;
    return out;
}

NewtonResult newton_minimize(const std::function<Jet(const std::vector<Jet>&)>& f, const Eigen::VectorXd& x0,
                             double max_step, int max_iter) {
    const int d = static_cast<int>(x0.size());
    auto lift = [d](const Eigen::VectorXd& x) {
        std::vector<Jet> v;
        for (int i = 0; i < d; ++i) v.push_back(Jet::variable(x(i), i, d));
        return v;
    };
    auto value = [&](const Eigen::VectorXd& x) {
        std::vector<double> v(x.data(), x.data() + d);
        std::vector<Jet> c;
        for (double xi : v) c.push_back(Jet::constant(xi, d));
        return f(c).v;
    };

    NewtonResult out;
    out.x = x0;
    Jet J = f(lift(out.x));
    out.f = J.v;
    for (out.iterations = 0; out.iterations < max_iter; ++out.iterations) {
        const Eigen::VectorXd g = J.g;
        const Eigen::MatrixXd H = J.h;
        if (!g.allFinite() || !H.allFinite()) break;
        if (g.norm() == 0.0) {
            out.converged = true;
            break;
        }
        Eigen::VectorXd step;
        double shift = 0.0;
        const double hscale = std::max(H.cwiseAbs().maxCoeff(), 1e-300);
        for (int k = 0; k < 30; ++k) {
            Eigen::LLT<Eigen::MatrixXd> llt(H + shift * Eigen::MatrixXd::Identity(d, d));
            if (llt.info() == Eigen::Success) {
                step = -llt.solve(g);
                if (step.allFinite()) break;
            }
            shift = shift == 0.0 ? 1e-10 * hscale : 10.0 * shift;
        }
        if (step.size() != d || !step.allFinite()) step = -g;
        if (step.norm() > max_step) step *= max_step / step.norm();
        const double slope = g.dot(step);
        double t = 1.0;
        bool accepted = false;
        for (int k = 0; k < 40; ++k, t *= 0.5) {
            const Eigen::VectorXd trial = out.x + t * step;
            const double ft = value(trial);
            if (std::isfinite(ft) && ft <= out.f + 1e-4 * t * slope) {
                out.x = trial;
                accepted = true;
                break;
            }
        }
        if (!accepted || t * step.norm() <= 1e-14 * (1.0 + out.x.norm())) {
            out.converged = true;
            J = f(lift(out.x));
            out.f = J.v;
            break;
        }
        J = f(lift(out.x));
        out.f = J.v;
    }
    return out;
}

} // namespace starpinch
