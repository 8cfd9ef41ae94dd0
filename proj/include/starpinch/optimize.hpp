#pragma once

// Thin wrapper over the GSL Nelder-Mead simplex minimizer (nmsimplex2).

#include "starpinch/jet.hpp"

#include <Eigen/Core>
#include <functional>
#include <vector>

namespace starpinch {

struct SimplexResult {
    Eigen::VectorXd x;
    double f = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Minimizes f from x0 with initial simplex step `step`; stops when the
/// simplex size drops below `size_tol` or after `max_iter` iterations.
SimplexResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x0,
                          double step, double size_tol, int max_iter);

struct NewtonResult {
    Eigen::VectorXd x;
    double f = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Damped Newton descent on a function evaluated on second-order jets.
/// The Hessian is shifted towards positive definiteness when needed and
/// steps are capped at `max_step` and backtracked until f decreases.
NewtonResult newton_minimize(const std::function<Jet(const std::vector<Jet>&)>& f, const Eigen::VectorXd& x0,
                             double max_step, int max_iter = 50);

} // namespace starpinch
