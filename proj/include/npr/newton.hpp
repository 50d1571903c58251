#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "npr/error.hpp"

namespace npr {

struct NewtonOptions {
    int max_iter = 100;
    double tol = 1e-8;          // on the max-norm of the accepted update
    double theta_bound = 30.0;  // separation guard on the max-norm of theta
};

}  // namespace npr

namespace npr::detail {

struct Objective {
    double value = 0.0;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;  // of the objective being maximized
};

struct NewtonRun {
    Eigen::VectorXd theta;
    double value = 0.0;
    std::vector<double> trace;
    int iterations = 0;
    bool converged = false;
};

// Solves A x = b for symmetric positive definite A. Retries once with
// A + 1e-10 I before giving up.
inline Eigen::VectorXd solve_spd(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
    for (int attempt = 0; attempt < 2; ++attempt) {
        Eigen::MatrixXd m = a;
        if (attempt == 1) m.diagonal().array() += 1e-10;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(m);
        if (ldlt.info() == Eigen::Success && ldlt.isPositive() && (ldlt.vectorD().array() > 0.0).all()) {
            Eigen::VectorXd x = ldlt.solve(b);
            if (x.allFinite()) return x;
        }
    }
    throw SingularMatrix("information matrix is singular");
}

inline Eigen::VectorXd inverse_diagonal(const Eigen::MatrixXd& a) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 0.0).all())
        return Eigen::VectorXd::Constant(a.rows(), std::numeric_limits<double>::infinity());
    const Eigen::MatrixXd inv = ldlt.solve(Eigen::MatrixXd::Identity(a.rows(), a.cols()));
    return inv.diagonal();
}

// Damped Newton ascent: the full step is halved until the objective does not
// decrease, so the recorded trace is non-decreasing.
inline NewtonRun newton_maximize(const std::function<Objective(const Eigen::VectorXd&, bool)>& f,
                                 Eigen::VectorXd theta, const NewtonOptions& options) {
    NewtonRun run;
    Objective cur = f(theta, true);
    if (!std::isfinite(cur.value)) throw ModelError("objective is not finite at the starting point");
    run.trace.push_back(cur.value);

    for (int it = 1; it <= options.max_iter; ++it) {
        const Eigen::VectorXd direction = solve_spd(-cur.hessian, cur.gradient);
        double step = 1.0;
        bool accepted = false;
        Eigen::VectorXd candidate;
        double value = 0.0;
        for (int halving = 0; halving < 60; ++halving) {
            candidate = theta + step * direction;
            value = f(candidate, false).value;
            if (std::isfinite(value) && value >= cur.value) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            // no ascent left along the Newton direction
            run.converged = direction.lpNorm<Eigen::Infinity>() < std::sqrt(options.tol);
            break;
        }
        const double update = (step * direction).lpNorm<Eigen::Infinity>();
        theta = candidate;
        cur = f(theta, true);
        run.trace.push_back(cur.value);
        run.iterations = it;
        if (update < options.tol) {
            run.converged = true;
            break;
        }
        if (theta.lpNorm<Eigen::Infinity>() > options.theta_bound)
            throw SeparationError("separation: coefficients exceed " + std::to_string(options.theta_bound) +
                                  " in absolute value before convergence");
    }
    run.theta = theta;
    run.value = cur.value;
    return run;
}

}  // namespace npr::detail
