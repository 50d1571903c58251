#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "npr/design.hpp"
#include "npr/newton.hpp"

namespace npr {

struct LogisticFit {
    std::vector<ColumnTag> tags;  // design columns, intercept excluded
    Eigen::VectorXd theta_hat;    // (alpha_0, lambda over tags)
    double log_likelihood = 0.0;
    std::vector<double> loglik_trace;  // one entry per accepted iterate, starting at theta = 0
    int iterations = 0;
    bool converged = false;
    Eigen::MatrixXd information;  // N^{-1} sum_i w_i x_i x_i^T at theta_hat
    Eigen::VectorXd std_errors;   // sqrt(diag((sum_i w_i x_i x_i^T)^{-1}))
    Eigen::VectorXd fitted;       // P_i(theta_hat)
    int n = 0;
};

// Building blocks over an explicit matrix whose first column is the intercept.
double logistic_loglik(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& theta);
Eigen::VectorXd logistic_score(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& theta);
// Hessian of the log-likelihood (negative semi-definite).
Eigen::MatrixXd logistic_hessian(const Eigen::MatrixXd& x, const Eigen::VectorXd& theta);

LogisticFit fit_logistic_matrix(const Eigen::MatrixXd& x_with_intercept, const Eigen::VectorXd& y,
                                const NewtonOptions& options = {});

// Newton-Raphson conditional MLE on (1, selected columns). Y must be 0/1.
LogisticFit fit_logistic(const PropagatedDesign& design, const Eigen::VectorXd& y, const NewtonOptions& options = {});

Eigen::VectorXd predict_proba(const LogisticFit& fit, const PropagatedDesign& design);

// Mann-Whitney AUC; ties between a positive and a negative count one half.
double auc(std::span<const double> scores, std::span<const int> labels);

}  // namespace npr
