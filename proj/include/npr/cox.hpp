#pragma once

#include <Eigen/Dense>

#include <vector>

#include "npr/design.hpp"
#include "npr/newton.hpp"
#include "npr/rng.hpp"

namespace npr {

// Right-censored observations: observed time min(T, C) and event = 1{T <= C}.
struct SurvivalData {
    Eigen::VectorXd time;
    std::vector<int> event;

    int size() const { return static_cast<int>(time.size()); }
    int n_events() const;
    // Throws on non-positive times, non-0/1 events, length mismatch or no events.
    void validate() const;
};

struct CoxFit {
    std::vector<ColumnTag> tags;
    Eigen::VectorXd lambda_hat;
    double partial_loglik = 0.0;
    std::vector<double> loglik_trace;
    Eigen::MatrixXd information;  // N^{-1} times the observed information at lambda_hat
    Eigen::VectorXd std_errors;
    int iterations = 0;
    bool converged = false;
    int n = 0;
};

struct PartialLikelihood {
    double loglik = 0.0;
    Eigen::VectorXd score;
    Eigen::MatrixXd hessian;
};

// Breslow partial likelihood with score and Hessian. Subjects are swept in
// descending time with running sums of exp(eta), exp(eta) x and exp(eta) x x^T;
// every subject tied at a time enters the risk set before that time's events
// are scored.
PartialLikelihood cox_partial_likelihood(const Eigen::MatrixXd& x, const SurvivalData& surv,
                                         const Eigen::VectorXd& lambda, bool with_hessian = true);

CoxFit fit_cox_matrix(const Eigen::MatrixXd& x, const SurvivalData& surv, const NewtonOptions& options = {});

// Maximum partial likelihood over the selected columns; no intercept.
CoxFit fit_cox(const PropagatedDesign& design, const SurvivalData& surv, const NewtonOptions& options = {});

// exp(x^T lambda_hat) at the rows of `design`.
Eigen::VectorXd predict_relative_risk(const CoxFit& fit, const PropagatedDesign& design);

// T ~ Exp(baseline_rate * exp(x^T lambda)), C ~ Exp(censor_rate).
SurvivalData simulate_cox_data(const Eigen::MatrixXd& x, const Eigen::VectorXd& lambda_true, double baseline_rate,
                               double censor_rate, Rng& rng);
// Same, with lambda_true laid over all columns of the design.
SurvivalData simulate_cox_data(const PropagatedDesign& design, const Eigen::VectorXd& lambda_true,
                               double baseline_rate, double censor_rate, Rng& rng);

}  // namespace npr
