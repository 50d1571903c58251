#include "npr/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "npr/error.hpp"
#include "npr/newton.hpp"

namespace npr {

namespace {

double log1pexp(double eta) { return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta)); }

double sigmoid(double eta) {
    if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
    const double e = std::exp(eta);
    return e / (1.0 + e);
}

Eigen::VectorXd probabilities(const Eigen::MatrixXd& x, const Eigen::VectorXd& theta) {
    Eigen::VectorXd eta = x * theta;
    return eta.unaryExpr([](double v) { return sigmoid(v); });
}

}  // namespace

double logistic_loglik(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& theta) {
    const Eigen::VectorXd eta = x * theta;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) ll += y[i] * eta[i] - log1pexp(eta[i]);
    return ll;
}

Eigen::VectorXd logistic_score(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& theta) {
    return x.transpose() * (y - probabilities(x, theta));
}

Eigen::MatrixXd logistic_hessian(const Eigen::MatrixXd& x, const Eigen::VectorXd& theta) {
    const Eigen::VectorXd p = probabilities(x, theta);
    const Eigen::VectorXd w = (p.array() * (1.0 - p.array())).matrix();
    return -(x.transpose() * w.asDiagonal() * x);
}

LogisticFit fit_logistic_matrix(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const NewtonOptions& options) {
    if (x.rows() != y.size()) throw DimensionError("response length does not match design rows");
    for (Eigen::Index i = 0; i < y.size(); ++i)
        if (y[i] != 0.0 && y[i] != 1.0) throw std::invalid_argument("logistic response must be 0/1");

    const auto objective = [&](const Eigen::VectorXd& theta, bool need_derivatives) {
        detail::Objective o;
        o.value = logistic_loglik(x, y, theta);
        if (need_derivatives) {
            o.gradient = logistic_score(x, y, theta);
            o.hessian = logistic_hessian(x, theta);
        }
        return o;
    };
    const auto run = detail::newton_maximize(objective, Eigen::VectorXd::Zero(x.cols()), options);

    LogisticFit fit;
    fit.theta_hat = run.theta;
    fit.log_likelihood = run.value;
    fit.loglik_trace = run.trace;
    fit.iterations = run.iterations;
    fit.converged = run.converged;
    fit.n = static_cast<int>(x.rows());
    const Eigen::MatrixXd info = -logistic_hessian(x, run.theta);
    fit.information = info / static_cast<double>(fit.n);
    fit.std_errors = detail::inverse_diagonal(info).cwiseSqrt();
    fit.fitted = probabilities(x, run.theta);
    return fit;
}

LogisticFit fit_logistic(const PropagatedDesign& design, const Eigen::VectorXd& y, const NewtonOptions& options) {
    if (design.selected.empty()) throw std::logic_error("fit_logistic needs a design after forward_select");
    const Eigen::MatrixXd sel = design.selected_matrix();
    Eigen::MatrixXd x(sel.rows(), sel.cols() + 1);
    x.col(0).setOnes();
    x.rightCols(sel.cols()) = sel;
    LogisticFit fit = fit_logistic_matrix(x, y, options);
    fit.tags = design.selected_tags();
    return fit;
}

Eigen::VectorXd predict_proba(const LogisticFit& fit, const PropagatedDesign& design) {
    const Eigen::MatrixXd x = columns_by_tag(design, fit.tags);
    Eigen::VectorXd eta = x * fit.theta_hat.tail(fit.theta_hat.size() - 1);
    eta.array() += fit.theta_hat[0];
    return eta.unaryExpr([](double v) { return sigmoid(v); });
}

double auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw DimensionError("scores and labels differ in length");
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double rank_sum_pos = 0.0;
    double n_pos = 0.0;
    double n_neg = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);  // average of ranks i+1..j
        for (std::size_t t = i; t < j; ++t) {
            const int l = labels[order[t]];
            if (l != 0 && l != 1) throw std::invalid_argument("labels must be 0/1");
            if (l == 1) {
                rank_sum_pos += mid_rank;
                n_pos += 1.0;
            } else {
                n_neg += 1.0;
            }
        }
        i = j;
    }
    if (n_pos == 0.0 || n_neg == 0.0) throw std::invalid_argument("AUC needs both positive and negative labels");
    return (rank_sum_pos - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

}  // namespace npr
