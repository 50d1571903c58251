#include "npr/cox.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "npr/error.hpp"

namespace npr {

int SurvivalData::n_events() const { return static_cast<int>(std::count(event.begin(), event.end(), 1)); }

void SurvivalData::validate() const {
    if (static_cast<std::size_t>(time.size()) != event.size()) throw DimensionError("time and event lengths differ");
    for (Eigen::Index i = 0; i < time.size(); ++i) {
        if (!(time[i] > 0.0) || !std::isfinite(time[i])) throw std::invalid_argument("survival times must be positive");
        if (event[i] != 0 && event[i] != 1) throw std::invalid_argument("event indicators must be 0/1");
    }
    if (n_events() == 0) throw ModelError("no events: the partial likelihood is empty");
}

PartialLikelihood cox_partial_likelihood(const Eigen::MatrixXd& x, const SurvivalData& surv,
                                         const Eigen::VectorXd& lambda, bool with_hessian) {
    const Eigen::Index n = x.rows();
    const Eigen::Index p = x.cols();
    if (surv.time.size() != n) throw DimensionError("survival data and design differ in rows");

    const Eigen::VectorXd eta = x * lambda;
    const double shift = n > 0 ? eta.maxCoeff() : 0.0;

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (surv.time[a] != surv.time[b]) return surv.time[a] > surv.time[b];
        return surv.event[a] > surv.event[b];
    });

    PartialLikelihood out;
    out.score = Eigen::VectorXd::Zero(p);
    if (with_hessian) out.hessian = Eigen::MatrixXd::Zero(p, p);

    double s0 = 0.0;
    Eigen::VectorXd s1 = Eigen::VectorXd::Zero(p);
    Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(p, p);

    std::size_t g = 0;
    while (g < order.size()) {
        std::size_t end = g;
        const double t = surv.time[order[g]];
        while (end < order.size() && surv.time[order[end]] == t) ++end;

        int events = 0;
        Eigen::VectorXd event_x_sum = Eigen::VectorXd::Zero(p);
        double event_eta_sum = 0.0;
        for (std::size_t k = g; k < end; ++k) {
            const Eigen::Index i = order[k];
            const double w = std::exp(eta[i] - shift);
            s0 += w;
            s1.noalias() += w * x.row(i).transpose();
            if (with_hessian) s2.noalias() += w * x.row(i).transpose() * x.row(i);
            if (surv.event[i] == 1) {
                ++events;
                event_x_sum.noalias() += x.row(i).transpose();
                event_eta_sum += eta[i];
            }
        }
        if (events > 0) {
            const double de = static_cast<double>(events);
            const Eigen::VectorXd mean = s1 / s0;
            out.loglik += event_eta_sum - de * (std::log(s0) + shift);
            out.score.noalias() += event_x_sum - de * mean;
            if (with_hessian) out.hessian.noalias() -= de * (s2 / s0 - mean * mean.transpose());
        }
        g = end;
    }
    return out;
}

CoxFit fit_cox_matrix(const Eigen::MatrixXd& x, const SurvivalData& surv, const NewtonOptions& options) {
    surv.validate();
    if (surv.time.size() != x.rows()) throw DimensionError("survival data and design differ in rows");

    const auto objective = [&](const Eigen::VectorXd& lambda, bool need_derivatives) {
        const auto pl = cox_partial_likelihood(x, surv, lambda, need_derivatives);
        detail::Objective o;
        o.value = pl.loglik;
        if (need_derivatives) {
            o.gradient = pl.score;
            o.hessian = pl.hessian;
        }
        return o;
    };
    const auto run = detail::newton_maximize(objective, Eigen::VectorXd::Zero(x.cols()), options);

    CoxFit fit;
    fit.lambda_hat = run.theta;
    fit.partial_loglik = run.value;
    fit.loglik_trace = run.trace;
    fit.iterations = run.iterations;
    fit.converged = run.converged;
    fit.n = static_cast<int>(x.rows());
    const Eigen::MatrixXd info = -cox_partial_likelihood(x, surv, run.theta, true).hessian;
    fit.information = info / static_cast<double>(fit.n);
    fit.std_errors = detail::inverse_diagonal(info).cwiseSqrt();
    return fit;
}

CoxFit fit_cox(const PropagatedDesign& design, const SurvivalData& surv, const NewtonOptions& options) {
    if (design.selected.empty()) throw std::logic_error("fit_cox needs a design after forward_select");
    CoxFit fit = fit_cox_matrix(design.selected_matrix(), surv, options);
    fit.tags = design.selected_tags();
    return fit;
}

Eigen::VectorXd predict_relative_risk(const CoxFit& fit, const PropagatedDesign& design) {
    const Eigen::MatrixXd x = columns_by_tag(design, fit.tags);
    return (x * fit.lambda_hat).array().exp().matrix();
}

SurvivalData simulate_cox_data(const Eigen::MatrixXd& x, const Eigen::VectorXd& lambda_true, double baseline_rate,
                               double censor_rate, Rng& rng) {
    if (!(baseline_rate > 0.0) || !(censor_rate > 0.0)) throw std::invalid_argument("rates must be positive");
    if (x.cols() != lambda_true.size()) throw DimensionError("lambda length does not match design columns");
    const Eigen::VectorXd eta = x * lambda_true;
    SurvivalData surv;
    surv.time.resize(x.rows());
    surv.event.resize(static_cast<std::size_t>(x.rows()));
    std::exponential_distribution<double> unit(1.0);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double t = unit(rng) / (baseline_rate * std::exp(eta[i]));
        const double c = unit(rng) / censor_rate;
        surv.time[i] = std::min(t, c);
        surv.event[static_cast<std::size_t>(i)] = t <= c ? 1 : 0;
    }
    return surv;
}

SurvivalData simulate_cox_data(const PropagatedDesign& design, const Eigen::VectorXd& lambda_true,
                               double baseline_rate, double censor_rate, Rng& rng) {
    return simulate_cox_data(design.full_matrix(), lambda_true, baseline_rate, censor_rate, rng);
}

}  // namespace npr
