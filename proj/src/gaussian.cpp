#include "npr/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "npr/error.hpp"
#include "npr/stats.hpp"

namespace npr {

double GaussianFit::gram_condition_number() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

GaussianFit fit_ols(const PropagatedDesign& design, const Eigen::VectorXd& y) {
    if (design.selected.empty()) throw std::logic_error("fit_ols needs a design after forward_select");
    const int n = design.n_rows();
    if (y.size() != n) throw DimensionError("response length does not match design rows");
    const int p = static_cast<int>(design.selected.size());
    if (n <= p) throw ModelError("insufficient observations: N = " + std::to_string(n) + " <= " + std::to_string(p));

    GaussianFit fit;
    fit.tags = design.selected_tags();
    fit.n = n;
    fit.d_sel = p;
    fit.max_order = design.max_order();
    fit.n_covariates = design.n_covariates();
    fit.column_means.resize(p);
    for (int s = 0; s < p; ++s) fit.column_means[s] = design.column_means.size() ? design.column_means[design.selected[s]] : 0.0;

    const Eigen::MatrixXd x = design.selected_matrix();
    fit.response_mean = design.centered ? y.mean() : 0.0;
    const Eigen::VectorXd yc = (y.array() - fit.response_mean).matrix();

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
    const Eigen::MatrixXd r = qr.matrixQR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
    const Eigen::VectorXd rdiag = r.diagonal().cwiseAbs();
    if (rdiag.minCoeff() <= 1e-13 * rdiag.maxCoeff()) throw SingularMatrix("selected design is numerically singular");

    fit.theta_hat = qr.solve(yc);
    const Eigen::MatrixXd r_inv =
        r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
    fit.xtx_inverse = r_inv * r_inv.transpose();
    fit.gram = (x.transpose() * x) / static_cast<double>(n);

    const Eigen::VectorXd xb = x * fit.theta_hat;
    fit.fitted = (xb.array() + fit.response_mean).matrix();
    fit.rss = (yc - xb).squaredNorm();
    fit.sigma2_hat = fit.rss / static_cast<double>(n - p);
    fit.std_errors = (fit.xtx_inverse.diagonal().array() * fit.sigma2_hat).sqrt().matrix();
    return fit;
}

Eigen::VectorXd predict_gaussian(const GaussianFit& fit, const PropagatedDesign& design) {
    if (design.centered) throw std::logic_error("prediction expects an uncentered design");
    const Eigen::MatrixXd x = columns_by_tag(design, fit.tags);
    Eigen::VectorXd out = (x.rowwise() - fit.column_means) * fit.theta_hat;
    out.array() += fit.response_mean;
    return out;
}

std::vector<CoefficientInference> t_statistics(const GaussianFit& fit) {
    std::vector<CoefficientInference> out;
    out.reserve(fit.tags.size());
    for (int s = 0; s < fit.d_sel; ++s) {
        CoefficientInference c{};
        c.tag = fit.tags[s];
        c.estimate = fit.theta_hat[s];
        c.std_error = fit.std_errors[s];
        if (c.std_error > 0.0) {
            c.t = c.estimate / c.std_error;
            c.p_value = 2.0 * normal_sf(std::abs(c.t));
        } else {
            c.t = std::numeric_limits<double>::infinity();
            c.p_value = 0.0;
            c.degenerate = true;
        }
        c.ci_low = c.estimate - kZ975 * c.std_error;
        c.ci_high = c.estimate + kZ975 * c.std_error;
        out.push_back(c);
    }
    return out;
}

WaldResult wald_statistic(const GaussianFit& fit, int order) {
    if (order < 0 || order > fit.max_order) throw std::invalid_argument("test order outside 0..K");
    std::vector<int> idx;
    for (int s = 0; s < fit.d_sel; ++s)
        if (fit.tags[s].order >= order) idx.push_back(s);

    WaldResult res;
    res.order = order;
    res.restriction_dim = static_cast<int>(idx.size());
    if (idx.empty()) {
        res.empty_restriction = true;
        return res;
    }
    const auto m = static_cast<Eigen::Index>(idx.size());
    Eigen::VectorXd theta_r(m);
    Eigen::MatrixXd v_rr(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
        theta_r[a] = fit.theta_hat[idx[a]];
        for (Eigen::Index b = 0; b < m; ++b) v_rr(a, b) = fit.xtx_inverse(idx[a], idx[b]);
    }
    // N theta' R' (R Gamma^{-1} R')^{-1} R theta / sigma^2 with Gamma^{-1} = N (X'X)^{-1}
    Eigen::LLT<Eigen::MatrixXd> llt(v_rr);
    if (llt.info() != Eigen::Success) throw SingularMatrix("restricted covariance is not positive definite");
    const double quad = theta_r.dot(llt.solve(theta_r));
    if (fit.sigma2_hat > 0.0)
        res.statistic = quad / fit.sigma2_hat;
    else
        res.statistic = quad > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return res;
}

double wald_p_value(double statistic, int restriction_dim, const OrderTestOptions& options, PValueRegime* regime) {
    if (restriction_dim <= 0) {
        if (regime) *regime = PValueRegime::chi2;
        return 1.0;
    }
    if (restriction_dim < options.chi2_max_dim) {
        if (regime) *regime = PValueRegime::chi2;
        return chi2_sf(statistic, restriction_dim);
    }
    if (regime) *regime = PValueRegime::normal;
    const double z = (statistic - restriction_dim) / std::sqrt(2.0 * restriction_dim);
    double p = options.tail == NormalTail::two_sided ? 2.0 * normal_sf(std::abs(z)) : 2.0 * normal_sf(z);
    return std::clamp(p, 0.0, 1.0);
}

OrderTestReport order_test(const GaussianFit& fit, int k_max, const OrderTestOptions& options) {
    if (k_max < 0 || k_max > fit.max_order) throw std::invalid_argument("kmax must lie in 0..K");
    if (!(options.alpha > 0.0 && options.alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");

    OrderTestReport report;
    report.alpha = options.alpha;
    report.k_max = k_max;
    std::vector<double> p_values;
    for (int j = 0; j <= k_max; ++j) {
        const WaldResult w = wald_statistic(fit, j);
        OrderTestRecord rec{};
        rec.order = j;
        rec.restriction_dim = w.restriction_dim;
        rec.statistic = w.statistic;
        rec.empty_restriction = w.empty_restriction;
        rec.z = w.restriction_dim > 0 ? (w.statistic - w.restriction_dim) / std::sqrt(2.0 * w.restriction_dim) : 0.0;
        rec.p_value = wald_p_value(w.statistic, w.restriction_dim, options, &rec.regime);
        p_values.push_back(rec.p_value);
        report.records.push_back(rec);
    }
    report.holm_rejections = holm_step_down(p_values, options.alpha);
    report.selected_order = k_max + 1;
    for (int j = 0; j <= k_max; ++j) {
        if (!report.holm_rejections[j]) {
            report.selected_order = j;
            break;
        }
    }
    return report;
}

const char* to_string(PValueRegime regime) { return regime == PValueRegime::chi2 ? "chi2" : "normal"; }

}  // namespace npr
