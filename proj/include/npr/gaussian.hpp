#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "npr/design.hpp"

namespace npr {

// Least-squares fit over the selected columns of a propagated design.
struct GaussianFit {
    std::vector<ColumnTag> tags;
    Eigen::VectorXd theta_hat;
    double rss = 0.0;
    double sigma2_hat = 0.0;
    Eigen::MatrixXd gram;         // N^{-1} X^T X
    Eigen::MatrixXd xtx_inverse;  // (X^T X)^{-1}
    Eigen::VectorXd std_errors;   // sigma_hat * sqrt(diag((X^T X)^{-1}))
    Eigen::VectorXd fitted;
    int n = 0;
    int d_sel = 0;
    int max_order = 0;
    int n_covariates = 0;
    // Centering constants needed to predict on new rows.
    Eigen::RowVectorXd column_means;
    double response_mean = 0.0;

    Eigen::MatrixXd gram_inverse() const { return static_cast<double>(n) * xtx_inverse; }
    double gram_condition_number() const;
};

// OLS through a Householder QR of the selected design. When the design is
// centered the response is centered too, which is the intercept removal.
GaussianFit fit_ols(const PropagatedDesign& design, const Eigen::VectorXd& y);

// Predictions at new rows; `design` must be uncentered and carry every tag of
// the fit.
Eigen::VectorXd predict_gaussian(const GaussianFit& fit, const PropagatedDesign& design);

struct CoefficientInference {
    ColumnTag tag;
    double estimate;
    double std_error;
    double t;  // +inf when the standard error is zero
    double p_value;
    double ci_low;
    double ci_high;
    bool degenerate = false;
};

inline constexpr double kZ975 = 1.959963984540054;

// Per-coefficient t statistics for H0: theta_j = 0 with normal reference and
// 95% intervals.
std::vector<CoefficientInference> t_statistics(const GaussianFit& fit);

struct WaldResult {
    int order = 0;
    int restriction_dim = 0;
    double statistic = 0.0;
    bool empty_restriction = false;  // no surviving column of order >= j
};

// Wald statistic for H0: lambda_j = ... = lambda_K = 0 over the surviving
// columns of order >= j.
WaldResult wald_statistic(const GaussianFit& fit, int order);

enum class PValueRegime { chi2, normal };

// How the large-dimension p-value is taken from Z_j = (T_j - m_j) / sqrt(2 m_j).
enum class NormalTail {
    two_sided,      // 2 {1 - Phi(|Z_j|)}
    clamped_upper,  // min(1, 2 {1 - Phi(Z_j)})
};

struct OrderTestOptions {
    double alpha = 0.05;
    // m_j below this uses the chi-square upper tail, otherwise the normal approximation.
    int chi2_max_dim = 30;
    NormalTail tail = NormalTail::two_sided;
};

struct OrderTestRecord {
    int order;
    int restriction_dim;
    double statistic;
    double z;
    double p_value;
    PValueRegime regime;
    bool empty_restriction;
};

struct OrderTestReport {
    std::vector<OrderTestRecord> records;
    std::vector<bool> holm_rejections;
    int selected_order = 0;
    double alpha = 0.05;
    int k_max = 0;
};

double wald_p_value(double statistic, int restriction_dim, const OrderTestOptions& options, PValueRegime* regime = nullptr);

// Sequential tests j = 0..k_max with Holm control. selected_order is the
// smallest j whose null is retained, or k_max + 1.
OrderTestReport order_test(const GaussianFit& fit, int k_max, const OrderTestOptions& options = {});

const char* to_string(PValueRegime regime);

}  // namespace npr
