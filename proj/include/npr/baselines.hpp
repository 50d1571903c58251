#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "npr/graph.hpp"
#include "npr/rng.hpp"

namespace npr {

// Linear-in-means: Y = alpha 1 + rho W Y + X beta + W X delta + e.
struct LimParams {
    double alpha = 0.0;
    double rho = 0.0;
    Eigen::VectorXd beta;
    Eigen::VectorXd delta;
};

// Second-order linear-in-means:
// Y = alpha 1 + rho1 W Y + rho2 W^2 Y + X g1 + W X g2 + W^2 X g3 + e.
struct Lim2Params {
    double alpha = 0.0;
    double rho1 = 0.0;
    double rho2 = 0.0;
    Eigen::VectorXd gamma1;
    Eigen::VectorXd gamma2;
    Eigen::VectorXd gamma3;
};

inline constexpr double kNeumannTol = 1e-10;
inline constexpr int kNeumannMaxTerms = 10000;

// Solves (I - rho1 W - rho2 W^2) y = rhs by fixed-point (Neumann) iteration
// until the residual max-norm drops below kNeumannTol. Requires
// |rho1| + |rho2| < 1.
Eigen::VectorXd solve_spillover(const RowStochasticOperator& w, const Eigen::VectorXd& rhs, double rho1, double rho2);

// Same system by sparse LU; works for any rho pair that keeps it nonsingular.
Eigen::VectorXd solve_spillover_direct(const RowStochasticOperator& w, const Eigen::VectorXd& rhs, double rho1,
                                       double rho2);

Eigen::VectorXd gen_lim(const RowStochasticOperator& w, const Eigen::MatrixXd& x, const LimParams& params,
                        double sigma, Rng& rng);
Eigen::VectorXd gen_lim2(const RowStochasticOperator& w, const Eigen::MatrixXd& x, const Lim2Params& params,
                         double sigma, Rng& rng);

// Reduced-form propagation coefficients lambda_k.
Eigen::VectorXd lambda_series_lim(const LimParams& params, int k);
Eigen::VectorXd lambda_series_lim2(const Lim2Params& params, int k);
// Coefficient of W^k in (I - rho1 W - rho2 W^2)^{-1} as a power series.
double lim2_power_coefficient(double rho1, double rho2, int k);

// Y = sum_k W^k X lambda_k + sigma e.
Eigen::VectorXd gen_npr(const RowStochasticOperator& w, const Eigen::MatrixXd& x,
                        std::span<const Eigen::VectorXd> lambdas, double sigma, Rng& rng);

// Y = mu + X beta + sigma e with mu_i ~ N(etas[label_i], mu_var).
Eigen::VectorXd gen_cohesion(std::span<const int> labels, const Eigen::MatrixXd& x, std::span<const double> etas,
                             double mu_var, const Eigen::VectorXd& beta, double sigma, Rng& rng);

// Two-stage least squares with WY endogenous and instruments (1, X, WX, W^2X),
// fitted on `rows` (all rows when empty). Spatial lags use the full graph.
LimParams fit_lim_2sls(const RowStochasticOperator& w, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       std::span<const int> rows = {});
// Second-order analog: WY, W^2Y endogenous; instruments (1, X, ..., W^4 X).
Lim2Params fit_lim2_2sls(const RowStochasticOperator& w, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                         std::span<const int> rows = {});

// Reduced-form predictions (I - rho W)^{-1}(alpha 1 + X beta + W X delta); no responses used.
Eigen::VectorXd predict_lim(const RowStochasticOperator& w, const Eigen::MatrixXd& x, const LimParams& params);
Eigen::VectorXd predict_lim2(const RowStochasticOperator& w, const Eigen::MatrixXd& x, const Lim2Params& params);

// Structural fitted values alpha + rho W Y + X beta + W X delta, which use the
// observed responses of neighbors.
Eigen::VectorXd structural_fit_lim(const RowStochasticOperator& w, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                   const LimParams& params);
Eigen::VectorXd structural_fit_lim2(const RowStochasticOperator& w, const Eigen::MatrixXd& x,
                                    const Eigen::VectorXd& y, const Lim2Params& params);

}  // namespace npr
