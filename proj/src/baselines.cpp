#include "npr/baselines.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <boost/math/special_functions/binomial.hpp>

#include <cmath>
#include <random>
#include <string>

#include "npr/error.hpp"

namespace npr {

namespace {

Eigen::VectorXd draw_noise(Eigen::Index n, double sigma, Rng& rng) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    if (sigma == 0.0) return e;
    std::normal_distribution<double> normal(0.0, sigma);
    for (Eigen::Index i = 0; i < n; ++i) e[i] = normal(rng);
    return e;
}

Eigen::SparseMatrix<double> sparse_of(const RowStochasticOperator& w) {
    std::vector<Eigen::Triplet<double>> trip;
    for (int i = 0; i < w.n_nodes(); ++i)
        for (int j : w.neighbors(i)) trip.emplace_back(i, j, w.weight(i));
    Eigen::SparseMatrix<double> m(w.n_nodes(), w.n_nodes());
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

std::vector<int> all_rows_if_empty(std::span<const int> rows, int n) {
    if (!rows.empty()) return {rows.begin(), rows.end()};
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    return all;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<int>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] < 0 || rows[i] >= m.rows()) throw DimensionError("row index out of range");
        out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
    }
    return out;
}

// 2SLS: project the regressors on the instrument span, then least squares.
Eigen::VectorXd two_stage_least_squares(const Eigen::MatrixXd& regressors, const Eigen::MatrixXd& instruments,
                                        const Eigen::VectorXd& y) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> hqr(instruments);
    hqr.setThreshold(1e-10);
    const Eigen::Index rank = hqr.rank();
    if (rank < regressors.cols()) throw ModelError("2SLS: instrument set has rank below the number of regressors");
    const Eigen::MatrixXd q = hqr.householderQ() * Eigen::MatrixXd::Identity(instruments.rows(), rank);
    const Eigen::MatrixXd projected = q * (q.transpose() * regressors);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> zqr(projected);
    zqr.setThreshold(1e-10);
    if (zqr.rank() < regressors.cols()) throw ModelError("2SLS: projected regressors are rank deficient");
    return zqr.solve(y);
}

}  // namespace

Eigen::VectorXd solve_spillover(const RowStochasticOperator& w, const Eigen::VectorXd& rhs, double rho1, double rho2) {
    if (!(std::abs(rho1) + std::abs(rho2) < 1.0))
        throw std::invalid_argument("spillover parameters must satisfy |rho1| + |rho2| < 1");
    if (rhs.size() != w.n_nodes()) throw DimensionError("right-hand side length does not match W");
    Eigen::VectorXd y = rhs;
    for (int term = 0; term < kNeumannMaxTerms; ++term) {
        const Eigen::VectorXd wy = w.apply(y);
        Eigen::VectorXd next = rhs + rho1 * wy;
        if (rho2 != 0.0) next.noalias() += rho2 * w.apply(wy);
        // residual of the current iterate: (I - rho1 W - rho2 W^2) y - rhs = y - next
        if ((y - next).lpNorm<Eigen::Infinity>() < kNeumannTol) return y;
        y = std::move(next);
    }
    throw ConvergenceError("Neumann series did not converge within " + std::to_string(kNeumannMaxTerms) + " terms");
}

Eigen::VectorXd solve_spillover_direct(const RowStochasticOperator& w, const Eigen::VectorXd& rhs, double rho1,
                                       double rho2) {
    if (rhs.size() != w.n_nodes()) throw DimensionError("right-hand side length does not match W");
    const Eigen::SparseMatrix<double> ws = sparse_of(w);
    Eigen::SparseMatrix<double> a(w.n_nodes(), w.n_nodes());
    a.setIdentity();
    a -= rho1 * ws;
    if (rho2 != 0.0) a -= rho2 * (ws * ws);
    a.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw SingularMatrix("spillover system is singular");
    Eigen::VectorXd y = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !y.allFinite()) throw SingularMatrix("spillover solve failed");
    return y;
}

Eigen::VectorXd gen_lim(const RowStochasticOperator& w, const Eigen::MatrixXd& x, const LimParams& params,
                        double sigma, Rng& rng) {
    if (params.beta.size() != x.cols() || params.delta.size() != x.cols())
        throw DimensionError("LIM coefficients do not match covariate dimension");
    if (!(std::abs(params.rho) < 1.0)) throw std::invalid_argument("LIM requires |rho| < 1");
    Eigen::VectorXd rhs = x * params.beta + w.apply(x) * params.delta + draw_noise(x.rows(), sigma, rng);
    rhs.array() += params.alpha;
    return solve_spillover(w, rhs, params.rho, 0.0);
}

Eigen::VectorXd gen_lim2(const RowStochasticOperator& w, const Eigen::MatrixXd& x, const Lim2Params& params,
                         double sigma, Rng& rng) {
    if (params.gamma1.size() != x.cols() || params.gamma2.size() != x.cols() || params.gamma3.size() != x.cols())
        throw DimensionError("LIM2 coefficients do not match covariate dimension");
    const Eigen::MatrixXd wx = w.apply(x);
    const Eigen::MatrixXd w2x = w.apply(wx);
    Eigen::VectorXd rhs =
        x * params.gamma1 + wx * params.gamma2 + w2x * params.gamma3 + draw_noise(x.rows(), sigma, rng);
    rhs.array() += params.alpha;
    return solve_spillover(w, rhs, params.rho1, params.rho2);
}

Eigen::VectorXd lambda_series_lim(const LimParams& params, int k) {
    if (k < 0) throw std::invalid_argument("order must be non-negative");
    if (k == 0) return params.beta;
    return std::pow(params.rho, k - 1) * (params.rho * params.beta + params.delta);
}

double lim2_power_coefficient(double rho1, double rho2, int k) {
    if (k < 0) return 0.0;
    double c = 0.0;
    // h steps in total, (k - h) of them of length two
    for (int h = (k + 1) / 2; h <= k; ++h)
        c += boost::math::binomial_coefficient<double>(static_cast<unsigned>(h), static_cast<unsigned>(k - h)) *
             std::pow(rho1, 2 * h - k) * std::pow(rho2, k - h);
    return c;
}

Eigen::VectorXd lambda_series_lim2(const Lim2Params& params, int k) {
    if (k < 0) throw std::invalid_argument("order must be non-negative");
    return lim2_power_coefficient(params.rho1, params.rho2, k) * params.gamma1 +
           lim2_power_coefficient(params.rho1, params.rho2, k - 1) * params.gamma2 +
           lim2_power_coefficient(params.rho1, params.rho2, k - 2) * params.gamma3;
}

Eigen::VectorXd gen_npr(const RowStochasticOperator& w, const Eigen::MatrixXd& x,
                        std::span<const Eigen::VectorXd> lambdas, double sigma, Rng& rng) {
    if (x.rows() != w.n_nodes()) throw DimensionError("W and X disagree on the number of nodes");
    Eigen::VectorXd y = Eigen::VectorXd::Zero(x.rows());
    Eigen::MatrixXd block = x;
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        if (lambdas[k].size() != x.cols()) throw DimensionError("lambda_k does not match covariate dimension");
        if (k > 0) block = w.apply(block);
        y.noalias() += block * lambdas[k];
    }
    return y + draw_noise(x.rows(), sigma, rng);
}

Eigen::VectorXd gen_cohesion(std::span<const int> labels, const Eigen::MatrixXd& x, std::span<const double> etas,
                             double mu_var, const Eigen::VectorXd& beta, double sigma, Rng& rng) {
    if (static_cast<Eigen::Index>(labels.size()) != x.rows()) throw DimensionError("labels do not match rows");
    if (beta.size() != x.cols()) throw DimensionError("beta does not match covariate dimension");
    if (mu_var < 0.0) throw std::invalid_argument("mu_var must be non-negative");
    Eigen::VectorXd mu(x.rows());
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sd = std::sqrt(mu_var);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int c = labels[i];
        if (c < 0 || static_cast<std::size_t>(c) >= etas.size()) throw std::invalid_argument("block label out of range");
        mu[static_cast<Eigen::Index>(i)] = etas[c] + (sd > 0.0 ? sd * normal(rng) : 0.0);
    }
    return mu + x * beta + draw_noise(x.rows(), sigma, rng);
}

LimParams fit_lim_2sls(const RowStochasticOperator& w, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       std::span<const int> rows) {
    if (x.rows() != w.n_nodes() || y.size() != x.rows()) throw DimensionError("W, X and Y disagree in size");
    const auto d = x.cols();
    const auto idx = all_rows_if_empty(rows, w.n_nodes());
    const Eigen::MatrixXd wx = w.apply(x);
    const Eigen::MatrixXd w2x = w.apply(wx);
    const Eigen::VectorXd wy = w.apply(y);

    const auto n = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd z(n, 2 + 2 * d);
    z.col(0).setOnes();
    z.col(1) = take_rows(wy, idx);
    z.middleCols(2, d) = take_rows(x, idx);
    z.middleCols(2 + d, d) = take_rows(wx, idx);

    Eigen::MatrixXd h(n, 1 + 3 * d);
    h.col(0).setOnes();
    h.middleCols(1, d) = z.middleCols(2, d);
    h.middleCols(1 + d, d) = z.middleCols(2 + d, d);
    h.middleCols(1 + 2 * d, d) = take_rows(w2x, idx);

    const Eigen::VectorXd theta = two_stage_least_squares(z, h, take_rows(y, idx));
    LimParams out;
    out.alpha = theta[0];
    out.rho = theta[1];
    out.beta = theta.segment(2, d);
    out.delta = theta.segment(2 + d, d);
    return out;
}

Lim2Params fit_lim2_2sls(const RowStochasticOperator& w, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                         std::span<const int> rows) {
    if (x.rows() != w.n_nodes() || y.size() != x.rows()) throw DimensionError("W, X and Y disagree in size");
    const auto d = x.cols();
    const auto idx = all_rows_if_empty(rows, w.n_nodes());
    const auto lags = propagate(w, x, 4);
    const Eigen::VectorXd wy = w.apply(y);
    const Eigen::VectorXd w2y = w.apply(wy);

    const auto n = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd z(n, 3 + 3 * d);
    z.col(0).setOnes();
    z.col(1) = take_rows(wy, idx);
    z.col(2) = take_rows(w2y, idx);
    for (int k = 0; k < 3; ++k) z.middleCols(3 + k * d, d) = take_rows(lags[k], idx);

    Eigen::MatrixXd h(n, 1 + 5 * d);
    h.col(0).setOnes();
    for (int k = 0; k < 5; ++k) h.middleCols(1 + k * d, d) = take_rows(lags[k], idx);

    const Eigen::VectorXd theta = two_stage_least_squares(z, h, take_rows(y, idx));
    Lim2Params out;
    out.alpha = theta[0];
    out.rho1 = theta[1];
    out.rho2 = theta[2];
    out.gamma1 = theta.segment(3, d);
    out.gamma2 = theta.segment(3 + d, d);
    out.gamma3 = theta.segment(3 + 2 * d, d);
    return out;
}

Eigen::VectorXd predict_lim(const RowStochasticOperator& w, const Eigen::MatrixXd& x, const LimParams& params) {
    Eigen::VectorXd rhs = x * params.beta + w.apply(x) * params.delta;
    rhs.array() += params.alpha;
    return solve_spillover_direct(w, rhs, params.rho, 0.0);
}

Eigen::VectorXd predict_lim2(const RowStochasticOperator& w, const Eigen::MatrixXd& x, const Lim2Params& params) {
    const Eigen::MatrixXd wx = w.apply(x);
    Eigen::VectorXd rhs = x * params.gamma1 + wx * params.gamma2 + w.apply(wx) * params.gamma3;
    rhs.array() += params.alpha;
    return solve_spillover_direct(w, rhs, params.rho1, params.rho2);
}

Eigen::VectorXd structural_fit_lim(const RowStochasticOperator& w, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                   const LimParams& params) {
    Eigen::VectorXd out = params.rho * w.apply(y) + x * params.beta + w.apply(x) * params.delta;
    out.array() += params.alpha;
    return out;
}

Eigen::VectorXd structural_fit_lim2(const RowStochasticOperator& w, const Eigen::MatrixXd& x,
                                    const Eigen::VectorXd& y, const Lim2Params& params) {
    const Eigen::VectorXd wy = w.apply(y);
    const Eigen::MatrixXd wx = w.apply(x);
    Eigen::VectorXd out = params.rho1 * wy + params.rho2 * w.apply(wy) + x * params.gamma1 + wx * params.gamma2 +
                          w.apply(wx) * params.gamma3;
    out.array() += params.alpha;
    return out;
}

}  // namespace npr
