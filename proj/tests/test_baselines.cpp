#include <doctest.h>

#include <cmath>

#include "npr/baselines.hpp"
#include "npr/error.hpp"
#include "support.hpp"

using namespace npr;
using namespace npr::testing;

namespace {

LimParams lim_params(int d, Rng& rng) {
    std::uniform_real_distribution<double> u(0.5, 5.0);
    LimParams p;
    p.alpha = 0.7;
    p.rho = 0.25;
    p.beta.resize(d);
    p.delta.resize(d);
    for (int j = 0; j < d; ++j) {
        p.beta[j] = u(rng);
        p.delta[j] = u(rng);
    }
    return p;
}

Lim2Params lim2_params(int d, Rng& rng) {
    std::uniform_real_distribution<double> u(0.5, 5.0);
    Lim2Params p;
    p.alpha = -0.3;
    p.rho1 = 0.25;
    p.rho2 = 0.05;
    p.gamma1.resize(d);
    p.gamma2.resize(d);
    p.gamma3.resize(d);
    for (int j = 0; j < d; ++j) {
        p.gamma1[j] = u(rng);
        p.gamma2[j] = u(rng);
        p.gamma3[j] = u(rng);
    }
    return p;
}

}  // namespace

TEST_CASE("spillover solvers match a dense solve") {
    for (int rep = 0; rep < 10; ++rep) {
        auto rng = stream_rng(1000 + rep, 0);
        const auto g = dense_random_graph(40, 0.1, rng);
        const auto op = row_normalize(g);
        const Eigen::MatrixXd w = dense_w(g);
        const Eigen::VectorXd rhs = normal_matrix(40, 1, rng).col(0);
        const double r1 = 0.6, r2 = -0.3;
        const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(40, 40) - r1 * w - r2 * w * w;
        const Eigen::VectorXd oracle = a.partialPivLu().solve(rhs);
        CHECK((solve_spillover(op, rhs, r1, r2) - oracle).cwiseAbs().maxCoeff() < 1e-9);
        CHECK((solve_spillover_direct(op, rhs, r1, r2) - oracle).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("spillover parameter checks") {
    const auto op = row_normalize(DirectedGraph(3, {{0, 1}, {1, 2}, {2, 0}}));
    const Eigen::VectorXd rhs = Eigen::VectorXd::Ones(3);
    CHECK_THROWS_AS(solve_spillover(op, rhs, 0.7, 0.3), std::invalid_argument);
    CHECK_THROWS_AS(solve_spillover(op, rhs, -1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(solve_spillover(op, Eigen::VectorXd::Ones(4), 0.1, 0.0), DimensionError);
    // rho = 1 on a cycle is singular
    CHECK_THROWS_AS(solve_spillover_direct(op, rhs, 1.0, 0.0), SingularMatrix);
}

TEST_CASE("power-series coefficients") {
    SUBCASE("recurrence c_k = rho1 c_{k-1} + rho2 c_{k-2}") {
        for (double r1 : {0.25, -0.4, 0.9})
            for (double r2 : {0.05, -0.2, 0.0}) {
                double cm2 = 0.0, cm1 = 1.0;
                CHECK(lim2_power_coefficient(r1, r2, 0) == 1.0);
                for (int k = 1; k <= 25; ++k) {
                    const double c = r1 * cm1 + r2 * cm2;
                    // alternating terms cancel when rho2 < 0; bound the error by the absolute series
                    const double scale = lim2_power_coefficient(std::abs(r1), std::abs(r2), k);
                    CHECK(std::abs(lim2_power_coefficient(r1, r2, k) - c) <= 1e-13 * scale);
                    cm2 = cm1;
                    cm1 = c;
                }
                CHECK(lim2_power_coefficient(r1, r2, -1) == 0.0);
            }
    }
    SUBCASE("first row of the inverse of I - rho1 S - rho2 S^2 for the shift S") {
        const int n = 15;
        Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i + 1 < n; ++i) s(i, i + 1) = 1.0;
        const double r1 = 0.25, r2 = 0.05;
        const Eigen::MatrixXd inv = (Eigen::MatrixXd::Identity(n, n) - r1 * s - r2 * s * s).inverse();
        for (int k = 0; k < n; ++k) CHECK(std::abs(lim2_power_coefficient(r1, r2, k) - inv(0, k)) < 1e-14);
    }
    SUBCASE("geometric bound") {
        for (int k = 0; k <= 30; ++k) CHECK(std::abs(lim2_power_coefficient(0.6, -0.3, k)) <= std::pow(0.9, k) + 1e-15);
    }
}

TEST_CASE("reduced-form coefficient series") {
    auto rng = stream_rng(1100, 0);
    const auto lim = lim_params(3, rng);
    CHECK((lambda_series_lim(lim, 0) - lim.beta).norm() == 0.0);
    for (int k = 1; k <= 6; ++k) {
        const Eigen::VectorXd expected = std::pow(lim.rho, k - 1) * (lim.rho * lim.beta + lim.delta);
        CHECK((lambda_series_lim(lim, k) - expected).cwiseAbs().maxCoeff() < 1e-14);
    }
    const auto p = lim2_params(3, rng);
    const Eigen::VectorXd l2 = (p.rho1 * p.rho1 + p.rho2) * p.gamma1 + p.rho1 * p.gamma2 + p.gamma3;
    CHECK((lambda_series_lim2(p, 2) - l2).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((lambda_series_lim2(p, 0) - p.gamma1).norm() == 0.0);
    CHECK((lambda_series_lim2(p, 1) - (p.rho1 * p.gamma1 + p.gamma2)).cwiseAbs().maxCoeff() < 1e-14);

    // the first-order model nests in the second-order one
    Lim2Params nested{lim.alpha, lim.rho, 0.0, lim.beta, lim.delta, Eigen::VectorXd::Zero(3)};
    for (int k = 0; k <= 8; ++k)
        CHECK((lambda_series_lim2(nested, k) - lambda_series_lim(lim, k)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK_THROWS_AS(lambda_series_lim(lim, -1), std::invalid_argument);
}

TEST_CASE("generators against dense oracles") {
    auto rng = stream_rng(1200, 0);
    const auto g = dense_random_graph(50, 0.08, rng);
    const auto op = row_normalize(g);
    const Eigen::MatrixXd w = dense_w(g);
    const Eigen::MatrixXd x = normal_matrix(50, 2, rng);
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(50, 50);

    const auto lim = lim_params(2, rng);
    auto r0 = stream_rng(1, 0);
    const Eigen::VectorXd y = gen_lim(op, x, lim, 0.0, r0);
    const Eigen::VectorXd oracle =
        (id - lim.rho * w).partialPivLu().solve(((x * lim.beta + w * x * lim.delta).array() + lim.alpha).matrix());
    CHECK((y - oracle).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((predict_lim(op, x, lim) - oracle).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((structural_fit_lim(op, x, y, lim) - y).cwiseAbs().maxCoeff() < 1e-9);

    const auto p2 = lim2_params(2, rng);
    const Eigen::VectorXd y2 = gen_lim2(op, x, p2, 0.0, r0);
    const Eigen::VectorXd oracle2 = (id - p2.rho1 * w - p2.rho2 * w * w)
                                        .partialPivLu()
                                        .solve(((x * p2.gamma1 + w * x * p2.gamma2 + w * w * x * p2.gamma3).array() + p2.alpha).matrix());
    CHECK((y2 - oracle2).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((predict_lim2(op, x, p2) - oracle2).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((structural_fit_lim2(op, x, y2, p2) - y2).cwiseAbs().maxCoeff() < 1e-9);

    std::vector<Eigen::VectorXd> lambdas{Eigen::Vector2d(1, 2), Eigen::Vector2d(-1, 0.5), Eigen::Vector2d(3, 3)};
    const Eigen::VectorXd yn = gen_npr(op, x, lambdas, 0.0, r0);
    const Eigen::VectorXd on = x * lambdas[0] + w * x * lambdas[1] + w * w * x * lambdas[2];
    CHECK((yn - on).cwiseAbs().maxCoeff() < 1e-12);

    std::vector<int> labels(50);
    for (int i = 0; i < 50; ++i) labels[i] = i % 3;
    const std::vector<double> etas{-2.5, 0.0, 2.5};
    const Eigen::Vector2d beta(1.0, -1.0);
    const Eigen::VectorXd yc = gen_cohesion(labels, x, etas, 0.0, beta, 0.0, r0);
    for (int i = 0; i < 50; ++i) CHECK(yc[i] == doctest::Approx(etas[labels[i]] + x.row(i).dot(beta)));
    labels[3] = 3;
    CHECK_THROWS_AS(gen_cohesion(labels, x, etas, 0.0, beta, 0.0, r0), std::invalid_argument);
}

TEST_CASE("second-order generator with rho2 = 0 reproduces the first-order one") {
    auto rng = stream_rng(1300, 0);
    const auto op = row_normalize(dense_random_graph(80, 0.05, rng));
    const Eigen::MatrixXd x = normal_matrix(80, 2, rng);
    const auto lim = lim_params(2, rng);
    Lim2Params nested{lim.alpha, lim.rho, 0.0, lim.beta, lim.delta, Eigen::VectorXd::Zero(2)};
    auto a = stream_rng(9, 9), b = stream_rng(9, 9);
    CHECK((gen_lim(op, x, lim, 1.0, a) - gen_lim2(op, x, nested, 1.0, b)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("2SLS recovers the structural parameters") {
    auto rng = stream_rng(1400, 0);
    const int n = 6000;
    const auto op = row_normalize(gen_erdos_renyi(n, rng));
    const Eigen::MatrixXd x = normal_matrix(n, 2, rng);

    const auto lim = lim_params(2, rng);
    const auto est = fit_lim_2sls(op, x, gen_lim(op, x, lim, 1.0, rng));
    CHECK(std::abs(est.rho - lim.rho) < 0.05);
    CHECK((est.beta - lim.beta).cwiseAbs().maxCoeff() < 0.1);
    CHECK((est.delta - lim.delta).cwiseAbs().maxCoeff() < 0.2);

    // rho1 and rho2 are only weakly separated by the higher lags on ER graphs;
    // the own-covariate effect is sharply identified
    const auto p2 = lim2_params(2, rng);
    const auto e2 = fit_lim2_2sls(op, x, gen_lim2(op, x, p2, 1.0, rng));
    CHECK((e2.gamma1 - p2.gamma1).cwiseAbs().maxCoeff() < 0.1);

    // training-row fits use only the listed rows
    std::vector<int> rows;
    for (int i = 0; i < n; i += 2) rows.push_back(i);
    const auto half = fit_lim_2sls(op, x, gen_lim(op, x, lim, 1.0, rng), rows);
    CHECK(std::abs(half.rho - lim.rho) < 0.08);
}

TEST_CASE("noiseless 2SLS is exact") {
    auto rng = stream_rng(1500, 0);
    const auto op = row_normalize(gen_erdos_renyi(500, rng));
    const Eigen::MatrixXd x = normal_matrix(500, 2, rng);
    const auto lim = lim_params(2, rng);
    const auto est = fit_lim_2sls(op, x, gen_lim(op, x, lim, 0.0, rng));
    CHECK(std::abs(est.rho - lim.rho) < 1e-7);
    CHECK(std::abs(est.alpha - lim.alpha) < 1e-7);
    CHECK((est.beta - lim.beta).cwiseAbs().maxCoeff() < 1e-7);

    const auto p2 = lim2_params(2, rng);
    const auto e2 = fit_lim2_2sls(op, x, gen_lim2(op, x, p2, 0.0, rng));
    CHECK(std::abs(e2.rho1 - p2.rho1) < 1e-6);
    CHECK(std::abs(e2.rho2 - p2.rho2) < 1e-6);
    CHECK((e2.gamma3 - p2.gamma3).cwiseAbs().maxCoeff() < 1e-6);
}
