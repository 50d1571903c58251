#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "npr/cox.hpp"
#include "npr/graph.hpp"
#include "npr/rng.hpp"

namespace npr::testing {

// Each ordered pair i != j with probability p, by brute-force enumeration.
inline DirectedGraph dense_random_graph(int n, double p, Rng& rng) {
    std::bernoulli_distribution coin(p);
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && coin(rng)) edges.push_back({i, j});
    return DirectedGraph(n, std::move(edges));
}

// W built entry by entry from the edge list, independently of the operator.
inline Eigen::MatrixXd dense_w(const DirectedGraph& g) {
    const int n = g.n_nodes();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (const auto& e : g.edges()) a(e.src, e.dst) = 1.0;
    for (int i = 0; i < n; ++i) {
        const double s = a.row(i).sum();
        if (s > 0) a.row(i) /= s;
    }
    return a;
}

inline Eigen::MatrixXd matrix_power(const Eigen::MatrixXd& m, int k) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Identity(m.rows(), m.cols());
    for (int i = 0; i < k; ++i) out = out * m;
    return out;
}

inline Eigen::MatrixXd normal_matrix(Eigen::Index r, Eigen::Index c, Rng& rng) {
    std::normal_distribution<double> z(0.0, 1.0);
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = z(rng);
    return m;
}

// sup_x |F_n(x) - F(x)| of a sample against a continuous CDF.
inline double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(static_cast<double>(i + 1) / n - f)});
    }
    return d;
}

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

// Central-difference gradient of f at theta.
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& theta,
                                   double h = 1e-5) {
    Eigen::VectorXd g(theta.size());
    for (Eigen::Index j = 0; j < theta.size(); ++j) {
        Eigen::VectorXd a = theta, b = theta;
        a[j] += h;
        b[j] -= h;
        g[j] = (f(a) - f(b)) / (2 * h);
    }
    return g;
}

// Central-difference Jacobian of a vector-valued g (the Hessian when g is a gradient).
inline Eigen::MatrixXd fd_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& g,
                                   const Eigen::VectorXd& theta, double h = 1e-5) {
    const Eigen::Index p = theta.size();
    Eigen::MatrixXd jac(g(theta).size(), p);
    for (Eigen::Index j = 0; j < p; ++j) {
        Eigen::VectorXd a = theta, b = theta;
        a[j] += h;
        b[j] -= h;
        jac.col(j) = (g(a) - g(b)) / (2 * h);
    }
    return jac;
}

inline double relative_error(const Eigen::MatrixXd& analytic, const Eigen::MatrixXd& reference) {
    return (analytic - reference).cwiseAbs().maxCoeff() / std::max(1.0, reference.cwiseAbs().maxCoeff());
}

// Breslow partial likelihood by explicit risk sets, O(N^2).
inline PartialLikelihood naive_cox(const Eigen::MatrixXd& x, const SurvivalData& s, const Eigen::VectorXd& lambda) {
    const Eigen::Index n = x.rows(), p = x.cols();
    const Eigen::VectorXd eta = x * lambda;
    PartialLikelihood out;
    out.score = Eigen::VectorXd::Zero(p);
    out.hessian = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (s.event[static_cast<std::size_t>(i)] != 1) continue;
        double s0 = 0.0;
        Eigen::VectorXd s1 = Eigen::VectorXd::Zero(p);
        Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(p, p);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (s.time[j] < s.time[i]) continue;
            const double e = std::exp(eta[j]);
            const Eigen::VectorXd xj = x.row(j).transpose();
            s0 += e;
            s1 += e * xj;
            s2 += e * xj * xj.transpose();
        }
        const Eigen::VectorXd mbar = s1 / s0;
        out.loglik += eta[i] - std::log(s0);
        out.score += x.row(i).transpose() - mbar;
        out.hessian -= s2 / s0 - mbar * mbar.transpose();
    }
    return out;
}

}  // namespace npr::testing
