#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

#include "npr/rng.hpp"

namespace npr {

struct Edge {
    int src;
    int dst;

    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Directed graph on nodes 0..n-1. Edge (i, j) means a_ij = 1: node i receives
// information from node j. Construction validates indices, self-loops and
// duplicates; edges are kept sorted.
class DirectedGraph {
public:
    DirectedGraph(int n_nodes, std::vector<Edge> edges);

    int n_nodes() const { return n_nodes_; }
    std::size_t n_edges() const { return edges_.size(); }
    const std::vector<Edge>& edges() const { return edges_; }

    // Fraction of the n(n-1) ordered pairs that carry an edge.
    double density() const;

    std::vector<int> out_degrees() const;
    std::vector<int> in_degrees() const;

private:
    int n_nodes_;
    std::vector<Edge> edges_;
};

// Row-normalized adjacency W in compressed neighbor-list form. Row i carries
// weight 1/out_degree(i) on each out-neighbor; isolated rows are zero.
// Immutable after construction.
class RowStochasticOperator {
public:
    explicit RowStochasticOperator(const DirectedGraph& g);

    int n_nodes() const { return n_nodes_; }
    int degree(int row) const { return offsets_[row + 1] - offsets_[row]; }
    std::span<const int> neighbors(int row) const {
        return {indices_.data() + offsets_[row], static_cast<std::size_t>(degree(row))};
    }
    double weight(int row) const { return degree(row) == 0 ? 0.0 : 1.0 / degree(row); }

    // W * X without materializing W.
    Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;

    Eigen::MatrixXd to_dense() const;

private:
    int n_nodes_;
    std::vector<int> offsets_;
    std::vector<int> indices_;
};

RowStochasticOperator row_normalize(const DirectedGraph& g);

// [X, WX, ..., W^K X], each step one sparse product.
std::vector<Eigen::MatrixXd> propagate(const RowStochasticOperator& w, const Eigen::MatrixXd& x, int k_max);

// lambda_max((W^k)^T W^k) from the dense k-th power. Diagnostic use on small graphs.
double spectral_bound_check(const RowStochasticOperator& w, int k);

// Directed Erdos-Renyi graph with P(a_ij = 1) = n^{-0.8}.
DirectedGraph gen_erdos_renyi(int n, Rng& rng);
DirectedGraph gen_erdos_renyi(int n, double p, Rng& rng);

struct BlockGraph {
    DirectedGraph graph;
    std::vector<int> labels;  // block index in {0, 1, 2}
};

// Three-block SBM: labels uniform, within-block probability n^{-0.75},
// between-block n^{-1}.
BlockGraph gen_sbm(int n, Rng& rng);
BlockGraph gen_sbm(int n, double p_within, double p_between, int n_blocks, Rng& rng);

// Power-law in-degree graph: each node draws |N_i| from P(k) ∝ k^{-2.5} on
// [1, n-1] and receives edges from |N_i| distinct followers chosen uniformly.
DirectedGraph gen_powerlaw(int n, Rng& rng);
DirectedGraph gen_powerlaw(int n, double exponent, Rng& rng);

// Normalized probabilities P(k), k = 1..max_degree, index k-1.
std::vector<double> powerlaw_pmf(int max_degree, double exponent);

}  // namespace npr
