#include "npr/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include "npr/error.hpp"

namespace npr {

DirectedGraph::DirectedGraph(int n_nodes, std::vector<Edge> edges) : n_nodes_(n_nodes), edges_(std::move(edges)) {
    if (n_nodes_ <= 0) throw DimensionError("graph must have at least one node");
    for (const auto& e : edges_) {
        if (e.src < 0 || e.src >= n_nodes_ || e.dst < 0 || e.dst >= n_nodes_)
            throw DimensionError("edge (" + std::to_string(e.src) + "," + std::to_string(e.dst) +
                                 ") out of range for " + std::to_string(n_nodes_) + " nodes");
        if (e.src == e.dst) throw std::invalid_argument("self-loop at node " + std::to_string(e.src));
    }
    std::sort(edges_.begin(), edges_.end());
    auto dup = std::adjacent_find(edges_.begin(), edges_.end());
    if (dup != edges_.end())
        throw std::invalid_argument("duplicate edge (" + std::to_string(dup->src) + "," + std::to_string(dup->dst) + ")");
}

double DirectedGraph::density() const {
    if (n_nodes_ < 2) return 0.0;
    return static_cast<double>(edges_.size()) / (static_cast<double>(n_nodes_) * (n_nodes_ - 1));
}

std::vector<int> DirectedGraph::out_degrees() const {
    std::vector<int> deg(n_nodes_, 0);
    for (const auto& e : edges_) ++deg[e.src];
    return deg;
}

std::vector<int> DirectedGraph::in_degrees() const {
    std::vector<int> deg(n_nodes_, 0);
    for (const auto& e : edges_) ++deg[e.dst];
    return deg;
}

RowStochasticOperator::RowStochasticOperator(const DirectedGraph& g)
    : n_nodes_(g.n_nodes()), offsets_(g.n_nodes() + 1, 0) {
    indices_.reserve(g.n_edges());
    // edges are sorted by (src, dst)
    for (const auto& e : g.edges()) {
        ++offsets_[e.src + 1];
        indices_.push_back(e.dst);
    }
    for (int i = 0; i < n_nodes_; ++i) offsets_[i + 1] += offsets_[i];
}

Eigen::MatrixXd RowStochasticOperator::apply(const Eigen::MatrixXd& x) const {
    if (x.rows() != n_nodes_)
        throw DimensionError("W has " + std::to_string(n_nodes_) + " nodes but X has " + std::to_string(x.rows()) +
                             " rows");
    Eigen::MatrixXd out(x.rows(), x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        const double* col = x.col(c).data();
        double* dst = out.col(c).data();
        for (int i = 0; i < n_nodes_; ++i) {
            const int begin = offsets_[i];
            const int end = offsets_[i + 1];
            if (begin == end) {
                dst[i] = 0.0;
                continue;
            }
            double acc = 0.0;
            for (int p = begin; p < end; ++p) acc += col[indices_[p]];
            dst[i] = acc / static_cast<double>(end - begin);
        }
    }
    return out;
}

Eigen::MatrixXd RowStochasticOperator::to_dense() const {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n_nodes_, n_nodes_);
    for (int i = 0; i < n_nodes_; ++i)
        for (int j : neighbors(i)) w(i, j) = weight(i);
    return w;
}

RowStochasticOperator row_normalize(const DirectedGraph& g) { return RowStochasticOperator(g); }

std::vector<Eigen::MatrixXd> propagate(const RowStochasticOperator& w, const Eigen::MatrixXd& x, int k_max) {
    if (k_max < 0) throw std::invalid_argument("propagation order must be non-negative");
    if (x.rows() != w.n_nodes()) throw DimensionError("W and X disagree on the number of nodes");
    std::vector<Eigen::MatrixXd> blocks;
    blocks.reserve(k_max + 1);
    blocks.push_back(x);
    for (int k = 1; k <= k_max; ++k) blocks.push_back(w.apply(blocks.back()));
    return blocks;
}

double spectral_bound_check(const RowStochasticOperator& w, int k) {
    if (k < 1) throw std::invalid_argument("k must be positive");
    const Eigen::MatrixXd dense = w.to_dense();
    Eigen::MatrixXd power = dense;
    for (int i = 1; i < k; ++i) power = power * dense;
    const Eigen::MatrixXd gram = power.transpose() * power;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().maxCoeff();
}

namespace {

// Visits each index of [0, count) independently with probability p using
// geometric skips, so the cost is proportional to the number of hits.
template <typename F>
void bernoulli_scan(long count, double p, Rng& rng, F&& on_hit) {
    if (count <= 0 || p <= 0.0) return;
    if (p >= 1.0) {
        for (long c = 0; c < count; ++c) on_hit(c);
        return;
    }
    std::geometric_distribution<long> skip(p);
    long pos = -1;
    while (true) {
        pos += skip(rng) + 1;
        if (pos >= count) break;
        on_hit(pos);
    }
}

}  // namespace

DirectedGraph gen_erdos_renyi(int n, Rng& rng) { return gen_erdos_renyi(n, std::pow(static_cast<double>(n), -0.8), rng); }

DirectedGraph gen_erdos_renyi(int n, double p, Rng& rng) {
    if (n < 2) throw std::invalid_argument("Erdos-Renyi graph needs at least 2 nodes");
    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(p * n * (n - 1) * 1.1) + 16);
    for (int i = 0; i < n; ++i) {
        bernoulli_scan(n - 1, p, rng, [&](long c) {
            const int j = c < i ? static_cast<int>(c) : static_cast<int>(c) + 1;
            edges.push_back({i, j});
        });
    }
    return DirectedGraph(n, std::move(edges));
}

BlockGraph gen_sbm(int n, Rng& rng) {
    const double dn = static_cast<double>(n);
    return gen_sbm(n, std::pow(dn, -0.75), 1.0 / dn, 3, rng);
}

BlockGraph gen_sbm(int n, double p_within, double p_between, int n_blocks, Rng& rng) {
    if (n < 2) throw std::invalid_argument("block model needs at least 2 nodes");
    if (n_blocks < 1) throw std::invalid_argument("block model needs at least one block");
    std::uniform_int_distribution<int> pick(0, n_blocks - 1);
    std::vector<int> labels(n);
    for (auto& l : labels) l = pick(rng);

    std::vector<std::vector<int>> members(n_blocks);
    std::vector<int> position(n);
    for (int i = 0; i < n; ++i) {
        position[i] = static_cast<int>(members[labels[i]].size());
        members[labels[i]].push_back(i);
    }

    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i) {
        for (int b = 0; b < n_blocks; ++b) {
            const auto& pool = members[b];
            if (b == labels[i]) {
                const long self = position[i];
                bernoulli_scan(static_cast<long>(pool.size()) - 1, p_within, rng, [&](long c) {
                    edges.push_back({i, pool[c < self ? c : c + 1]});
                });
            } else {
                bernoulli_scan(static_cast<long>(pool.size()), p_between, rng,
                               [&](long c) { edges.push_back({i, pool[c]}); });
            }
        }
    }
    return {DirectedGraph(n, std::move(edges)), std::move(labels)};
}

std::vector<double> powerlaw_pmf(int max_degree, double exponent) {
    if (max_degree < 1) throw std::invalid_argument("power law needs max_degree >= 1");
    std::vector<double> pmf(max_degree);
    double total = 0.0;
    for (int k = 1; k <= max_degree; ++k) {
        pmf[k - 1] = std::pow(static_cast<double>(k), -exponent);
        total += pmf[k - 1];
    }
    for (auto& v : pmf) v /= total;
    return pmf;
}

DirectedGraph gen_powerlaw(int n, Rng& rng) { return gen_powerlaw(n, 2.5, rng); }

DirectedGraph gen_powerlaw(int n, double exponent, Rng& rng) {
    if (n < 2) throw std::invalid_argument("power-law graph needs at least 2 nodes");
    const auto pmf = powerlaw_pmf(n - 1, exponent);
    std::discrete_distribution<int> degree(pmf.begin(), pmf.end());

    std::vector<Edge> edges;
    std::unordered_set<int> chosen;
    for (int target = 0; target < n; ++target) {
        const int k = degree(rng) + 1;
        // Floyd's sampling of k distinct candidates from [0, n-1)
        chosen.clear();
        const int pool = n - 1;
        for (int j = pool - k; j < pool; ++j) {
            const int r = std::uniform_int_distribution<int>(0, j)(rng);
            if (!chosen.insert(r).second) chosen.insert(j);
        }
        for (int c : chosen) {
            const int follower = c < target ? c : c + 1;
            edges.push_back({follower, target});
        }
    }
    return DirectedGraph(n, std::move(edges));
}

}  // namespace npr
