#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "npr/design.hpp"
#include "npr/gaussian.hpp"
#include "npr/graph.hpp"
#include "npr/rng.hpp"

namespace npr {

enum class Competitor { lim, lim2, npr };

const char* to_string(Competitor c);
Competitor parse_competitor(const std::string& name);

// Coefficient-draw constants of the four response settings.
struct CoefficientSpec {
    double lim_rho = 0.25;
    double lim2_rho1 = 0.25;
    double lim2_rho2 = 0.05;
    double lim_low = 0.5, lim_high = 5.0;  // beta, delta, gamma1..3 ~ U(low, high)
    double npr_low = 0.0, npr_high = 5.0;  // lambda_k ~ U(low, high), k = 0..npr_orders-1
    int npr_orders = 6;
    double cohesion_eta[3] = {-2.5, 0.0, 2.5};
    double cohesion_mu_var = 0.25;
    double cohesion_beta_mean = 1.0, cohesion_beta_sd = 1.0;
    double test_half_width = 0.25;  // lambda_j ~ U(-w, w) / sqrt(2) in the testing study
};

struct ScenarioConfig {
    int case_id = 1;  // 1 ER, 2 SBM, 3 power law
    int setting = 1;  // 1 LIM, 2 LIM2, 3 NPR, 4 cohesion
    int n = 1000;
    int d = 10;
    int k_fit = 8;
    int reps = 100;
    std::uint64_t seed = 0;
    double train_frac = 0.8;
    double sigma = 1.0;
    double tol = kDefaultSelectTol;
    std::optional<Competitor> competitor;  // default follows the setting
    int threads = 0;                       // 0: NPR_THREADS, else hardware concurrency
    CoefficientSpec coef;
    // testing study
    int k_max = 4;
    double alpha = 0.05;
    OrderTestOptions test_options;

    Competitor resolved_competitor() const;
    // Throws std::invalid_argument on violations.
    void validate() const;
};

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

struct PredictionReplicate {
    double kappa[4] = {0, 0, 0, 0};
    double rmse_npr[4] = {0, 0, 0, 0};
    double rmse_ref[4] = {0, 0, 0, 0};  // oracle for scenario 1, competitor otherwise
};

struct PredictionReport {
    ScenarioConfig config;
    MeanSe kappa[4];
    std::vector<PredictionReplicate> replicates;
};

struct TestReplicate {
    std::vector<double> p_values;
    std::vector<bool> unadjusted;
    std::vector<bool> holm;
    int covered = 0;
    int coverage_total = 0;
    int selected_order = 0;
};

// EP and ES are unadjusted rejection rates over false and true nulls; MP is the
// Holm rejection rate over false nulls; FWER is the fraction of replicates in
// which Holm rejects at least one true null; CP is the 95% interval coverage
// of the nonzero coefficients.
struct TestReport {
    ScenarioConfig config;
    int n_nulls = 0;
    // Empty when the quantity is undefined (no false or no true nulls).
    std::optional<double> ep, es, mp, fwer;
    double cp = 0.0;
    std::vector<TestReplicate> replicates;
};

// X with rows iid N(0, Sigma_case).
Eigen::MatrixXd covariance_for_case(int case_id, int d);
Eigen::MatrixXd gen_covariates(int case_id, int n, int d, Rng& rng);

struct ScenarioGraph {
    DirectedGraph graph;
    std::vector<int> labels;  // SBM blocks; empty for the other cases
};
ScenarioGraph gen_case_graph(int case_id, int n, Rng& rng);

enum class SplitMode { linked, isolated };
using GraphFactory = std::function<ScenarioGraph(int n, Rng& rng)>;

struct Split {
    std::vector<int> train_rows;
    // Linked: rows of the input graph. Isolated: rows of test_graph, a random
    // subset of the same size as the linked test set.
    std::vector<int> test_rows;
    // Isolated mode only: a fresh network on as many nodes as the input,
    // drawn by `factory`; it shares no nodes with the input.
    std::optional<ScenarioGraph> test_graph;
};

// Random row split with round(frac * n) training rows. Throws when either
// side would be empty or when isolated mode has no factory.
Split split_scenarios(const DirectedGraph& graph, double frac, SplitMode mode, Rng& rng,
                      const GraphFactory& factory = {});

// Runs `body(rep)` for rep = 0..reps-1 on up to `threads` workers. The first
// failing replicate (lowest index) is rethrown after all workers finish.
void parallel_replicates(int reps, int threads, const std::function<void(int)>& body);
int resolve_threads(int requested);

PredictionReport run_prediction_study(const ScenarioConfig& cfg);

struct AucSummary {
    int k = 0;
    std::vector<double> aucs;  // one per split that produced a fit; failed splits are skipped
    int failed_splits = 0;
    double mean = 0.0;
    double se = 0.0;
    double ci_low = 0.0, ci_high = 0.0;  // mean +- 1.96 se
};

// Repeated random subsampling: per split s, rows are divided by
// split_scenarios with stream_rng(seed, s); a logistic model over the design
// propagated to order k on the full graph is fit on the training rows and
// scored by AUC on the test rows.
AucSummary run_auc_study(const RowStochasticOperator& w, const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int k,
                         int splits, double train_frac, std::uint64_t seed, double tol = kDefaultSelectTol,
                         int threads = 0);
TestReport run_test_study(const ScenarioConfig& cfg, int n_nulls);

}  // namespace npr
