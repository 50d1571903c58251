#include "npr/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "npr/baselines.hpp"
#include "npr/error.hpp"
#include "npr/logistic.hpp"

namespace npr {

const char* to_string(Competitor c) {
    switch (c) {
        case Competitor::lim: return "lim";
        case Competitor::lim2: return "lim2";
        case Competitor::npr: return "npr";
    }
    return "?";
}

Competitor parse_competitor(const std::string& name) {
    if (name == "lim") return Competitor::lim;
    if (name == "lim2") return Competitor::lim2;
    if (name == "npr") return Competitor::npr;
    throw std::invalid_argument("unknown competitor '" + name + "' (expected lim, lim2 or npr)");
}

Competitor ScenarioConfig::resolved_competitor() const {
    if (competitor) return *competitor;
    return setting == 2 ? Competitor::lim2 : Competitor::lim;
}

void ScenarioConfig::validate() const {
    if (case_id < 1 || case_id > 3) throw std::invalid_argument("case must be 1, 2 or 3");
    if (setting < 1 || setting > 4) throw std::invalid_argument("setting must be 1, 2, 3 or 4");
    if (setting == 4 && case_id != 2) throw std::invalid_argument("setting 4 requires case 2");
    if (reps < 1) throw std::invalid_argument("reps must be at least 1");
    if (n < 10) throw std::invalid_argument("n must be at least 10");
    if (d < 1) throw std::invalid_argument("d must be at least 1");
    if (k_fit < 0) throw std::invalid_argument("K must be non-negative");
    if (!(train_frac > 0.0 && train_frac < 1.0)) throw std::invalid_argument("train fraction must lie in (0, 1)");
    if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be non-negative");
    if (k_max < 0 || k_max > k_fit) throw std::invalid_argument("kmax must lie in 0..K");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
}

Eigen::MatrixXd covariance_for_case(int case_id, int d) {
    Eigen::MatrixXd s(d, d);
    if (case_id == 1 || case_id == 2) {
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) s(i, j) = std::pow(0.5, std::abs(i - j));
    } else if (case_id == 3) {
        s.setConstant(0.5);
        if (d > 1) {
            s.row(d - 1).setConstant(std::sqrt(0.5));
            s.col(d - 1).setConstant(std::sqrt(0.5));
        }
        s.diagonal().setOnes();
    } else {
        throw std::invalid_argument("case must be 1, 2 or 3");
    }
    return s;
}

Eigen::MatrixXd gen_covariates(int case_id, int n, int d, Rng& rng) {
    const Eigen::MatrixXd sigma = covariance_for_case(case_id, d);
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) throw ModelError("covariate covariance is not positive definite");
    const Eigen::MatrixXd l = llt.matrixL();
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd z(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) z(i, j) = normal(rng);
    return z * l.transpose();
}

ScenarioGraph gen_case_graph(int case_id, int n, Rng& rng) {
    switch (case_id) {
        case 1: return {gen_erdos_renyi(n, rng), {}};
        case 2: {
            auto b = gen_sbm(n, rng);
            return {std::move(b.graph), std::move(b.labels)};
        }
        case 3: return {gen_powerlaw(n, rng), {}};
        default: throw std::invalid_argument("case must be 1, 2 or 3");
    }
}

namespace {

// Fisher-Yates with an explicit draw so the permutation does not depend on the standard library.
std::vector<int> random_permutation(int n, Rng& rng) {
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = n - 1; i > 0; --i) {
        const auto j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
        std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
    return perm;
}

}  // namespace

Split split_scenarios(const DirectedGraph& graph, double frac, SplitMode mode, Rng& rng, const GraphFactory& factory) {
    if (!(frac > 0.0 && frac < 1.0)) throw std::invalid_argument("split fraction must lie in (0, 1)");
    const int n = graph.n_nodes();
    const int n_train = static_cast<int>(std::lround(frac * n));
    if (n_train < 1 || n_train >= n) throw std::invalid_argument("split leaves an empty training or test set");

    if (mode == SplitMode::isolated && !factory) throw std::invalid_argument("isolated split needs a graph generator");

    std::vector<int> perm = random_permutation(n, rng);
    Split s;
    s.train_rows.assign(perm.begin(), perm.begin() + n_train);
    std::sort(s.train_rows.begin(), s.train_rows.end());
    if (mode == SplitMode::linked) {
        s.test_rows.assign(perm.begin() + n_train, perm.end());
    } else {
        s.test_graph = factory(n, rng);
        if (s.test_graph->graph.n_nodes() != n) throw DimensionError("isolated graph has the wrong size");
        perm = random_permutation(n, rng);
        s.test_rows.assign(perm.begin(), perm.begin() + (n - n_train));
    }
    std::sort(s.test_rows.begin(), s.test_rows.end());
    return s;
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("NPR_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_replicates(int reps, int threads, const std::function<void(int)>& body) {
    if (reps <= 0) return;
    const int workers = std::clamp(resolve_threads(threads), 1, reps);
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(reps));
    std::atomic<int> next{0};
    const auto work = [&] {
        for (int r = next.fetch_add(1); r < reps; r = next.fetch_add(1)) {
            try {
                body(r);
            } catch (...) {
                errors[static_cast<std::size_t>(r)] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

namespace {

struct Truth {
    LimParams lim;
    Lim2Params lim2;
    std::vector<Eigen::VectorXd> lambdas;
    Eigen::VectorXd beta;
};

Eigen::VectorXd uniform_vector(int d, double lo, double hi, Rng& rng) {
    std::uniform_real_distribution<double> u(lo, hi);
    Eigen::VectorXd v(d);
    for (int j = 0; j < d; ++j) v[j] = u(rng);
    return v;
}

Truth draw_truth(const ScenarioConfig& cfg, Rng& rng) {
    const auto& c = cfg.coef;
    Truth t;
    switch (cfg.setting) {
        case 1:
            t.lim.rho = c.lim_rho;
            t.lim.beta = uniform_vector(cfg.d, c.lim_low, c.lim_high, rng);
            t.lim.delta = uniform_vector(cfg.d, c.lim_low, c.lim_high, rng);
            break;
        case 2:
            t.lim2.rho1 = c.lim2_rho1;
            t.lim2.rho2 = c.lim2_rho2;
            t.lim2.gamma1 = uniform_vector(cfg.d, c.lim_low, c.lim_high, rng);
            t.lim2.gamma2 = uniform_vector(cfg.d, c.lim_low, c.lim_high, rng);
            t.lim2.gamma3 = uniform_vector(cfg.d, c.lim_low, c.lim_high, rng);
            break;
        case 3:
            for (int k = 0; k < c.npr_orders; ++k) t.lambdas.push_back(uniform_vector(cfg.d, c.npr_low, c.npr_high, rng));
            break;
        case 4: {
            std::normal_distribution<double> normal(c.cohesion_beta_mean, c.cohesion_beta_sd);
            t.beta.resize(cfg.d);
            for (int j = 0; j < cfg.d; ++j) t.beta[j] = normal(rng);
            break;
        }
    }
    return t;
}

struct Sample {
    Eigen::VectorXd mean;  // noiseless reduced-form response
    Eigen::VectorXd y;
};

Sample sample_response(const ScenarioConfig& cfg, const Truth& t, const RowStochasticOperator& w,
                       const Eigen::MatrixXd& x, const std::vector<int>& labels, Rng& rng) {
    Sample s;
    switch (cfg.setting) {
        case 1:
            s.mean = gen_lim(w, x, t.lim, 0.0, rng);
            s.y = gen_lim(w, x, t.lim, cfg.sigma, rng);
            break;
        case 2:
            s.mean = gen_lim2(w, x, t.lim2, 0.0, rng);
            s.y = gen_lim2(w, x, t.lim2, cfg.sigma, rng);
            break;
        case 3:
            s.mean = gen_npr(w, x, t.lambdas, 0.0, rng);
            s.y = s.mean + gen_npr(w, x, {}, cfg.sigma, rng);
            break;
        case 4:
            s.mean = gen_cohesion(labels, x, cfg.coef.cohesion_eta, cfg.coef.cohesion_mu_var, t.beta, 0.0, rng);
            s.y = s.mean + gen_npr(w, x, {}, cfg.sigma, rng);
            break;
    }
    return s;
}

using Predictor = std::function<Eigen::VectorXd(const RowStochasticOperator&, const Eigen::MatrixXd&)>;

struct FittedModel {
    Predictor predict;        // reduced form: needs only W and X
    Eigen::VectorXd in_sample;  // fitted values on the rows it was trained on, full-graph indexing
};

std::vector<int> complement(const std::vector<int>& rows, int n) {
    std::vector<char> in(static_cast<std::size_t>(n), 0);
    for (int r : rows) in[static_cast<std::size_t>(r)] = 1;
    std::vector<int> out;
    for (int i = 0; i < n; ++i)
        if (!in[static_cast<std::size_t>(i)]) out.push_back(i);
    return out;
}

Predictor fit_npr_predictor(const PropagatedDesign& full, const Eigen::VectorXd& y, const std::vector<int>& rows,
                            int k_fit, double tol) {
    PropagatedDesign train = rows.empty() ? full : row_subset(full, rows);
    Eigen::VectorXd y_train(rows.empty() ? y.size() : static_cast<Eigen::Index>(rows.size()));
    if (rows.empty())
        y_train = y;
    else
        for (std::size_t i = 0; i < rows.size(); ++i) y_train[static_cast<Eigen::Index>(i)] = y[rows[i]];
    auto fit = fit_ols(forward_select(center(std::move(train)), tol), y_train);
    return [fit = std::move(fit), k_fit](const RowStochasticOperator& w, const Eigen::MatrixXd& x) {
        return predict_gaussian(fit, build_design(w, x, k_fit));
    };
}

// In-sample values of the competitor are its structural fitted values (the
// 2SLS regression fit, which uses WY); out-of-sample values are reduced form.
FittedModel fit_competitor(Competitor kind, const RowStochasticOperator& w, const Eigen::MatrixXd& x,
                           const Eigen::VectorXd& y, const PropagatedDesign& full, const std::vector<int>& rows,
                           const ScenarioConfig& cfg) {
    FittedModel m;
    switch (kind) {
        case Competitor::lim: {
            auto p = fit_lim_2sls(w, x, y, rows);
            m.in_sample = structural_fit_lim(w, x, y, p);
            m.predict = [p](const RowStochasticOperator& w2, const Eigen::MatrixXd& x2) { return predict_lim(w2, x2, p); };
            break;
        }
        case Competitor::lim2: {
            auto p = fit_lim2_2sls(w, x, y, rows);
            m.in_sample = structural_fit_lim2(w, x, y, p);
            m.predict = [p](const RowStochasticOperator& w2, const Eigen::MatrixXd& x2) { return predict_lim2(w2, x2, p); };
            break;
        }
        case Competitor::npr:
            m.predict = fit_npr_predictor(full, y, rows, cfg.k_fit, cfg.tol);
            m.in_sample = m.predict(w, x);
            break;
    }
    return m;
}

// Prediction of the true model with its true parameters. For the spillover
// settings this is the structural form, whose error is exactly the noise.
Eigen::VectorXd oracle_prediction(const ScenarioConfig& cfg, const Truth& t, const RowStochasticOperator& w,
                                  const Eigen::MatrixXd& x, const Sample& s) {
    switch (cfg.setting) {
        case 1: return structural_fit_lim(w, x, s.y, t.lim);
        case 2: return structural_fit_lim2(w, x, s.y, t.lim2);
        default: return s.mean;
    }
}

double rmse(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat, const std::vector<int>& rows = {}) {
    double ss = 0.0;
    if (rows.empty()) {
        ss = (y - yhat).squaredNorm();
        return std::sqrt(ss / static_cast<double>(y.size()));
    }
    for (int r : rows) ss += (y[r] - yhat[r]) * (y[r] - yhat[r]);
    return std::sqrt(ss / static_cast<double>(rows.size()));
}

MeanSe mean_se(const std::vector<double>& v) {
    MeanSe out;
    if (v.empty()) return out;
    double sum = 0.0;
    for (double x : v) sum += x;
    out.mean = sum / static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - out.mean) * (x - out.mean);
        out.se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
    }
    return out;
}

PredictionReplicate prediction_replicate(const ScenarioConfig& cfg, int rep) {
    Rng rng = stream_rng(cfg.seed, static_cast<std::uint64_t>(rep));
    const auto g = gen_case_graph(cfg.case_id, cfg.n, rng);
    const auto w = row_normalize(g.graph);
    const Eigen::MatrixXd x = gen_covariates(cfg.case_id, cfg.n, cfg.d, rng);
    const Truth truth = draw_truth(cfg, rng);
    const Sample s = sample_response(cfg, truth, w, x, g.labels, rng);
    const PropagatedDesign full = build_design(w, x, cfg.k_fit);
    const Competitor comp = cfg.resolved_competitor();

    PredictionReplicate r;
    // (1) oracle and (2) in-sample, both on the full data
    const Eigen::VectorXd npr_in = fit_npr_predictor(full, s.y, {}, cfg.k_fit, cfg.tol)(w, x);
    r.rmse_npr[0] = r.rmse_npr[1] = rmse(s.y, npr_in);
    r.rmse_ref[0] = rmse(s.y, oracle_prediction(cfg, truth, w, x, s));
    r.rmse_ref[1] = rmse(s.y, fit_competitor(comp, w, x, s.y, full, {}, cfg).in_sample);

    // (3) linked: fit on the training rows of the full graph, score the remaining rows.
    // (4) isolated: the same fits scored on an independent network drawn by the case rule.
    const auto factory = [&](int m, Rng& r2) { return gen_case_graph(cfg.case_id, m, r2); };
    const Split split = split_scenarios(g.graph, cfg.train_frac, SplitMode::isolated, rng, factory);
    const std::vector<int> linked_test = complement(split.train_rows, cfg.n);
    const auto npr_tr = fit_npr_predictor(full, s.y, split.train_rows, cfg.k_fit, cfg.tol);
    const auto comp_tr = fit_competitor(comp, w, x, s.y, full, split.train_rows, cfg).predict;
    r.rmse_npr[2] = rmse(s.y, npr_tr(w, x), linked_test);
    r.rmse_ref[2] = rmse(s.y, comp_tr(w, x), linked_test);

    const ScenarioGraph& g_new = *split.test_graph;
    const auto w_new = row_normalize(g_new.graph);
    const Eigen::MatrixXd x_new = gen_covariates(cfg.case_id, g_new.graph.n_nodes(), cfg.d, rng);
    const Sample s_new = sample_response(cfg, truth, w_new, x_new, g_new.labels, rng);
    r.rmse_npr[3] = rmse(s_new.y, npr_tr(w_new, x_new), split.test_rows);
    r.rmse_ref[3] = rmse(s_new.y, comp_tr(w_new, x_new), split.test_rows);

    for (int k = 0; k < 4; ++k) r.kappa[k] = r.rmse_npr[k] / r.rmse_ref[k];
    return r;
}

TestReplicate test_replicate(const ScenarioConfig& cfg, int n_nulls, int rep) {
    Rng rng = stream_rng(cfg.seed, static_cast<std::uint64_t>(rep));
    const auto g = gen_case_graph(cfg.case_id, cfg.n, rng);
    const auto w = row_normalize(g.graph);
    const Eigen::MatrixXd x = gen_covariates(cfg.case_id, cfg.n, cfg.d, rng);

    const int n_hyp = cfg.k_max + 1;
    const int n_nonzero = n_hyp - n_nulls;
    const double hw = cfg.coef.test_half_width;
    std::vector<Eigen::VectorXd> lambdas;
    for (int k = 0; k < n_nonzero; ++k) lambdas.push_back(uniform_vector(cfg.d, -hw, hw, rng) / std::sqrt(2.0));
    const Eigen::VectorXd y = gen_npr(w, x, lambdas, cfg.sigma, rng);

    const auto design = forward_select(center(build_design(w, x, cfg.k_fit)), cfg.tol);
    const auto fit = fit_ols(design, y);
    OrderTestOptions opts = cfg.test_options;
    opts.alpha = cfg.alpha;
    const auto report = order_test(fit, cfg.k_max, opts);

    TestReplicate r;
    r.selected_order = report.selected_order;
    r.holm = report.holm_rejections;
    for (const auto& rec : report.records) {
        r.p_values.push_back(rec.p_value);
        r.unadjusted.push_back(rec.p_value <= cfg.alpha);
    }
    for (const auto& c : t_statistics(fit)) {
        if (c.tag.order >= n_nonzero) continue;
        const double truth = lambdas[static_cast<std::size_t>(c.tag.order)][c.tag.covariate];
        ++r.coverage_total;
        if (c.ci_low <= truth && truth <= c.ci_high) ++r.covered;
    }
    return r;
}

}  // namespace

PredictionReport run_prediction_study(const ScenarioConfig& cfg) {
    cfg.validate();
    PredictionReport report;
    report.config = cfg;
    report.replicates.resize(static_cast<std::size_t>(cfg.reps));
    parallel_replicates(cfg.reps, cfg.threads, [&](int rep) {
        report.replicates[static_cast<std::size_t>(rep)] = prediction_replicate(cfg, rep);
    });
    for (int k = 0; k < 4; ++k) {
        std::vector<double> v;
        v.reserve(report.replicates.size());
        for (const auto& r : report.replicates) v.push_back(r.kappa[k]);
        report.kappa[k] = mean_se(v);
    }
    return report;
}

TestReport run_test_study(const ScenarioConfig& cfg, int n_nulls) {
    cfg.validate();
    const int n_hyp = cfg.k_max + 1;
    if (n_nulls < 0 || n_nulls > n_hyp) throw std::invalid_argument("number of true nulls must lie in 0..kmax+1");
    TestReport report;
    report.config = cfg;
    report.n_nulls = n_nulls;
    report.replicates.resize(static_cast<std::size_t>(cfg.reps));
    parallel_replicates(cfg.reps, cfg.threads, [&](int rep) {
        report.replicates[static_cast<std::size_t>(rep)] = test_replicate(cfg, n_nulls, rep);
    });

    const int n_false = n_hyp - n_nulls;
    long rej_false = 0, rej_true = 0, holm_false = 0, any_true = 0, covered = 0, total = 0;
    for (const auto& r : report.replicates) {
        bool some = false;
        for (int j = 0; j < n_hyp; ++j) {
            const bool false_null = j < n_false;
            if (false_null) {
                rej_false += r.unadjusted[j];
                holm_false += r.holm[j];
            } else {
                rej_true += r.unadjusted[j];
                some = some || r.holm[j];
            }
        }
        any_true += some;
        covered += r.covered;
        total += r.coverage_total;
    }
    const double reps = cfg.reps;
    if (n_false > 0) {
        report.ep = static_cast<double>(rej_false) / (reps * n_false);
        report.mp = static_cast<double>(holm_false) / (reps * n_false);
    }
    if (n_nulls > 0) {
        report.es = static_cast<double>(rej_true) / (reps * n_nulls);
        report.fwer = static_cast<double>(any_true) / reps;
    }
    report.cp = total > 0 ? static_cast<double>(covered) / static_cast<double>(total) : 0.0;
    return report;
}

AucSummary run_auc_study(const RowStochasticOperator& w, const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int k,
                         int splits, double train_frac, std::uint64_t seed, double tol, int threads) {
    if (splits < 1) throw std::invalid_argument("splits must be at least 1");
    if (y.size() != x.rows()) throw DimensionError("response length does not match covariate rows");
    const PropagatedDesign full = build_design(w, x, k);
    std::vector<std::optional<double>> per_split(static_cast<std::size_t>(splits));
    parallel_replicates(splits, threads, [&](int s) {
        Rng rng = stream_rng(seed, static_cast<std::uint64_t>(s));
        const int n = static_cast<int>(x.rows());
        const int n_train = static_cast<int>(std::lround(train_frac * n));
        if (!(train_frac > 0.0 && train_frac < 1.0) || n_train < 1 || n_train >= n)
            throw std::invalid_argument("split leaves an empty training or test set");
        std::vector<int> perm = random_permutation(n, rng);
        std::vector<int> train(perm.begin(), perm.begin() + n_train);
        std::vector<int> test(perm.begin() + n_train, perm.end());
        std::sort(train.begin(), train.end());
        std::sort(test.begin(), test.end());
        Eigen::VectorXd y_train(static_cast<Eigen::Index>(train.size()));
        for (std::size_t i = 0; i < train.size(); ++i) y_train[static_cast<Eigen::Index>(i)] = y[train[i]];
        std::vector<int> labels;
        for (int r : test) labels.push_back(y[r] == 1.0 ? 1 : 0);
        try {
            const auto fit = fit_logistic(forward_select(row_subset(full, train), tol), y_train);
            const Eigen::VectorXd p = predict_proba(fit, row_subset(full, test));
            per_split[static_cast<std::size_t>(s)] = auc(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())), labels);
        } catch (const ModelError&) {
            // separation or a degenerate training set: the split is skipped
        } catch (const std::invalid_argument&) {
            // single-class test set
        }
    });
    AucSummary out;
    out.k = k;
    for (const auto& v : per_split) {
        if (v)
            out.aucs.push_back(*v);
        else
            ++out.failed_splits;
    }
    if (out.aucs.empty()) throw ModelError("no split produced a usable logistic fit");
    const MeanSe m = mean_se(out.aucs);
    out.mean = m.mean;
    out.se = m.se;
    out.ci_low = m.mean - kZ975 * m.se;
    out.ci_high = m.mean + kZ975 * m.se;
    return out;
}

}  // namespace npr
