#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "npr/baselines.hpp"
#include "npr/cox.hpp"
#include "npr/design.hpp"
#include "npr/error.hpp"
#include "npr/gaussian.hpp"
#include "npr/graph.hpp"
#include "npr/io.hpp"
#include "npr/logistic.hpp"
#include "npr/sim.hpp"

#ifndef NPR_VERSION
#define NPR_VERSION "0.0.0"
#endif

namespace npr::cli {

using json = nlohmann::ordered_json;

namespace {

// Usage-level failure detected after argument parsing (bad combination, wrong fit file, ...).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string hex(const unsigned char* p, unsigned n) {
    std::ostringstream s;
    for (unsigned i = 0; i < n; ++i) s << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(p[i]);
    return s.str();
}

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream s;
    s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return s.str();
}

std::uint64_t draw_seed() {
    std::random_device rd;
    return ((static_cast<std::uint64_t>(rd()) << 32) ^ rd()) & 0x7fffffffffffffffULL;
}

// Everything about a run except its payload. wall_clock is the only part that
// may differ between two runs with identical inputs.
struct Manifest {
    std::string command;
    json config = json::object();
    json inputs = json::object();
    std::optional<std::uint64_t> seed;
    std::string started = utc_now();
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    void input(const std::string& role, const std::string& path) {
        inputs[role] = {{"path", path}, {"sha256", sha256_file(path)}};
    }
    json to_json() const {
        json m;
        m["command"] = command;
        m["config"] = config;
        m["inputs"] = inputs;
        m["seed"] = seed ? json(*seed) : json(nullptr);
        m["version"] = NPR_VERSION;
        m["wall_clock"] = {{"started_utc", started},
                           {"elapsed_seconds",
                            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
        return m;
    }
};

void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
    if (out_path.empty() || out_path == "-") {
        out << text;
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw IoError("cannot write '" + out_path + "'");
    f << text;
    if (!f) throw IoError("write failed for '" + out_path + "'");
}

void emit_json(const json& j, const std::string& out_path, std::ostream& out) { emit(j.dump(2) + "\n", out_path, out); }

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json matrix_json(const Eigen::MatrixXd& m) {
    json a = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        a.push_back(std::move(row));
    }
    return a;
}

json tags_json(const std::vector<ColumnTag>& tags) {
    json a = json::array();
    for (const auto& t : tags) a.push_back(column_name(t));
    return a;
}

std::string format_number(double v) {
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
}

struct NetworkData {
    DirectedGraph graph;
    RowStochasticOperator w;
    Eigen::MatrixXd x;
};

NetworkData load_network(const std::string& edges, const std::string& covariates, Manifest& m) {
    m.input("edges", edges);
    m.input("covariates", covariates);
    Eigen::MatrixXd x = read_covariates(covariates);
    DirectedGraph g = read_edges(edges, static_cast<int>(x.rows()));
    RowStochasticOperator w(g);
    return {std::move(g), std::move(w), std::move(x)};
}

void check_rows(const char* what, Eigen::Index got, Eigen::Index want) {
    if (got != want)
        throw DimensionError(std::string(what) + " has " + std::to_string(got) + " rows, covariates have " +
                             std::to_string(want));
}

std::vector<ColumnTag> dropped_tags(const PropagatedDesign& d) {
    std::vector<char> kept(static_cast<std::size_t>(d.n_columns()), 0);
    for (int c : d.selected) kept[static_cast<std::size_t>(c)] = 1;
    std::vector<ColumnTag> out;
    for (int c = 0; c < d.n_columns(); ++c)
        if (!kept[static_cast<std::size_t>(c)]) out.push_back(d.provenance[static_cast<std::size_t>(c)]);
    return out;
}

std::vector<ColumnTag> parse_tags(const json& names) {
    std::vector<ColumnTag> tags;
    for (const auto& n : names) tags.push_back(parse_column_name(n.get<std::string>()));
    return tags;
}

Eigen::VectorXd vector_from(const json& a) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
    return v;
}

// ---- fit -------------------------------------------------------------------

struct FitArgs {
    std::string family = "gaussian";
    std::string edges, covariates, response, time, event, out, design_csv;
    int k = 8;
    double tol = kDefaultSelectTol;
    int max_iter = 100;
    std::optional<std::uint64_t> seed;
};

json cmd_fit(const FitArgs& a) {
    Manifest m;
    m.command = "fit";
    m.seed = a.seed;
    m.config = {{"family", a.family}, {"K", a.k}, {"tol", a.tol}, {"max_iter", a.max_iter}};
    if (a.k < 0) throw UsageError("--K must be non-negative");
    auto net = load_network(a.edges, a.covariates, m);
    const PropagatedDesign raw = build_design(net.w, net.x, a.k);
    const int n = static_cast<int>(net.x.rows());

    json j;
    j["schema"] = "npr.fit/1";
    j["family"] = a.family;
    j["K"] = a.k;
    j["tol"] = a.tol;
    j["n"] = n;
    j["d"] = static_cast<int>(net.x.cols());
    j["n_edges"] = net.graph.n_edges();

    NewtonOptions nopt;
    nopt.max_iter = a.max_iter;

    if (a.family == "gaussian") {
        if (a.response.empty()) throw UsageError("gaussian family needs --response");
        m.input("response", a.response);
        const Eigen::VectorXd y = read_column(a.response, "y");
        check_rows("response", y.size(), n);
        const PropagatedDesign design = forward_select(center(raw), a.tol);
        const GaussianFit fit = fit_ols(design, y);
        json coefs = json::array();
        for (const auto& c : t_statistics(fit))
            coefs.push_back({{"name", column_name(c.tag)},
                             {"order", c.tag.order},
                             {"covariate", c.tag.covariate + 1},
                             {"estimate", c.estimate},
                             {"std_error", c.std_error},
                             {"t", finite_or_null(c.t)},
                             {"p_value", c.p_value},
                             {"ci_low", c.ci_low},
                             {"ci_high", c.ci_high}});
        j["n_selected"] = fit.d_sel;
        j["dropped"] = tags_json(dropped_tags(design));
        j["coefficients"] = coefs;
        j["sigma2_hat"] = fit.sigma2_hat;
        j["rss"] = fit.rss;
        j["gram_condition_number"] = finite_or_null(fit.gram_condition_number());
        j["response_mean"] = fit.response_mean;
        j["column_means"] = json(std::vector<double>(fit.column_means.data(), fit.column_means.data() + fit.column_means.size()));
        j["xtx_inverse"] = matrix_json(fit.xtx_inverse);
        if (!a.design_csv.empty()) {
            std::ofstream f(a.design_csv);
            if (!f) throw IoError("cannot write '" + a.design_csv + "'");
            write_design_csv(f, raw);
        }
    } else if (a.family == "logistic") {
        if (a.response.empty()) throw UsageError("logistic family needs --response");
        m.input("response", a.response);
        const Eigen::VectorXd y = read_column(a.response, "y");
        check_rows("response", y.size(), n);
        for (Eigen::Index i = 0; i < y.size(); ++i)
            if (y[i] != 0.0 && y[i] != 1.0) throw UsageError("logistic family needs a 0/1 response; row " + std::to_string(i + 2) + " of " + a.response + " is " + format_number(y[i]));
        const PropagatedDesign design = forward_select(raw, a.tol);
        const LogisticFit fit = fit_logistic(design, y, nopt);
        json coefs = json::array();
        for (std::size_t s = 0; s < fit.tags.size(); ++s) {
            const double est = fit.theta_hat[static_cast<Eigen::Index>(s + 1)];
            const double se = fit.std_errors[static_cast<Eigen::Index>(s + 1)];
            coefs.push_back({{"name", column_name(fit.tags[s])},
                             {"order", fit.tags[s].order},
                             {"covariate", fit.tags[s].covariate + 1},
                             {"estimate", est},
                             {"std_error", finite_or_null(se)},
                             {"ci_low", finite_or_null(est - kZ975 * se)},
                             {"ci_high", finite_or_null(est + kZ975 * se)}});
        }
        j["n_selected"] = static_cast<int>(fit.tags.size());
        j["dropped"] = tags_json(dropped_tags(design));
        j["intercept"] = {{"estimate", fit.theta_hat[0]}, {"std_error", finite_or_null(fit.std_errors[0])}};
        j["coefficients"] = coefs;
        j["log_likelihood"] = fit.log_likelihood;
        j["iterations"] = fit.iterations;
        j["converged"] = fit.converged;
    } else if (a.family == "cox") {
        if (a.time.empty()) throw UsageError("cox family needs --time (and --event unless the time file has an event column)");
        m.input("time", a.time);
        if (!a.event.empty()) m.input("event", a.event);
        const SurvivalData surv = read_survival(a.time, a.event.empty() ? std::nullopt : std::optional(a.event));
        check_rows("survival data", surv.time.size(), n);
        const PropagatedDesign design = forward_select(raw, a.tol);
        const CoxFit fit = fit_cox(design, surv, nopt);
        json coefs = json::array();
        for (std::size_t s = 0; s < fit.tags.size(); ++s) {
            const double est = fit.lambda_hat[static_cast<Eigen::Index>(s)];
            const double se = fit.std_errors[static_cast<Eigen::Index>(s)];
            coefs.push_back({{"name", column_name(fit.tags[s])},
                             {"order", fit.tags[s].order},
                             {"covariate", fit.tags[s].covariate + 1},
                             {"estimate", est},
                             {"std_error", finite_or_null(se)},
                             {"ci_low", finite_or_null(est - kZ975 * se)},
                             {"ci_high", finite_or_null(est + kZ975 * se)}});
        }
        j["n_selected"] = static_cast<int>(fit.tags.size());
        j["dropped"] = tags_json(dropped_tags(design));
        j["coefficients"] = coefs;
        j["n_events"] = surv.n_events();
        j["partial_loglik"] = fit.partial_loglik;
        j["iterations"] = fit.iterations;
        j["converged"] = fit.converged;
    } else {
        throw UsageError("--family must be gaussian, logistic or cox");
    }
    j["manifest"] = m.to_json();
    return j;
}

// ---- test ------------------------------------------------------------------

struct TestArgs {
    std::string fit, out, tail = "two-sided";
    int kmax = 5;
    double alpha = 0.05;
    int chi2_max_dim = 30;
};

json read_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open '" + path + "'");
    try {
        return json::parse(f);
    } catch (const json::parse_error& e) {
        throw UsageError(path + ": not valid JSON (" + e.what() + ")");
    }
}

GaussianFit gaussian_fit_from_json(const json& j) {
    GaussianFit fit;
    std::vector<std::string> names;
    for (const auto& c : j.at("coefficients")) {
        fit.tags.push_back(parse_column_name(c.at("name").get<std::string>()));
        names.push_back(c.at("name").get<std::string>());
    }
    fit.d_sel = static_cast<int>(fit.tags.size());
    fit.theta_hat.resize(fit.d_sel);
    for (int s = 0; s < fit.d_sel; ++s) fit.theta_hat[s] = j.at("coefficients")[static_cast<std::size_t>(s)].at("estimate").get<double>();
    fit.sigma2_hat = j.at("sigma2_hat").get<double>();
    fit.rss = j.at("rss").get<double>();
    fit.n = j.at("n").get<int>();
    fit.max_order = j.at("K").get<int>();
    fit.n_covariates = j.at("d").get<int>();
    fit.response_mean = j.at("response_mean").get<double>();
    const auto& means = j.at("column_means");
    fit.column_means.resize(static_cast<Eigen::Index>(means.size()));
    for (std::size_t s = 0; s < means.size(); ++s) fit.column_means[static_cast<Eigen::Index>(s)] = means[s].get<double>();
    const auto& v = j.at("xtx_inverse");
    fit.xtx_inverse.resize(fit.d_sel, fit.d_sel);
    if (static_cast<int>(v.size()) != fit.d_sel) throw UsageError("fit file: xtx_inverse does not match the coefficients");
    for (int a = 0; a < fit.d_sel; ++a)
        for (int b = 0; b < fit.d_sel; ++b) fit.xtx_inverse(a, b) = v[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)].get<double>();
    fit.std_errors = (fit.xtx_inverse.diagonal().array() * fit.sigma2_hat).sqrt().matrix();
    return fit;
}

json cmd_test(const TestArgs& a) {
    Manifest m;
    m.command = "test";
    m.config = {{"kmax", a.kmax}, {"alpha", a.alpha}, {"tail", a.tail}, {"chi2_max_dim", a.chi2_max_dim}};
    m.input("fit", a.fit);
    const json f = read_json_file(a.fit);
    if (f.value("family", "") != "gaussian") throw UsageError("order tests need a gaussian fit; " + a.fit + " has family '" + f.value("family", "?") + "'");
    if (!(a.alpha > 0.0 && a.alpha < 1.0)) throw UsageError("--alpha must lie in (0, 1)");
    const GaussianFit fit = gaussian_fit_from_json(f);
    if (a.kmax < 0 || a.kmax > fit.max_order)
        throw UsageError("--kmax " + std::to_string(a.kmax) + " exceeds the fit's K = " + std::to_string(fit.max_order));

    OrderTestOptions opt;
    opt.alpha = a.alpha;
    opt.chi2_max_dim = a.chi2_max_dim;
    if (a.tail == "two-sided")
        opt.tail = NormalTail::two_sided;
    else if (a.tail == "clamped")
        opt.tail = NormalTail::clamped_upper;
    else
        throw UsageError("--tail must be two-sided or clamped");
    const OrderTestReport rep = order_test(fit, a.kmax, opt);

    json j;
    j["schema"] = "npr.test/1";
    j["kmax"] = a.kmax;
    j["alpha"] = a.alpha;
    json recs = json::array();
    for (std::size_t r = 0; r < rep.records.size(); ++r) {
        const auto& x = rep.records[r];
        recs.push_back({{"order", x.order},
                        {"restriction_dim", x.restriction_dim},
                        {"statistic", finite_or_null(x.statistic)},
                        {"z", finite_or_null(x.z)},
                        {"p_value", x.p_value},
                        {"regime", to_string(x.regime)},
                        {"empty_restriction", x.empty_restriction},
                        {"holm_reject", static_cast<bool>(rep.holm_rejections[r])}});
    }
    j["records"] = recs;
    j["selected_order"] = rep.selected_order;
    j["manifest"] = m.to_json();
    return j;
}

// ---- predict ---------------------------------------------------------------

struct PredictArgs {
    std::string fit, edges, covariates, out;
};

std::string cmd_predict(const PredictArgs& a) {
    Manifest m;
    m.input("fit", a.fit);
    const json f = read_json_file(a.fit);
    const std::string family = f.value("family", "");
    const int k = f.at("K").get<int>();
    const char* header = family == "gaussian"   ? "node,mean"
                         : family == "logistic" ? "node,probability"
                         : family == "cox"      ? "node,relative_risk"
                                                : nullptr;
    if (!header) throw UsageError(a.fit + ": unknown family '" + family + "'");
    if (read_csv(a.covariates).rows.empty()) {
        // nothing to score; the edge list must be empty as well
        if (!read_csv(a.edges).rows.empty()) throw DimensionError("edges given for an empty covariate file");
        return std::string(header) + "\n";
    }
    auto net = load_network(a.edges, a.covariates, m);
    if (net.x.cols() != f.at("d").get<int>())
        throw DimensionError("covariates have " + std::to_string(net.x.cols()) + " columns, the fit expects " +
                             std::to_string(f.at("d").get<int>()));
    const PropagatedDesign design = build_design(net.w, net.x, k);

    std::vector<ColumnTag> tags;
    Eigen::VectorXd coef;
    {
        json names = json::array();
        for (const auto& c : f.at("coefficients")) names.push_back(c.at("name"));
        tags = parse_tags(names);
        coef.resize(static_cast<Eigen::Index>(tags.size()));
        for (std::size_t s = 0; s < tags.size(); ++s) coef[static_cast<Eigen::Index>(s)] = f.at("coefficients")[s].at("estimate").get<double>();
    }
    for (const auto& t : tags)
        if (t.order > design.max_order() || t.covariate >= design.n_covariates())
            throw DimensionError("fit column " + column_name(t) + " is not present in the rebuilt design");

    Eigen::VectorXd pred;
    if (family == "gaussian") {
        GaussianFit fit = gaussian_fit_from_json(f);
        pred = predict_gaussian(fit, design);
    } else if (family == "logistic") {
        LogisticFit fit;
        fit.tags = tags;
        fit.theta_hat.resize(coef.size() + 1);
        fit.theta_hat[0] = f.at("intercept").at("estimate").get<double>();
        fit.theta_hat.tail(coef.size()) = coef;
        pred = predict_proba(fit, design);
    } else {
        CoxFit fit;
        fit.tags = tags;
        fit.lambda_hat = coef;
        pred = predict_relative_risk(fit, design);
    }
    std::ostringstream s;
    s << header << '\n' << std::setprecision(17);
    for (Eigen::Index i = 0; i < pred.size(); ++i) s << i << ',' << pred[i] << '\n';
    return s.str();
}

// ---- simulate / simulate-test ---------------------------------------------

struct SimArgs {
    int case_id = 1, setting = 1, n = 1000, d = 10, k = 8, reps = 100, nulls = 3, kmax = 4;
    double train_frac = 0.8, alpha = 0.05, sigma = 1.0, tol = kDefaultSelectTol;
    std::string competitor, out, csv, tail = "two-sided";
    std::optional<std::uint64_t> seed;
};

json mean_se_json(const MeanSe& m) { return {{"mean", m.mean}, {"se", m.se}}; }

json cmd_simulate(const SimArgs& a) {
    Manifest m;
    m.command = "simulate";
    m.seed = a.seed ? *a.seed : draw_seed();
    ScenarioConfig cfg;
    cfg.case_id = a.case_id;
    cfg.setting = a.setting;
    cfg.n = a.n;
    cfg.d = a.d;
    cfg.k_fit = a.k;
    cfg.reps = a.reps;
    cfg.seed = *m.seed;
    cfg.train_frac = a.train_frac;
    cfg.sigma = a.sigma;
    cfg.tol = a.tol;
    if (!a.competitor.empty()) cfg.competitor = parse_competitor(a.competitor);
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    m.config = {{"case", cfg.case_id}, {"setting", cfg.setting}, {"n", cfg.n},       {"d", cfg.d},
                {"K", cfg.k_fit},      {"reps", cfg.reps},       {"train_frac", cfg.train_frac},
                {"sigma", cfg.sigma},  {"tol", cfg.tol},         {"competitor", to_string(cfg.resolved_competitor())}};
    const PredictionReport rep = run_prediction_study(cfg);

    json j;
    j["schema"] = "npr.prediction_report/1";
    j["case"] = cfg.case_id;
    j["setting"] = cfg.setting;
    j["n"] = cfg.n;
    j["reps"] = cfg.reps;
    j["competitor"] = to_string(cfg.resolved_competitor());
    j["kappa"] = {{"kappa1", mean_se_json(rep.kappa[0])},
                  {"kappa2", mean_se_json(rep.kappa[1])},
                  {"kappa3", mean_se_json(rep.kappa[2])},
                  {"kappa4", mean_se_json(rep.kappa[3])}};
    j["manifest"] = m.to_json();

    if (!a.csv.empty()) {
        std::ostringstream s;
        s << std::setprecision(17) << "case,setting,n,rep,scenario,kappa,rmse_npr,rmse_ref\n";
        for (std::size_t r = 0; r < rep.replicates.size(); ++r)
            for (int k = 0; k < 4; ++k)
                s << cfg.case_id << ',' << cfg.setting << ',' << cfg.n << ',' << r << ',' << (k + 1) << ','
                  << rep.replicates[r].kappa[k] << ',' << rep.replicates[r].rmse_npr[k] << ','
                  << rep.replicates[r].rmse_ref[k] << '\n';
        std::ostream null_out(nullptr);
        emit(s.str(), a.csv, null_out);
    }
    return j;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json cmd_simulate_test(const SimArgs& a) {
    Manifest m;
    m.command = "simulate-test";
    m.seed = a.seed ? *a.seed : draw_seed();
    ScenarioConfig cfg;
    cfg.case_id = a.case_id;
    cfg.n = a.n;
    cfg.d = a.d;
    cfg.k_fit = a.k;
    cfg.reps = a.reps;
    cfg.seed = *m.seed;
    cfg.sigma = a.sigma;
    cfg.tol = a.tol;
    cfg.k_max = a.kmax;
    cfg.alpha = a.alpha;
    if (a.tail == "two-sided")
        cfg.test_options.tail = NormalTail::two_sided;
    else if (a.tail == "clamped")
        cfg.test_options.tail = NormalTail::clamped_upper;
    else
        throw UsageError("--tail must be two-sided or clamped");
    try {
        cfg.validate();
        if (a.nulls < 0 || a.nulls > cfg.k_max + 1) throw std::invalid_argument("--nulls must lie in 0..kmax+1");
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    m.config = {{"case", cfg.case_id}, {"nulls", a.nulls},   {"n", cfg.n},   {"d", cfg.d},         {"K", cfg.k_fit},
                {"kmax", cfg.k_max},   {"alpha", cfg.alpha}, {"reps", cfg.reps}, {"sigma", cfg.sigma}, {"tol", cfg.tol},
                {"tail", a.tail}};
    const TestReport rep = run_test_study(cfg, a.nulls);

    json j;
    j["schema"] = "npr.test_report/1";
    j["case"] = cfg.case_id;
    j["nulls"] = a.nulls;
    j["n"] = cfg.n;
    j["reps"] = cfg.reps;
    j["EP"] = optional_json(rep.ep);
    j["ES"] = optional_json(rep.es);
    j["MP"] = optional_json(rep.mp);
    j["FWER"] = optional_json(rep.fwer);
    j["CP"] = rep.cp;
    j["manifest"] = m.to_json();

    if (!a.csv.empty()) {
        std::ostringstream s;
        s << std::setprecision(17) << "case,nulls,n,rep,order,p_value,reject,holm_reject\n";
        for (std::size_t r = 0; r < rep.replicates.size(); ++r)
            for (std::size_t o = 0; o < rep.replicates[r].p_values.size(); ++o)
                s << cfg.case_id << ',' << a.nulls << ',' << cfg.n << ',' << r << ',' << o << ','
                  << rep.replicates[r].p_values[o] << ',' << rep.replicates[r].unadjusted[o] << ','
                  << rep.replicates[r].holm[o] << '\n';
        std::ostream null_out(nullptr);
        emit(s.str(), a.csv, null_out);
    }
    return j;
}

// ---- eval-auc --------------------------------------------------------------

struct AucArgs {
    std::string fit, edges, covariates, response, out;
    int k = 2, splits = 100;
    double train_frac = 0.8, tol = kDefaultSelectTol;
    bool k_given = false;
    std::optional<std::uint64_t> seed;
};

json auc_json(const std::string& name, const AucSummary& s) {
    return {{"model", name},         {"K", s.k},           {"mean_auc", s.mean},   {"se", s.se},
            {"ci_low", s.ci_low},    {"ci_high", s.ci_high}, {"splits_used", s.aucs.size()},
            {"failed_splits", s.failed_splits}};
}

json cmd_eval_auc(AucArgs a) {
    Manifest m;
    m.command = "eval-auc";
    m.seed = a.seed ? *a.seed : draw_seed();
    if (!a.fit.empty()) {
        m.input("fit", a.fit);
        const json f = read_json_file(a.fit);
        if (f.value("family", "") != "logistic") throw UsageError("eval-auc needs a logistic fit file");
        if (!a.k_given) a.k = f.at("K").get<int>();
        a.tol = f.value("tol", a.tol);
    }
    if (a.splits < 1) throw UsageError("--splits must be at least 1");
    if (!(a.train_frac > 0.0 && a.train_frac < 1.0)) throw UsageError("--train-frac must lie in (0, 1)");
    if (a.k < 0) throw UsageError("--K must be non-negative");
    m.config = {{"K", a.k}, {"splits", a.splits}, {"train_frac", a.train_frac}, {"tol", a.tol}};
    auto net = load_network(a.edges, a.covariates, m);
    m.input("response", a.response);
    const Eigen::VectorXd y = read_column(a.response, "y");
    check_rows("response", y.size(), net.x.rows());
    for (Eigen::Index i = 0; i < y.size(); ++i)
        if (y[i] != 0.0 && y[i] != 1.0) throw UsageError("eval-auc needs a 0/1 response");

    const AucSummary nlr = run_auc_study(net.w, net.x, y, a.k, a.splits, a.train_frac, *m.seed, a.tol);
    const AucSummary lr = run_auc_study(net.w, net.x, y, 0, a.splits, a.train_frac, *m.seed, a.tol);
    json j;
    j["schema"] = "npr.auc/1";
    j["splits"] = a.splits;
    j["train_frac"] = a.train_frac;
    j["models"] = json::array({auc_json("NLR", nlr), auc_json("LR", lr)});
    j["manifest"] = m.to_json();
    return j;
}

// ---- graph -----------------------------------------------------------------

struct GraphArgs {
    std::string edges, covariates, out;
    int n = 0;
};

json cmd_graph(const GraphArgs& a) {
    Manifest m;
    m.command = "graph";
    m.input("edges", a.edges);
    int n = a.n;
    if (!a.covariates.empty()) {
        m.input("covariates", a.covariates);
        n = static_cast<int>(read_covariates(a.covariates).rows());
    } else if (n <= 0) {
        n = infer_node_count(a.edges);
    }
    const DirectedGraph g = read_edges(a.edges, n);
    json j;
    j["schema"] = "npr.graph/1";
    j["n_nodes"] = g.n_nodes();
    j["n_edges"] = g.n_edges();
    j["density"] = g.density();
    j["manifest"] = m.to_json();
    return j;
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 failed");
    return hex(md, len);
}

std::string sha256_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "'");
    std::ostringstream s;
    s << f.rdbuf();
    return sha256_hex(s.str());
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Network propagation regression: fit, test, predict and simulate.", "npr"};
    app.require_subcommand(1);
    app.set_version_flag("--version", NPR_VERSION);

    std::uint64_t seed_value = 0;
    const auto add_seed = [&](CLI::App* c) { return c->add_option("--seed", seed_value, "Random seed (drawn and recorded when absent)"); };

    FitArgs fit;
    auto* c_fit = app.add_subcommand("fit", "Fit a network propagation model");
    c_fit->add_option("--family", fit.family, "gaussian | logistic | cox")->check(CLI::IsMember({"gaussian", "logistic", "cox"}));
    c_fit->add_option("--edges", fit.edges, "Edge list CSV (src,dst)")->required();
    c_fit->add_option("--covariates", fit.covariates, "Covariate CSV (x1..xd)")->required();
    c_fit->add_option("--response", fit.response, "Response CSV (y)");
    c_fit->add_option("--time", fit.time, "Survival times CSV (time[,event])");
    c_fit->add_option("--event", fit.event, "Event indicators CSV (event)");
    c_fit->add_option("--K", fit.k, "Propagation order");
    c_fit->add_option("--tol", fit.tol, "Forward-selection relative tolerance");
    c_fit->add_option("--max-iter", fit.max_iter, "Newton iteration cap");
    c_fit->add_option("--design-csv", fit.design_csv, "Also write the propagated design (gaussian)");
    c_fit->add_option("--out", fit.out, "Output fit.json (stdout when absent)");
    auto* o_fit_seed = add_seed(c_fit);

    TestArgs test;
    auto* c_test = app.add_subcommand("test", "Sequential Wald order tests with Holm control");
    c_test->add_option("--fit", test.fit, "Gaussian fit.json")->required();
    c_test->add_option("--kmax", test.kmax, "Largest tested order");
    c_test->add_option("--alpha", test.alpha, "Family-wise level");
    c_test->add_option("--tail", test.tail, "Normal-regime p-value: two-sided | clamped");
    c_test->add_option("--chi2-max-dim", test.chi2_max_dim, "Restriction size from which the normal approximation is used");
    c_test->add_option("--out", test.out, "Output test.json");

    PredictArgs pred;
    auto* c_pred = app.add_subcommand("predict", "Predict from a fit on new data");
    c_pred->add_option("--fit", pred.fit, "fit.json")->required();
    c_pred->add_option("--edges", pred.edges, "Edge list CSV")->required();
    c_pred->add_option("--covariates", pred.covariates, "Covariate CSV")->required();
    c_pred->add_option("--out", pred.out, "Output predictions CSV");

    SimArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "Prediction study (kappa ratios)");
    c_sim->add_option("--case", sim.case_id, "Network case 1..3");
    c_sim->add_option("--setting", sim.setting, "Response setting 1..4");
    c_sim->add_option("--n", sim.n, "Network size");
    c_sim->add_option("--reps", sim.reps, "Replicates");
    c_sim->add_option("--K", sim.k, "Propagation order of the fitted model");
    c_sim->add_option("--train-frac", sim.train_frac, "Training fraction");
    c_sim->add_option("--tol", sim.tol, "Forward-selection tolerance");
    c_sim->add_option("--competitor", sim.competitor, "lim | lim2 | npr (default by setting)");
    c_sim->add_option("--out", sim.out, "Output report.json");
    c_sim->add_option("--csv", sim.csv, "Long-format per-replicate CSV");
    auto* o_sim_seed = add_seed(c_sim);

    SimArgs simt;
    auto* c_simt = app.add_subcommand("simulate-test", "Testing study (EP, ES, MP, FWER, CP)");
    c_simt->add_option("--case", simt.case_id, "Network case 1..3");
    c_simt->add_option("--nulls", simt.nulls, "Number of true null hypotheses");
    c_simt->add_option("--n", simt.n, "Network size");
    c_simt->add_option("--reps", simt.reps, "Replicates")->default_val(1000);
    c_simt->add_option("--K", simt.k, "Propagation order of the fitted model");
    c_simt->add_option("--kmax", simt.kmax, "Largest tested order");
    c_simt->add_option("--alpha", simt.alpha, "Significance level");
    c_simt->add_option("--tol", simt.tol, "Forward-selection tolerance");
    c_simt->add_option("--tail", simt.tail, "Normal-regime p-value: two-sided | clamped");
    c_simt->add_option("--out", simt.out, "Output report.json");
    c_simt->add_option("--csv", simt.csv, "Long-format per-replicate CSV");
    auto* o_simt_seed = add_seed(c_simt);

    AucArgs aucs;
    auto* c_auc = app.add_subcommand("eval-auc", "Repeated 80/20 AUC evaluation of network logistic regression");
    c_auc->add_option("--fit", aucs.fit, "Logistic fit.json supplying K and tol");
    c_auc->add_option("--edges", aucs.edges, "Edge list CSV")->required();
    c_auc->add_option("--covariates", aucs.covariates, "Covariate CSV")->required();
    c_auc->add_option("--response", aucs.response, "Binary response CSV (y)")->required();
    auto* o_auc_k = c_auc->add_option("--K", aucs.k, "Propagation order (default 2)");
    c_auc->add_option("--splits", aucs.splits, "Number of random splits");
    c_auc->add_option("--train-frac", aucs.train_frac, "Training fraction");
    c_auc->add_option("--out", aucs.out, "Output auc.json");
    auto* o_auc_seed = add_seed(c_auc);

    GraphArgs gr;
    auto* c_graph = app.add_subcommand("graph", "Edge-list summary");
    c_graph->add_option("--edges", gr.edges, "Edge list CSV")->required();
    c_graph->add_option("--covariates", gr.covariates, "Covariate CSV fixing the node count");
    c_graph->add_option("--n", gr.n, "Node count (default: largest index + 1)");
    c_graph->add_option("--out", gr.out, "Output JSON");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << NPR_VERSION << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "npr: " << e.what() << '\n';
        if (app.get_subcommands().empty()) err << app.help();
        return kExitUsage;
    }

    try {
        if (c_fit->parsed()) {
            if (o_fit_seed->count()) fit.seed = seed_value;
            emit_json(cmd_fit(fit), fit.out, out);
        } else if (c_test->parsed()) {
            emit_json(cmd_test(test), test.out, out);
        } else if (c_pred->parsed()) {
            emit(cmd_predict(pred), pred.out, out);
        } else if (c_sim->parsed()) {
            if (o_sim_seed->count()) sim.seed = seed_value;
            emit_json(cmd_simulate(sim), sim.out, out);
        } else if (c_simt->parsed()) {
            if (o_simt_seed->count()) simt.seed = seed_value;
            emit_json(cmd_simulate_test(simt), simt.out, out);
        } else if (c_auc->parsed()) {
            if (o_auc_seed->count()) aucs.seed = seed_value;
            aucs.k_given = o_auc_k->count() > 0;
            emit_json(cmd_eval_auc(aucs), aucs.out, out);
        } else if (c_graph->parsed()) {
            emit_json(cmd_graph(gr), gr.out, out);
        }
    } catch (const ParseError& e) {
        err << "npr: parse error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const UsageError& e) {
        err << "npr: " << e.what() << '\n';
        return kExitUsage;
    } catch (const IoError& e) {
        err << "npr: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ModelError& e) {
        err << "npr: model error: " << e.what() << '\n';
        return kExitModel;
    } catch (const nlohmann::json::exception& e) {
        err << "npr: malformed fit file: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        err << "npr: invalid input: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "npr: " << e.what() << '\n';
        return kExitModel;
    }
    return kExitOk;
}

}  // namespace npr::cli
