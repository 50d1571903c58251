#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "npr/gaussian.hpp"
#include "npr/io.hpp"
#include "support.hpp"

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

const std::string kToy = std::string(NPR_SOURCE_DIR) + "/data/toy/";

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result npr_run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = npr::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string temp_path(const std::string& name) { return (fs::temp_directory_path() / ("npr_cli_" + name)).string(); }

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

json toy_fit(int k) {
    const auto r = npr_run({"fit", "--family", "gaussian", "--edges", kToy + "edges.csv", "--covariates",
                            kToy + "covariates.csv", "--response", kToy + "y.csv", "--K", std::to_string(k)});
    REQUIRE(r.code == 0);
    return json::parse(r.out);
}

// Numeric comparison of two JSON trees, ignoring the manifest.
void check_close(const json& a, const json& b, const std::string& where = "") {
    REQUIRE_MESSAGE(a.type() == b.type(), where);
    if (a.is_number_float() || b.is_number_float()) {
        const double x = a.get<double>(), y = b.get<double>();
        CHECK_MESSAGE(std::abs(x - y) <= 1e-10 * std::max(1.0, std::abs(y)), where);
    } else if (a.is_object()) {
        REQUIRE_MESSAGE(a.size() == b.size(), where);
        for (auto it = b.begin(); it != b.end(); ++it) {
            if (it.key() == "manifest") continue;
            REQUIRE_MESSAGE(a.contains(it.key()), (where + "/" + it.key()));
            check_close(a.at(it.key()), it.value(), where + "/" + it.key());
        }
    } else if (a.is_array()) {
        REQUIRE_MESSAGE(a.size() == b.size(), where);
        for (std::size_t i = 0; i < a.size(); ++i) check_close(a[i], b[i], where + "/" + std::to_string(i));
    } else {
        CHECK_MESSAGE(a == b, where);
    }
}

}  // namespace

TEST_CASE("exit codes") {
    CHECK(npr_run({"--help"}).code == 0);
    CHECK(npr_run({"--version"}).out == std::string(NPR_VERSION) + "\n");
    CHECK(npr_run({}).code == 2);
    CHECK(npr_run({"frobnicate"}).code == 2);
    CHECK(npr_run({"fit", "--edges", "x.csv"}).code == 2);

    const auto missing = npr_run({"fit", "--family", "gaussian", "--edges", "/nonexistent/e.csv", "--covariates",
                                  kToy + "covariates.csv", "--response", kToy + "y.csv"});
    CHECK(missing.code == 2);
    CHECK(missing.err.find("/nonexistent/e.csv") != std::string::npos);

    // non-binary response with the logistic family
    CHECK(npr_run({"fit", "--family", "logistic", "--edges", kToy + "edges.csv", "--covariates",
                   kToy + "covariates.csv", "--response", kToy + "y.csv"})
              .code == 2);
    // a row-count mismatch between files
    const auto short_y = temp_path("short_y.csv");
    std::ofstream(short_y) << "y\n1\n2\n";
    CHECK(npr_run({"fit", "--family", "gaussian", "--edges", kToy + "edges.csv", "--covariates",
                   kToy + "covariates.csv", "--response", short_y})
              .code == 2);
}

TEST_CASE("parse errors report file, row and column") {
    const auto bad = temp_path("bad_edges.csv");
    std::ofstream(bad) << "src,dst\n0,1\n1,oops\n";
    const auto r = npr_run({"graph", "--edges", bad});
    CHECK(r.code == 2);
    CHECK(r.err.find("bad_edges.csv:3:2") != std::string::npos);
}

TEST_CASE("toy gaussian fit matches the golden file and an OLS oracle") {
    const json fit = toy_fit(2);
    const json golden = json::parse(slurp(std::string(NPR_SOURCE_DIR) + "/tests/golden/fit.json"));
    check_close(fit, golden);

    // oracle: dense W, explicit intercept, normal equations
    const auto x = npr::read_covariates(kToy + "covariates.csv");
    const auto y = npr::read_column(kToy + "y.csv", "y");
    const auto g = npr::read_edges(kToy + "edges.csv", static_cast<int>(x.rows()));
    const Eigen::MatrixXd w = npr::testing::dense_w(g);
    Eigen::MatrixXd z(x.rows(), 1 + 3 * x.cols());
    z.col(0).setOnes();
    z.middleCols(1, 3) = x;
    z.middleCols(4, 3) = w * x;
    z.middleCols(7, 3) = w * w * x;
    const Eigen::VectorXd beta = (z.transpose() * z).ldlt().solve(z.transpose() * y);
    const double rss = (y - z * beta).squaredNorm();
    REQUIRE(fit["coefficients"].size() == 9);
    for (int c = 0; c < 9; ++c) CHECK(fit["coefficients"][c]["estimate"].get<double>() == doctest::Approx(beta[c + 1]).epsilon(1e-9));
    CHECK(fit["rss"].get<double>() == doctest::Approx(rss).epsilon(1e-9));
    CHECK(fit["sigma2_hat"].get<double>() == doctest::Approx(rss / (200 - 9)).epsilon(1e-9));
    CHECK(fit["manifest"]["inputs"]["edges"]["sha256"] == npr::cli::sha256_file(kToy + "edges.csv"));
}

TEST_CASE("K = 0 is classical regression") {
    const json fit = toy_fit(0);
    CHECK(fit["coefficients"].size() == 3);
    const auto x = npr::read_covariates(kToy + "covariates.csv");
    const auto y = npr::read_column(kToy + "y.csv", "y");
    Eigen::MatrixXd z(x.rows(), 4);
    z.col(0).setOnes();
    z.rightCols(3) = x;
    const Eigen::VectorXd beta = z.colPivHouseholderQr().solve(y);
    for (int c = 0; c < 3; ++c) CHECK(fit["coefficients"][c]["estimate"].get<double>() == doctest::Approx(beta[c + 1]).epsilon(1e-9));
}

TEST_CASE("order test on the toy fit") {
    const auto fit_path = temp_path("fit.json");
    std::ofstream(fit_path) << toy_fit(2).dump(2);
    const auto r = npr_run({"test", "--fit", fit_path, "--kmax", "2"});
    REQUIRE(r.code == 0);
    const json t = json::parse(r.out);
    CHECK(t["selected_order"] == 1);
    CHECK(t["records"].size() == 3);
    CHECK(npr_run({"test", "--fit", fit_path, "--kmax", "3"}).code == 2);
    CHECK(npr_run({"test", "--fit", fit_path, "--alpha", "1.5"}).code == 2);
    CHECK(npr_run({"test", "--fit", fit_path, "--kmax", "2", "--tail", "sideways"}).code == 2);

    const auto lfit = temp_path("lfit.json");
    REQUIRE(npr_run({"fit", "--family", "logistic", "--edges", kToy + "edges.csv", "--covariates", kToy + "covariates.csv",
                     "--response", kToy + "y_binary.csv", "--K", "1", "--out", lfit})
                .code == 0);
    CHECK(npr_run({"test", "--fit", lfit, "--kmax", "1"}).code == 2);
}

TEST_CASE("predict reproduces in-sample fitted values") {
    const auto fit_path = temp_path("fit2.json");
    std::ofstream(fit_path) << toy_fit(2).dump(2);
    const auto r = npr_run({"predict", "--fit", fit_path, "--edges", kToy + "edges.csv", "--covariates", kToy + "covariates.csv"});
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    const auto table = npr::parse_csv(in, "pred");
    CHECK(table.header == std::vector<std::string>{"node", "mean"});
    REQUIRE(table.rows.size() == 200);

    const auto x = npr::read_covariates(kToy + "covariates.csv");
    const auto y = npr::read_column(kToy + "y.csv", "y");
    const auto op = npr::row_normalize(npr::read_edges(kToy + "edges.csv", 200));
    const auto fit = npr::fit_ols(npr::forward_select(npr::center(npr::build_design(op, x, 2))), y);
    for (int i = 0; i < 200; ++i) CHECK(std::abs(std::stod(table.rows[i][1]) - fit.fitted[i]) < 1e-12);
}

TEST_CASE("predict on an empty node set writes only the header") {
    const auto fit_path = temp_path("fit3.json");
    std::ofstream(fit_path) << toy_fit(1).dump(2);
    const auto ex = temp_path("empty_x.csv"), ee = temp_path("empty_e.csv");
    std::ofstream(ex) << "x1,x2,x3\n";
    std::ofstream(ee) << "src,dst\n";
    const auto r = npr_run({"predict", "--fit", fit_path, "--edges", ee, "--covariates", ex});
    CHECK(r.code == 0);
    CHECK(r.out == "node,mean\n");
}

TEST_CASE("cox predict emits relative risks") {
    const auto cfit = temp_path("cfit.json");
    REQUIRE(npr_run({"fit", "--family", "cox", "--edges", kToy + "edges.csv", "--covariates", kToy + "covariates.csv",
                     "--time", kToy + "survival.csv", "--K", "1", "--out", cfit})
                .code == 0);
    const json f = json::parse(slurp(cfit));
    CHECK(f["converged"] == true);
    const auto r = npr_run({"predict", "--fit", cfit, "--edges", kToy + "edges.csv", "--covariates", kToy + "covariates.csv"});
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    const auto table = npr::parse_csv(in, "pred");
    CHECK(table.header[1] == "relative_risk");
    const auto x = npr::read_covariates(kToy + "covariates.csv");
    const auto op = npr::row_normalize(npr::read_edges(kToy + "edges.csv", 200));
    const auto design = npr::build_design(op, x, 1);
    for (int i = 0; i < 200; i += 17) {
        double eta = 0.0;
        for (const auto& c : f["coefficients"]) {
            const auto tag = npr::parse_column_name(c["name"].get<std::string>());
            eta += c["estimate"].get<double>() * design.blocks[tag.order](i, tag.covariate);
        }
        CHECK(std::stod(table.rows[i][1]) == doctest::Approx(std::exp(eta)).epsilon(1e-12));
    }
}

TEST_CASE("simulate is deterministic apart from the wall clock") {
    const std::vector<std::string> args{"simulate", "--case", "1", "--setting", "3", "--n", "150", "--reps", "3", "--seed", "42"};
    auto a = json::parse(npr_run(args).out);
    auto b = json::parse(npr_run(args).out);
    CHECK(a["manifest"]["seed"] == 42);
    a["manifest"].erase("wall_clock");
    b["manifest"].erase("wall_clock");
    CHECK(a.dump() == b.dump());

    // a missing seed is drawn and recorded
    const auto c = json::parse(npr_run({"simulate", "--n", "150", "--reps", "2", "--setting", "3"}).out);
    CHECK(c["manifest"]["seed"].is_number_unsigned());
}

TEST_CASE("graph summary and digests") {
    const auto r = npr_run({"graph", "--edges", kToy + "edges.csv", "--covariates", kToy + "covariates.csv"});
    REQUIRE(r.code == 0);
    const json g = json::parse(r.out);
    CHECK(g["n_nodes"] == 200);
    CHECK(g["n_edges"] == 1214);
    CHECK(g["density"].get<double>() == doctest::Approx(1214.0 / (200.0 * 199.0)));
    CHECK(npr::cli::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
