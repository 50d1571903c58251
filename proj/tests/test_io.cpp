#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "npr/error.hpp"
#include "npr/io.hpp"

using namespace npr;

namespace {

std::string write_temp(const std::string& name, const std::string& body) {
    const auto path = std::filesystem::temp_directory_path() / ("npr_io_" + name);
    std::ofstream(path) << body;
    return path.string();
}

template <typename F>
ParseError expect_parse_error(F&& f) {
    try {
        f();
    } catch (const ParseError& e) {
        return e;
    }
    FAIL("expected a ParseError");
    throw std::logic_error("unreachable");
}

}  // namespace

TEST_CASE("CSV parsing skips blank lines and trims cells") {
    std::istringstream in("a, b\n\n1 ,2\r\n3,4\n");
    const auto t = parse_csv(in, "mem");
    CHECK(t.header == std::vector<std::string>{"a", "b"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][0] == "1");
    CHECK(t.line == std::vector<long>{3, 4});
    CHECK(t.column("b") == 1);
    CHECK(t.column("c") == -1);
}

TEST_CASE("CSV field-count errors carry the location") {
    std::istringstream in("a,b\n1,2\n3\n");
    const auto e = expect_parse_error([&] { parse_csv(in, "mem.csv"); });
    CHECK(e.row() == 3);
    CHECK(e.column() == 2);
    CHECK(std::string(e.what()).find("mem.csv") != std::string::npos);
    std::istringstream empty("");
    CHECK_THROWS_AS(parse_csv(empty, "e.csv"), ParseError);
}

TEST_CASE("edge list errors") {
    CHECK(read_edges(write_temp("ok.csv", "src,dst\n0,1\n2,0\n"), 3).n_edges() == 2);
    auto e = expect_parse_error([] { read_edges(write_temp("range.csv", "src,dst\n0,1\n1,7\n"), 3); });
    CHECK(e.row() == 3);
    CHECK(e.column() == 2);
    e = expect_parse_error([] { read_edges(write_temp("loop.csv", "src,dst\n1,1\n"), 3); });
    CHECK(e.row() == 2);
    e = expect_parse_error([] { read_edges(write_temp("dup.csv", "src,dst\n0,1\n\n0,1\n"), 3); });
    CHECK(e.row() == 4);
    e = expect_parse_error([] { read_edges(write_temp("num.csv", "src,dst\n0,x\n"), 3); });
    CHECK(e.column() == 2);
    e = expect_parse_error([] { read_edges(write_temp("hdr.csv", "from,to\n0,1\n"), 3); });
    CHECK(e.row() == 1);
    CHECK(infer_node_count(write_temp("inf.csv", "src,dst\n0,4\n2,1\n")) == 5);
    CHECK_THROWS_AS(read_edges("/nonexistent/edges.csv", 3), IoError);
}

TEST_CASE("covariates and columns") {
    const auto x = read_covariates(write_temp("x.csv", "x1,x2\n1.5,-2\n3e-1,4\n"));
    CHECK(x.rows() == 2);
    CHECK(x(1, 0) == 0.3);
    auto e = expect_parse_error([] { read_covariates(write_temp("xh.csv", "x1,x3\n1,2\n")); });
    CHECK(e.column() == 2);
    e = expect_parse_error([] { read_covariates(write_temp("xn.csv", "x1\n1\nnan\n")); });
    CHECK(e.row() == 3);
    e = expect_parse_error([] { read_covariates(write_temp("xv.csv", "x1\n1\n2..0\n")); });
    CHECK(e.row() == 3);
    const auto y = read_column(write_temp("y.csv", "id,y\n0,1.25\n1,2\n"), "y");
    CHECK(y[0] == 1.25);
    CHECK_THROWS_AS(read_column(write_temp("y2.csv", "z\n1\n"), "y"), ParseError);
}

TEST_CASE("survival files") {
    const auto s = read_survival(write_temp("s.csv", "time,event\n1.5,1\n2,0\n"), std::nullopt);
    CHECK(s.size() == 2);
    CHECK(s.event == std::vector<int>{1, 0});
    const auto split = read_survival(write_temp("t.csv", "time\n1\n2\n"), write_temp("e.csv", "event\n0\n1\n"));
    CHECK(split.event == std::vector<int>{0, 1});
    auto e = expect_parse_error([] { read_survival(write_temp("sn.csv", "time,event\n-1,1\n"), std::nullopt); });
    CHECK(e.row() == 2);
    e = expect_parse_error([] { read_survival(write_temp("se.csv", "time,event\n1,2\n"), std::nullopt); });
    CHECK(e.column() == 2);
    CHECK_THROWS_AS(read_survival(write_temp("t3.csv", "time\n1\n2\n"), write_temp("e3.csv", "event\n1\n")),
                    DimensionError);
}

TEST_CASE("design export uses provenance names") {
    const auto op = row_normalize(DirectedGraph(2, {{0, 1}, {1, 0}}));
    Eigen::MatrixXd x(2, 1);
    x << 0.1, 2.0;
    std::ostringstream out;
    write_design_csv(out, build_design(op, x, 1));
    CHECK(out.str() == "k0_x1,k1_x1\n0.10000000000000001,2\n2,0.10000000000000001\n");
}
