#include "npr/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "npr/error.hpp"

namespace npr {

namespace {

std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && (s[a] == ' ' || s[a] == '\t' || s[a] == '\r')) ++a;
    while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
    return std::string(s.substr(a, b - a));
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

double parse_double(const CsvTable& t, std::size_t row, int col) {
    const std::string& s = t.rows[row][static_cast<std::size_t>(col)];
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
        throw ParseError(t.path, t.line[row], col + 1, "expected a finite number, got '" + s + "'");
    return v;
}

long parse_int(const CsvTable& t, std::size_t row, int col) {
    const std::string& s = t.rows[row][static_cast<std::size_t>(col)];
    long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
        throw ParseError(t.path, t.line[row], col + 1, "expected an integer, got '" + s + "'");
    return v;
}

int require_column(const CsvTable& t, const std::string& name) {
    const int c = t.column(name);
    if (c < 0) throw ParseError(t.path, 1, 1, "missing column '" + name + "'");
    return c;
}

}  // namespace

int CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

CsvTable parse_csv(std::istream& in, const std::string& path) {
    CsvTable t;
    t.path = path;
    std::string line;
    long lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto fields = split_fields(line);
        if (!have_header) {
            t.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != t.header.size())
            throw ParseError(path, lineno, static_cast<long>(std::min(fields.size(), t.header.size()) + 1),
                             "expected " + std::to_string(t.header.size()) + " fields, found " +
                                 std::to_string(fields.size()));
        t.rows.push_back(std::move(fields));
        t.line.push_back(lineno);
    }
    if (!have_header) throw ParseError(path, 1, 1, "empty file: a header row is required");
    return t;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    return parse_csv(in, path);
}

DirectedGraph read_edges(const std::string& path, int n_nodes) {
    const CsvTable t = read_csv(path);
    const int cs = require_column(t, "src");
    const int cd = require_column(t, "dst");
    std::vector<Edge> edges;
    edges.reserve(t.rows.size());
    std::set<std::pair<long, long>> seen;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const long s = parse_int(t, r, cs);
        const long d = parse_int(t, r, cd);
        if (s < 0 || s >= n_nodes) throw ParseError(path, t.line[r], cs + 1, "node index out of range [0, " + std::to_string(n_nodes) + ")");
        if (d < 0 || d >= n_nodes) throw ParseError(path, t.line[r], cd + 1, "node index out of range [0, " + std::to_string(n_nodes) + ")");
        if (s == d) throw ParseError(path, t.line[r], cs + 1, "self-loop");
        if (!seen.emplace(s, d).second) throw ParseError(path, t.line[r], cs + 1, "duplicate edge");
        edges.push_back({static_cast<int>(s), static_cast<int>(d)});
    }
    return DirectedGraph(n_nodes, std::move(edges));
}

int infer_node_count(const std::string& edges_path) {
    const CsvTable t = read_csv(edges_path);
    const int cs = require_column(t, "src");
    const int cd = require_column(t, "dst");
    long hi = -1;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const long s = parse_int(t, r, cs);
        const long d = parse_int(t, r, cd);
        if (s < 0) throw ParseError(edges_path, t.line[r], cs + 1, "negative node index");
        if (d < 0) throw ParseError(edges_path, t.line[r], cd + 1, "negative node index");
        hi = std::max({hi, s, d});
    }
    return static_cast<int>(hi + 1);
}

Eigen::MatrixXd read_covariates(const std::string& path) {
    const CsvTable t = read_csv(path);
    for (std::size_t c = 0; c < t.header.size(); ++c)
        if (t.header[c] != "x" + std::to_string(c + 1))
            throw ParseError(path, 1, static_cast<long>(c + 1), "expected header x" + std::to_string(c + 1) + ", got '" + t.header[c] + "'");
    if (t.header.empty()) throw ParseError(path, 1, 1, "no covariate columns");
    Eigen::MatrixXd x(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(t.header.size()));
    for (std::size_t r = 0; r < t.rows.size(); ++r)
        for (std::size_t c = 0; c < t.header.size(); ++c)
            x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = parse_double(t, r, static_cast<int>(c));
    return x;
}

Eigen::VectorXd read_column(const std::string& path, const std::string& name) {
    const CsvTable t = read_csv(path);
    const int c = require_column(t, name);
    Eigen::VectorXd v(static_cast<Eigen::Index>(t.rows.size()));
    for (std::size_t r = 0; r < t.rows.size(); ++r) v[static_cast<Eigen::Index>(r)] = parse_double(t, r, c);
    return v;
}

SurvivalData read_survival(const std::string& time_path, const std::optional<std::string>& event_path) {
    SurvivalData s;
    const CsvTable t = read_csv(time_path);
    const int ct = require_column(t, "time");
    s.time.resize(static_cast<Eigen::Index>(t.rows.size()));
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const double v = parse_double(t, r, ct);
        if (!(v > 0.0)) throw ParseError(time_path, t.line[r], ct + 1, "survival times must be positive");
        s.time[static_cast<Eigen::Index>(r)] = v;
    }
    const CsvTable e = event_path ? read_csv(*event_path) : t;
    const int ce = require_column(e, "event");
    if (e.rows.size() != t.rows.size())
        throw DimensionError("event file has " + std::to_string(e.rows.size()) + " rows, time file has " +
                             std::to_string(t.rows.size()));
    for (std::size_t r = 0; r < e.rows.size(); ++r) {
        const long v = parse_int(e, r, ce);
        if (v != 0 && v != 1) throw ParseError(e.path, e.line[r], ce + 1, "event indicator must be 0 or 1");
        s.event.push_back(static_cast<int>(v));
    }
    return s;
}

void write_design_csv(std::ostream& out, const PropagatedDesign& design) {
    for (int c = 0; c < design.n_columns(); ++c) out << (c ? "," : "") << column_name(design.provenance[c]);
    out << '\n';
    std::ostringstream cell;
    cell.precision(17);
    for (int i = 0; i < design.n_rows(); ++i) {
        for (int c = 0; c < design.n_columns(); ++c) {
            cell.str("");
            cell << design.column(c)[i];
            out << (c ? "," : "") << cell.str();
        }
        out << '\n';
    }
}

}  // namespace npr
