#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "npr/cox.hpp"
#include "npr/design.hpp"
#include "npr/graph.hpp"

namespace npr {

// Raw CSV contents: header names and string cells. Blank lines are skipped;
// every data row must have as many fields as the header.
struct CsvTable {
    std::string path;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<long> line;  // 1-based file line of each row

    int column(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(const std::string& path);
CsvTable parse_csv(std::istream& in, const std::string& path);

// Edge list with header `src,dst`. Indices must lie in [0, n_nodes); self-loops
// and duplicate edges are reported with their location.
DirectedGraph read_edges(const std::string& path, int n_nodes);
// Largest node index + 1, for summaries without a covariate file.
int infer_node_count(const std::string& edges_path);

// Covariates with header x1..xd in order.
Eigen::MatrixXd read_covariates(const std::string& path);

// Single named numeric column (`y`, `time`, `event`).
Eigen::VectorXd read_column(const std::string& path, const std::string& name);

// Survival data from a `time,event` file, or from separate `time` and `event` files.
SurvivalData read_survival(const std::string& time_path, const std::optional<std::string>& event_path);

// Design export with provenance-named columns k{order}_x{j}; all columns.
void write_design_csv(std::ostream& out, const PropagatedDesign& design);

}  // namespace npr
