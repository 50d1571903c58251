#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

#include "npr/graph.hpp"

namespace npr {

// Origin of a design column: covariate `covariate` (0-based) diffused `order` steps.
struct ColumnTag {
    int order;
    int covariate;

    friend bool operator==(const ColumnTag&, const ColumnTag&) = default;
};

// "k{order}_x{covariate+1}", the column naming used in exported files.
std::string column_name(const ColumnTag& tag);
ColumnTag parse_column_name(const std::string& name);

// Augmented design (X, WX, ..., W^K X). Column c lives in block c / d at
// covariate c % d. `selected` lists admitted columns in scan order and is
// empty until forward_select runs.
struct PropagatedDesign {
    std::vector<Eigen::MatrixXd> blocks;
    std::vector<ColumnTag> provenance;
    std::vector<int> selected;
    bool centered = false;
    // Means removed by center(), one per column; zero when uncentered.
    Eigen::RowVectorXd column_means;

    int n_rows() const { return blocks.empty() ? 0 : static_cast<int>(blocks.front().rows()); }
    int n_covariates() const { return blocks.empty() ? 0 : static_cast<int>(blocks.front().cols()); }
    int max_order() const { return static_cast<int>(blocks.size()) - 1; }
    int n_columns() const { return static_cast<int>(provenance.size()); }

    auto column(int c) const { return blocks[c / n_covariates()].col(c % n_covariates()); }

    Eigen::MatrixXd full_matrix() const;
    Eigen::MatrixXd selected_matrix() const;
    std::vector<ColumnTag> selected_tags() const;
};

PropagatedDesign build_design(const RowStochasticOperator& w, const Eigen::MatrixXd& x, int k_max);

// Applies I - 11^T/N to every column.
PropagatedDesign center(PropagatedDesign design);
Eigen::VectorXd center_response(const Eigen::VectorXd& y);

inline constexpr double kDefaultSelectTol = 1e-8;

// Gram-Schmidt screening in block order: a column is admitted when its residual
// after projection onto the admitted span exceeds tol times its own norm.
// Throws DegenerateDesign when nothing is admitted.
PropagatedDesign forward_select(PropagatedDesign design, double tol = kDefaultSelectTol);

// Rows `rows` of an uncentered design; selection is cleared.
PropagatedDesign row_subset(const PropagatedDesign& design, std::span<const int> rows);

// Columns of `design` matching `tags`, in the order of `tags`. Throws
// DimensionError if a tag is not present.
Eigen::MatrixXd columns_by_tag(const PropagatedDesign& design, std::span<const ColumnTag> tags);

}  // namespace npr
