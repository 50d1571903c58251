#include "npr/design.hpp"

#include <charconv>

#include "npr/error.hpp"

namespace npr {

std::string column_name(const ColumnTag& tag) {
    return "k" + std::to_string(tag.order) + "_x" + std::to_string(tag.covariate + 1);
}

ColumnTag parse_column_name(const std::string& name) {
    ColumnTag tag{};
    const auto sep = name.find("_x");
    if (name.size() < 5 || name[0] != 'k' || sep == std::string::npos)
        throw std::invalid_argument("bad column name '" + name + "'");
    const char* first = name.data() + 1;
    const char* mid = name.data() + sep;
    const char* last = name.data() + name.size();
    int cov = 0;
    auto r1 = std::from_chars(first, mid, tag.order);
    auto r2 = std::from_chars(mid + 2, last, cov);
    if (r1.ec != std::errc{} || r1.ptr != mid || r2.ec != std::errc{} || r2.ptr != last || cov < 1 || tag.order < 0)
        throw std::invalid_argument("bad column name '" + name + "'");
    tag.covariate = cov - 1;
    return tag;
}

Eigen::MatrixXd PropagatedDesign::full_matrix() const {
    const int d = n_covariates();
    Eigen::MatrixXd m(n_rows(), n_columns());
    for (std::size_t k = 0; k < blocks.size(); ++k) m.middleCols(static_cast<Eigen::Index>(k) * d, d) = blocks[k];
    return m;
}

Eigen::MatrixXd PropagatedDesign::selected_matrix() const {
    Eigen::MatrixXd m(n_rows(), static_cast<Eigen::Index>(selected.size()));
    for (std::size_t s = 0; s < selected.size(); ++s) m.col(static_cast<Eigen::Index>(s)) = column(selected[s]);
    return m;
}

std::vector<ColumnTag> PropagatedDesign::selected_tags() const {
    std::vector<ColumnTag> tags;
    tags.reserve(selected.size());
    for (int c : selected) tags.push_back(provenance[c]);
    return tags;
}

PropagatedDesign build_design(const RowStochasticOperator& w, const Eigen::MatrixXd& x, int k_max) {
    PropagatedDesign design;
    design.blocks = propagate(w, x, k_max);
    const int d = static_cast<int>(x.cols());
    design.provenance.reserve(static_cast<std::size_t>(d) * (k_max + 1));
    for (int k = 0; k <= k_max; ++k)
        for (int j = 0; j < d; ++j) design.provenance.push_back({k, j});
    design.column_means = Eigen::RowVectorXd::Zero(design.n_columns());
    return design;
}

PropagatedDesign center(PropagatedDesign design) {
    const int d = design.n_covariates();
    if (design.column_means.size() != design.n_columns())
        design.column_means = Eigen::RowVectorXd::Zero(design.n_columns());
    for (std::size_t k = 0; k < design.blocks.size(); ++k) {
        auto& b = design.blocks[k];
        const Eigen::RowVectorXd means = b.colwise().mean();
        b.rowwise() -= means;
        design.column_means.segment(static_cast<Eigen::Index>(k) * d, d) += means;
    }
    design.centered = true;
    return design;
}

Eigen::VectorXd center_response(const Eigen::VectorXd& y) {
    return (y.array() - y.mean()).matrix();
}

PropagatedDesign forward_select(PropagatedDesign design, double tol) {
    const int n = design.n_rows();
    const int p = design.n_columns();
    Eigen::MatrixXd basis(n, std::min(n, p));
    int admitted = 0;
    design.selected.clear();
    for (int c = 0; c < p && admitted < n; ++c) {
        const Eigen::VectorXd v = design.column(c);
        const double norm = v.norm();
        if (!(norm > 0.0)) continue;
        Eigen::VectorXd r = v;
        if (admitted > 0) {
            // two passes of classical Gram-Schmidt keep the basis orthogonal to working precision
            const auto q = basis.leftCols(admitted);
            for (int pass = 0; pass < 2; ++pass) r.noalias() -= q * (q.transpose() * r);
        }
        const double rnorm = r.norm();
        if (rnorm > tol * norm) {
            basis.col(admitted++) = r / rnorm;
            design.selected.push_back(c);
        }
    }
    if (design.selected.empty()) throw DegenerateDesign("degenerate design: no column survives forward selection");
    return design;
}

PropagatedDesign row_subset(const PropagatedDesign& design, std::span<const int> rows) {
    if (design.centered) throw std::logic_error("row_subset expects an uncentered design");
    PropagatedDesign out;
    out.provenance = design.provenance;
    out.column_means = Eigen::RowVectorXd::Zero(design.n_columns());
    const int n = design.n_rows();
    out.blocks.reserve(design.blocks.size());
    for (const auto& b : design.blocks) {
        Eigen::MatrixXd sub(static_cast<Eigen::Index>(rows.size()), b.cols());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i] < 0 || rows[i] >= n) throw DimensionError("row index out of range");
            sub.row(static_cast<Eigen::Index>(i)) = b.row(rows[i]);
        }
        out.blocks.push_back(std::move(sub));
    }
    return out;
}

Eigen::MatrixXd columns_by_tag(const PropagatedDesign& design, std::span<const ColumnTag> tags) {
    const int d = design.n_covariates();
    Eigen::MatrixXd m(design.n_rows(), static_cast<Eigen::Index>(tags.size()));
    for (std::size_t s = 0; s < tags.size(); ++s) {
        const auto& t = tags[s];
        if (t.order < 0 || t.order > design.max_order() || t.covariate < 0 || t.covariate >= d)
            throw DimensionError("design has no column " + column_name(t));
        m.col(static_cast<Eigen::Index>(s)) = design.blocks[t.order].col(t.covariate);
    }
    return m;
}

}  // namespace npr
