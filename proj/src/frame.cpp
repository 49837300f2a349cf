#include "funcdist/frame.hpp"

#include "funcdist/error.hpp"
#include "funcdist/numio.hpp"

namespace funcdist::econ {

bool DataFrame::has(const std::string& name) const {
    for (const auto& n : names_)
        if (n == name) return true;
    return false;
}

const Eigen::VectorXd& DataFrame::col(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return cols_[i];
    fail_validation("frame: no column '" + name + "'");
}

void DataFrame::add(const std::string& name, Eigen::VectorXd values) {
    if (has(name)) fail_validation("frame: duplicate column '" + name + "'");
    if (!cols_.empty() && values.size() != rows())
        fail_validation("frame: column '" + name + "' length mismatch");
    names_.push_back(name);
    cols_.push_back(std::move(values));
}

DataFrame DataFrame::where_equal(const std::string& name, double value) const {
    const Eigen::VectorXd& key = col(name);
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < key.size(); ++i)
        if (key(i) == value) keep.push_back(i);
    DataFrame out;
    for (std::size_t c = 0; c < cols_.size(); ++c) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(keep.size()));
        for (std::size_t i = 0; i < keep.size(); ++i) v(static_cast<Eigen::Index>(i)) = cols_[c](keep[i]);
        out.add(names_[c], std::move(v));
    }
    return out;
}

DataFrame DataFrame::from_csv(const CsvTable& table, const std::string& context) {
    DataFrame df;
    const auto n = static_cast<Eigen::Index>(table.rows.size());
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        Eigen::VectorXd v(n);
        for (Eigen::Index r = 0; r < n; ++r)
            v(r) = parse_double(table.rows[static_cast<std::size_t>(r)][c],
                                context + " column " + table.header[c]);
        df.add(table.header[c], std::move(v));
    }
    return df;
}

CsvTable DataFrame::to_csv() const {
    CsvTable t;
    t.header = names_;
    const Eigen::Index n = rows();
    t.rows.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index r = 0; r < n; ++r) {
        std::vector<std::string> row;
        row.reserve(cols_.size());
        for (const auto& c : cols_) row.push_back(format_double(c(r)));
        t.rows.push_back(std::move(row));
    }
    return t;
}

std::string significance_stars(double p) {
    if (p < 0.01) return "***";
    if (p < 0.05) return "**";
    if (p < 0.10) return "*";
    return "";
}

}  // namespace funcdist::econ
