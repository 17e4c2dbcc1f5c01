#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "plagdet/common.hpp"

namespace plagdet::classifiers {

/// Rows of equal length with aligned binary labels.
struct FeatureMatrix {
    std::vector<Vector> rows;
    std::vector<int> labels;

    size_t size() const { return rows.size(); }
    size_t dim() const { return rows.empty() ? 0 : rows.front().size(); }

    size_t positives() const { return static_cast<size_t>(std::count(labels.begin(), labels.end(), 1)); }
    size_t negatives() const { return size() - positives(); }
    bool has_both_classes() const { return positives() > 0 && negatives() > 0; }

    void add(Vector row, int label)
    {
        rows.push_back(std::move(row));
        labels.push_back(label);
    }

    void validate() const
    {
        require(!rows.empty(), "feature matrix is empty");
        require(rows.size() == labels.size(), "feature matrix: rows and labels differ in count");
        const size_t d = dim();
        for (size_t i = 0; i < rows.size(); ++i) {
            require(rows[i].size() == d, "feature matrix: row " + std::to_string(i) + " has length " +
                                             std::to_string(rows[i].size()) + ", expected " + std::to_string(d));
            require(all_finite(rows[i]), "feature matrix: non-finite value in row " + std::to_string(i));
            require(labels[i] == 0 || labels[i] == 1, "feature matrix: label must be 0 or 1");
        }
    }
};

/// Rows sorted lexicographically by (features, label). Fitting on this order
/// makes every algorithm independent of the caller's row order.
inline FeatureMatrix canonical_order(const FeatureMatrix& data)
{
    std::vector<size_t> order(data.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        const auto& ra = data.rows[a];
        const auto& rb = data.rows[b];
        for (size_t j = 0; j < ra.size(); ++j)
            if (ra[j] != rb[j])
                return ra[j] < rb[j];
        return data.labels[a] < data.labels[b];
    });
    FeatureMatrix out;
    out.rows.reserve(data.size());
    out.labels.reserve(data.size());
    for (size_t i : order)
        out.add(data.rows[i], data.labels[i]);
    return out;
}

} // namespace plagdet::classifiers
