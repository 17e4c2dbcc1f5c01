#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "plagdet/classifiers/feature_matrix.hpp"
#include "plagdet/common.hpp"

namespace plagdet::classifiers {

/// Gaussian naive Bayes. A single-class fit yields a constant predictor.
struct GaussianNBModel {
    std::array<double, 2> prior{0.5, 0.5};
    std::array<Vector, 2> mean;
    std::array<Vector, 2> var;
    int constant_class = -1; ///< 0/1 when fitted on one class only

    double predict_proba(std::span<const double> x) const
    {
        if (constant_class >= 0)
            return constant_class == 1 ? 1.0 : 0.0;
        std::array<double, 2> ll{};
        for (int c = 0; c < 2; ++c) {
            double s = std::log(prior[c]);
            for (size_t j = 0; j < x.size(); ++j) {
                const double v = var[c][j];
                const double diff = x[j] - mean[c][j];
                s -= 0.5 * std::log(2.0 * std::numbers::pi * v) + diff * diff / (2.0 * v);
            }
            ll[c] = s;
        }
        return sigmoid(ll[1] - ll[0]);
    }

    bool operator==(const GaussianNBModel&) const = default;
};

/// var_smoothing scales the largest per-feature variance into an additive
/// floor on every class variance.
inline GaussianNBModel fit_gnb(const FeatureMatrix& data, double var_smoothing)
{
    const size_t d = data.dim();
    const size_t n = data.size();
    GaussianNBModel m;
    if (!data.has_both_classes()) {
        m.constant_class = data.labels.front();
        m.prior = {m.constant_class == 0 ? 1.0 : 0.0, m.constant_class == 1 ? 1.0 : 0.0};
        return m;
    }

    double max_var = 0.0;
    for (size_t j = 0; j < d; ++j) {
        double mu = 0.0;
        for (size_t i = 0; i < n; ++i)
            mu += data.rows[i][j];
        mu /= static_cast<double>(n);
        double v = 0.0;
        for (size_t i = 0; i < n; ++i)
            v += (data.rows[i][j] - mu) * (data.rows[i][j] - mu);
        max_var = std::max(max_var, v / static_cast<double>(n));
    }
    // all-constant features would otherwise give zero variance
    const double eps = max_var > 0.0 ? var_smoothing * max_var : std::max(var_smoothing, 1e-300);

    for (int c = 0; c < 2; ++c) {
        m.mean[c].assign(d, 0.0);
        m.var[c].assign(d, 0.0);
        size_t count = 0;
        for (size_t i = 0; i < n; ++i) {
            if (data.labels[i] != c)
                continue;
            ++count;
            for (size_t j = 0; j < d; ++j)
                m.mean[c][j] += data.rows[i][j];
        }
        for (double& v : m.mean[c])
            v /= static_cast<double>(count);
        for (size_t i = 0; i < n; ++i) {
            if (data.labels[i] != c)
                continue;
            for (size_t j = 0; j < d; ++j) {
                const double diff = data.rows[i][j] - m.mean[c][j];
                m.var[c][j] += diff * diff;
            }
        }
        for (double& v : m.var[c])
            v = v / static_cast<double>(count) + eps;
        m.prior[c] = static_cast<double>(count) / static_cast<double>(n);
    }
    return m;
}

} // namespace plagdet::classifiers
