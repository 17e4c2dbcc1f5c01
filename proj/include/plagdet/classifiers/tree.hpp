#pragma once

// Binary decision trees: Gini CART, bagged random forests and SAMME
// AdaBoost over depth-1 stumps.
//
// Splits are thresholds at midpoints between consecutive distinct feature
// values; a row goes left when x[feature] <= threshold. Among equally good
// splits the lowest feature index wins, then the lowest threshold.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "plagdet/classifiers/feature_matrix.hpp"
#include "plagdet/common.hpp"
#include "plagdet/rng.hpp"

namespace plagdet::classifiers {

struct TreeNode {
    int feature = -1; ///< -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0; ///< leaf output

    bool is_leaf() const { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

struct Tree {
    std::vector<TreeNode> nodes; ///< nodes[0] is the root

    double eval(std::span<const double> x) const
    {
        int i = 0;
        while (!nodes[static_cast<size_t>(i)].is_leaf()) {
            const auto& nd = nodes[static_cast<size_t>(i)];
            i = x[static_cast<size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
        }
        return nodes[static_cast<size_t>(i)].value;
    }

    size_t leaf_count() const
    {
        return static_cast<size_t>(std::count_if(nodes.begin(), nodes.end(), [](const auto& n) { return n.is_leaf(); }));
    }

    bool operator==(const Tree&) const = default;
};

inline double midpoint(double lo, double hi)
{
    double m = lo + (hi - lo) / 2.0;
    if (!(m < hi))
        m = lo;
    return m;
}

namespace detail {

struct GiniSplit {
    int feature = -1;
    double threshold = 0.0;
    double impurity = std::numeric_limits<double>::infinity();
};

/// Best weighted-Gini split of `idx` over `features` (visited in the given
/// order, which callers keep ascending).
inline GiniSplit best_gini_split(const FeatureMatrix& data, const std::vector<double>& weight,
                                 const std::vector<size_t>& idx, const std::vector<size_t>& features,
                                 size_t min_leaf)
{
    GiniSplit best;
    double w_total = 0.0, p_total = 0.0;
    for (size_t i : idx) {
        w_total += weight[i];
        p_total += weight[i] * data.labels[i];
    }
    std::vector<size_t> sorted = idx;
    for (size_t f : features) {
        std::sort(sorted.begin(), sorted.end(), [&](size_t a, size_t b) {
            const double va = data.rows[a][f], vb = data.rows[b][f];
            return va != vb ? va < vb : a < b;
        });
        double wl = 0.0, pl = 0.0;
        for (size_t k = 0; k + 1 < sorted.size(); ++k) {
            const size_t i = sorted[k];
            wl += weight[i];
            pl += weight[i] * data.labels[i];
            const double v = data.rows[i][f];
            const double next = data.rows[sorted[k + 1]][f];
            if (v == next)
                continue;
            const size_t nl = k + 1, nr = sorted.size() - nl;
            if (nl < min_leaf || nr < min_leaf)
                continue;
            const double wr = w_total - wl, pr = p_total - pl;
            if (wl <= 0.0 || wr <= 0.0)
                continue;
            // weighted child Gini: w * (1 - q^2 - (1-q)^2) = 2 p (w - p) / w
            const double imp = 2.0 * pl * (wl - pl) / wl + 2.0 * pr * (wr - pr) / wr;
            if (imp < best.impurity - 1e-12 * w_total) {
                best.impurity = imp;
                best.feature = static_cast<int>(f);
                best.threshold = midpoint(v, next);
            }
        }
    }
    return best;
}

} // namespace detail

struct CartOptions {
    size_t max_depth = 0; ///< 0 = unlimited
    size_t min_samples_leaf = 1;
    size_t min_samples_split = 2;
    size_t max_features = 0; ///< per-split feature sample size; 0 = all
};

enum class LeafRule {
    laplace,  ///< (p + 1) / (n + 2), weighted counts
    majority, ///< +1 / -1 by weighted majority (AdaBoost stumps)
};

/// Grows a Gini tree over rows with positive weight. `rng` is consulted only
/// when options.max_features subsamples features.
inline Tree grow_cart(const FeatureMatrix& data, const std::vector<double>& weight, const CartOptions& opt,
                      LeafRule leaf_rule, Rng* rng = nullptr)
{
    const size_t d = data.dim();
    Tree tree;

    struct Pending {
        int node;
        std::vector<size_t> idx;
        size_t depth;
    };

    auto make_leaf_value = [&](const std::vector<size_t>& idx) {
        double w = 0.0, p = 0.0;
        for (size_t i : idx) {
            w += weight[i];
            p += weight[i] * data.labels[i];
        }
        if (leaf_rule == LeafRule::laplace)
            return (p + 1.0) / (w + 2.0);
        return p > w - p ? 1.0 : -1.0;
    };

    std::vector<size_t> root;
    for (size_t i = 0; i < data.size(); ++i)
        if (weight[i] > 0.0)
            root.push_back(i);
    tree.nodes.push_back({});
    std::vector<Pending> stack;
    stack.push_back({0, std::move(root), 0});

    std::vector<size_t> all_features(d);
    std::iota(all_features.begin(), all_features.end(), size_t{0});

    while (!stack.empty()) {
        Pending cur = std::move(stack.back());
        stack.pop_back();
        auto& node = tree.nodes[static_cast<size_t>(cur.node)];
        node.value = make_leaf_value(cur.idx);

        double w = 0.0, p = 0.0;
        for (size_t i : cur.idx) {
            w += weight[i];
            p += weight[i] * data.labels[i];
        }
        const bool pure = p <= 0.0 || p >= w;
        if (pure || (opt.max_depth > 0 && cur.depth >= opt.max_depth) || cur.idx.size() < opt.min_samples_split ||
            cur.idx.size() < 2 * opt.min_samples_leaf)
            continue;

        detail::GiniSplit split;
        if (opt.max_features == 0 || opt.max_features >= d) {
            split = detail::best_gini_split(data, weight, cur.idx, all_features, opt.min_samples_leaf);
        } else {
            // sample without replacement; keep drawing past max_features
            // only while no valid split has been found
            std::vector<size_t> perm = all_features;
            rng->shuffle(std::span<size_t>(perm));
            std::vector<size_t> chosen(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(opt.max_features));
            std::sort(chosen.begin(), chosen.end());
            split = detail::best_gini_split(data, weight, cur.idx, chosen, opt.min_samples_leaf);
            for (size_t k = opt.max_features; split.feature < 0 && k < perm.size(); ++k)
                split = detail::best_gini_split(data, weight, cur.idx, {perm[k]}, opt.min_samples_leaf);
        }
        if (split.feature < 0)
            continue;

        std::vector<size_t> left, right;
        for (size_t i : cur.idx)
            (data.rows[i][static_cast<size_t>(split.feature)] <= split.threshold ? left : right).push_back(i);

        const int li = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({});
        tree.nodes.push_back({});
        auto& parent = tree.nodes[static_cast<size_t>(cur.node)];
        parent.feature = split.feature;
        parent.threshold = split.threshold;
        parent.left = li;
        parent.right = li + 1;
        stack.push_back({li + 1, std::move(right), cur.depth + 1});
        stack.push_back({li, std::move(left), cur.depth + 1});
    }
    return tree;
}

struct TreeModel {
    Tree tree;
    int constant_class = -1;

    double predict_proba(std::span<const double> x) const { return tree.eval(x); }
    bool operator==(const TreeModel&) const = default;
};

inline TreeModel fit_cart(const FeatureMatrix& data, const CartOptions& opt)
{
    TreeModel m;
    std::vector<double> w(data.size(), 1.0);
    m.tree = grow_cart(data, w, opt, LeafRule::laplace);
    if (!data.has_both_classes())
        m.constant_class = data.labels.front();
    return m;
}

struct ForestModel {
    std::vector<Tree> trees;

    double predict_proba(std::span<const double> x) const
    {
        double s = 0.0;
        for (const auto& t : trees)
            s += t.eval(x);
        return s / static_cast<double>(trees.size());
    }
    bool operator==(const ForestModel&) const = default;
};

/// Bootstrap-bagged CART trees with floor(sqrt(d)) features per split.
/// Tree t draws from its own stream Rng::derive(seed, t).
inline ForestModel fit_rf(const FeatureMatrix& data, size_t n_estimators, CartOptions opt, std::uint64_t seed)
{
    require(n_estimators >= 1, "rf: n_estimators must be >= 1");
    opt.max_features = std::max<size_t>(1, static_cast<size_t>(std::floor(std::sqrt(static_cast<double>(data.dim())))));
    ForestModel m;
    m.trees.reserve(n_estimators);
    const size_t n = data.size();
    for (size_t t = 0; t < n_estimators; ++t) {
        Rng rng(Rng::derive(seed, t));
        std::vector<double> w(n, 0.0);
        for (size_t k = 0; k < n; ++k)
            w[static_cast<size_t>(rng.below(n))] += 1.0;
        m.trees.push_back(grow_cart(data, w, opt, LeafRule::laplace, &rng));
    }
    return m;
}

/// SAMME with stumps. P(y = 1) = sigmoid(2 F(x)), F = sum_t alpha_t h_t(x),
/// h_t in {-1, +1}.
struct AdaBoostModel {
    std::vector<Tree> stumps;
    Vector alphas;

    double margin(std::span<const double> x) const
    {
        double f = 0.0;
        for (size_t t = 0; t < stumps.size(); ++t)
            f += alphas[t] * stumps[t].eval(x);
        return f;
    }
    double predict_proba(std::span<const double> x) const { return sigmoid(2.0 * margin(x)); }
    bool operator==(const AdaBoostModel&) const = default;
};

inline AdaBoostModel fit_adaboost(const FeatureMatrix& data, size_t n_estimators, double learning_rate)
{
    require(n_estimators >= 1, "adaboost: n_estimators must be >= 1");
    require(learning_rate > 0.0, "adaboost: learning_rate must be positive");
    const size_t n = data.size();
    std::vector<double> w(n, 1.0 / static_cast<double>(n));
    CartOptions stump;
    stump.max_depth = 1;
    AdaBoostModel m;
    for (size_t t = 0; t < n_estimators; ++t) {
        Tree s = grow_cart(data, w, stump, LeafRule::majority);
        double err = 0.0, total = 0.0;
        std::vector<bool> miss(n);
        for (size_t i = 0; i < n; ++i) {
            const int pred = s.eval(data.rows[i]) > 0 ? 1 : 0;
            miss[i] = pred != data.labels[i];
            total += w[i];
            if (miss[i])
                err += w[i];
        }
        err /= total;
        if (err >= 0.5) {
            if (m.stumps.empty()) {
                // no weak learner beats chance: keep one with a negligible vote
                m.stumps.push_back(std::move(s));
                m.alphas.push_back(0.0);
            }
            break;
        }
        const double e = std::max(err, 1e-10);
        const double alpha = learning_rate * std::log((1.0 - e) / e);
        m.stumps.push_back(std::move(s));
        m.alphas.push_back(alpha);
        if (err <= 0.0)
            break;
        double sum = 0.0;
        for (size_t i = 0; i < n; ++i) {
            if (miss[i])
                w[i] *= std::exp(alpha);
            sum += w[i];
        }
        for (double& x : w)
            x /= sum;
    }
    return m;
}

} // namespace plagdet::classifiers
