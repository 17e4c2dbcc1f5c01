#pragma once

// Gradient-boosted regression trees on the logistic loss, grown leaf-wise
// (best-first) with exact greedy splits. Covers the XGBoost and LightGBM
// parameter vocabulary: leaf cap, depth cap, min hessian / min count per
// leaf, per-tree and per-level column sampling, L1/L2 leaf shrinkage.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <vector>

#include "plagdet/classifiers/feature_matrix.hpp"
#include "plagdet/classifiers/tree.hpp"
#include "plagdet/common.hpp"
#include "plagdet/rng.hpp"

namespace plagdet::classifiers {

struct GbtOptions {
    size_t n_estimators = 100;
    double learning_rate = 0.1;
    size_t max_leaves = 31;
    size_t max_depth = 0; ///< 0 = unlimited
    double min_child_weight = 1e-3;
    size_t min_child_samples = 1;
    double colsample_bytree = 1.0;
    double colsample_bylevel = 1.0;
    double reg_alpha = 0.0;
    double reg_lambda = 1.0;
};

/// Raw score F(x) = base_score + sum of tree outputs; P(y = 1) = sigmoid(F).
struct BoostedModel {
    double base_score = 0.0;
    std::vector<Tree> trees;

    double raw_score(std::span<const double> x) const
    {
        double f = base_score;
        for (const auto& t : trees)
            f += t.eval(x);
        return f;
    }
    double predict_proba(std::span<const double> x) const { return sigmoid(raw_score(x)); }
    bool operator==(const BoostedModel&) const = default;
};

namespace detail {

// soft-thresholded gradient sum (L1)
inline double shrink(double g, double alpha)
{
    if (g > alpha)
        return g - alpha;
    if (g < -alpha)
        return g + alpha;
    return 0.0;
}

inline double leaf_score(double g, double h, const GbtOptions& o)
{
    const double t = shrink(g, o.reg_alpha);
    return t * t / (h + o.reg_lambda);
}

struct GbtSplit {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

inline size_t sample_count(double fraction, size_t n)
{
    if (fraction >= 1.0)
        return n;
    return std::clamp<size_t>(static_cast<size_t>(std::llround(fraction * static_cast<double>(n))), 1, n);
}

inline std::vector<size_t> sample_sorted(Rng& rng, const std::vector<size_t>& from, size_t k)
{
    if (k >= from.size())
        return from;
    std::vector<size_t> perm = from;
    rng.shuffle(std::span<size_t>(perm));
    perm.resize(k);
    std::sort(perm.begin(), perm.end());
    return perm;
}

inline GbtSplit best_gbt_split(const FeatureMatrix& data, const Vector& grad, const Vector& hess,
                               const std::vector<size_t>& idx, const std::vector<size_t>& features,
                               const GbtOptions& o)
{
    GbtSplit best;
    double g_total = 0.0, h_total = 0.0;
    for (size_t i : idx) {
        g_total += grad[i];
        h_total += hess[i];
    }
    const double parent = leaf_score(g_total, h_total, o);
    const size_t min_n = std::max<size_t>(1, o.min_child_samples);
    if (idx.size() < 2 * min_n)
        return best;

    std::vector<size_t> sorted = idx;
    for (size_t f : features) {
        std::sort(sorted.begin(), sorted.end(), [&](size_t a, size_t b) {
            const double va = data.rows[a][f], vb = data.rows[b][f];
            return va != vb ? va < vb : a < b;
        });
        double gl = 0.0, hl = 0.0;
        for (size_t k = 0; k + 1 < sorted.size(); ++k) {
            const size_t i = sorted[k];
            gl += grad[i];
            hl += hess[i];
            const double v = data.rows[i][f];
            const double next = data.rows[sorted[k + 1]][f];
            if (v == next)
                continue;
            const size_t nl = k + 1, nr = sorted.size() - nl;
            if (nl < min_n || nr < min_n)
                continue;
            const double hr = h_total - hl;
            if (hl < o.min_child_weight || hr < o.min_child_weight)
                continue;
            const double gain = leaf_score(gl, hl, o) + leaf_score(g_total - gl, hr, o) - parent;
            if (gain > best.gain + 1e-15) {
                best.gain = gain;
                best.feature = static_cast<int>(f);
                best.threshold = midpoint(v, next);
            }
        }
    }
    return best;
}

} // namespace detail

inline BoostedModel fit_gbt(const FeatureMatrix& data, const GbtOptions& o, std::uint64_t seed)
{
    require(o.learning_rate > 0.0, "gbt: learning_rate must be positive");
    require(o.max_leaves >= 2, "gbt: num_leaves must be >= 2");
    require(o.colsample_bytree > 0.0 && o.colsample_bytree <= 1.0, "gbt: colsample_bytree must lie in (0, 1]");
    require(o.colsample_bylevel > 0.0 && o.colsample_bylevel <= 1.0, "gbt: colsample_bylevel must lie in (0, 1]");
    require(o.reg_lambda >= 0.0 && o.reg_alpha >= 0.0, "gbt: regularization must be non-negative");

    const size_t n = data.size();
    const size_t d = data.dim();
    const double base_rate = static_cast<double>(data.positives()) / static_cast<double>(n);

    BoostedModel m;
    m.base_score = std::log(base_rate / (1.0 - base_rate));
    Vector score(n, m.base_score), grad(n), hess(n);

    std::vector<size_t> all_features(d);
    std::iota(all_features.begin(), all_features.end(), size_t{0});

    for (size_t t = 0; t < o.n_estimators; ++t) {
        Rng rng(Rng::derive(seed, t));
        for (size_t i = 0; i < n; ++i) {
            const double p = sigmoid(score[i]);
            grad[i] = p - data.labels[i];
            hess[i] = std::max(p * (1.0 - p), 1e-16);
        }
        const auto tree_features = detail::sample_sorted(rng, all_features, detail::sample_count(o.colsample_bytree, d));
        std::map<size_t, std::vector<size_t>> level_features;
        auto features_at = [&](size_t depth) -> const std::vector<size_t>& {
            auto it = level_features.find(depth);
            if (it == level_features.end())
                it = level_features
                         .emplace(depth, detail::sample_sorted(rng, tree_features,
                                                               detail::sample_count(o.colsample_bylevel,
                                                                                    tree_features.size())))
                         .first;
            return it->second;
        };

        struct Leaf {
            int node;
            std::vector<size_t> idx;
            size_t depth;
            detail::GbtSplit split;
        };
        auto evaluate = [&](Leaf& leaf) {
            leaf.split = {};
            if (o.max_depth > 0 && leaf.depth >= o.max_depth)
                return;
            leaf.split = detail::best_gbt_split(data, grad, hess, leaf.idx, features_at(leaf.depth), o);
        };

        Tree tree;
        tree.nodes.push_back({});
        std::vector<Leaf> leaves;
        std::vector<size_t> root(n);
        std::iota(root.begin(), root.end(), size_t{0});
        leaves.push_back({0, std::move(root), 0, {}});
        evaluate(leaves.back());

        while (leaves.size() < o.max_leaves) {
            // best-first; ties go to the earliest created leaf
            size_t pick = leaves.size();
            double best_gain = 0.0;
            for (size_t l = 0; l < leaves.size(); ++l)
                if (leaves[l].split.feature >= 0 && leaves[l].split.gain > best_gain) {
                    best_gain = leaves[l].split.gain;
                    pick = l;
                }
            if (pick == leaves.size())
                break;

            Leaf cur = std::move(leaves[pick]);
            leaves.erase(leaves.begin() + static_cast<std::ptrdiff_t>(pick));
            Leaf left{static_cast<int>(tree.nodes.size()), {}, cur.depth + 1, {}};
            Leaf right{static_cast<int>(tree.nodes.size() + 1), {}, cur.depth + 1, {}};
            const auto f = static_cast<size_t>(cur.split.feature);
            for (size_t i : cur.idx)
                (data.rows[i][f] <= cur.split.threshold ? left.idx : right.idx).push_back(i);
            auto& node = tree.nodes[static_cast<size_t>(cur.node)];
            node.feature = cur.split.feature;
            node.threshold = cur.split.threshold;
            node.left = left.node;
            node.right = right.node;
            tree.nodes.push_back({});
            tree.nodes.push_back({});
            evaluate(left);
            evaluate(right);
            leaves.push_back(std::move(left));
            leaves.push_back(std::move(right));
        }

        for (const auto& leaf : leaves) {
            double g = 0.0, h = 0.0;
            for (size_t i : leaf.idx) {
                g += grad[i];
                h += hess[i];
            }
            const double value = -o.learning_rate * detail::shrink(g, o.reg_alpha) / (h + o.reg_lambda);
            tree.nodes[static_cast<size_t>(leaf.node)].value = value;
            for (size_t i : leaf.idx)
                score[i] += value;
        }
        m.trees.push_back(std::move(tree));
    }
    return m;
}

} // namespace plagdet::classifiers
