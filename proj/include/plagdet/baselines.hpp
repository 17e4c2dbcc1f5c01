#pragma once

// Pairwise similarity features used as the comparison baseline: edit
// distances, set overlaps and embedding cosine.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "plagdet/classifiers/feature_matrix.hpp"
#include "plagdet/common.hpp"
#include "plagdet/corpus.hpp"
#include "plagdet/embeddings.hpp"
#include "plagdet/preprocess.hpp"
#include "plagdet/unicode.hpp"

namespace plagdet::baselines {

using Tokens = std::vector<std::string>;

/// Unit-cost edit distance between two sequences.
template <class T>
size_t edit_distance(std::span<const T> a, std::span<const T> b)
{
    if (a.size() < b.size())
        std::swap(a, b);
    std::vector<size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (size_t j = 0; j <= b.size(); ++j)
        prev[j] = j;
    for (size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (size_t j = 1; j <= b.size(); ++j) {
            const size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

/// Edit distance over extended grapheme clusters.
inline size_t levenshtein(std::string_view a, std::string_view b)
{
    const auto ga = unicode::graphemes(a);
    const auto gb = unicode::graphemes(b);
    return edit_distance<std::string>(ga, gb);
}

/// 1 - levenshtein / max length in grapheme clusters; 1 when both are empty.
inline double fuzzy_ratio(std::string_view a, std::string_view b)
{
    const auto ga = unicode::graphemes(a);
    const auto gb = unicode::graphemes(b);
    const size_t longest = std::max(ga.size(), gb.size());
    if (longest == 0)
        return 1.0;
    return 1.0 - static_cast<double>(edit_distance<std::string>(ga, gb)) / static_cast<double>(longest);
}

/// Word-level counterpart of fuzzy_ratio: 1 - token edit distance / longer
/// token count; 1 when both are empty.
inline double levenshtein_norm(const Tokens& a, const Tokens& b)
{
    const size_t longest = std::max(a.size(), b.size());
    if (longest == 0)
        return 1.0;
    return 1.0 - static_cast<double>(edit_distance<std::string>(a, b)) / static_cast<double>(longest);
}

/// |A ∩ B| / |A ∪ B| over token sets; 1 when both are empty.
inline double jaccard(const Tokens& a, const Tokens& b)
{
    const std::set<std::string> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    if (sa.empty() && sb.empty())
        return 1.0;
    size_t inter = 0;
    for (const auto& t : sa)
        inter += sb.count(t);
    return static_cast<double>(inter) / static_cast<double>(sa.size() + sb.size() - inter);
}

/// Cosine of raw term counts; 0 when either list is empty.
inline double cosine_tf(const Tokens& a, const Tokens& b)
{
    if (a.empty() || b.empty())
        return 0.0;
    std::map<std::string, std::pair<double, double>> counts;
    for (const auto& t : a)
        counts[t].first += 1.0;
    for (const auto& t : b)
        counts[t].second += 1.0;
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (const auto& [t, c] : counts) {
        ab += c.first * c.second;
        aa += c.first * c.first;
        bb += c.second * c.second;
    }
    return std::clamp(ab / (std::sqrt(aa) * std::sqrt(bb)), 0.0, 1.0);
}

inline std::set<std::vector<std::string>> ngrams(const Tokens& t, size_t n)
{
    std::set<std::vector<std::string>> out;
    for (size_t i = 0; i + n <= t.size(); ++i)
        out.emplace(t.begin() + static_cast<std::ptrdiff_t>(i), t.begin() + static_cast<std::ptrdiff_t>(i + n));
    return out;
}

/// Jaccard overlap of contiguous token n-gram sets, max(1, |union|) in the
/// denominator.
inline double ngram_overlap(const Tokens& a, const Tokens& b, size_t n = 2)
{
    require(n >= 1, "ngram_overlap: n must be >= 1");
    const auto na = ngrams(a, n), nb = ngrams(b, n);
    size_t inter = 0;
    for (const auto& g : na)
        inter += nb.count(g);
    const size_t uni = na.size() + nb.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(std::max<size_t>(1, uni));
}

/// Cosine of two vectors; 0 if either has zero norm.
inline double vector_cosine(std::span<const double> a, std::span<const double> b)
{
    require(a.size() == b.size(), "vector_cosine: length mismatch");
    const double na = std::sqrt(dot(a, a)), nb = std::sqrt(dot(b, b));
    if (na == 0.0 || nb == 0.0)
        return 0.0;
    return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

struct SimilarityFeatures {
    double levenshtein_norm = 0.0;
    double fuzzy_ratio = 0.0;
    double jaccard = 0.0;
    double cosine_tf = 0.0;
    double ngram_overlap = 0.0;
    double embedding_cosine = 0.0;

    Vector as_vector() const
    {
        return {levenshtein_norm, fuzzy_ratio, jaccard, cosine_tf, ngram_overlap, embedding_cosine};
    }
    bool operator==(const SimilarityFeatures&) const = default;
};

/// Token features use preprocessed tokens, fuzzy_ratio the normalized text,
/// embedding_cosine the stored raw vectors.
inline SimilarityFeatures baseline_features(const corpus::TextPair& pair, const embeddings::EmbeddingStore& store,
                                            const preprocess::Preprocessor& prep)
{
    const auto& rec = store.at(pair.id);
    const Tokens ta = prep(pair.reference), tb = prep(pair.input);
    SimilarityFeatures f;
    f.levenshtein_norm = levenshtein_norm(ta, tb);
    f.fuzzy_ratio = fuzzy_ratio(preprocess::normalize(pair.reference), preprocess::normalize(pair.input));
    f.jaccard = jaccard(ta, tb);
    f.cosine_tf = cosine_tf(ta, tb);
    f.ngram_overlap = ngram_overlap(ta, tb, 2);
    f.embedding_cosine = vector_cosine(rec.ref, rec.inp);
    return f;
}

struct BaselineRow {
    std::string id;
    SimilarityFeatures features;
    int label = 0;
};

inline std::vector<BaselineRow> baseline_table(const corpus::PairDataset& ds, const embeddings::EmbeddingStore& store,
                                               const preprocess::Preprocessor& prep)
{
    embeddings::join(ds, store); // reports every missing id at once
    std::vector<BaselineRow> rows;
    rows.reserve(ds.size());
    for (const auto& p : ds.pairs)
        rows.push_back({p.id, baseline_features(p, store, prep), p.label});
    return rows;
}

inline classifiers::FeatureMatrix to_matrix(const std::vector<BaselineRow>& rows)
{
    classifiers::FeatureMatrix fm;
    for (const auto& r : rows)
        fm.add(r.features.as_vector(), r.label);
    return fm;
}

inline constexpr std::string_view kFeatureHeader = "id\tlev_norm\tfuzzy\tjaccard\tcosine_tf\tngram2\temb_cos\tlabel";

inline std::string format_features(const std::vector<BaselineRow>& rows)
{
    std::string out(kFeatureHeader);
    out += '\n';
    char buf[40];
    for (const auto& r : rows) {
        out += r.id;
        for (double v : r.features.as_vector()) {
            std::snprintf(buf, sizeof buf, "\t%.17g", v);
            out += buf;
        }
        out += "\t" + std::to_string(r.label) + "\n";
    }
    return out;
}

} // namespace plagdet::baselines
