#pragma once

// Confusion-matrix metrics, rank-based AUC and report rendering.

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "plagdet/common.hpp"

namespace plagdet::eval {

struct ConfusionMatrix {
    size_t tp = 0, fp = 0, fn = 0, tn = 0;

    size_t total() const { return tp + fp + fn + tn; }
    bool operator==(const ConfusionMatrix&) const = default;
};

/// Positive class is 1 (plagiarized).
inline ConfusionMatrix confusion(std::span<const int> preds, std::span<const int> labels)
{
    require(preds.size() == labels.size(), "confusion: " + std::to_string(preds.size()) + " predictions vs " +
                                               std::to_string(labels.size()) + " labels");
    require(!preds.empty(), "confusion: no predictions");
    ConfusionMatrix cm;
    for (size_t i = 0; i < preds.size(); ++i) {
        require((preds[i] == 0 || preds[i] == 1) && (labels[i] == 0 || labels[i] == 1),
                "confusion: values must be 0 or 1");
        if (preds[i] == 1)
            (labels[i] == 1 ? cm.tp : cm.fp)++;
        else
            (labels[i] == 1 ? cm.fn : cm.tn)++;
    }
    return cm;
}

struct Metrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    /// precision or recall had a zero denominator and was reported as 0
    bool zero_division = false;
};

inline double f1_score(double precision, double recall)
{
    return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

inline Metrics metrics(const ConfusionMatrix& cm)
{
    require(cm.total() > 0, "metrics: empty confusion matrix");
    Metrics m;
    m.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
    if (cm.tp + cm.fp > 0)
        m.precision = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
    else
        m.zero_division = true;
    if (cm.tp + cm.fn > 0)
        m.recall = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
    else
        m.zero_division = true;
    m.f1 = f1_score(m.precision, m.recall);
    return m;
}

/// Mann-Whitney statistic with average ranks for tied scores.
inline double auc(std::span<const double> scores, std::span<const int> labels)
{
    require(scores.size() == labels.size(), "auc: scores and labels differ in length");
    const size_t n = scores.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return scores[a] < scores[b]; });

    double rank_sum = 0.0;
    size_t n_pos = 0;
    for (size_t i = 0; i < n;) {
        size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]])
            ++j;
        const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (size_t k = i; k < j; ++k)
            if (labels[order[k]] == 1) {
                rank_sum += avg_rank;
                ++n_pos;
            }
        i = j;
    }
    const size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw Error("auc: labels must contain both classes");
    const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
    return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

inline int classify(double p) { return p > 0.5 ? 1 : 0; }

struct EvalReport {
    std::string name;
    size_t n = 0;
    ConfusionMatrix cm;
    Metrics m;
    double auc = 0.0;
    std::string fingerprint;
};

/// Thresholds probabilities at 0.5 (strict) and scores them.
inline EvalReport evaluate(std::span<const double> probs, std::span<const int> labels, std::string name = {},
                           std::string fingerprint = {})
{
    std::vector<int> preds(probs.size());
    for (size_t i = 0; i < probs.size(); ++i)
        preds[i] = classify(probs[i]);
    EvalReport r;
    r.name = std::move(name);
    r.fingerprint = std::move(fingerprint);
    r.cm = confusion(preds, labels);
    r.n = r.cm.total();
    r.m = metrics(r.cm);
    r.auc = auc(probs, labels);
    return r;
}

inline std::string fingerprint(const nlohmann::json& config) { return hex64(fnv1a(config.dump())); }

inline nlohmann::json to_json(const EvalReport& r)
{
    return {{"name", r.name},
            {"n", r.n},
            {"confusion", {{"tp", r.cm.tp}, {"fp", r.cm.fp}, {"fn", r.cm.fn}, {"tn", r.cm.tn}}},
            {"accuracy", r.m.accuracy},
            {"precision", r.m.precision},
            {"recall", r.m.recall},
            {"f1", r.m.f1},
            {"auc", r.auc},
            {"zero_division", r.m.zero_division},
            {"fingerprint", r.fingerprint}};
}

inline std::string fixed(double v, int digits)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

/// Aligned plain-text table, one row per report, metrics in percent.
inline std::string format_table(const std::vector<EvalReport>& reports)
{
    const std::vector<std::string> head = {"system", "n", "accuracy", "precision", "recall", "f1", "auc"};
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : reports)
        rows.push_back({r.name, std::to_string(r.n), fixed(100 * r.m.accuracy, 2), fixed(100 * r.m.precision, 2),
                        fixed(100 * r.m.recall, 2), fixed(100 * r.m.f1, 2), fixed(100 * r.auc, 2)});
    std::vector<size_t> width(head.size());
    for (size_t c = 0; c < head.size(); ++c) {
        width[c] = head[c].size();
        for (const auto& row : rows)
            width[c] = std::max(width[c], row[c].size());
    }
    auto line = [&](const std::vector<std::string>& cells) {
        std::string out;
        for (size_t c = 0; c < cells.size(); ++c) {
            const std::string pad(width[c] - cells[c].size(), ' ');
            out += c == 0 ? cells[c] + pad : "  " + pad + cells[c];
        }
        while (!out.empty() && out.back() == ' ')
            out.pop_back();
        return out + "\n";
    };
    std::string out = line(head);
    size_t total = 0;
    for (size_t w : width)
        total += w;
    out += std::string(total + 2 * (width.size() - 1), '-') + "\n";
    for (const auto& row : rows)
        out += line(row);
    for (const auto& r : reports)
        if (r.m.zero_division) {
            out += "note: zero denominators in precision/recall are reported as 0\n";
            break;
        }
    return out;
}

struct SweepRow {
    double w_bert = 0.0;
    Metrics m;
    double auc = 0.0;
};

inline std::string format_number(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Up to 6 significant digits, for labels.
inline std::string short_number(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline std::string format_sweep_csv(const std::vector<SweepRow>& rows)
{
    std::string out = "W_BERT,accuracy,precision,recall,f1,auc\n";
    for (const auto& r : rows) {
        out += short_number(r.w_bert) + "," + format_number(r.m.accuracy) + "," + format_number(r.m.precision) + "," +
               format_number(r.m.recall) + "," + format_number(r.m.f1) + "," + format_number(r.auc) + "\n";
    }
    return out;
}

} // namespace plagdet::eval
