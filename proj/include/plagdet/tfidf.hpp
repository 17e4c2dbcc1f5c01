#pragma once

// Fixed-vocabulary TF-IDF: raw term counts, smoothed idf
// ln((1 + N) / (1 + df)) + 1, L2-normalized rows. The vocabulary is the
// vocab_size terms with the highest document frequency, ties broken by
// byte-wise term order.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "plagdet/common.hpp"

namespace plagdet::tfidf {

using Tokens = std::vector<std::string>;

class TfidfModel {
public:
    TfidfModel() = default;

    /// Builds a model from an explicit vocabulary; validates invariants.
    TfidfModel(std::vector<std::string> terms, Vector idf, size_t vocab_size, size_t n_docs)
        : terms_(std::move(terms)), idf_(std::move(idf)), vocab_size_(vocab_size), n_docs_(n_docs)
    {
        require(vocab_size_ >= 1, "tfidf: vocab_size must be >= 1");
        require(terms_.size() == idf_.size(), "tfidf: terms and idf differ in length");
        require(terms_.size() <= vocab_size_, "tfidf: vocabulary larger than vocab_size");
        index_.reserve(terms_.size());
        for (size_t i = 0; i < terms_.size(); ++i) {
            require(std::isfinite(idf_[i]) && idf_[i] > 0.0, "tfidf: idf must be positive for '" + terms_[i] + "'");
            require(index_.emplace(terms_[i], i).second, "tfidf: duplicate term '" + terms_[i] + "'");
        }
    }

    const std::vector<std::string>& terms() const { return terms_; }
    const Vector& idf() const { return idf_; }
    size_t vocab_size() const { return vocab_size_; }
    size_t n_docs() const { return n_docs_; }

    std::optional<size_t> index_of(const std::string& term) const
    {
        auto it = index_.find(term);
        if (it == index_.end())
            return std::nullopt;
        return it->second;
    }

    bool operator==(const TfidfModel& o) const
    {
        return terms_ == o.terms_ && idf_ == o.idf_ && vocab_size_ == o.vocab_size_ && n_docs_ == o.n_docs_;
    }

private:
    std::vector<std::string> terms_;
    Vector idf_;
    size_t vocab_size_ = 0;
    size_t n_docs_ = 0;
    std::unordered_map<std::string, size_t> index_;
};

inline TfidfModel fit(const std::vector<Tokens>& docs, size_t vocab_size)
{
    require(!docs.empty(), "tfidf: no documents");
    require(vocab_size >= 1, "tfidf: vocab_size must be >= 1");

    std::map<std::string, size_t> df;
    for (const auto& doc : docs) {
        std::unordered_set<std::string_view> seen;
        for (const auto& t : doc)
            if (seen.insert(t).second)
                ++df[t];
    }
    if (df.empty())
        throw Error("empty corpus");

    std::vector<std::pair<std::string, size_t>> ranked(df.begin(), df.end());
    // df descending; std::map iteration already gives byte order for ties
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    if (ranked.size() > vocab_size)
        ranked.resize(vocab_size);

    const double n = static_cast<double>(docs.size());
    std::vector<std::string> terms;
    Vector idf;
    terms.reserve(ranked.size());
    idf.reserve(ranked.size());
    for (auto& [term, count] : ranked) {
        idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
        terms.push_back(std::move(term));
    }
    return TfidfModel(std::move(terms), std::move(idf), vocab_size, docs.size());
}

/// Length vocab_size; unit L2 norm, or all zeros when no token is in the vocabulary.
inline Vector transform(const TfidfModel& model, const Tokens& doc)
{
    Vector v(model.vocab_size(), 0.0);
    for (const auto& t : doc)
        if (auto i = model.index_of(t))
            v[*i] += 1.0;
    double norm2 = 0.0;
    for (size_t i = 0; i < model.terms().size(); ++i) {
        v[i] *= model.idf()[i];
        norm2 += v[i] * v[i];
    }
    if (norm2 > 0.0) {
        const double inv = 1.0 / std::sqrt(norm2);
        for (double& x : v)
            x *= inv;
    }
    return v;
}

/// transform(ref) - transform(inp).
inline Vector pair_difference(const TfidfModel& model, const Tokens& ref_doc, const Tokens& inp_doc)
{
    Vector a = transform(model, ref_doc);
    const Vector b = transform(model, inp_doc);
    for (size_t i = 0; i < a.size(); ++i)
        a[i] -= b[i];
    return a;
}

inline nlohmann::json to_json(const TfidfModel& model)
{
    nlohmann::json terms = nlohmann::json::array();
    for (size_t i = 0; i < model.terms().size(); ++i)
        terms.push_back({{"term", model.terms()[i]}, {"index", i}, {"idf", model.idf()[i]}});
    return {{"format", "tfidf-v1"}, {"vocab_size", model.vocab_size()}, {"n_docs", model.n_docs()}, {"terms", terms}};
}

inline TfidfModel from_json(const nlohmann::json& j)
{
    try {
        if (j.value("format", std::string()) != "tfidf-v1")
            throw Error("tfidf: expected format \"tfidf-v1\"");
        const auto& arr = j.at("terms");
        std::vector<std::string> terms(arr.size());
        Vector idf(arr.size());
        std::vector<bool> filled(arr.size(), false);
        for (const auto& e : arr) {
            const auto idx = e.at("index").get<size_t>();
            require(idx < arr.size() && !filled[idx], "tfidf: term indices must be 0..n-1 without gaps");
            filled[idx] = true;
            terms[idx] = e.at("term").get<std::string>();
            idf[idx] = e.at("idf").get<double>();
        }
        return TfidfModel(std::move(terms), std::move(idf), j.at("vocab_size").get<size_t>(),
                          j.at("n_docs").get<size_t>());
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("tfidf: malformed model: ") + e.what());
    }
}

inline void save(const TfidfModel& model, const std::filesystem::path& path)
{
    write_file_atomic(path, to_json(model).dump(1) + "\n");
}

inline TfidfModel load(const std::filesystem::path& path)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(path.string() + ": " + e.what());
    }
    return from_json(j);
}

} // namespace plagdet::tfidf
