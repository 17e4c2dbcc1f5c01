#pragma once

// Labeled (reference, input, label) text pairs: TSV loading and writing,
// and the seeded shuffle-then-cut train/test split.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "plagdet/common.hpp"
#include "plagdet/rng.hpp"

namespace plagdet::corpus {

struct TextPair {
    std::string id;
    std::string reference;
    std::string input;
    int label = 0; ///< 1 = input is plagiarized from reference

    bool operator==(const TextPair&) const = default;
};

struct PairDataset {
    std::string name;
    std::vector<TextPair> pairs;

    size_t size() const { return pairs.size(); }
    bool empty() const { return pairs.empty(); }

    std::vector<int> labels() const
    {
        std::vector<int> out;
        out.reserve(pairs.size());
        for (const auto& p : pairs)
            out.push_back(p.label);
        return out;
    }
};

struct SplitSpec {
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
};

inline constexpr std::string_view kPairHeader = "id\treference\tinput\tlabel";

/// Checks id uniqueness and labels; throws Error on the first violation.
inline void validate(const PairDataset& ds)
{
    std::unordered_set<std::string> seen;
    seen.reserve(ds.pairs.size());
    for (const auto& p : ds.pairs) {
        if (p.label != 0 && p.label != 1)
            throw Error("pair '" + p.id + "': label must be 0 or 1");
        if (!seen.insert(p.id).second)
            throw Error("duplicate pair id '" + p.id + "'");
        for (const std::string* f : {&p.id, &p.reference, &p.input})
            if (f->find_first_of("\t\n") != std::string::npos)
                throw Error("pair '" + p.id + "': tab or newline inside a text field");
    }
}

inline PairDataset parse_pairs(std::string_view content, std::string name)
{
    auto lines = split_lines(content);
    while (!lines.empty() && lines.back().empty())
        lines.pop_back();
    if (lines.empty() || lines.front() != kPairHeader)
        throw Error("line 1: expected header 'id<TAB>reference<TAB>input<TAB>label'");

    PairDataset ds;
    ds.name = std::move(name);
    ds.pairs.reserve(lines.size() - 1);
    std::unordered_set<std::string> seen;
    for (size_t i = 1; i < lines.size(); ++i) {
        const size_t lineno = i + 1;
        auto cols = split_char(lines[i], '\t');
        if (cols.size() != 4)
            throw Error("line " + std::to_string(lineno) + ": expected 4 tab-separated columns, got " +
                        std::to_string(cols.size()));
        if (cols[3] != "0" && cols[3] != "1")
            throw Error("line " + std::to_string(lineno) + ": label must be 0 or 1, got '" + cols[3] + "'");
        if (cols[0].empty())
            throw Error("line " + std::to_string(lineno) + ": empty id");
        if (!seen.insert(cols[0]).second)
            throw Error("line " + std::to_string(lineno) + ": duplicate id '" + cols[0] + "'");
        ds.pairs.push_back({std::move(cols[0]), std::move(cols[1]), std::move(cols[2]), cols[3] == "1" ? 1 : 0});
    }
    return ds;
}

inline PairDataset load_pairs(const std::filesystem::path& path)
{
    try {
        return parse_pairs(read_file(path), path.stem().string());
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

/// Canonical form: header, one '\n'-terminated row per pair.
inline std::string format_pairs(const PairDataset& ds)
{
    validate(ds);
    std::string out(kPairHeader);
    out += '\n';
    for (const auto& p : ds.pairs) {
        out += p.id;
        out += '\t';
        out += p.reference;
        out += '\t';
        out += p.input;
        out += '\t';
        out += p.label == 1 ? '1' : '0';
        out += '\n';
    }
    return out;
}

inline void write_pairs(const PairDataset& ds, const std::filesystem::path& path)
{
    write_file_atomic(path, format_pairs(ds));
}

struct Split {
    PairDataset train;
    PairDataset test;
};

/// Shuffles pair order with the seeded PRNG and cuts at floor(fraction * N).
inline Split split(const PairDataset& ds, const SplitSpec& spec)
{
    if (ds.size() < 2)
        throw Error("split needs at least 2 pairs");
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
        throw Error("train_fraction must lie in (0, 1)");
    const auto n_train = static_cast<size_t>(std::floor(spec.train_fraction * static_cast<double>(ds.size())));
    if (n_train == 0 || n_train == ds.size())
        throw Error("train_fraction " + std::to_string(spec.train_fraction) + " leaves an empty side for " +
                    std::to_string(ds.size()) + " pairs");

    std::vector<size_t> order(ds.size());
    for (size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    Rng rng(spec.seed);
    rng.shuffle(std::span<size_t>(order));

    Split out;
    out.train.name = ds.name + ".train";
    out.test.name = ds.name + ".test";
    out.train.pairs.reserve(n_train);
    out.test.pairs.reserve(ds.size() - n_train);
    for (size_t k = 0; k < order.size(); ++k)
        (k < n_train ? out.train : out.test).pairs.push_back(ds.pairs[order[k]]);
    return out;
}

/// Subset of `ds` with the given ids, in `ids` order. Unknown ids are an error.
inline PairDataset select(const PairDataset& ds, const std::vector<std::string>& ids, std::string name)
{
    std::unordered_map<std::string, size_t> index;
    index.reserve(ds.size());
    for (size_t i = 0; i < ds.size(); ++i)
        index.emplace(ds.pairs[i].id, i);
    PairDataset out;
    out.name = std::move(name);
    out.pairs.reserve(ids.size());
    std::string missing;
    for (const auto& id : ids) {
        auto it = index.find(id);
        if (it == index.end()) {
            missing += missing.empty() ? id : ", " + id;
            continue;
        }
        out.pairs.push_back(ds.pairs[it->second]);
    }
    if (!missing.empty())
        throw Error("dataset '" + ds.name + "' lacks ids: " + missing);
    return out;
}

} // namespace plagdet::corpus
