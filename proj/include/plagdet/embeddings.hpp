#pragma once

// Precomputed sentence embeddings (embstore-v1), pairwise difference
// vectors and PCA reduction.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "plagdet/common.hpp"
#include "plagdet/corpus.hpp"

namespace plagdet::embeddings {

struct EmbeddingRecord {
    std::string id;
    Vector ref;
    Vector inp;

    bool operator==(const EmbeddingRecord&) const = default;
};

/// Per-pair reference/input embeddings. Records keep insertion order so a
/// written store is byte-stable.
class EmbeddingStore {
public:
    EmbeddingStore() = default;
    explicit EmbeddingStore(size_t dim) : dim_(dim) {}

    size_t dim() const { return dim_; }
    size_t size() const { return records_.size(); }
    const std::vector<EmbeddingRecord>& records() const { return records_; }

    void add(EmbeddingRecord rec)
    {
        if (rec.ref.size() != dim_ || rec.inp.size() != dim_)
            throw Error("embedding record '" + rec.id + "': expected " + std::to_string(dim_) +
                        " values per vector, got ref=" + std::to_string(rec.ref.size()) +
                        " inp=" + std::to_string(rec.inp.size()));
        if (!all_finite(rec.ref) || !all_finite(rec.inp))
            throw Error("embedding record '" + rec.id + "': non-finite value");
        if (!index_.emplace(rec.id, records_.size()).second)
            throw Error("embedding record '" + rec.id + "': duplicate id");
        records_.push_back(std::move(rec));
    }

    const EmbeddingRecord* find(const std::string& id) const
    {
        auto it = index_.find(id);
        return it == index_.end() ? nullptr : &records_[it->second];
    }

    const EmbeddingRecord& at(const std::string& id) const
    {
        if (const auto* r = find(id))
            return *r;
        throw Error("no embedding for pair id '" + id + "'");
    }

    bool operator==(const EmbeddingStore& o) const { return dim_ == o.dim_ && records_ == o.records_; }

private:
    size_t dim_ = 0;
    std::vector<EmbeddingRecord> records_;
    std::unordered_map<std::string, size_t> index_;
};

inline EmbeddingStore parse_store(std::string_view content)
{
    auto lines = split_lines(content);
    while (!lines.empty() && lines.back().empty())
        lines.pop_back();
    if (lines.empty())
        throw Error("embstore: empty file");

    size_t dim = 0;
    try {
        auto meta = nlohmann::json::parse(lines[0]);
        if (meta.value("format", std::string()) != "embstore-v1")
            throw Error("embstore: line 1 must declare format \"embstore-v1\"");
        dim = meta.at("dim").get<size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("embstore: bad header: ") + e.what());
    }
    if (dim == 0)
        throw Error("embstore: dim must be positive");

    EmbeddingStore store(dim);
    for (size_t i = 1; i < lines.size(); ++i) {
        EmbeddingRecord rec;
        try {
            auto j = nlohmann::json::parse(lines[i]);
            rec.id = j.at("id").get<std::string>();
            rec.ref = j.at("ref").get<Vector>();
            rec.inp = j.at("inp").get<Vector>();
        } catch (const nlohmann::json::exception& e) {
            throw Error("embstore line " + std::to_string(i + 1) + ": " + e.what());
        }
        store.add(std::move(rec));
    }
    return store;
}

inline EmbeddingStore load_store(const std::filesystem::path& path)
{
    try {
        return parse_store(read_file(path));
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

inline std::string format_store(const EmbeddingStore& store)
{
    std::string out = nlohmann::json{{"format", "embstore-v1"}, {"dim", store.dim()}}.dump();
    out += '\n';
    for (const auto& r : store.records()) {
        nlohmann::json j;
        j["id"] = r.id;
        j["ref"] = r.ref;
        j["inp"] = r.inp;
        out += j.dump();
        out += '\n';
    }
    return out;
}

inline void write_store(const EmbeddingStore& store, const std::filesystem::path& path)
{
    write_file_atomic(path, format_store(store));
}

/// ref - inp, element-wise.
inline Vector difference(std::span<const double> ref, std::span<const double> inp)
{
    if (ref.size() != inp.size())
        throw Error("difference: length mismatch " + std::to_string(ref.size()) + " vs " +
                    std::to_string(inp.size()));
    Vector out(ref.size());
    for (size_t i = 0; i < ref.size(); ++i)
        out[i] = ref[i] - inp[i];
    return out;
}

/// Looks up every dataset id in the store, in dataset order. Any missing id
/// fails the whole join and the error lists them.
inline std::vector<const EmbeddingRecord*> join(const corpus::PairDataset& ds, const EmbeddingStore& store)
{
    std::vector<const EmbeddingRecord*> out;
    out.reserve(ds.size());
    std::vector<std::string> missing;
    for (const auto& p : ds.pairs) {
        const auto* r = store.find(p.id);
        if (!r)
            missing.push_back(p.id);
        out.push_back(r);
    }
    if (!missing.empty()) {
        std::string msg = "missing embeddings for " + std::to_string(missing.size()) + " id(s):";
        for (size_t i = 0; i < missing.size() && i < 20; ++i)
            msg += " " + missing[i];
        if (missing.size() > 20)
            msg += " ...";
        throw Error(msg);
    }
    return out;
}

// ---------------------------------------------------------------------------
// PCA

struct PcaModel {
    Vector mean;
    std::vector<Vector> components; ///< k rows of length dim, orthonormal
    Vector explained_variance;      ///< non-increasing

    size_t dim() const { return mean.size(); }
    size_t k() const { return components.size(); }

    bool operator==(const PcaModel&) const = default;
};

/// Top-k principal axes of the sample covariance (n - 1 denominator).
/// Each axis is signed so its first nonzero entry is positive.
inline PcaModel fit_pca(const std::vector<Vector>& vectors, size_t k)
{
    if (vectors.size() < 2)
        throw Error("fit_pca: need at least 2 vectors");
    const size_t n = vectors.size();
    const size_t dim = vectors.front().size();
    if (dim == 0)
        throw Error("fit_pca: zero-dimensional data");
    if (k < 1 || k > std::min(dim, n - 1))
        throw Error("fit_pca: k=" + std::to_string(k) + " out of range [1, " + std::to_string(std::min(dim, n - 1)) +
                    "]");

    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    for (size_t i = 0; i < n; ++i) {
        if (vectors[i].size() != dim)
            throw Error("fit_pca: vector " + std::to_string(i) + " has length " + std::to_string(vectors[i].size()) +
                        ", expected " + std::to_string(dim));
        for (size_t j = 0; j < dim; ++j)
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = vectors[i][j];
    }
    if (!x.allFinite())
        throw Error("fit_pca: non-finite value");

    const Eigen::RowVectorXd mu = x.colwise().mean();
    x.rowwise() -= mu;
    const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);
    if (cov.trace() <= 0.0)
        throw Error("zero variance");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success)
        throw Error("fit_pca: eigen decomposition failed");
    const Eigen::VectorXd& values = solver.eigenvalues(); // ascending
    const Eigen::MatrixXd& vecs = solver.eigenvectors();

    PcaModel model;
    model.mean.assign(mu.data(), mu.data() + dim);
    const double scale = vecs.cwiseAbs().maxCoeff();
    for (size_t c = 0; c < k; ++c) {
        const Eigen::Index col = static_cast<Eigen::Index>(dim - 1 - c);
        Vector axis(dim);
        for (size_t j = 0; j < dim; ++j)
            axis[j] = vecs(static_cast<Eigen::Index>(j), col);
        for (double v : axis) {
            if (std::abs(v) > 1e-12 * scale) {
                if (v < 0)
                    for (double& a : axis)
                        a = -a;
                break;
            }
        }
        model.components.push_back(std::move(axis));
        model.explained_variance.push_back(std::max(0.0, values(col)));
    }
    return model;
}

/// components * (v - mean)
inline Vector project(const PcaModel& pca, std::span<const double> v)
{
    if (v.size() != pca.dim())
        throw Error("project: expected length " + std::to_string(pca.dim()) + ", got " + std::to_string(v.size()));
    Vector centered(v.begin(), v.end());
    for (size_t j = 0; j < centered.size(); ++j)
        centered[j] -= pca.mean[j];
    Vector out(pca.k());
    for (size_t c = 0; c < pca.k(); ++c)
        out[c] = dot(pca.components[c], centered);
    return out;
}

/// components * v, without centering. project(a) - project(b) equals
/// project_linear(a - b) up to rounding.
inline Vector project_linear(const PcaModel& pca, std::span<const double> v)
{
    if (v.size() != pca.dim())
        throw Error("project: expected length " + std::to_string(pca.dim()) + ", got " + std::to_string(v.size()));
    Vector out(pca.k());
    for (size_t c = 0; c < pca.k(); ++c)
        out[c] = dot(pca.components[c], v);
    return out;
}

/// mean + components^T * z
inline Vector reconstruct(const PcaModel& pca, std::span<const double> z)
{
    require(z.size() == pca.k(), "reconstruct: expected " + std::to_string(pca.k()) + " coordinates");
    Vector out = pca.mean;
    for (size_t c = 0; c < pca.k(); ++c)
        for (size_t j = 0; j < out.size(); ++j)
            out[j] += z[c] * pca.components[c][j];
    return out;
}

inline nlohmann::json to_json(const PcaModel& pca)
{
    return {{"format", "pca-v1"},
            {"dim", pca.dim()},
            {"k", pca.k()},
            {"mean", pca.mean},
            {"explained_variance", pca.explained_variance},
            {"components", pca.components}};
}

inline PcaModel pca_from_json(const nlohmann::json& j)
{
    try {
        if (j.value("format", std::string()) != "pca-v1")
            throw Error("pca: expected format \"pca-v1\"");
        PcaModel m;
        m.mean = j.at("mean").get<Vector>();
        m.explained_variance = j.at("explained_variance").get<Vector>();
        m.components = j.at("components").get<std::vector<Vector>>();
        require(m.mean.size() == j.at("dim").get<size_t>(), "pca: mean length differs from dim");
        require(m.components.size() == j.at("k").get<size_t>(), "pca: component count differs from k");
        require(m.explained_variance.size() == m.k(), "pca: explained_variance length differs from k");
        for (const auto& c : m.components)
            require(c.size() == m.dim(), "pca: component length differs from dim");
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("pca: malformed model: ") + e.what());
    }
}

inline void save_pca(const PcaModel& pca, const std::filesystem::path& path)
{
    write_file_atomic(path, to_json(pca).dump() + "\n");
}

inline PcaModel load_pca(const std::filesystem::path& path)
{
    try {
        return pca_from_json(nlohmann::json::parse(read_file(path)));
    } catch (const nlohmann::json::exception& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

} // namespace plagdet::embeddings
