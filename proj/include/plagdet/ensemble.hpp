#pragma once

// Two-tier weighted soft voting. Each side (sentence-embedding differences,
// TF-IDF differences) averages its members' probabilities with weights that
// sum to one; the two side probabilities are then mixed with W_BERT and
// W_TFIDF = 1 - W_BERT. A pair is plagiarized when P > 0.5.
//
// Config file ("ensemble-v1"):
//   { "format": "ensemble-v1", "W_BERT": w, "W_TFIDF": 1 - w (optional),
//     "bert_dim": D, "tfidf_dim": V, "pca_dim": k (optional),
//     "pca_stage": "pre" | "post", "seed": s, "train_fraction": f,
//     "bert_members":  [{ "name", "algorithm", "hyperparams", "weight", "seed"? }],
//     "tfidf_members": [ ... ], "notes": [ ... ] }
//
// Saved model directory:
//   ensemble.json      config plus member file list
//   tfidf.json         vectorizer
//   pca.json           only when pca_dim is set
//   members/bert_<i>.json, members/tfidf_<j>.json
//   stopwords.txt, suffixes.txt

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <future>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "plagdet/classifiers.hpp"
#include "plagdet/common.hpp"
#include "plagdet/corpus.hpp"
#include "plagdet/embeddings.hpp"
#include "plagdet/eval.hpp"
#include "plagdet/preprocess.hpp"
#include "plagdet/rng.hpp"
#include "plagdet/tfidf.hpp"

namespace plagdet::ensemble {

using classifiers::TrainedClassifier;

inline constexpr double kWeightTolerance = 1e-9;

// ---- arithmetic ----

/// Weighted average of member probabilities; weights must sum to 1.
inline double set_probability(std::span<const double> probs, std::span<const double> weights)
{
    require(!probs.empty(), "set_probability: no members");
    require(probs.size() == weights.size(), "set_probability: " + std::to_string(probs.size()) +
                                                " probabilities vs " + std::to_string(weights.size()) + " weights");
    double sum_w = 0.0, p = 0.0;
    for (size_t i = 0; i < probs.size(); ++i) {
        require(weights[i] >= 0.0, "set_probability: negative weight");
        sum_w += weights[i];
        p += probs[i] * weights[i];
    }
    require(std::abs(sum_w - 1.0) <= kWeightTolerance,
            "set_probability: weights sum to " + eval::format_number(sum_w) + ", expected 1");
    return p;
}

inline double combine(double p_bert, double p_tfidf, double w_bert)
{
    require(w_bert >= 0.0 && w_bert <= 1.0, "combine: W_BERT must lie in [0, 1]");
    require(p_bert >= 0.0 && p_bert <= 1.0 && p_tfidf >= 0.0 && p_tfidf <= 1.0,
            "combine: probabilities must lie in [0, 1]");
    return p_bert * w_bert + p_tfidf * (1.0 - w_bert);
}

inline int classify(double p) { return eval::classify(p); }

/// Scales weights to sum to 1.
inline Vector normalize_weights(std::span<const double> w)
{
    double s = 0.0;
    for (double v : w) {
        require(v >= 0.0, "normalize_weights: negative weight");
        s += v;
    }
    require(s > 0.0, "normalize_weights: weights sum to zero");
    Vector out(w.begin(), w.end());
    for (double& v : out)
        v /= s;
    return out;
}

// ---- configuration ----

struct MemberConfig {
    std::string name;
    classifiers::Algorithm algorithm = classifiers::Algorithm::logreg;
    classifiers::Hyperparams hyperparams;
    double weight = 1.0;
    std::optional<std::uint64_t> seed; ///< default: derived from the config seed

    bool operator==(const MemberConfig&) const = default;
};

enum class PcaStage { pre, post };

struct EnsembleConfig {
    std::vector<MemberConfig> bert_members;
    std::vector<MemberConfig> tfidf_members;
    double w_bert = 0.6;
    double w_tfidf = 0.4;
    size_t bert_dim = 768;
    size_t tfidf_dim = 400;
    std::optional<size_t> pca_dim;
    PcaStage pca_stage = PcaStage::pre;
    std::uint64_t seed = 0;
    double train_fraction = 0.8;
    std::vector<std::string> notes;

    Vector bert_weights() const
    {
        Vector w;
        for (const auto& m : bert_members)
            w.push_back(m.weight);
        return w;
    }
    Vector tfidf_weights() const
    {
        Vector w;
        for (const auto& m : tfidf_members)
            w.push_back(m.weight);
        return w;
    }

    /// Spec for member `index` on a side (0 = bert, 1 = tfidf).
    classifiers::ClassifierSpec member_spec(int side, size_t index) const
    {
        const auto& m = (side == 0 ? bert_members : tfidf_members).at(index);
        const std::uint64_t s = m.seed ? *m.seed : Rng::derive(seed, static_cast<std::uint64_t>(side) * 1000003u + index);
        return classifiers::ClassifierSpec(m.algorithm, m.hyperparams, s);
    }

    bool operator==(const EnsembleConfig&) const = default;
};

namespace detail {

inline void check_side(const std::vector<MemberConfig>& members, const char* side)
{
    require(!members.empty(), std::string(side) + "_members: at least one member is required");
    double sum = 0.0;
    for (const auto& m : members) {
        require(std::isfinite(m.weight) && m.weight >= 0.0,
                std::string(side) + "_members: weight of '" + m.name + "' must be non-negative");
        sum += m.weight;
        classifiers::ClassifierSpec(m.algorithm, m.hyperparams); // rejects unknown hyperparameters
    }
    require(std::abs(sum - 1.0) <= kWeightTolerance,
            std::string(side) + "_members: weights sum to " + eval::format_number(sum) + ", expected 1");
}

} // namespace detail

/// Enforces every config invariant; on success W_TFIDF is set to exactly
/// 1 - W_BERT.
inline void validate(EnsembleConfig& c)
{
    detail::check_side(c.bert_members, "bert");
    detail::check_side(c.tfidf_members, "tfidf");
    require(c.w_bert >= 0.0 && c.w_bert <= 1.0, "W_BERT must lie in [0, 1]");
    require(c.w_tfidf >= 0.0 && c.w_tfidf <= 1.0, "W_TFIDF must lie in [0, 1]");
    require(std::abs(c.w_bert + c.w_tfidf - 1.0) <= kWeightTolerance,
            "W_BERT + W_TFIDF = " + eval::format_number(c.w_bert + c.w_tfidf) + ", expected 1");
    c.w_tfidf = 1.0 - c.w_bert;
    require(c.bert_dim >= 1, "bert_dim must be >= 1");
    require(c.tfidf_dim >= 1, "tfidf_dim must be >= 1");
    if (c.pca_dim)
        require(*c.pca_dim >= 1 && *c.pca_dim <= c.bert_dim, "pca_dim must lie in [1, bert_dim]");
    require(c.train_fraction > 0.0 && c.train_fraction < 1.0, "train_fraction must lie in (0, 1)");
}

inline nlohmann::json member_to_json(const MemberConfig& m)
{
    nlohmann::json j = {{"name", m.name},
                        {"algorithm", classifiers::algorithm_name(m.algorithm)},
                        {"hyperparams", classifiers::hyperparams_to_json(m.hyperparams)},
                        {"weight", m.weight}};
    if (m.seed)
        j["seed"] = *m.seed;
    return j;
}

inline MemberConfig member_from_json(const nlohmann::json& j)
{
    MemberConfig m;
    m.algorithm = classifiers::parse_algorithm(j.at("algorithm").get<std::string>());
    m.name = j.value("name", std::string(classifiers::algorithm_name(m.algorithm)));
    if (j.contains("hyperparams"))
        m.hyperparams = classifiers::hyperparams_from_json(j["hyperparams"]);
    m.weight = j.at("weight").get<double>();
    if (j.contains("seed"))
        m.seed = j["seed"].get<std::uint64_t>();
    return m;
}

inline nlohmann::json to_json(const EnsembleConfig& c)
{
    nlohmann::json bert = nlohmann::json::array(), tf = nlohmann::json::array();
    for (const auto& m : c.bert_members)
        bert.push_back(member_to_json(m));
    for (const auto& m : c.tfidf_members)
        tf.push_back(member_to_json(m));
    nlohmann::json j = {{"format", "ensemble-v1"},
                        {"W_BERT", c.w_bert},
                        {"W_TFIDF", c.w_tfidf},
                        {"bert_dim", c.bert_dim},
                        {"tfidf_dim", c.tfidf_dim},
                        {"pca_stage", c.pca_stage == PcaStage::pre ? "pre" : "post"},
                        {"seed", c.seed},
                        {"train_fraction", c.train_fraction},
                        {"bert_members", bert},
                        {"tfidf_members", tf}};
    if (c.pca_dim)
        j["pca_dim"] = *c.pca_dim;
    if (!c.notes.empty())
        j["notes"] = c.notes;
    return j;
}

/// Parses and validates.
inline EnsembleConfig config_from_json(const nlohmann::json& j)
{
    try {
        if (j.value("format", std::string()) != "ensemble-v1")
            throw Error("ensemble config: expected format \"ensemble-v1\"");
        EnsembleConfig c;
        for (const auto& m : j.at("bert_members"))
            c.bert_members.push_back(member_from_json(m));
        for (const auto& m : j.at("tfidf_members"))
            c.tfidf_members.push_back(member_from_json(m));
        c.w_bert = j.at("W_BERT").get<double>();
        c.w_tfidf = j.contains("W_TFIDF") ? j["W_TFIDF"].get<double>() : 1.0 - c.w_bert;
        c.bert_dim = j.at("bert_dim").get<size_t>();
        c.tfidf_dim = j.at("tfidf_dim").get<size_t>();
        if (j.contains("pca_dim") && !j["pca_dim"].is_null())
            c.pca_dim = j["pca_dim"].get<size_t>();
        const auto stage = j.value("pca_stage", std::string("pre"));
        if (stage != "pre" && stage != "post")
            throw Error("ensemble config: pca_stage must be \"pre\" or \"post\"");
        c.pca_stage = stage == "pre" ? PcaStage::pre : PcaStage::post;
        c.seed = j.value("seed", std::uint64_t{0});
        c.train_fraction = j.value("train_fraction", 0.8);
        c.notes = j.value("notes", std::vector<std::string>{});
        validate(c);
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("ensemble config: ") + e.what());
    }
}

inline EnsembleConfig load_config(const std::filesystem::path& path)
{
    try {
        return config_from_json(nlohmann::json::parse(read_file(path)));
    } catch (const nlohmann::json::exception& e) {
        throw Error(path.string() + ": " + e.what());
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

// ---- model ----

struct EnsembleModel {
    EnsembleConfig config;
    preprocess::Preprocessor preprocessor;
    tfidf::TfidfModel tfidf;
    std::optional<embeddings::PcaModel> pca;
    std::vector<TrainedClassifier> bert_members;
    std::vector<TrainedClassifier> tfidf_members;

    size_t bert_feature_dim() const { return pca ? pca->k() : config.bert_dim; }
};

struct EnsembleOutput {
    double p_bert = 0.0;
    double p_tfidf = 0.0;
    double p = 0.0;
    int label = 0;
    Vector bert_probs;
    Vector tfidf_probs;
};

/// TF-IDF difference vector for a text pair.
inline Vector tfidf_features(const EnsembleModel& m, std::string_view ref_text, std::string_view inp_text)
{
    return tfidf::pair_difference(m.tfidf, m.preprocessor(ref_text), m.preprocessor(inp_text));
}

/// Embedding difference vector, reduced when the model carries a PCA.
/// "pre" reduces both embeddings before subtracting, which equals applying
/// the projection matrix to the difference; "post" centers and projects the
/// difference itself.
inline Vector bert_features(const EnsembleModel& m, std::span<const double> ref_vec, std::span<const double> inp_vec)
{
    require(ref_vec.size() == m.config.bert_dim && inp_vec.size() == m.config.bert_dim,
            "embedding length " + std::to_string(ref_vec.size()) + "/" + std::to_string(inp_vec.size()) +
                " does not match bert_dim " + std::to_string(m.config.bert_dim));
    Vector d = embeddings::difference(ref_vec, inp_vec);
    if (!m.pca)
        return d;
    return m.config.pca_stage == PcaStage::pre ? embeddings::project_linear(*m.pca, d) : embeddings::project(*m.pca, d);
}

/// Combines member probabilities under weight w_bert.
inline EnsembleOutput combine_members(const EnsembleConfig& c, Vector bert_probs, Vector tfidf_probs, double w_bert)
{
    EnsembleOutput out;
    out.p_bert = set_probability(bert_probs, c.bert_weights());
    out.p_tfidf = set_probability(tfidf_probs, c.tfidf_weights());
    out.p = combine(out.p_bert, out.p_tfidf, w_bert);
    out.label = classify(out.p);
    out.bert_probs = std::move(bert_probs);
    out.tfidf_probs = std::move(tfidf_probs);
    return out;
}

inline EnsembleOutput predict_features(const EnsembleModel& m, std::span<const double> bert_x,
                                       std::span<const double> tfidf_x)
{
    Vector bp, tp;
    for (const auto& c : m.bert_members)
        bp.push_back(c.predict_proba(bert_x));
    for (const auto& c : m.tfidf_members)
        tp.push_back(c.predict_proba(tfidf_x));
    return combine_members(m.config, std::move(bp), std::move(tp), m.config.w_bert);
}

inline EnsembleOutput predict_pair(const EnsembleModel& m, std::string_view ref_text, std::string_view inp_text,
                                   std::span<const double> ref_vec, std::span<const double> inp_vec)
{
    return predict_features(m, bert_features(m, ref_vec, inp_vec), tfidf_features(m, ref_text, inp_text));
}

/// Difference-vector matrices of a dataset for both sides.
struct PairFeatures {
    classifiers::FeatureMatrix bert;
    classifiers::FeatureMatrix tfidf;
};

inline PairFeatures featurize(const EnsembleModel& m, const corpus::PairDataset& ds,
                              const embeddings::EmbeddingStore& store)
{
    const auto recs = embeddings::join(ds, store);
    PairFeatures f;
    for (size_t i = 0; i < ds.size(); ++i) {
        const auto& p = ds.pairs[i];
        f.bert.add(bert_features(m, recs[i]->ref, recs[i]->inp), p.label);
        f.tfidf.add(tfidf_features(m, p.reference, p.input), p.label);
    }
    return f;
}

inline std::vector<TrainedClassifier> fit_side(const EnsembleConfig& c, int side,
                                               const classifiers::FeatureMatrix& data)
{
    const size_t n = (side == 0 ? c.bert_members : c.tfidf_members).size();
    std::vector<std::future<TrainedClassifier>> jobs;
    for (size_t i = 0; i < n; ++i)
        jobs.push_back(std::async(std::launch::async, [&, i] { return classifiers::fit(c.member_spec(side, i), data); }));
    std::vector<TrainedClassifier> out;
    for (auto& j : jobs)
        out.push_back(j.get());
    return out;
}

/// Fits the vectorizer on the training texts (each text one document), the
/// optional PCA on training embedding differences, then every member.
inline EnsembleModel train_ensemble(EnsembleConfig config, const corpus::PairDataset& train,
                                    const embeddings::EmbeddingStore& store, preprocess::Preprocessor prep)
{
    validate(config);
    require(!train.empty(), "train_ensemble: empty training set");
    require(store.dim() == config.bert_dim, "embedding store has dim " + std::to_string(store.dim()) +
                                                 " but config bert_dim is " + std::to_string(config.bert_dim));
    const auto recs = embeddings::join(train, store);
    {
        size_t pos = 0;
        for (const auto& p : train.pairs)
            pos += p.label == 1;
        require(pos > 0 && pos < train.size(), "train_ensemble: training labels must contain both classes");
    }

    EnsembleModel m;
    m.config = std::move(config);
    m.preprocessor = std::move(prep);

    std::vector<tfidf::Tokens> docs;
    docs.reserve(2 * train.size());
    for (const auto& p : train.pairs) {
        docs.push_back(m.preprocessor(p.reference));
        docs.push_back(m.preprocessor(p.input));
    }
    m.tfidf = tfidf::fit(docs, m.config.tfidf_dim);

    if (m.config.pca_dim) {
        std::vector<Vector> diffs;
        for (const auto* r : recs)
            diffs.push_back(embeddings::difference(r->ref, r->inp));
        m.pca = embeddings::fit_pca(diffs, *m.config.pca_dim);
    }

    classifiers::FeatureMatrix bert, tf;
    for (size_t i = 0; i < train.size(); ++i) {
        const auto& p = train.pairs[i];
        bert.add(bert_features(m, recs[i]->ref, recs[i]->inp), p.label);
        tf.add(tfidf::pair_difference(m.tfidf, docs[2 * i], docs[2 * i + 1]), p.label);
    }
    m.bert_members = fit_side(m.config, 0, bert);
    m.tfidf_members = fit_side(m.config, 1, tf);
    return m;
}

// ---- batch evaluation and sweep ----

/// Member probabilities for every pair: bert[i][k], tfidf[j][k].
struct MemberProbabilities {
    std::vector<Vector> bert;
    std::vector<Vector> tfidf;
    std::vector<int> labels;

    size_t size() const { return labels.size(); }

    /// Side probabilities for pair k.
    double p_bert(const EnsembleConfig& c, size_t k) const
    {
        Vector p;
        for (const auto& m : bert)
            p.push_back(m[k]);
        return set_probability(p, c.bert_weights());
    }
    double p_tfidf(const EnsembleConfig& c, size_t k) const
    {
        Vector p;
        for (const auto& m : tfidf)
            p.push_back(m[k]);
        return set_probability(p, c.tfidf_weights());
    }
};

inline MemberProbabilities member_probabilities(const EnsembleModel& m, const corpus::PairDataset& ds,
                                                const embeddings::EmbeddingStore& store)
{
    const PairFeatures f = featurize(m, ds, store);
    MemberProbabilities out;
    out.labels = f.bert.labels;
    for (const auto& c : m.bert_members) {
        Vector p;
        for (const auto& row : f.bert.rows)
            p.push_back(c.predict_proba(row));
        out.bert.push_back(std::move(p));
    }
    for (const auto& c : m.tfidf_members) {
        Vector p;
        for (const auto& row : f.tfidf.rows)
            p.push_back(c.predict_proba(row));
        out.tfidf.push_back(std::move(p));
    }
    return out;
}

/// Ensemble probabilities for every pair under weight w_bert.
inline Vector ensemble_probabilities(const EnsembleConfig& c, const MemberProbabilities& mp, double w_bert)
{
    Vector p(mp.size());
    for (size_t k = 0; k < mp.size(); ++k)
        p[k] = combine(mp.p_bert(c, k), mp.p_tfidf(c, k), w_bert);
    return p;
}

inline eval::SweepRow sweep_row(const EnsembleConfig& c, const MemberProbabilities& mp, double w_bert)
{
    const Vector p = ensemble_probabilities(c, mp, w_bert);
    const auto r = eval::evaluate(p, mp.labels);
    return {w_bert, r.m, r.auc};
}

/// Re-weights fixed member outputs; no member is refitted.
inline std::vector<eval::SweepRow> weight_sweep(const EnsembleConfig& c, const MemberProbabilities& mp,
                                                std::span<const double> grid)
{
    require(!grid.empty(), "weight_sweep: empty grid");
    for (double w : grid)
        require(w >= 0.0 && w <= 1.0, "weight_sweep: grid value " + eval::format_number(w) + " outside [0, 1]");
    std::vector<eval::SweepRow> rows;
    for (double w : grid)
        rows.push_back(sweep_row(c, mp, w));
    return rows;
}

inline std::vector<eval::SweepRow> weight_sweep(const EnsembleModel& m, const corpus::PairDataset& test,
                                                const embeddings::EmbeddingStore& store, std::span<const double> grid)
{
    require(!grid.empty(), "weight_sweep: empty grid");
    return weight_sweep(m.config, member_probabilities(m, test, store), grid);
}

// ---- persistence ----

inline void save_model(const EnsembleModel& m, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir / "members");
    nlohmann::json j = {{"format", "ensemble-model-v1"}, {"config", to_json(m.config)}};
    nlohmann::json bert = nlohmann::json::array(), tf = nlohmann::json::array();
    for (size_t i = 0; i < m.bert_members.size(); ++i) {
        const std::string name = "members/bert_" + std::to_string(i) + ".json";
        classifiers::save_model(m.bert_members[i], dir / name);
        bert.push_back(name);
    }
    for (size_t i = 0; i < m.tfidf_members.size(); ++i) {
        const std::string name = "members/tfidf_" + std::to_string(i) + ".json";
        classifiers::save_model(m.tfidf_members[i], dir / name);
        tf.push_back(name);
    }
    j["bert_members"] = bert;
    j["tfidf_members"] = tf;
    tfidf::save(m.tfidf, dir / "tfidf.json");
    if (m.pca)
        embeddings::save_pca(*m.pca, dir / "pca.json");
    else
        std::filesystem::remove(dir / "pca.json");
    write_file_atomic(dir / "stopwords.txt", m.preprocessor.stopwords.format());
    write_file_atomic(dir / "suffixes.txt", m.preprocessor.suffixes.format());
    write_file_atomic(dir / "ensemble.json", j.dump(1) + "\n");
}

inline EnsembleModel load_model(const std::filesystem::path& dir)
{
    const auto path = dir / "ensemble.json";
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(path.string() + ": " + e.what());
    }
    if (j.value("format", std::string()) != "ensemble-model-v1")
        throw Error(path.string() + ": expected format \"ensemble-model-v1\"");
    EnsembleModel m;
    m.config = config_from_json(j.at("config"));
    for (const auto& f : j.at("bert_members"))
        m.bert_members.push_back(classifiers::load_model(dir / f.get<std::string>()));
    for (const auto& f : j.at("tfidf_members"))
        m.tfidf_members.push_back(classifiers::load_model(dir / f.get<std::string>()));
    require(m.bert_members.size() == m.config.bert_members.size() &&
                m.tfidf_members.size() == m.config.tfidf_members.size(),
            path.string() + ": member files do not match the config");
    m.tfidf = tfidf::load(dir / "tfidf.json");
    if (m.config.pca_dim)
        m.pca = embeddings::load_pca(dir / "pca.json");
    m.preprocessor.stopwords = preprocess::StopwordList::load(dir / "stopwords.txt");
    m.preprocessor.suffixes = preprocess::SuffixRuleTable::load(dir / "suffixes.txt");
    for (const auto& c : m.bert_members)
        require(c.dim() == m.bert_feature_dim(), path.string() + ": bert member dimension mismatch");
    for (const auto& c : m.tfidf_members)
        require(c.dim() == m.tfidf.vocab_size(), path.string() + ": tfidf member dimension mismatch");
    return m;
}

} // namespace plagdet::ensemble
