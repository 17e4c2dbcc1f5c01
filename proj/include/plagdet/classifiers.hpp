#pragma once

// Probabilistic binary classifiers over difference vectors.
//
// Model file layout ("clf-v1"):
//   { "format": "clf-v1", "algorithm": "<name>", "hyperparams": {...},
//     "seed": <uint>, "dim": <d>, "warnings": [...], "params": {...} }
// with params per algorithm:
//   logreg    { "weights": [d], "bias" }
//   gnb       { "prior": [2], "mean": [[d],[d]], "var": [[d],[d]], "constant_class" }
//   cart      { "tree": <tree>, "constant_class" }
//   rf        { "trees": [<tree>...] }
//   adaboost  { "stumps": [<tree>...], "alphas": [...] }
//   gbt       { "base_score", "trees": [<tree>...] }
//   svc       { "kernel", "degree", "gamma", "coef0", "support": [[d]...],
//               "coef": [...], "rho", "platt_a", "platt_b" }
// A <tree> is { "feature": [...], "threshold": [...], "left": [...],
// "right": [...], "value": [...] }, one entry per node, root first,
// feature -1 for leaves.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "plagdet/classifiers/boosting.hpp"
#include "plagdet/classifiers/feature_matrix.hpp"
#include "plagdet/classifiers/logistic.hpp"
#include "plagdet/classifiers/naive_bayes.hpp"
#include "plagdet/classifiers/spec.hpp"
#include "plagdet/classifiers/svm.hpp"
#include "plagdet/classifiers/tree.hpp"
#include "plagdet/common.hpp"

namespace plagdet::classifiers {

using ModelParams =
    std::variant<LinearModel, GaussianNBModel, TreeModel, ForestModel, AdaBoostModel, BoostedModel, SvmModel>;

class TrainedClassifier {
public:
    TrainedClassifier() = default;
    TrainedClassifier(ClassifierSpec spec, ModelParams params, size_t dim, std::vector<std::string> warnings = {})
        : spec_(std::move(spec)), params_(std::move(params)), dim_(dim), warnings_(std::move(warnings))
    {
    }

    /// A logreg with zero weights whose output is p everywhere.
    static TrainedClassifier constant(double p, size_t dim)
    {
        require(p > 0.0 && p < 1.0, "constant classifier: p must lie in (0, 1)");
        LinearModel m{Vector(dim, 0.0), std::log(p / (1.0 - p))};
        return {ClassifierSpec(Algorithm::logreg), m, dim};
    }

    double predict_proba(std::span<const double> x) const
    {
        if (x.size() != dim_)
            throw Error("predict_proba: input has length " + std::to_string(x.size()) + ", model expects " +
                        std::to_string(dim_));
        require(all_finite(x), "predict_proba: non-finite input");
        const double p = std::visit([&](const auto& m) { return m.predict_proba(x); }, params_);
        return std::clamp(p, 0.0, 1.0);
    }

    const ClassifierSpec& spec() const { return spec_; }
    const ModelParams& params() const { return params_; }
    size_t dim() const { return dim_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    bool operator==(const TrainedClassifier&) const = default;

private:
    ClassifierSpec spec_;
    ModelParams params_;
    size_t dim_ = 0;
    std::vector<std::string> warnings_;
};

namespace detail {

inline size_t count_param(const ClassifierSpec& s, std::string_view key, double min_value)
{
    const double v = s.number(key);
    if (!(v >= min_value) || v != std::floor(v))
        throw Error(std::string(algorithm_name(s.algorithm())) + ": " + std::string(key) +
                    " must be an integer >= " + std::to_string(static_cast<long long>(min_value)));
    return static_cast<size_t>(v);
}

inline CartOptions cart_options(const ClassifierSpec& s)
{
    CartOptions o;
    o.max_depth = count_param(s, "max_depth", 0);
    o.min_samples_leaf = count_param(s, "min_samples_leaf", 1);
    o.min_samples_split = count_param(s, "min_samples_split", 2);
    return o;
}

inline GbtOptions gbt_options(const ClassifierSpec& s)
{
    GbtOptions o;
    o.n_estimators = count_param(s, "n_estimators", 0);
    o.learning_rate = s.number("learning_rate");
    o.max_leaves = s.is_set("max_leaves") && !s.is_set("num_leaves") ? count_param(s, "max_leaves", 2)
                                                                       : count_param(s, "num_leaves", 2);
    o.max_depth = count_param(s, "max_depth", 0);
    o.min_child_weight = s.number("min_child_weight");
    o.min_child_samples = count_param(s, "min_child_samples", 1);
    o.colsample_bytree = s.number("colsample_bytree");
    o.colsample_bylevel = s.number("colsample_bylevel");
    o.reg_alpha = s.number("reg_alpha");
    o.reg_lambda = s.number("reg_lambda");
    require(o.min_child_weight >= 0.0, "gbt: min_child_weight must be non-negative");
    return o;
}

inline Kernel svc_kernel(const ClassifierSpec& s, const FeatureMatrix& data)
{
    Kernel k;
    k.type = parse_kernel(s.string("kernel"));
    k.degree = static_cast<int>(count_param(s, "degree", 1));
    k.coef0 = s.number("coef0");
    const ParamValue g = s.get("gamma");
    if (const auto* v = std::get_if<double>(&g)) {
        require(*v > 0.0, "svc: gamma must be positive");
        k.gamma = *v;
    } else if (std::get<std::string>(g) == "auto") {
        k.gamma = 1.0 / static_cast<double>(data.dim());
    } else {
        k.gamma = gamma_scale(data);
    }
    return k;
}

} // namespace detail

/// Trains on a canonical row order, so results do not depend on the order
/// of `data`.
inline TrainedClassifier fit(const ClassifierSpec& spec, const FeatureMatrix& input)
{
    input.validate();
    const FeatureMatrix data = canonical_order(input);
    const std::string name(algorithm_name(spec.algorithm()));
    std::vector<std::string> warnings;

    if (!data.has_both_classes()) {
        switch (spec.algorithm()) {
        case Algorithm::gnb:
        case Algorithm::cart:
            warnings.push_back(name + ": training data has a single class; model is a constant predictor");
            break;
        default:
            throw Error(name + ": training data must contain both classes");
        }
    }

    ModelParams params;
    switch (spec.algorithm()) {
    case Algorithm::logreg: {
        LogregOptions o;
        o.C = spec.number("C");
        o.tol = spec.number("tol");
        o.max_iter = detail::count_param(spec, "max_iter", 1);
        auto r = fit_logreg(data, o);
        if (!r.converged)
            warnings.push_back("logreg: stopped after " + std::to_string(o.max_iter) +
                               " iterations with gradient norm " + std::to_string(r.grad_inf_norm));
        params = std::move(r.model);
        break;
    }
    case Algorithm::gnb: {
        const double vs = spec.number("var_smoothing");
        require(vs >= 0.0, "gnb: var_smoothing must be non-negative");
        params = fit_gnb(data, vs);
        break;
    }
    case Algorithm::cart: params = fit_cart(data, detail::cart_options(spec)); break;
    case Algorithm::rf:
        params = fit_rf(data, detail::count_param(spec, "n_estimators", 1), detail::cart_options(spec), spec.seed());
        break;
    case Algorithm::adaboost:
        params = fit_adaboost(data, detail::count_param(spec, "n_estimators", 1), spec.number("learning_rate"));
        break;
    case Algorithm::gbt:
        if (spec.is_set("max_bin"))
            warnings.push_back("gbt: max_bin is ignored (exact split search)");
        params = fit_gbt(data, detail::gbt_options(spec), spec.seed());
        break;
    case Algorithm::svc: {
        SvcOptions o;
        o.kernel = detail::svc_kernel(spec, data);
        o.smo.C = spec.number("C");
        o.smo.tol = spec.number("tol");
        require(o.smo.tol > 0.0, "svc: tol must be positive");
        o.smo.max_iter = static_cast<long long>(spec.number("max_iter"));
        auto r = fit_svc(data, o, spec.seed());
        warnings.insert(warnings.end(), r.warnings.begin(), r.warnings.end());
        params = std::move(r.model);
        break;
    }
    }
    return {spec, std::move(params), data.dim(), std::move(warnings)};
}

// ---- serialization ----

namespace detail {

inline nlohmann::json tree_to_json(const Tree& t)
{
    nlohmann::json f = nlohmann::json::array(), th = nlohmann::json::array(), l = nlohmann::json::array(),
                   r = nlohmann::json::array(), v = nlohmann::json::array();
    for (const auto& n : t.nodes) {
        f.push_back(n.feature);
        th.push_back(n.threshold);
        l.push_back(n.left);
        r.push_back(n.right);
        v.push_back(n.value);
    }
    return {{"feature", f}, {"threshold", th}, {"left", l}, {"right", r}, {"value", v}};
}

inline Tree tree_from_json(const nlohmann::json& j, size_t dim)
{
    const auto f = j.at("feature").get<std::vector<int>>();
    const auto th = j.at("threshold").get<Vector>();
    const auto l = j.at("left").get<std::vector<int>>();
    const auto r = j.at("right").get<std::vector<int>>();
    const auto v = j.at("value").get<Vector>();
    const size_t n = f.size();
    if (n == 0 || th.size() != n || l.size() != n || r.size() != n || v.size() != n)
        throw Error("tree: node arrays are empty or differ in length");
    Tree t;
    t.nodes.resize(n);
    for (size_t i = 0; i < n; ++i) {
        t.nodes[i] = {f[i], th[i], l[i], r[i], v[i]};
        if (f[i] >= 0) {
            // children must point forward so evaluation terminates
            if (static_cast<size_t>(f[i]) >= dim || l[i] <= static_cast<int>(i) || r[i] <= static_cast<int>(i) ||
                static_cast<size_t>(l[i]) >= n || static_cast<size_t>(r[i]) >= n)
                throw Error("tree: node " + std::to_string(i) + " has invalid feature or child index");
        } else if (f[i] != -1) {
            throw Error("tree: node " + std::to_string(i) + " has invalid feature index");
        }
    }
    return t;
}

inline nlohmann::json trees_to_json(const std::vector<Tree>& ts)
{
    nlohmann::json a = nlohmann::json::array();
    for (const auto& t : ts)
        a.push_back(tree_to_json(t));
    return a;
}

inline std::vector<Tree> trees_from_json(const nlohmann::json& j, size_t dim)
{
    std::vector<Tree> out;
    for (const auto& t : j)
        out.push_back(tree_from_json(t, dim));
    return out;
}

inline void check_len(const Vector& v, size_t dim, const char* what)
{
    if (v.size() != dim)
        throw Error(std::string(what) + " has length " + std::to_string(v.size()) + ", expected " + std::to_string(dim));
}

struct ParamsToJson {
    nlohmann::json operator()(const LinearModel& m) const { return {{"weights", m.weights}, {"bias", m.bias}}; }
    nlohmann::json operator()(const GaussianNBModel& m) const
    {
        return {{"prior", m.prior}, {"mean", m.mean}, {"var", m.var}, {"constant_class", m.constant_class}};
    }
    nlohmann::json operator()(const TreeModel& m) const
    {
        return {{"tree", tree_to_json(m.tree)}, {"constant_class", m.constant_class}};
    }
    nlohmann::json operator()(const ForestModel& m) const { return {{"trees", trees_to_json(m.trees)}}; }
    nlohmann::json operator()(const AdaBoostModel& m) const
    {
        return {{"stumps", trees_to_json(m.stumps)}, {"alphas", m.alphas}};
    }
    nlohmann::json operator()(const BoostedModel& m) const
    {
        return {{"base_score", m.base_score}, {"trees", trees_to_json(m.trees)}};
    }
    nlohmann::json operator()(const SvmModel& m) const
    {
        return {{"kernel", kernel_name(m.kernel.type)},
                {"degree", m.kernel.degree},
                {"gamma", m.kernel.gamma},
                {"coef0", m.kernel.coef0},
                {"support", m.support},
                {"coef", m.coef},
                {"rho", m.rho},
                {"platt_a", m.platt_a},
                {"platt_b", m.platt_b}};
    }
};

inline ModelParams params_from_json(Algorithm a, const nlohmann::json& p, size_t dim)
{
    switch (a) {
    case Algorithm::logreg: {
        LinearModel m{p.at("weights").get<Vector>(), p.at("bias").get<double>()};
        check_len(m.weights, dim, "weights");
        return m;
    }
    case Algorithm::gnb: {
        GaussianNBModel m;
        m.prior = p.at("prior").get<std::array<double, 2>>();
        m.mean = p.at("mean").get<std::array<Vector, 2>>();
        m.var = p.at("var").get<std::array<Vector, 2>>();
        m.constant_class = p.at("constant_class").get<int>();
        if (m.constant_class < 0)
            for (int c = 0; c < 2; ++c) {
                check_len(m.mean[c], dim, "mean");
                check_len(m.var[c], dim, "var");
                for (double v : m.var[c])
                    require(v > 0.0, "gnb: variances must be positive");
            }
        return m;
    }
    case Algorithm::cart: {
        TreeModel m{tree_from_json(p.at("tree"), dim), p.at("constant_class").get<int>()};
        return m;
    }
    case Algorithm::rf: {
        ForestModel m{trees_from_json(p.at("trees"), dim)};
        require(!m.trees.empty(), "rf: no trees");
        return m;
    }
    case Algorithm::adaboost: {
        AdaBoostModel m{trees_from_json(p.at("stumps"), dim), p.at("alphas").get<Vector>()};
        require(m.stumps.size() == m.alphas.size(), "adaboost: stumps and alphas differ in count");
        return m;
    }
    case Algorithm::gbt: {
        BoostedModel m{p.at("base_score").get<double>(), trees_from_json(p.at("trees"), dim)};
        return m;
    }
    case Algorithm::svc: {
        SvmModel m;
        m.kernel.type = parse_kernel(p.at("kernel").get<std::string>());
        m.kernel.degree = p.at("degree").get<int>();
        m.kernel.gamma = p.at("gamma").get<double>();
        m.kernel.coef0 = p.at("coef0").get<double>();
        m.support = p.at("support").get<std::vector<Vector>>();
        m.coef = p.at("coef").get<Vector>();
        m.rho = p.at("rho").get<double>();
        m.platt_a = p.at("platt_a").get<double>();
        m.platt_b = p.at("platt_b").get<double>();
        require(m.support.size() == m.coef.size(), "svc: support vectors and coefficients differ in count");
        for (const auto& s : m.support)
            check_len(s, dim, "support vector");
        return m;
    }
    }
    throw Error("unknown algorithm");
}

} // namespace detail

inline constexpr const char* kClassifierFormat = "clf-v1";

inline nlohmann::json to_json(const TrainedClassifier& m)
{
    return {{"format", kClassifierFormat},
            {"algorithm", algorithm_name(m.spec().algorithm())},
            {"hyperparams", hyperparams_to_json(m.spec().hyperparams())},
            {"seed", m.spec().seed()},
            {"dim", m.dim()},
            {"warnings", m.warnings()},
            {"params", std::visit(detail::ParamsToJson{}, m.params())}};
}

inline TrainedClassifier classifier_from_json(const nlohmann::json& j)
{
    if (!j.is_object() || !j.contains("format") || !j["format"].is_string())
        throw Error("classifier: missing format tag");
    const auto fmt = j["format"].get<std::string>();
    if (fmt != kClassifierFormat)
        throw Error("classifier: expected format \"" + std::string(kClassifierFormat) + "\", found \"" + fmt + "\"");
    try {
        const Algorithm a = parse_algorithm(j.at("algorithm").get<std::string>());
        ClassifierSpec spec(a, hyperparams_from_json(j.at("hyperparams")), j.at("seed").get<std::uint64_t>());
        const auto dim = j.at("dim").get<size_t>();
        require(dim >= 1, "dim must be >= 1");
        auto warnings = j.value("warnings", std::vector<std::string>{});
        return {spec, detail::params_from_json(a, j.at("params"), dim), dim, std::move(warnings)};
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("classifier: corrupted fields: ") + e.what());
    }
}

inline void save_model(const TrainedClassifier& m, const std::filesystem::path& path)
{
    write_file_atomic(path, to_json(m).dump(1) + "\n");
}

inline TrainedClassifier load_model(const std::filesystem::path& path)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(path.string() + ": " + e.what());
    }
    try {
        return classifier_from_json(j);
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

} // namespace plagdet::classifiers
