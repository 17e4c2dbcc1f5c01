#pragma once

// Classifier catalog and hyperparameter schema. Hyperparameter names follow
// the scikit-learn / XGBoost / LightGBM vocabulary so that tuned settings
// can be copied over; unknown names are rejected.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "plagdet/common.hpp"

namespace plagdet::classifiers {

enum class Algorithm { logreg, gnb, cart, rf, adaboost, gbt, svc };

inline constexpr Algorithm kAllAlgorithms[] = {Algorithm::logreg, Algorithm::gnb,      Algorithm::cart,
                                               Algorithm::rf,     Algorithm::adaboost, Algorithm::gbt,
                                               Algorithm::svc};

inline std::string_view algorithm_name(Algorithm a)
{
    switch (a) {
    case Algorithm::logreg: return "logreg";
    case Algorithm::gnb: return "gnb";
    case Algorithm::cart: return "cart";
    case Algorithm::rf: return "rf";
    case Algorithm::adaboost: return "adaboost";
    case Algorithm::gbt: return "gbt";
    case Algorithm::svc: return "svc";
    }
    return "?";
}

inline Algorithm parse_algorithm(std::string_view s)
{
    for (Algorithm a : kAllAlgorithms)
        if (algorithm_name(a) == s)
            return a;
    throw Error("unknown algorithm '" + std::string(s) + "' (expected logreg, gnb, cart, rf, adaboost, gbt or svc)");
}

using ParamValue = std::variant<double, std::string>;
using Hyperparams = std::map<std::string, ParamValue>;

struct ParamSchema {
    std::string_view name;
    ParamValue default_value;
    std::vector<std::string_view> allowed_strings; ///< empty: numbers only
    bool numbers_allowed = true;
};

inline const std::vector<ParamSchema>& schema(Algorithm a)
{
    using S = std::vector<ParamSchema>;
    static const S logreg = {
        {"C", 1.0, {}},
        {"penalty", std::string("l2"), {"l2"}, false},
        {"max_iter", 10000.0, {}},
        {"tol", 1e-6, {}},
    };
    static const S gnb = {{"var_smoothing", 1e-9, {}}};
    static const S cart = {
        {"max_depth", 0.0, {}}, // 0 = unlimited
        {"min_samples_leaf", 1.0, {}},
        {"min_samples_split", 2.0, {}},
    };
    static const S rf = {
        {"n_estimators", 100.0, {}},
        {"max_depth", 0.0, {}},
        {"min_samples_leaf", 1.0, {}},
        {"min_samples_split", 2.0, {}},
    };
    static const S adaboost = {
        {"n_estimators", 50.0, {}},
        {"learning_rate", 1.0, {}},
    };
    static const S gbt = {
        {"n_estimators", 100.0, {}},
        {"learning_rate", 0.1, {}},
        {"num_leaves", 31.0, {}},
        {"max_leaves", 0.0, {}}, // alias of num_leaves; 0 = unset
        {"max_depth", 0.0, {}},
        {"min_child_weight", 1e-3, {}},
        {"min_child_samples", 1.0, {}},
        {"colsample_bytree", 1.0, {}},
        {"colsample_bylevel", 1.0, {}},
        {"reg_alpha", 0.0, {}},
        {"reg_lambda", 1.0, {}},
        {"max_bin", 0.0, {}}, // accepted, ignored (exact splits)
        {"grow_policy", std::string("lossguide"), {"lossguide"}, false},
    };
    static const S svc = {
        {"C", 1.0, {}},
        {"kernel", std::string("poly"), {"linear", "poly", "rbf"}, false},
        {"degree", 2.0, {}},
        {"gamma", std::string("scale"), {"scale", "auto"}, true},
        {"coef0", 0.0, {}},
        {"tol", 1e-3, {}},
        {"max_iter", -1.0, {}}, // <= 0 = no cap
    };
    switch (a) {
    case Algorithm::logreg: return logreg;
    case Algorithm::gnb: return gnb;
    case Algorithm::cart: return cart;
    case Algorithm::rf: return rf;
    case Algorithm::adaboost: return adaboost;
    case Algorithm::gbt: return gbt;
    case Algorithm::svc: return svc;
    }
    return logreg;
}

class ClassifierSpec {
public:
    ClassifierSpec() = default;

    ClassifierSpec(Algorithm algorithm, Hyperparams hyperparams = {}, std::uint64_t seed = 0)
        : algorithm_(algorithm), hyperparams_(std::move(hyperparams)), seed_(seed)
    {
        const auto& sch = schema(algorithm_);
        for (const auto& [key, value] : hyperparams_) {
            const ParamSchema* entry = nullptr;
            for (const auto& s : sch)
                if (s.name == key)
                    entry = &s;
            if (!entry)
                throw Error("unknown hyperparameter '" + key + "' for " + std::string(algorithm_name(algorithm_)));
            if (const auto* num = std::get_if<double>(&value)) {
                if (!entry->numbers_allowed)
                    throw Error("hyperparameter '" + key + "' expects a string");
                if (!std::isfinite(*num))
                    throw Error("hyperparameter '" + key + "' must be finite");
            } else {
                const auto& str = std::get<std::string>(value);
                bool ok = false;
                for (auto allowed : entry->allowed_strings)
                    ok = ok || allowed == str;
                if (!ok)
                    throw Error("hyperparameter '" + key + "' has unsupported value '" + str + "'");
            }
        }
    }

    Algorithm algorithm() const { return algorithm_; }
    const Hyperparams& hyperparams() const { return hyperparams_; }
    std::uint64_t seed() const { return seed_; }

    ClassifierSpec with_seed(std::uint64_t seed) const
    {
        ClassifierSpec s = *this;
        s.seed_ = seed;
        return s;
    }

    /// Explicit value or schema default.
    ParamValue get(std::string_view key) const
    {
        if (auto it = hyperparams_.find(std::string(key)); it != hyperparams_.end())
            return it->second;
        for (const auto& s : schema(algorithm_))
            if (s.name == key)
                return s.default_value;
        throw Error("no hyperparameter '" + std::string(key) + "' for " + std::string(algorithm_name(algorithm_)));
    }

    double number(std::string_view key) const
    {
        auto v = get(key);
        if (const auto* d = std::get_if<double>(&v))
            return *d;
        throw Error("hyperparameter '" + std::string(key) + "' is not numeric");
    }

    std::string string(std::string_view key) const
    {
        auto v = get(key);
        if (const auto* s = std::get_if<std::string>(&v))
            return *s;
        throw Error("hyperparameter '" + std::string(key) + "' is not a string");
    }

    bool is_set(std::string_view key) const { return hyperparams_.count(std::string(key)) != 0; }

    bool operator==(const ClassifierSpec&) const = default;

private:
    Algorithm algorithm_ = Algorithm::logreg;
    Hyperparams hyperparams_;
    std::uint64_t seed_ = 0;
};

inline nlohmann::json hyperparams_to_json(const Hyperparams& hp)
{
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : hp) {
        if (const auto* d = std::get_if<double>(&v))
            j[k] = *d;
        else
            j[k] = std::get<std::string>(v);
    }
    return j;
}

inline Hyperparams hyperparams_from_json(const nlohmann::json& j)
{
    if (!j.is_object())
        throw Error("hyperparams must be an object");
    Hyperparams hp;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it->is_number())
            hp[it.key()] = it->get<double>();
        else if (it->is_string())
            hp[it.key()] = it->get<std::string>();
        else
            throw Error("hyperparameter '" + it.key() + "' must be a number or string");
    }
    return hp;
}

} // namespace plagdet::classifiers
