// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "plagdet/baselines.hpp"
#include "plagdet/classifiers.hpp"
#include "plagdet/cli.hpp"
#include "plagdet/embeddings.hpp"
#include "plagdet/ensemble.hpp"
#include "plagdet/eval.hpp"
#include "plagdet/synth.hpp"
#include "plagdet/tfidf.hpp"
#include "support.hpp"

using namespace plagdet;
using classifiers::Algorithm;
using classifiers::ClassifierSpec;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;

    void check(bool cond, const std::string& what)
    {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
};

struct Criterion {
    std::string name;
    double budget_s; ///< 0 = no budget
    std::function<Outcome()> body;
};

std::filesystem::path preset_path() { return fixture::source_dir() / "presets" / "table7.json"; }

std::string dir_contents(const std::filesystem::path& dir)
{
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
        if (e.is_regular_file())
            files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::string out;
    for (const auto& p : files)
        out += std::filesystem::relative(p, dir).string() + "\n" + read_file(p);
    return out;
}

std::pair<corpus::PairDataset, embeddings::EmbeddingStore> synth(size_t n, double re, double rt, size_t dim,
                                                                 std::uint64_t seed)
{
    corpus::SynthSpec s;
    s.n_pairs = n;
    s.rho_emb = re;
    s.rho_tfidf = rt;
    s.dim = dim;
    s.seed = seed;
    return corpus::synth_dataset(s);
}

// ---- criteria ----

Outcome ensemble_arithmetic()
{
    Outcome o;
    Rng rng(1);
    for (int t = 0; t < 1000 && o.ok; ++t) {
        const size_t n1 = 1 + rng.below(5), n2 = 1 + rng.below(5);
        Vector pb(n1), pt(n2), wb(n1), wt(n2);
        for (auto* v : {&pb, &pt})
            for (double& x : *v)
                x = rng.uniform();
        for (auto* v : {&wb, &wt})
            for (double& x : *v)
                x = rng.uniform();
        wb = ensemble::normalize_weights(wb);
        wt = ensemble::normalize_weights(wt);
        const double w = rng.uniform();

        ensemble::EnsembleConfig c;
        for (size_t i = 0; i < n1; ++i)
            c.bert_members.push_back({"b" + std::to_string(i), Algorithm::logreg, {}, wb[i], {}});
        for (size_t i = 0; i < n2; ++i)
            c.tfidf_members.push_back({"t" + std::to_string(i), Algorithm::logreg, {}, wt[i], {}});
        c.w_bert = w;
        c.w_tfidf = 1 - w;
        ensemble::validate(c);

        const auto out = ensemble::combine_members(c, pb, pt, w);
        double sb = 0, st = 0;
        for (size_t i = 0; i < n1; ++i)
            sb += pb[i] * wb[i];
        for (size_t i = 0; i < n2; ++i)
            st += pt[i] * wt[i];
        o.check(std::abs(out.p_bert - sb) <= 1e-12 && std::abs(out.p_tfidf - st) <= 1e-12, "set probability");
        o.check(std::abs(out.p - (out.p_bert * c.w_bert + out.p_tfidf * c.w_tfidf)) <= 1e-12, "P identity");
        double lo = 1, hi = 0;
        for (double p : pb)
            lo = std::min(lo, p), hi = std::max(hi, p);
        for (double p : pt)
            lo = std::min(lo, p), hi = std::max(hi, p);
        o.check(out.p >= lo - 1e-12 && out.p <= hi + 1e-12, "convex bound");
        o.check(out.label == (out.p > 0.5 ? 1 : 0), "threshold");
    }
    o.detail = o.ok ? "1000 configurations" : o.detail;
    return o;
}

Outcome endpoint_identity()
{
    Outcome o;
    auto [ds, store] = synth(600, 0.7, 0.7, 768, 3);
    const auto sp = corpus::split(ds, {0.8, 3});
    const auto prep = preprocess::Preprocessor::marathi();
    const auto base = ensemble::load_config(preset_path());
    const auto model = ensemble::train_ensemble(base, sp.train, store, prep);
    const Vector grid = {0.0, 1.0};
    const auto rows = ensemble::weight_sweep(model, sp.test, store, grid);

    // separately trained systems fixed at W_BERT = 0 and 1, scored pair by pair
    for (int side = 0; side < 2; ++side) {
        auto c = base;
        c.w_bert = side == 0 ? 0.0 : 1.0;
        c.w_tfidf = 1.0 - c.w_bert;
        const auto single = ensemble::train_ensemble(c, sp.train, store, prep);
        Vector p;
        for (const auto& pair : sp.test.pairs) {
            const auto& rec = store.at(pair.id);
            p.push_back(ensemble::predict_pair(single, pair.reference, pair.input, rec.ref, rec.inp).p);
        }
        const auto r = eval::evaluate(p, sp.test.labels());
        const auto& row = rows[static_cast<size_t>(side)];
        o.check(row.m.accuracy == r.m.accuracy && row.m.precision == r.m.precision && row.m.recall == r.m.recall &&
                    row.m.f1 == r.m.f1 && row.auc == r.auc,
                "row at W_BERT=" + std::to_string(side) + " differs from the single-side system");
    }
    if (o.ok)
        o.detail = "W=0 acc " + eval::fixed(rows[0].m.accuracy, 4) + ", W=1 acc " + eval::fixed(rows[1].m.accuracy, 4);
    return o;
}

Outcome complementarity()
{
    Outcome o;
    const auto dir = fixture::temp_dir("acc_sweep");
    std::ostringstream out, err;
    auto run = [&](std::vector<std::string> args) {
        const int code = cli::run(args, out, err);
        if (code != 0)
            throw Error("plagdet " + args[0] + " exited " + std::to_string(code) + ": " + err.str());
    };
    const std::string data = (dir / "data").string(), model = (dir / "model").string();
    run({"synth", "--n", "2000", "--rho-emb", "0.7", "--rho-tfidf", "0.7", "--dim", "768", "--seed", "7", "--out", data});
    run({"train", "--config", preset_path().string(), "--pairs", data + "/pairs.tsv", "--emb", data + "/emb.jsonl",
         "--seed", "7", "--out", model});
    run({"sweep", "--model", model, "--pairs", data + "/pairs.tsv", "--emb", data + "/emb.jsonl", "--grid", "0:1:0.1",
         "--out", (dir / "sweep.csv").string()});

    const auto lines = split_lines(read_file(dir / "sweep.csv"));
    o.check(lines.size() == 12 && lines[0] == "W_BERT,accuracy,precision,recall,f1,auc", "CSV must have 11 rows");
    if (!o.ok)
        return o;
    std::vector<double> acc;
    for (size_t i = 1; i < lines.size(); ++i) {
        const auto cells = split_char(lines[i], ',');
        o.check(cells.size() == 6, "bad CSV row");
        for (size_t k = 1; k < cells.size() && o.ok; ++k) {
            const double v = std::stod(cells[k]);
            o.check(v >= 0.0 && v <= 1.0, "metric outside [0, 1] in row " + std::to_string(i));
        }
        acc.push_back(std::stod(cells[1]));
    }
    const double ends = std::max(acc.front(), acc.back());
    size_t best = 1;
    for (size_t i = 1; i + 1 < acc.size(); ++i)
        if (acc[i] > acc[best])
            best = i;
    o.check(acc[best] >= ends, "no interior grid point reaches the endpoint accuracy");
    std::string curve;
    for (double a : acc)
        curve += (curve.empty() ? "" : " ") + eval::fixed(a, 3);
    o.detail = "accuracy by W_BERT 0..1: " + curve;
    return o;
}

Outcome tfidf_oracle()
{
    Outcome o;
    Rng rng(4);
    for (int t = 0; t < 200 && o.ok; ++t) {
        const size_t n_docs = 1 + rng.below(10), n_terms = 1 + rng.below(10);
        std::vector<tfidf::Tokens> docs(n_docs);
        for (auto& d : docs) {
            const size_t len = rng.below(8);
            for (size_t j = 0; j < len; ++j)
                d.push_back("t" + std::to_string(rng.below(n_terms)));
        }
        bool any = false;
        for (const auto& d : docs)
            any = any || !d.empty();
        if (!any)
            docs[0].push_back("t0");
        const size_t k = 1 + rng.below(n_terms + 2);
        const auto m = tfidf::fit(docs, k);

        // literal formula: df by presence, top-k by (df desc, term asc), smoothed idf
        std::map<std::string, size_t> df;
        for (const auto& d : docs)
            for (const auto& term : std::set<std::string>(d.begin(), d.end()))
                df[term]++;
        std::vector<std::pair<std::string, size_t>> ranked(df.begin(), df.end());
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            return a.second != b.second ? a.second > b.second : a.first < b.first;
        });
        ranked.resize(std::min(ranked.size(), k));
        std::vector<std::string> terms;
        for (const auto& r : ranked)
            terms.push_back(r.first);
        o.check(m.terms() == terms, "vocabulary differs from the oracle");
        if (!o.ok)
            break;
        const double N = static_cast<double>(n_docs);
        for (size_t i = 0; i < terms.size(); ++i) {
            const double idf = std::log((1 + N) / (1 + static_cast<double>(ranked[i].second))) + 1;
            o.check(std::abs(m.idf()[i] - idf) <= 1e-12, "idf differs from the oracle");
        }
        for (const auto& d : docs) {
            Vector v(terms.size(), 0.0);
            for (const auto& tok : d)
                for (size_t i = 0; i < terms.size(); ++i)
                    if (terms[i] == tok)
                        v[i] += std::log((1 + N) / (1 + static_cast<double>(ranked[i].second))) + 1;
            double norm = 0;
            for (double x : v)
                norm += x * x;
            norm = std::sqrt(norm);
            const auto got = tfidf::transform(m, d);
            for (size_t i = 0; i < v.size(); ++i)
                o.check(std::abs(got[i] - (norm > 0 ? v[i] / norm : 0.0)) <= 1e-12, "transform differs from the oracle");
        }
    }
    if (o.ok)
        o.detail = "200 random corpora";
    return o;
}

Outcome logreg_gradient()
{
    Outcome o;
    Rng rng(5);
    classifiers::FeatureMatrix data;
    for (int i = 0; i < 60; ++i) {
        Vector x{rng.normal(), rng.normal(), rng.normal()};
        data.add(x, rng.bernoulli(1.0 / (1.0 + std::exp(-2 * x[0] + x[1]))) ? 1 : 0);
    }
    double worst = 0;
    for (int t = 0; t < 20; ++t) {
        Vector p(4);
        for (double& v : p)
            v = rng.normal();
        const double C = 0.1 + 5 * rng.uniform();
        const auto g = classifiers::logistic_gradient(p, data, C);
        for (size_t j = 0; j < p.size(); ++j) {
            const double h = 1e-5;
            Vector a = p, b = p;
            a[j] += h;
            b[j] -= h;
            const double fd =
                (classifiers::logistic_loss(a, data, C) - classifiers::logistic_loss(b, data, C)) / (2 * h);
            worst = std::max(worst, std::abs(g[j] - fd) / std::max(std::abs(fd), 1e-3));
        }
    }
    o.check(worst < 1e-5, "finite-difference relative error " + std::to_string(worst));
    const auto fit = classifiers::fit_logreg(data, {1.0, 1e-8, 1000});
    o.check(fit.converged && fit.grad_inf_norm < 1e-6, "optimizer did not converge below 1e-6");
    char buf[128];
    std::snprintf(buf, sizeof buf, "max rel err %.2e, final grad %.2e", worst, fit.grad_inf_norm);
    if (o.ok)
        o.detail = buf;
    return o;
}

Outcome classifier_sanity()
{
    Outcome o;
    const auto train = fixture::separable_blobs(400, 1.0, 6);
    const auto test = fixture::separable_blobs(400, 1.0, 7);
    std::string summary;
    for (Algorithm a : classifiers::kAllAlgorithms) {
        const auto m = classifiers::fit(ClassifierSpec(a, {}, 6), train);
        const double acc = fixture::accuracy_on(test, [&](const Vector& x) { return m.predict_proba(x); });
        o.check(acc >= 0.95, std::string(classifiers::algorithm_name(a)) + " held-out accuracy " + std::to_string(acc));
        summary += std::string(classifiers::algorithm_name(a)) + " " + eval::fixed(acc, 3) + " ";
    }
    classifiers::FeatureMatrix x;
    for (int k = 0; k < 50; ++k) {
        x.add({0, 0}, 0);
        x.add({1, 1}, 0);
        x.add({0, 1}, 1);
        x.add({1, 0}, 1);
    }
    const auto cart = classifiers::fit(ClassifierSpec(Algorithm::cart), x);
    const double xacc = fixture::accuracy_on(x, [&](const Vector& v) { return cart.predict_proba(v); });
    o.check(xacc == 1.0, "cart XOR training accuracy " + std::to_string(xacc));
    if (o.ok)
        o.detail = summary + "| cart XOR 1.000";
    return o;
}

Outcome auc_oracle()
{
    Outcome o;
    Rng rng(8);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> s(30);
        std::vector<int> y(30);
        for (size_t i = 0; i < 30; ++i) {
            y[i] = i < 15 ? 1 : static_cast<int>(rng.below(2));
            s[i] = t % 2 ? static_cast<double>(rng.below(6)) : rng.uniform();
        }
        y[29] = 0;
        double wins = 0, pairs = 0;
        for (size_t i = 0; i < 30; ++i)
            for (size_t j = 0; j < 30; ++j)
                if (y[i] == 1 && y[j] == 0) {
                    pairs += 1;
                    wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
                }
        o.check(std::abs(eval::auc(s, y) - wins / pairs) <= 1e-12, "rank AUC differs from pair counting");
    }
    const double f1 = eval::f1_score(0.8022, 0.8532);
    o.check(std::abs(100 * f1 - 82.69) <= 0.01, "F1 from reference precision/recall is " + std::to_string(100 * f1));
    if (o.ok)
        o.detail = "100 score sets; F1(80.22%, 85.32%) = " + eval::fixed(100 * f1, 4) + "%";
    return o;
}

Outcome pca_properties()
{
    Outcome o;
    Rng rng(9);
    std::vector<Vector> data(20, Vector(8));
    for (auto& v : data)
        for (size_t j = 0; j < 8; ++j)
            v[j] = rng.normal() * static_cast<double>(j + 1) + static_cast<double>(j);
    const auto m = embeddings::fit_pca(data, 8);
    for (size_t a = 0; a < 8; ++a) {
        for (size_t b = 0; b < 8; ++b)
            o.check(std::abs(dot(m.components[a], m.components[b]) - (a == b ? 1.0 : 0.0)) <= 1e-8, "not orthonormal");
        if (a > 0)
            o.check(m.explained_variance[a] <= m.explained_variance[a - 1], "explained variance increases");
    }
    for (const auto& v : data) {
        const auto r = embeddings::reconstruct(m, embeddings::project(m, v));
        for (size_t j = 0; j < 8; ++j)
            o.check(std::abs(r[j] - v[j]) <= 1e-8, "full-rank reconstruction error");
    }
    for (double z : embeddings::project(m, m.mean))
        o.check(std::abs(z) <= 1e-12, "project(mean) != 0");
    if (o.ok)
        o.detail = "20x8 random data, k=8";
    return o;
}

Outcome baseline_oracles()
{
    Outcome o;
    o.check(baselines::levenshtein("kitten", "sitting") == 3, "kitten/sitting");
    Rng rng(10);
    auto word = [&] {
        std::string s;
        for (size_t i = rng.below(11); i > 0; --i)
            s += static_cast<char>('a' + rng.below(5));
        return s;
    };
    for (int t = 0; t < 500; ++t) {
        const auto a = word(), b = word();
        std::vector<std::vector<size_t>> d(a.size() + 1, std::vector<size_t>(b.size() + 1));
        for (size_t i = 0; i <= a.size(); ++i)
            d[i][0] = i;
        for (size_t j = 0; j <= b.size(); ++j)
            d[0][j] = j;
        for (size_t i = 1; i <= a.size(); ++i)
            for (size_t j = 1; j <= b.size(); ++j)
                d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] != b[j - 1])});
        o.check(baselines::levenshtein(a, b) == d[a.size()][b.size()], "DP oracle mismatch on " + a + "/" + b);
        o.check(baselines::levenshtein(a, b) == baselines::levenshtein(b, a), "levenshtein not symmetric");
        o.check(baselines::fuzzy_ratio(a, b) == baselines::fuzzy_ratio(b, a), "fuzzy not symmetric");
        o.check(baselines::fuzzy_ratio(a, a) == 1.0, "fuzzy self-similarity");
    }
    for (int t = 0; t < 300; ++t) {
        baselines::Tokens a, b;
        for (size_t i = 1 + rng.below(6); i > 0; --i)
            a.push_back(std::string(1, static_cast<char>('a' + rng.below(4))));
        for (size_t i = 1 + rng.below(6); i > 0; --i)
            b.push_back(std::string(1, static_cast<char>('a' + rng.below(4))));
        o.check(baselines::jaccard(a, b) == baselines::jaccard(b, a), "jaccard not symmetric");
        o.check(baselines::cosine_tf(a, b) == baselines::cosine_tf(b, a), "cosine_tf not symmetric");
        o.check(baselines::ngram_overlap(a, b) == baselines::ngram_overlap(b, a), "ngram not symmetric");
        o.check(baselines::levenshtein_norm(a, b) == baselines::levenshtein_norm(b, a), "lev_norm not symmetric");
        o.check(baselines::jaccard(a, a) == 1.0 && std::abs(baselines::cosine_tf(a, a) - 1.0) <= 1e-12 &&
                    baselines::levenshtein_norm(a, a) == 1.0 && (a.size() < 2 || baselines::ngram_overlap(a, a) == 1.0),
                "self-similarity");
    }
    embeddings::EmbeddingStore s(3);
    s.add({"p", {0.2, -1, 4}, {0.2, -1, 4}});
    const auto f = baselines::baseline_features({"p", "पुणे शहर मोठे आहे", "पुणे शहर मोठे आहे", 1}, s,
                                                preprocess::Preprocessor::marathi());
    o.check(f.levenshtein_norm == 1 && f.fuzzy_ratio == 1 && f.jaccard == 1 && std::abs(f.cosine_tf - 1) <= 1e-12 &&
                f.ngram_overlap == 1 && std::abs(f.embedding_cosine - 1) <= 1e-12,
            "identical pair is not fully similar");
    if (o.ok)
        o.detail = "500 DP comparisons, symmetry and self-similarity";
    return o;
}

Outcome determinism()
{
    Outcome o;
    const auto dir = fixture::temp_dir("acc_det");
    std::ostringstream out, err;
    auto run = [&](std::vector<std::string> args) {
        const int code = cli::run(args, out, err);
        if (code != 0)
            throw Error("plagdet " + args[0] + " exited " + std::to_string(code) + ": " + err.str());
    };
    for (const char* d : {"a", "b"})
        run({"synth", "--n", "300", "--dim", "768", "--seed", "11", "--out", (dir / d).string()});
    o.check(dir_contents(dir / "a") == dir_contents(dir / "b"), "synth outputs differ");
    const std::string pairs = (dir / "a/pairs.tsv").string(), emb = (dir / "a/emb.jsonl").string();
    for (const char* m : {"m1", "m2"})
        run({"train", "--config", preset_path().string(), "--pairs", pairs, "--emb", emb, "--seed", "11", "--out",
             (dir / m).string()});
    o.check(dir_contents(dir / "m1") == dir_contents(dir / "m2"), "train outputs differ");

    // in-memory model vs the one read back from disk
    const auto ds = corpus::load_pairs(pairs);
    const auto store = embeddings::load_store(emb);
    auto cfg = ensemble::load_config(preset_path());
    cfg.seed = 11;
    const auto sp = corpus::split(ds, {cfg.train_fraction, 11});
    const auto model = ensemble::train_ensemble(cfg, sp.train, store, preprocess::Preprocessor::marathi());
    const auto back = ensemble::load_model(dir / "m1");
    const auto a = ensemble::member_probabilities(model, sp.test, store);
    const auto b = ensemble::member_probabilities(back, sp.test, store);
    double worst = 0;
    for (size_t i = 0; i < a.bert.size(); ++i)
        for (size_t k = 0; k < a.size(); ++k)
            worst = std::max(worst, std::abs(a.bert[i][k] - b.bert[i][k]));
    for (size_t i = 0; i < a.tfidf.size(); ++i)
        for (size_t k = 0; k < a.size(); ++k)
            worst = std::max(worst, std::abs(a.tfidf[i][k] - b.tfidf[i][k]));
    o.check(worst <= 1e-12, "save/load changed predict_proba by " + std::to_string(worst));
    for (Algorithm alg : classifiers::kAllAlgorithms) {
        const auto m = classifiers::fit(ClassifierSpec(alg, {}, 2), fixture::blobs(120, 1.0, 12, 2.0));
        classifiers::save_model(m, dir / "clf.json");
        const auto r = classifiers::load_model(dir / "clf.json");
        for (const auto& x : fixture::blobs(50, 2.0, 13, 2.0).rows)
            o.check(std::abs(m.predict_proba(x) - r.predict_proba(x)) <= 1e-12,
                    std::string(classifiers::algorithm_name(alg)) + " save/load drift");
    }
    if (o.ok)
        o.detail = "synth and train byte-identical; max save/load drift " + std::to_string(worst);
    return o;
}

Outcome table7_preset()
{
    Outcome o;
    const auto c = ensemble::load_config(preset_path());
    auto sum = [](const Vector& w) {
        double s = 0;
        for (double v : w)
            s += v;
        return s;
    };
    o.check(c.tfidf_weights() == Vector{0.1, 0.9}, "tfidf weights are not 0.1/0.9");
    o.check(c.bert_weights() == Vector{0.7, 0.3}, "bert weights are not 0.7/0.3");
    o.check(c.w_bert == 0.6 && std::abs(c.w_tfidf - 0.4) <= 1e-15, "W is not 0.6/0.4");
    o.check(std::abs(sum(c.tfidf_weights()) - 1) <= 1e-9 && std::abs(sum(c.bert_weights()) - 1) <= 1e-9 &&
                std::abs(c.w_bert + c.w_tfidf - 1) <= 1e-9,
            "weights do not sum to 1");
    o.check(c.bert_members[0].algorithm == Algorithm::gbt && c.bert_members[1].algorithm == Algorithm::svc &&
                c.tfidf_members[0].algorithm == Algorithm::logreg && c.tfidf_members[1].algorithm == Algorithm::gbt,
            "member algorithms");
    o.check(c.bert_dim == 768 && c.tfidf_dim == 400, "dimensions");
    auto [ds, store] = synth(400, 0.7, 0.7, 768, 12);
    const auto sp = corpus::split(ds, {c.train_fraction, 12});
    const auto m = ensemble::train_ensemble(c, sp.train, store, preprocess::Preprocessor::marathi());
    const auto r = eval::evaluate(ensemble::ensemble_probabilities(m.config, ensemble::member_probabilities(m, sp.test, store), 0.6),
                                  sp.test.labels());
    o.check(r.m.accuracy >= 0.0 && r.m.accuracy <= 1.0, "accuracy out of range");
    if (o.ok)
        o.detail = "trained on 320 pairs, held-out accuracy " + eval::fixed(r.m.accuracy, 3);
    return o;
}

} // namespace

int main()
{
    const std::vector<Criterion> criteria = {
        {"ensemble arithmetic", 1.0, ensemble_arithmetic},
        {"endpoint identity", 30.0, endpoint_identity},
        {"complementarity", 120.0, complementarity},
        {"tfidf oracle", 0.0, tfidf_oracle},
        {"logreg gradient", 0.0, logreg_gradient},
        {"classifier sanity", 0.0, classifier_sanity},
        {"auc oracle", 0.0, auc_oracle},
        {"pca properties", 0.0, pca_properties},
        {"baseline oracles", 0.0, baseline_oracles},
        {"determinism", 0.0, determinism},
        {"table7 preset", 0.0, table7_preset},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.body();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (o.ok && c.budget_s > 0 && secs > c.budget_s)
            o = {false, "over the " + eval::fixed(c.budget_s, 0) + " s budget"};
        failed += !o.ok;
        std::printf("%s  %-20s %7.2fs  %s\n", o.ok ? "PASS" : "FAIL", c.name.c_str(), secs, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
