#pragma once

// Command-line front end. Every subcommand reads files and flags only and
// writes its outputs atomically. Exit codes: 0 success, 1 usage error,
// 2 data or validation error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "plagdet/baselines.hpp"
#include "plagdet/classifiers.hpp"
#include "plagdet/corpus.hpp"
#include "plagdet/embeddings.hpp"
#include "plagdet/ensemble.hpp"
#include "plagdet/eval.hpp"
#include "plagdet/preprocess.hpp"
#include "plagdet/synth.hpp"
#include "plagdet/tfidf.hpp"

namespace plagdet::cli {

namespace fs = std::filesystem;

/// "start:stop:step" (both ends inclusive within 1e-9) or a comma list.
inline std::vector<double> parse_grid(const std::string& text)
{
    auto number = [&](const std::string& s) {
        try {
            size_t used = 0;
            const double v = std::stod(s, &used);
            if (used != s.size())
                throw UsageError("");
            return v;
        } catch (const std::exception&) {
            throw UsageError("bad grid value '" + s + "' in '" + text + "'");
        }
    };
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        const auto parts = split_char(text, ':');
        if (parts.size() != 3)
            throw UsageError("grid must be start:stop:step, got '" + text + "'");
        const double start = number(parts[0]), stop = number(parts[1]), step = number(parts[2]);
        if (!(step > 0.0) || stop < start - 1e-9)
            throw UsageError("grid '" + text + "' needs step > 0 and stop >= start");
        for (size_t i = 0;; ++i) {
            const double v = start + static_cast<double>(i) * step;
            if (v > stop + 1e-9)
                break;
            out.push_back(std::round(v * 1e12) / 1e12);
        }
    } else {
        for (const auto& p : split_char(text, ','))
            out.push_back(number(p));
    }
    if (out.empty())
        throw UsageError("empty grid");
    for (double v : out)
        if (v < 0.0 || v > 1.0)
            throw UsageError("grid value " + eval::format_number(v) + " outside [0, 1]");
    return out;
}

struct SplitRecord {
    std::uint64_t seed = 0;
    double train_fraction = 0.8;
    std::vector<std::string> train_ids;
    std::vector<std::string> test_ids;
};

inline nlohmann::json to_json(const SplitRecord& s)
{
    return {{"format", "split-v1"},
            {"seed", s.seed},
            {"train_fraction", s.train_fraction},
            {"train", s.train_ids},
            {"test", s.test_ids}};
}

inline SplitRecord load_split(const fs::path& path)
{
    try {
        const auto j = nlohmann::json::parse(read_file(path));
        if (j.value("format", std::string()) != "split-v1")
            throw Error(path.string() + ": expected format \"split-v1\"");
        return {j.at("seed").get<std::uint64_t>(), j.at("train_fraction").get<double>(),
                j.at("train").get<std::vector<std::string>>(), j.at("test").get<std::vector<std::string>>()};
    } catch (const nlohmann::json::exception& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

inline std::string format_feature_rows(const std::vector<std::string>& ids, const classifiers::FeatureMatrix& fm)
{
    std::string out = "id\tlabel";
    for (size_t j = 0; j < fm.dim(); ++j)
        out += "\tx" + std::to_string(j);
    out += '\n';
    char buf[40];
    for (size_t i = 0; i < fm.size(); ++i) {
        out += ids[i] + "\t" + std::to_string(fm.labels[i]);
        for (double v : fm.rows[i]) {
            std::snprintf(buf, sizeof buf, "\t%.17g", v);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

class Runner {
public:
    Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

    int run(const std::vector<std::string>& args)
    {
        CLI::App app{"Plagiarism detection with a weighted ensemble over TF-IDF and sentence-embedding differences",
                     "plagdet"};
        app.require_subcommand(1);
        setup(app);
        try {
            std::vector<std::string> rev(args.rbegin(), args.rend());
            app.parse(rev);
        } catch (const CLI::CallForHelp&) {
            out_ << app.help();
            return 0;
        } catch (const CLI::CallForAllHelp&) {
            out_ << app.help("", CLI::AppFormatMode::All);
            return 0;
        } catch (const CLI::ParseError& e) {
            // subcommand help
            if (e.get_exit_code() == 0) {
                for (auto* sub : app.get_subcommands())
                    out_ << sub->help();
                return 0;
            }
            err_ << "error: " << e.what() << "\n" << "run 'plagdet --help' for usage\n";
            return 1;
        }
        try {
            action_();
            return 0;
        } catch (const UsageError& e) {
            err_ << "error: " << e.what() << "\n";
            return 1;
        } catch (const std::exception& e) {
            err_ << "error: " << e.what() << "\n";
            return 2;
        }
    }

private:
    std::ostream& out_;
    std::ostream& err_;
    std::function<void()> action_;

    // option storage
    std::string pairs_, emb_, out_path_, config_, model_, tfidf_path_, pca_path_, stopwords_, suffixes_;
    std::string grid_ = "0:1:0.1", side_, features_out_, report_;
    std::vector<std::string> algorithms_;
    std::uint64_t seed_ = 0;
    size_t n_ = 1000, dim_ = 768, vocab_ = 400, k_ = 0;
    double rho_emb_ = 0.7, rho_tfidf_ = 0.7, train_fraction_ = 0.8;
    bool all_ = false;
    CLI::Option* train_fraction_opt_ = nullptr;
    std::string pca_stage_ = "pre";

    void resources(CLI::App* sub)
    {
        sub->add_option("--stopwords", stopwords_, "Stopword list (default: built-in Marathi list)")
            ->check(CLI::ExistingFile);
        sub->add_option("--suffixes", suffixes_, "Suffix rule table (default: built-in Marathi rules)")
            ->check(CLI::ExistingFile);
    }

    preprocess::Preprocessor preprocessor() const
    {
        preprocess::Preprocessor p = preprocess::Preprocessor::marathi();
        if (!stopwords_.empty())
            p.stopwords = preprocess::StopwordList::load(stopwords_);
        if (!suffixes_.empty())
            p.suffixes = preprocess::SuffixRuleTable::load(suffixes_);
        return p;
    }

    void setup(CLI::App& app)
    {
        auto* synth = app.add_subcommand("synth", "Write a synthetic pair dataset and embedding store");
        synth->add_option("--n", n_, "Number of pairs")->default_val(1000);
        synth->add_option("--rho-emb", rho_emb_, "Label signal strength in the embeddings, 0..1")->default_val(0.7);
        synth->add_option("--rho-tfidf", rho_tfidf_, "Label signal strength in the texts, 0..1")->default_val(0.7);
        synth->add_option("--dim", dim_, "Embedding dimension")->default_val(768);
        synth->add_option("--seed", seed_, "Seed")->required();
        synth->add_option("--out", out_path_, "Output directory (pairs.tsv, emb.jsonl)")->required();
        synth->callback([this] { action_ = [this] { cmd_synth(); }; });

        auto* prep = app.add_subcommand("prep", "Preprocess texts; writes a pair TSV of space-joined tokens");
        prep->add_option("--pairs", pairs_, "Pair TSV")->required()->check(CLI::ExistingFile);
        prep->add_option("--out", out_path_, "Output pair TSV")->required();
        resources(prep);
        prep->callback([this] { action_ = [this] { cmd_prep(); }; });

        auto* fit_tfidf = app.add_subcommand("fit-tfidf", "Fit a TF-IDF vectorizer on every text of a pair file");
        fit_tfidf->add_option("--pairs", pairs_, "Pair TSV")->required()->check(CLI::ExistingFile);
        fit_tfidf->add_option("--vocab-size", vocab_, "Vocabulary size")->default_val(400);
        fit_tfidf->add_option("--out", out_path_, "Output model (tfidf-v1)")->required();
        resources(fit_tfidf);
        fit_tfidf->callback([this] { action_ = [this] { cmd_fit_tfidf(); }; });

        auto* fit_pca = app.add_subcommand("fit-pca", "Fit PCA on embedding differences of the listed pairs");
        fit_pca->add_option("--pairs", pairs_, "Pair TSV")->required()->check(CLI::ExistingFile);
        fit_pca->add_option("--emb", emb_, "Embedding store (embstore-v1)")->required()->check(CLI::ExistingFile);
        fit_pca->add_option("--k", k_, "Number of components")->required();
        fit_pca->add_option("--out", out_path_, "Output model (pca-v1)")->required();
        fit_pca->callback([this] { action_ = [this] { cmd_fit_pca(); }; });

        auto* feat = app.add_subcommand("featurize", "Write difference vectors as a TSV");
        feat->add_option("--pairs", pairs_, "Pair TSV")->required()->check(CLI::ExistingFile);
        feat->add_option("--side", side_, "tfidf or bert")->required()->check(CLI::IsMember({"tfidf", "bert"}));
        feat->add_option("--tfidf", tfidf_path_, "TF-IDF model (side tfidf)")->check(CLI::ExistingFile);
        feat->add_option("--emb", emb_, "Embedding store (side bert)")->check(CLI::ExistingFile);
        feat->add_option("--pca", pca_path_, "Optional PCA model (side bert)")->check(CLI::ExistingFile);
        feat->add_option("--pca-stage", pca_stage_, "pre or post")->check(CLI::IsMember({"pre", "post"}));
        feat->add_option("--out", out_path_, "Output TSV")->required();
        resources(feat);
        feat->callback([this] { action_ = [this] { cmd_featurize(); }; });

        auto* train = app.add_subcommand("train", "Split, then train the ensemble on the training side");
        train->add_option("--config", config_, "Ensemble config (ensemble-v1)")->required()->check(CLI::ExistingFile);
        train->add_option("--pairs", pairs_, "Pair TSV")->required()->check(CLI::ExistingFile);
        train->add_option("--emb", emb_, "Embedding store")->required()->check(CLI::ExistingFile);
        train->add_option("--seed", seed_, "Seed for the split and member training (overrides the config)")
            ->required();
        train_fraction_opt_ = train->add_option("--train-fraction", train_fraction_, "Training share (default: from config)");
        train->add_option("--out", out_path_, "Output model directory")->required();
        resources(train);
        train->callback([this] { action_ = [this] { cmd_train(); }; });

        auto* evaluate = app.add_subcommand("evaluate", "Score a trained ensemble on its held-out pairs");
        evaluate->add_option("--model", model_, "Model directory")->required()->check(CLI::ExistingDirectory);
        evaluate->add_option("--pairs", pairs_, "Pair TSV")->required()->check(CLI::ExistingFile);
        evaluate->add_option("--emb", emb_, "Embedding store")->required()->check(CLI::ExistingFile);
        evaluate->add_flag("--all", all_, "Score every pair instead of the recorded test split");
        evaluate->add_option("--out", out_path_, "Report JSON (default: table to stdout only)");
        evaluate->callback([this] { action_ = [this] { cmd_evaluate(); }; });

        auto* sweep = app.add_subcommand("sweep", "Re-weight W_BERT over a grid without refitting");
        sweep->add_option("--model", model_, "Model directory")->required()->check(CLI::ExistingDirectory);
        sweep->add_option("--pairs", pairs_, "Pair TSV")->required()->check(CLI::ExistingFile);
        sweep->add_option("--emb", emb_, "Embedding store")->required()->check(CLI::ExistingFile);
        sweep->add_option("--grid", grid_, "start:stop:step or comma list")->default_val("0:1:0.1");
        sweep->add_flag("--all", all_, "Use every pair instead of the recorded test split");
        sweep->add_option("--out", out_path_, "Output CSV")->required();
        sweep->callback([this] { action_ = [this] { cmd_sweep(); }; });

        auto* base = app.add_subcommand("baseline", "Similarity-feature baseline over the classifier catalog");
        base->add_option("--pairs", pairs_, "Pair TSV")->required()->check(CLI::ExistingFile);
        base->add_option("--emb", emb_, "Embedding store")->required()->check(CLI::ExistingFile);
        base->add_option("--seed", seed_, "Split and training seed")->required();
        base->add_option("--train-fraction", train_fraction_, "Training share")->default_val(0.8);
        base->add_option("--algorithms", algorithms_, "Subset of the catalog (default: all)")->delimiter(',');
        base->add_option("--features-out", features_out_, "Write the feature TSV here");
        base->add_option("--out", out_path_, "Report JSON");
        resources(base);
        base->callback([this] { action_ = [this] { cmd_baseline(); }; });
    }

    void cmd_synth()
    {
        corpus::SynthSpec s;
        s.n_pairs = n_;
        s.rho_emb = rho_emb_;
        s.rho_tfidf = rho_tfidf_;
        s.dim = dim_;
        s.seed = seed_;
        const auto [ds, store] = corpus::synth_dataset(s);
        corpus::write_pairs(ds, fs::path(out_path_) / "pairs.tsv");
        embeddings::write_store(store, fs::path(out_path_) / "emb.jsonl");
        err_ << "wrote " << ds.size() << " pairs to " << (fs::path(out_path_) / "pairs.tsv").string() << "\n";
    }

    void cmd_prep()
    {
        const auto prep = preprocessor();
        auto ds = corpus::load_pairs(pairs_);
        for (auto& p : ds.pairs) {
            p.reference = preprocess::join(prep(p.reference));
            p.input = preprocess::join(prep(p.input));
        }
        corpus::write_pairs(ds, out_path_);
    }

    void cmd_fit_tfidf()
    {
        const auto prep = preprocessor();
        const auto ds = corpus::load_pairs(pairs_);
        std::vector<tfidf::Tokens> docs;
        for (const auto& p : ds.pairs) {
            docs.push_back(prep(p.reference));
            docs.push_back(prep(p.input));
        }
        tfidf::save(tfidf::fit(docs, vocab_), out_path_);
    }

    void cmd_fit_pca()
    {
        const auto ds = corpus::load_pairs(pairs_);
        const auto store = embeddings::load_store(emb_);
        std::vector<Vector> diffs;
        for (const auto* r : embeddings::join(ds, store))
            diffs.push_back(embeddings::difference(r->ref, r->inp));
        embeddings::save_pca(embeddings::fit_pca(diffs, k_), out_path_);
    }

    void cmd_featurize()
    {
        const auto ds = corpus::load_pairs(pairs_);
        std::vector<std::string> ids;
        for (const auto& p : ds.pairs)
            ids.push_back(p.id);
        classifiers::FeatureMatrix fm;
        if (side_ == "tfidf") {
            if (tfidf_path_.empty())
                throw UsageError("featurize --side tfidf needs --tfidf");
            const auto model = tfidf::load(tfidf_path_);
            const auto prep = preprocessor();
            for (const auto& p : ds.pairs)
                fm.add(tfidf::pair_difference(model, prep(p.reference), prep(p.input)), p.label);
        } else {
            if (emb_.empty())
                throw UsageError("featurize --side bert needs --emb");
            const auto store = embeddings::load_store(emb_);
            std::optional<embeddings::PcaModel> pca;
            if (!pca_path_.empty())
                pca = embeddings::load_pca(pca_path_);
            const auto recs = embeddings::join(ds, store);
            for (size_t i = 0; i < ds.size(); ++i) {
                Vector d = embeddings::difference(recs[i]->ref, recs[i]->inp);
                if (pca)
                    d = pca_stage_ == "pre" ? embeddings::project_linear(*pca, d) : embeddings::project(*pca, d);
                fm.add(std::move(d), ds.pairs[i].label);
            }
        }
        write_file_atomic(out_path_, format_feature_rows(ids, fm));
    }

    void cmd_train()
    {
        auto config = ensemble::load_config(config_);
        config.seed = seed_;
        if (train_fraction_opt_->count() > 0)
            config.train_fraction = train_fraction_;
        const auto ds = corpus::load_pairs(pairs_);
        const auto store = embeddings::load_store(emb_);
        const auto sp = corpus::split(ds, {config.train_fraction, seed_});
        const auto model = ensemble::train_ensemble(config, sp.train, store, preprocessor());

        SplitRecord rec{seed_, config.train_fraction, {}, {}};
        for (const auto& p : sp.train.pairs)
            rec.train_ids.push_back(p.id);
        for (const auto& p : sp.test.pairs)
            rec.test_ids.push_back(p.id);
        ensemble::save_model(model, out_path_);
        write_file_atomic(fs::path(out_path_) / "split.json", to_json(rec).dump(1) + "\n");
        for (const auto* side : {&model.bert_members, &model.tfidf_members})
            for (const auto& m : *side)
                for (const auto& w : m.warnings())
                    err_ << "warning: " << w << "\n";
        err_ << "trained on " << sp.train.size() << " pairs; " << sp.test.size() << " held out\n";
    }

    corpus::PairDataset eval_set(const corpus::PairDataset& ds) const
    {
        if (all_)
            return ds;
        const auto split_path = fs::path(model_) / "split.json";
        if (!fs::exists(split_path))
            throw Error(split_path.string() + " not found; pass --all to use every pair");
        return corpus::select(ds, load_split(split_path).test_ids, ds.name + ".test");
    }

    void cmd_evaluate()
    {
        const auto model = ensemble::load_model(model_);
        const auto ds = eval_set(corpus::load_pairs(pairs_));
        const auto store = embeddings::load_store(emb_);
        const auto mp = ensemble::member_probabilities(model, ds, store);
        const std::string fp = eval::fingerprint(ensemble::to_json(model.config));

        std::vector<eval::EvalReport> reports;
        const auto& c = model.config;
        reports.push_back(eval::evaluate(ensemble::ensemble_probabilities(c, mp, c.w_bert), mp.labels,
                                         "ensemble (W_BERT=" + eval::short_number(c.w_bert) + ")", fp));
        reports.push_back(eval::evaluate(ensemble::ensemble_probabilities(c, mp, 1.0), mp.labels,
                                         "embedding side only (W_BERT=1)", fp));
        reports.push_back(eval::evaluate(ensemble::ensemble_probabilities(c, mp, 0.0), mp.labels,
                                         "tfidf side only (W_BERT=0)", fp));
        for (size_t i = 0; i < mp.bert.size(); ++i)
            reports.push_back(eval::evaluate(mp.bert[i], mp.labels, "bert/" + c.bert_members[i].name, fp));
        for (size_t i = 0; i < mp.tfidf.size(); ++i)
            reports.push_back(eval::evaluate(mp.tfidf[i], mp.labels, "tfidf/" + c.tfidf_members[i].name, fp));

        out_ << eval::format_table(reports);
        if (!out_path_.empty()) {
            nlohmann::json j = {{"format", "report-v1"}, {"fingerprint", fp}, {"pairs", ds.name}};
            j["reports"] = nlohmann::json::array();
            for (const auto& r : reports)
                j["reports"].push_back(eval::to_json(r));
            write_file_atomic(out_path_, j.dump(1) + "\n");
        }
    }

    void cmd_sweep()
    {
        const auto grid = parse_grid(grid_);
        const auto model = ensemble::load_model(model_);
        const auto ds = eval_set(corpus::load_pairs(pairs_));
        const auto store = embeddings::load_store(emb_);
        const auto rows = ensemble::weight_sweep(model, ds, store, grid);
        write_file_atomic(out_path_, eval::format_sweep_csv(rows));
        err_ << "wrote " << rows.size() << " rows to " << out_path_ << "\n";
    }

    void cmd_baseline()
    {
        const auto ds = corpus::load_pairs(pairs_);
        const auto store = embeddings::load_store(emb_);
        const auto prep = preprocessor();
        const auto sp = corpus::split(ds, {train_fraction_, seed_});
        const auto train_rows = baselines::baseline_table(sp.train, store, prep);
        const auto test_rows = baselines::baseline_table(sp.test, store, prep);
        if (!features_out_.empty()) {
            auto all_rows = baselines::baseline_table(ds, store, prep);
            write_file_atomic(features_out_, baselines::format_features(all_rows));
        }
        std::vector<classifiers::Algorithm> algs;
        if (algorithms_.empty())
            algs.assign(std::begin(classifiers::kAllAlgorithms), std::end(classifiers::kAllAlgorithms));
        else
            for (const auto& a : algorithms_)
                algs.push_back(classifiers::parse_algorithm(a));

        const auto train = baselines::to_matrix(train_rows);
        const auto test = baselines::to_matrix(test_rows);
        std::vector<eval::EvalReport> reports;
        for (size_t i = 0; i < algs.size(); ++i) {
            const auto model = classifiers::fit(classifiers::ClassifierSpec(algs[i], {}, Rng::derive(seed_, i)), train);
            for (const auto& w : model.warnings())
                err_ << "warning: " << w << "\n";
            Vector p;
            for (const auto& row : test.rows)
                p.push_back(model.predict_proba(row));
            reports.push_back(eval::evaluate(p, test.labels, "baseline/" + std::string(classifiers::algorithm_name(algs[i]))));
        }
        out_ << eval::format_table(reports);
        if (!out_path_.empty()) {
            nlohmann::json j = {{"format", "report-v1"}, {"pairs", ds.name}, {"seed", seed_}};
            j["reports"] = nlohmann::json::array();
            for (const auto& r : reports)
                j["reports"].push_back(eval::to_json(r));
            write_file_atomic(out_path_, j.dump(1) + "\n");
        }
    }
};

/// Runs one subcommand; `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    Runner r(out, err);
    return r.run(args);
}

} // namespace plagdet::cli
