#pragma once

// Synthetic labeled pair corpora with matching embedding stores, for
// exercising the full pipeline without the original corpus or a sentence
// embedding model.
//
// Token side: references draw words from a Zipf-like distribution A over a
// Devanagari syllable vocabulary. An input keeps each reference token with
// probability q_y and otherwise substitutes a word drawn from a second
// distribution B. q_1 = 0.5 + 0.45 rho_tfidf and q_0 = 0.5 - 0.45 rho_tfidf,
// so both the overlap and the A/B mixture of the input shift with the label.
//
// Embedding side: ref - inp = (2y - 1) * 2 rho_emb * u + N(0, I), where u is
// a unit direction spread over min(dim, 8) seeded coordinates.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "plagdet/common.hpp"
#include "plagdet/corpus.hpp"
#include "plagdet/embeddings.hpp"
#include "plagdet/rng.hpp"

namespace plagdet::corpus {

struct SynthSpec {
    size_t n_pairs = 1000;
    double rho_emb = 0.7;
    double rho_tfidf = 0.7;
    size_t dim = 768;
    std::uint64_t seed = 0;
};

namespace detail {

inline std::vector<std::string> synth_vocabulary(Rng& rng, size_t size)
{
    static const char* const consonants[] = {"क", "ग", "च", "ज", "ट", "ड", "त", "द", "न",
                                             "प", "ब", "म", "य", "र", "ल", "व", "स", "ह"};
    static const char* const vowels[] = {"", "ा", "ि", "ी", "ु", "े", "ो"};
    std::vector<std::string> syllables;
    for (const char* c : consonants)
        for (const char* v : vowels)
            syllables.push_back(std::string(c) + v);

    std::vector<std::string> words;
    for (const auto& a : syllables)
        for (const auto& b : syllables)
            words.push_back(a + b);
    rng.shuffle(std::span<std::string>(words));
    words.resize(std::min(size, words.size()));
    return words;
}

/// Cumulative Zipf-like weights 1 / (rank + 4) over a seeded rank order.
inline std::vector<double> zipf_cdf(Rng& rng, size_t n)
{
    std::vector<size_t> rank(n);
    for (size_t i = 0; i < n; ++i)
        rank[i] = i;
    rng.shuffle(std::span<size_t>(rank));
    std::vector<double> cdf(n);
    double total = 0.0;
    for (size_t i = 0; i < n; ++i) {
        total += 1.0 / (static_cast<double>(rank[i]) + 4.0);
        cdf[i] = total;
    }
    for (double& c : cdf)
        c /= total;
    return cdf;
}

inline size_t draw(Rng& rng, const std::vector<double>& cdf)
{
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return std::min(static_cast<size_t>(it - cdf.begin()), cdf.size() - 1);
}

} // namespace detail

inline std::pair<PairDataset, embeddings::EmbeddingStore> synth_dataset(const SynthSpec& spec)
{
    if (spec.n_pairs < 10)
        throw Error("synth: n_pairs must be >= 10");
    if (spec.dim < 2)
        throw Error("synth: dim must be >= 2");
    if (!(spec.rho_emb >= 0.0 && spec.rho_emb <= 1.0) || !(spec.rho_tfidf >= 0.0 && spec.rho_tfidf <= 1.0))
        throw Error("synth: rho values must lie in [0, 1]");

    Rng label_rng(Rng::derive(spec.seed, 0));
    Rng text_rng(Rng::derive(spec.seed, 1));
    Rng emb_rng(Rng::derive(spec.seed, 2));

    const size_t n = spec.n_pairs;
    std::vector<int> labels(n, 0);
    for (size_t i = 0; i < n / 2; ++i)
        labels[i] = 1;
    label_rng.shuffle(std::span<int>(labels));

    const auto vocab = detail::synth_vocabulary(text_rng, 300);
    const auto cdf_ref = detail::zipf_cdf(text_rng, vocab.size());
    const auto cdf_sub = detail::zipf_cdf(text_rng, vocab.size());
    const double keep_pos = 0.5 + 0.45 * spec.rho_tfidf;
    const double keep_neg = 0.5 - 0.45 * spec.rho_tfidf;

    const size_t signal_dims = std::min<size_t>(spec.dim, 8);
    std::vector<size_t> coords(spec.dim);
    for (size_t i = 0; i < coords.size(); ++i)
        coords[i] = i;
    emb_rng.shuffle(std::span<size_t>(coords));
    Vector direction(spec.dim, 0.0);
    for (size_t i = 0; i < signal_dims; ++i)
        direction[coords[i]] = (emb_rng.bernoulli(0.5) ? 1.0 : -1.0) / std::sqrt(static_cast<double>(signal_dims));
    const double shift = 2.0 * spec.rho_emb;

    const size_t width = std::to_string(n).size();
    PairDataset ds;
    ds.name = "synth";
    ds.pairs.reserve(n);
    embeddings::EmbeddingStore store(spec.dim);

    for (size_t i = 0; i < n; ++i) {
        std::string id = std::to_string(i + 1);
        id = "p" + std::string(width - id.size(), '0') + id;
        const int y = labels[i];

        const size_t len = 8 + static_cast<size_t>(text_rng.below(9));
        std::vector<std::string> ref_tokens, inp_tokens;
        for (size_t t = 0; t < len; ++t)
            ref_tokens.push_back(vocab[detail::draw(text_rng, cdf_ref)]);
        const double keep = y == 1 ? keep_pos : keep_neg;
        for (const auto& tok : ref_tokens)
            inp_tokens.push_back(text_rng.bernoulli(keep) ? tok : vocab[detail::draw(text_rng, cdf_sub)]);
        for (size_t t = 0; t + 1 < inp_tokens.size(); ++t)
            if (text_rng.bernoulli(0.2))
                std::swap(inp_tokens[t], inp_tokens[t + 1]);

        auto sentence = [](const std::vector<std::string>& toks) {
            std::string s;
            for (size_t t = 0; t < toks.size(); ++t) {
                if (t)
                    s += (t % 5 == 0) ? ", " : " ";
                s += toks[t];
            }
            return s + "।";
        };

        embeddings::EmbeddingRecord rec;
        rec.id = id;
        rec.ref.resize(spec.dim);
        rec.inp.resize(spec.dim);
        const double sign = y == 1 ? 1.0 : -1.0;
        for (size_t j = 0; j < spec.dim; ++j) {
            const double base = emb_rng.normal();
            const double delta = sign * shift * direction[j] + emb_rng.normal();
            rec.ref[j] = base + 0.5 * delta;
            rec.inp[j] = base - 0.5 * delta;
        }

        ds.pairs.push_back({id, sentence(ref_tokens), sentence(inp_tokens), y});
        store.add(std::move(rec));
    }
    return {std::move(ds), std::move(store)};
}

} // namespace plagdet::corpus
