#pragma once

// Text normalization for the pair pipeline: punctuation and digit removal,
// whitespace tokenization, stopword filtering and longest-match suffix
// stripping. Lengths are measured in grapheme clusters so that Devanagari
// vowel signs and viramas do not count as separate characters.

#include <algorithm>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "plagdet/common.hpp"
#include "plagdet/marathi_resources.hpp"
#include "plagdet/unicode.hpp"

namespace plagdet::preprocess {

using Tokens = std::vector<std::string>;

class StopwordList {
public:
    StopwordList() = default;

    explicit StopwordList(const std::vector<std::string>& words)
    {
        for (const auto& w : words) {
            std::string n = unicode::nfc(w);
            if (n.empty())
                throw Error("stopword list: empty entry");
            words_.insert(std::move(n));
        }
    }

    /// One word per line; blank lines and lines starting with '#' are skipped.
    static StopwordList parse(std::string_view content)
    {
        std::vector<std::string> words;
        for (auto& line : split_lines(content)) {
            std::string_view w = line;
            while (!w.empty() && (w.back() == ' ' || w.back() == '\t'))
                w.remove_suffix(1);
            while (!w.empty() && (w.front() == ' ' || w.front() == '\t'))
                w.remove_prefix(1);
            if (w.empty() || w.front() == '#')
                continue;
            words.emplace_back(w);
        }
        return StopwordList(words);
    }

    static StopwordList load(const std::filesystem::path& path) { return parse(read_file(path)); }

    static StopwordList marathi() { return parse(resources::kMarathiStopwords); }

    bool contains(const std::string& token) const { return words_.count(token) != 0; }
    size_t size() const { return words_.size(); }
    const std::set<std::string>& words() const { return words_; }

    std::string format() const
    {
        std::string out;
        for (const auto& w : words_)
            out += w + '\n';
        return out;
    }

private:
    std::set<std::string> words_;
};

class SuffixRuleTable {
public:
    SuffixRuleTable() = default;

    SuffixRuleTable(std::vector<std::string> rules, size_t min_stem_len) : min_stem_len_(min_stem_len)
    {
        if (min_stem_len_ < 1)
            throw Error("suffix rules: min_stem_len must be >= 1");
        for (auto& r : rules) {
            r = unicode::nfc(r);
            if (r.empty())
                throw Error("suffix rules: empty suffix");
        }
        // longest first; equal lengths in byte order
        std::sort(rules.begin(), rules.end(), [](const std::string& a, const std::string& b) {
            const size_t la = unicode::code_point_count(a);
            const size_t lb = unicode::code_point_count(b);
            return la != lb ? la > lb : a < b;
        });
        rules.erase(std::unique(rules.begin(), rules.end()), rules.end());
        rules_ = std::move(rules);
    }

    /// One suffix per line. An optional `min_stem_len=N` directive may appear
    /// on the first line; '#' comment lines and blank lines are skipped.
    static SuffixRuleTable parse(std::string_view content)
    {
        size_t min_len = 2;
        std::vector<std::string> rules;
        auto lines = split_lines(content);
        for (size_t i = 0; i < lines.size(); ++i) {
            std::string_view line = lines[i];
            while (!line.empty() && (line.back() == ' ' || line.back() == '\t'))
                line.remove_suffix(1);
            if (line.empty() || line.front() == '#')
                continue;
            constexpr std::string_view directive = "min_stem_len=";
            if (line.starts_with(directive)) {
                if (i != 0)
                    throw Error("suffix rules: min_stem_len directive allowed on line 1 only (line " +
                                std::to_string(i + 1) + ")");
                try {
                    min_len = std::stoul(std::string(line.substr(directive.size())));
                } catch (const std::exception&) {
                    throw Error("suffix rules: bad min_stem_len value");
                }
                continue;
            }
            rules.emplace_back(line);
        }
        return SuffixRuleTable(std::move(rules), min_len);
    }

    static SuffixRuleTable load(const std::filesystem::path& path) { return parse(read_file(path)); }

    static SuffixRuleTable marathi() { return parse(resources::kMarathiSuffixes); }

    const std::vector<std::string>& rules() const { return rules_; }
    size_t min_stem_len() const { return min_stem_len_; }

    std::string format() const
    {
        std::string out = "min_stem_len=" + std::to_string(min_stem_len_) + "\n";
        for (const auto& r : rules_)
            out += r + '\n';
        return out;
    }

private:
    std::vector<std::string> rules_;
    size_t min_stem_len_ = 2;
};

/// NFC; punctuation (P*) and decimal digits become spaces; whitespace runs
/// collapse to one space; result trimmed.
inline std::string normalize(std::string_view text)
{
    const std::string composed = unicode::nfc(text);
    std::string out;
    out.reserve(composed.size());
    bool pending_space = false;
    for (UChar32 c : unicode::code_points(composed)) {
        if (unicode::is_punctuation(c) || unicode::is_digit(c) || unicode::is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out += ' ';
            pending_space = false;
        }
        unicode::append_utf8(out, c);
    }
    return unicode::nfc(out);
}

inline Tokens tokenize(std::string_view text)
{
    Tokens out;
    size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || text[i] == '\n' || text[i] == '\r'))
            ++i;
        size_t j = i;
        while (j < text.size() && text[j] != ' ' && text[j] != '\t' && text[j] != '\n' && text[j] != '\r')
            ++j;
        if (j > i)
            out.emplace_back(text.substr(i, j - i));
        i = j;
    }
    return out;
}

inline Tokens remove_stopwords(const Tokens& tokens, const StopwordList& stops)
{
    Tokens out;
    out.reserve(tokens.size());
    for (const auto& t : tokens)
        if (!stops.contains(t))
            out.push_back(t);
    return out;
}

/// Strips the longest listed suffix whose removal leaves at least
/// min_stem_len grapheme clusters. At most one strip per call.
inline std::string stem(const std::string& token, const SuffixRuleTable& rules)
{
    for (const auto& suffix : rules.rules()) {
        if (suffix.size() >= token.size() || !token.ends_with(suffix))
            continue;
        std::string_view rest(token.data(), token.size() - suffix.size());
        if (unicode::grapheme_count(rest) >= rules.min_stem_len())
            return std::string(rest);
    }
    return token;
}

struct Preprocessor {
    StopwordList stopwords;
    SuffixRuleTable suffixes;

    static Preprocessor marathi() { return {StopwordList::marathi(), SuffixRuleTable::marathi()}; }

    Tokens operator()(std::string_view text) const;
};

/// normalize -> tokenize -> remove_stopwords -> stem. Stems that land on a
/// stopword are dropped as well.
inline Tokens preprocess(std::string_view text, const StopwordList& stops, const SuffixRuleTable& rules)
{
    Tokens tokens = remove_stopwords(tokenize(normalize(text)), stops);
    Tokens out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) {
        std::string s = stem(t, rules);
        if (!stops.contains(s))
            out.push_back(std::move(s));
    }
    return out;
}

inline Tokens Preprocessor::operator()(std::string_view text) const
{
    return preprocess(text, stopwords, suffixes);
}

inline std::string join(const Tokens& tokens)
{
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty())
            out += ' ';
        out += t;
    }
    return out;
}

} // namespace plagdet::preprocess
