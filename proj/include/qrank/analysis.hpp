#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace qrank {

// Token list produced by the analyzer. Tokens are lowercase, free of
// whitespace and punctuation, and never on the active stopword list.
using TokenStream = std::vector<std::string>;

enum class Stemmer { none, english_light, porter };

Stemmer stemmer_from_name(std::string_view name);
std::string_view stemmer_name(Stemmer s);

struct AnalyzerConfig {
    std::set<std::string> stopwords;  // lowercase, no whitespace
    Stemmer stemmer = Stemmer::english_light;
    bool strip_punctuation = true;
};

// Config with the built-in stopword list and the default (light) stemmer.
AnalyzerConfig default_analyzer();

// Stopword file: one lowercase word per line, UTF-8, '#' comments ignored.
std::set<std::string> load_stopwords(const std::string& path);

// Full pipeline: lowercase, split on whitespace/punctuation, drop stopwords,
// stem. Same config + same input always yields the same tokens.
TokenStream analyze(std::string_view text, const AnalyzerConfig& config);

// Identical semantics to analyze(); named entry point for expansion values
// ("Tourist activities" and the like) so they never reach a query unanalyzed.
TokenStream analyze_phrase(std::string_view phrase, const AnalyzerConfig& config);

// The surface words expanders consume: lowercased, punctuation-split,
// stopword-filtered, but NOT stemmed. Embedding vocabularies and knowledge
// base keys are surface forms, so stemming happens only after expansion.
std::vector<std::string> query_words(std::string_view text, const AnalyzerConfig& config);

// Stemmers operate on lowercase words.
std::string porter_stem(std::string word);
std::string light_stem(std::string word);
std::string apply_stemmer(Stemmer s, std::string word);

}  // namespace qrank
