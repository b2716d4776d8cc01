#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qrank/analysis.hpp"
#include "qrank/embedding.hpp"
#include "qrank/hypernym.hpp"
#include "qrank/kb.hpp"
#include "qrank/scenario.hpp"

namespace qrank {

enum class Source : uint8_t { keyword = 0, word_embedding = 1, dbpedia = 2, hypernym = 3 };

std::string_view source_name(Source s);
Source source_from_name(std::string_view name);

// Small set over the four sources; iteration follows dedup precedence
// keyword > word_embedding > dbpedia > hypernym.
class SourceSet {
public:
    SourceSet() = default;
    SourceSet(std::initializer_list<Source> sources);

    void insert(Source s) { bits_ |= bit(s); }
    bool contains(Source s) const { return bits_ & bit(s); }
    bool empty() const { return bits_ == 0; }
    size_t size() const;
    SourceSet united(SourceSet other) const;
    bool operator==(const SourceSet&) const = default;

    // "kw,we,db,hn" (long names accepted too)
    static SourceSet parse(std::string_view csv);
    std::string to_string() const;

    static const std::array<Source, 4>& precedence_order();

private:
    static uint8_t bit(Source s) { return static_cast<uint8_t>(1u << static_cast<uint8_t>(s)); }
    uint8_t bits_ = 0;
};

struct ExpansionTerm {
    std::string term;            // analyzed token
    Source source = Source::keyword;
    std::string origin_query_term;  // the query word that produced it
    std::string raw_value;          // pre-analysis value, e.g. "Tourist activities"
    std::optional<double> confidence;  // hypernym edges only
};

// Deduplicated union over the enabled sources. Terms are kept sorted by
// analyzed token so serialization is byte-stable.
struct ExpandedQuery {
    std::string query_id;
    Scenario scenario = Scenario::EN;
    SourceSet enabled_sources;
    std::vector<ExpansionTerm> terms;  // unique analyzed tokens, token asc

    std::vector<std::string> tokens() const;
    std::vector<std::string> tokens_of(Source s) const;
    size_t count_of(Source s) const;
};

struct ExpansionResources {
    const AnalyzerConfig* analyzer = nullptr;
    const EmbeddingStore* embeddings = nullptr;
    const HypernymGraph* hypernyms = nullptr;
    KbLookup* kb = nullptr;
    size_t k_neighbors = 2;
    double hypernym_threshold = 0.75;
    size_t max_subjects = 0;  // 0 = unlimited
    int threads = 1;          // kNN kernel threads
};

// The k nearest in-vocabulary words per query term, excluding the query
// terms themselves and stopwords; neighbors are analyzed before inclusion.
std::vector<ExpansionTerm> expand_word_embedding(const std::vector<std::string>& query_terms,
                                                 const EmbeddingStore& store,
                                                 const AnalyzerConfig& analyzer, size_t k,
                                                 int threads = 1);

// Subject labels of the concept matching each query term (exact
// case-insensitive key match), analyzed; unresolvable terms contribute
// nothing. max_subjects = 0 takes all returned subjects.
std::vector<ExpansionTerm> expand_dbpedia(const std::vector<std::string>& query_terms,
                                          KbLookup& kb, const AnalyzerConfig& analyzer,
                                          size_t max_subjects = 0);

// Hyponym labels with confidence >= threshold (inclusive), analyzed.
std::vector<ExpansionTerm> expand_hypernym(const std::vector<std::string>& query_terms,
                                           const HypernymGraph& graph,
                                           const AnalyzerConfig& analyzer, double threshold);

// Union of the enabled sources over the original query text, deduplicated on
// the analyzed token with source precedence. enabled must be nonempty.
ExpandedQuery combine(const std::string& query_id, Scenario scenario,
                      const std::string& original_text, SourceSet enabled,
                      const ExpansionResources& resources);

struct ExpansionStats {
    double avg_keyword_terms = 0.0;
    std::map<Source, double> avg_added;  // mean count of terms tagged per source
    size_t query_count = 0;
};

ExpansionStats expansion_stats(const std::vector<ExpandedQuery>& queries);

}  // namespace qrank
