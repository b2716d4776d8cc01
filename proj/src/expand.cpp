#include "qrank/expand.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "qrank/knn.hpp"

namespace qrank {

namespace {

std::string lowercase_ascii(std::string s) {
    for (char& c : s)
        if (c >= 'A' && c <= 'Z') c += 0x20;
    return s;
}

}  // namespace

std::string_view source_name(Source s) {
    switch (s) {
        case Source::keyword: return "keyword";
        case Source::word_embedding: return "word_embedding";
        case Source::dbpedia: return "dbpedia";
        case Source::hypernym: return "hypernym";
    }
    return "keyword";
}

Source source_from_name(std::string_view name) {
    if (name == "keyword" || name == "kw") return Source::keyword;
    if (name == "word_embedding" || name == "we") return Source::word_embedding;
    if (name == "dbpedia" || name == "db") return Source::dbpedia;
    if (name == "hypernym" || name == "hn") return Source::hypernym;
    throw std::runtime_error("unknown expansion source: " + std::string(name));
}

SourceSet::SourceSet(std::initializer_list<Source> sources) {
    for (const Source s : sources) insert(s);
}

size_t SourceSet::size() const {
    size_t n = 0;
    for (const Source s : precedence_order())
        if (contains(s)) ++n;
    return n;
}

SourceSet SourceSet::united(SourceSet other) const {
    SourceSet out = *this;
    out.bits_ |= other.bits_;
    return out;
}

SourceSet SourceSet::parse(std::string_view csv) {
    SourceSet out;
    size_t pos = 0;
    while (pos <= csv.size()) {
        size_t comma = csv.find(',', pos);
        if (comma == std::string_view::npos) comma = csv.size();
        std::string_view item = csv.substr(pos, comma - pos);
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
        if (!item.empty()) out.insert(source_from_name(item));
        pos = comma + 1;
    }
    if (out.empty())
        throw std::runtime_error("no expansion sources in '" + std::string(csv) + "'");
    return out;
}

std::string SourceSet::to_string() const {
    static constexpr std::string_view kShort[] = {"kw", "we", "db", "hn"};
    std::string out;
    for (const Source s : precedence_order()) {
        if (!contains(s)) continue;
        if (!out.empty()) out.push_back(',');
        out += kShort[static_cast<uint8_t>(s)];
    }
    return out;
}

const std::array<Source, 4>& SourceSet::precedence_order() {
    static const std::array<Source, 4> order = {Source::keyword, Source::word_embedding,
                                                Source::dbpedia, Source::hypernym};
    return order;
}

std::vector<std::string> ExpandedQuery::tokens() const {
    std::vector<std::string> out;
    out.reserve(terms.size());
    for (const auto& t : terms) out.push_back(t.term);
    return out;
}

std::vector<std::string> ExpandedQuery::tokens_of(Source s) const {
    std::vector<std::string> out;
    for (const auto& t : terms)
        if (t.source == s) out.push_back(t.term);
    return out;
}

size_t ExpandedQuery::count_of(Source s) const {
    size_t n = 0;
    for (const auto& t : terms)
        if (t.source == s) ++n;
    return n;
}

std::vector<ExpansionTerm> expand_word_embedding(const std::vector<std::string>& query_terms,
                                                 const EmbeddingStore& store,
                                                 const AnalyzerConfig& analyzer, size_t k,
                                                 int threads) {
    if (store.size() == 0) throw std::runtime_error("embedding store is empty");
    if (k == 0) throw std::runtime_error("embedding expansion requires k >= 1");

    std::unordered_set<std::string> exclude(analyzer.stopwords.begin(), analyzer.stopwords.end());
    for (const auto& term : query_terms) exclude.insert(lowercase_ascii(term));

    std::vector<ExpansionTerm> out;
    for (const auto& term : query_terms) {
        const auto row = store.row_of(lowercase_ascii(term));
        if (!row) continue;  // out of vocabulary
        for (const auto& neighbor : top_k_neighbors(store, *row, k, exclude, threads)) {
            for (auto& token : analyze_phrase(neighbor.word, analyzer))
                out.push_back({std::move(token), Source::word_embedding, term, neighbor.word,
                               std::nullopt});
        }
    }
    return out;
}

std::vector<ExpansionTerm> expand_dbpedia(const std::vector<std::string>& query_terms,
                                          KbLookup& kb, const AnalyzerConfig& analyzer,
                                          size_t max_subjects) {
    std::vector<ExpansionTerm> out;
    for (const auto& term : query_terms) {
        const auto subjects = kb.subjects(lowercase_ascii(term));
        if (!subjects) continue;  // unresolvable or soft fetch failure
        size_t taken = 0;
        for (const auto& label : *subjects) {
            if (max_subjects > 0 && taken >= max_subjects) break;
            ++taken;
            for (auto& token : analyze_phrase(label, analyzer))
                out.push_back({std::move(token), Source::dbpedia, term, label, std::nullopt});
        }
    }
    return out;
}

std::vector<ExpansionTerm> expand_hypernym(const std::vector<std::string>& query_terms,
                                           const HypernymGraph& graph,
                                           const AnalyzerConfig& analyzer, double threshold) {
    std::vector<ExpansionTerm> out;
    for (const auto& term : query_terms) {
        for (const auto& [label, conf] : graph.hyponyms_at_least(lowercase_ascii(term), threshold)) {
            for (auto& token : analyze_phrase(label, analyzer))
                out.push_back({std::move(token), Source::hypernym, term, label, conf});
        }
    }
    return out;
}

ExpandedQuery combine(const std::string& query_id, Scenario scenario,
                      const std::string& original_text, SourceSet enabled,
                      const ExpansionResources& resources) {
    if (enabled.empty())
        throw std::runtime_error("combine: at least one expansion source must be enabled");
    if (!resources.analyzer) throw std::runtime_error("combine: analyzer config missing");
    const auto& analyzer = *resources.analyzer;

    const auto words = query_words(original_text, analyzer);

    std::vector<ExpansionTerm> candidates;
    if (enabled.contains(Source::keyword)) {
        for (const auto& word : words)
            for (auto& token : analyze_phrase(word, analyzer))
                candidates.push_back({std::move(token), Source::keyword, word, word, std::nullopt});
    }
    if (enabled.contains(Source::word_embedding)) {
        if (!resources.embeddings)
            throw std::runtime_error("combine: word_embedding enabled but no embedding store");
        auto terms = expand_word_embedding(words, *resources.embeddings, analyzer,
                                           resources.k_neighbors, resources.threads);
        std::move(terms.begin(), terms.end(), std::back_inserter(candidates));
    }
    if (enabled.contains(Source::dbpedia)) {
        if (!resources.kb) throw std::runtime_error("combine: dbpedia enabled but no KB lookup");
        auto terms = expand_dbpedia(words, *resources.kb, analyzer, resources.max_subjects);
        std::move(terms.begin(), terms.end(), std::back_inserter(candidates));
    }
    if (enabled.contains(Source::hypernym)) {
        if (!resources.hypernyms)
            throw std::runtime_error("combine: hypernym enabled but no hypernym graph");
        auto terms = expand_hypernym(words, *resources.hypernyms, analyzer,
                                     resources.hypernym_threshold);
        std::move(terms.begin(), terms.end(), std::back_inserter(candidates));
    }

    // Union with dedup on the analyzed token; candidates arrive in source
    // precedence order, so keeping the first occurrence applies it.
    ExpandedQuery out;
    out.query_id = query_id;
    out.scenario = scenario;
    out.enabled_sources = enabled;
    std::unordered_set<std::string> seen;
    out.terms.reserve(candidates.size());
    for (auto& term : candidates) {
        if (!seen.insert(term.term).second) continue;
        out.terms.push_back(std::move(term));
    }
    std::sort(out.terms.begin(), out.terms.end(),
              [](const ExpansionTerm& a, const ExpansionTerm& b) { return a.term < b.term; });
    return out;
}

ExpansionStats expansion_stats(const std::vector<ExpandedQuery>& queries) {
    if (queries.empty()) throw std::runtime_error("expansion_stats: no queries");
    ExpansionStats stats;
    stats.query_count = queries.size();
    double keyword_total = 0.0;
    std::map<Source, double> totals;
    for (const Source s : SourceSet::precedence_order()) totals[s] = 0.0;
    for (const auto& query : queries) {
        keyword_total += static_cast<double>(query.count_of(Source::keyword));
        for (const Source s : SourceSet::precedence_order())
            if (s != Source::keyword) totals[s] += static_cast<double>(query.count_of(s));
    }
    stats.avg_keyword_terms = keyword_total / static_cast<double>(queries.size());
    for (const Source s : SourceSet::precedence_order()) {
        if (s == Source::keyword) continue;
        stats.avg_added[s] = totals[s] / static_cast<double>(queries.size());
    }
    return stats;
}

}  // namespace qrank
