#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "qrank/analysis.hpp"

namespace qrank {

// An existing question: the unit being re-ranked.
struct Document {
    std::string doc_id;    // collection-unique
    std::string query_id;  // the new question this candidate belongs to
    std::string raw_text;
    TokenStream terms;     // analyzed

    size_t length() const { return terms.size(); }
};

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

struct RankedEntry {
    std::string doc_id;
    double score = 0.0;
    uint32_t rank = 0;  // 1-based
};

struct RankedList {
    std::string query_id;
    std::vector<RankedEntry> entries;  // score desc, ties doc_id asc
};

class InvertedIndex {
public:
    struct Posting {
        uint32_t doc = 0;  // ordinal into doc_ids_
        uint32_t tf = 0;
    };

    size_t n_docs() const { return doc_ids_.size(); }
    double avg_doc_length() const { return avg_doc_length_; }
    size_t vocab_size() const { return postings_.size(); }

    uint32_t doc_freq(const std::string& term) const;
    bool has_doc(const std::string& doc_id) const;
    uint32_t doc_length(const std::string& doc_id) const;

    // Nonnegative idf: ln(1 + (N - df + 0.5) / (df + 0.5)). Unknown term -> 0.
    double idf(const std::string& term) const;

    friend InvertedIndex build_index(const std::vector<Document>& docs);
    friend void save_index(const InvertedIndex& index, const std::string& path);
    friend InvertedIndex load_index(const std::string& path);
    friend double bm25_score(const InvertedIndex& index,
                             const std::vector<std::string>& query_terms,
                             const std::string& doc_id, const Bm25Params& params);
    friend RankedList rerank_candidates(const InvertedIndex& index,
                                        const std::vector<std::string>& query_terms,
                                        const std::string& query_id,
                                        const std::vector<std::string>& candidate_ids,
                                        const Bm25Params& params);

private:
    uint32_t ordinal_or_throw(const std::string& doc_id) const;
    double score_ordinal(const std::vector<std::string>& distinct_terms, uint32_t ord,
                         const Bm25Params& params) const;

    std::vector<std::string> doc_ids_;     // ordinal -> id, in build order
    std::vector<uint32_t> doc_lengths_;    // by ordinal
    std::unordered_map<std::string, uint32_t> doc_ordinal_;
    std::unordered_map<std::string, std::vector<Posting>> postings_;  // ordinal asc
    double avg_doc_length_ = 0.0;
};

// Index the whole collection. Duplicate doc_ids are rejected by name.
// An empty collection is valid (n_docs = 0) but unsearchable.
InvertedIndex build_index(const std::vector<Document>& docs);

// BM25 with full-collection statistics. Query terms are distinct-term
// semantics: duplicates contribute once. Terms absent from the index
// contribute 0. Throws on unknown doc_id or an empty index.
double bm25_score(const InvertedIndex& index, const std::vector<std::string>& query_terms,
                  const std::string& doc_id, const Bm25Params& params);

// Score exactly the given candidates (no collection-wide retrieval) with
// full-collection statistics; sort score desc, ties doc_id asc.
RankedList rerank_candidates(const InvertedIndex& index,
                             const std::vector<std::string>& query_terms,
                             const std::string& query_id,
                             const std::vector<std::string>& candidate_ids,
                             const Bm25Params& params);

// Versioned text snapshot; load(save(x)) reproduces identical scores.
void save_index(const InvertedIndex& index, const std::string& path);
InvertedIndex load_index(const std::string& path);

}  // namespace qrank
