#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "qrank/analysis.hpp"
#include "qrank/index.hpp"
#include "qrank/scenario.hpp"

namespace qrank {

enum class SplitName { dev, test };

SplitName split_from_name(std::string_view name);
std::string_view split_name(SplitName s);

enum class Relevance { relevant, irrelevant };

// Accepts the raw tri-state labels (PerfectMatch, Relevant, Irrelevant) as
// well as the already-mapped binary ones.
Relevance relevance_from_label(std::string_view label);
std::string_view relevance_name(Relevance r);

struct QueryRecord {
    std::string query_id;
    Scenario scenario = Scenario::EN;
    std::string text;                      // subject + body, single space joined
    std::vector<std::string> candidates;   // candidate doc_ids in file order
    std::map<std::string, Relevance> qrels;
};

struct DatasetSplit {
    SplitName name = SplitName::dev;
    std::vector<QueryRecord> queries;
    std::vector<Document> documents;
};

// Loads one JSONL dataset file: one object per query, candidates embedded as
// {"doc_id","text","relevance"}. Candidate texts are analyzed into Document
// terms with the given analyzer. expected_candidates = 0 disables the
// per-query candidate count check.
DatasetSplit load_dataset(const std::filesystem::path& path, SplitName name, Scenario scenario,
                          const AnalyzerConfig& analyzer, size_t expected_candidates = 10);

// Paired EN/MT splits must agree on everything but the query text: same
// query_id set, identical candidate lists, qrels, and candidate texts.
// Throws naming the first offending query or document.
void verify_alignment(const DatasetSplit& en, const DatasetSplit& mt);

}  // namespace qrank
