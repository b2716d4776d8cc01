#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace qrank {

// hypernym word -> (hyponym label, confidence); confidences in [0,1],
// hyponym lists deduplicated keeping the max confidence per label.
class HypernymGraph {
public:
    void add_edge(const std::string& hypernym, const std::string& hyponym_label,
                  double confidence);

    // Labels with confidence >= threshold (inclusive), label asc.
    std::vector<std::pair<std::string, double>> hyponyms_at_least(const std::string& hypernym,
                                                                  double threshold) const;

    size_t hypernym_count() const { return edges_.size(); }
    size_t edge_count() const;

    std::vector<size_t> rejected_lines;  // out-of-range confidence rows, skipped at load

private:
    std::unordered_map<std::string, std::vector<std::pair<std::string, double>>> edges_;
};

// Tab-separated, three columns: hyponym_label, hypernym_word, confidence.
// An optional header line is detected by its unparseable third column.
// Rows with confidence outside [0,1] are skipped and their line numbers
// recorded; an unparseable confidence on a data row is a hard error.
HypernymGraph load_hypernym_graph(const std::string& path);

}  // namespace qrank
