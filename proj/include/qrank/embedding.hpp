#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace qrank {

// Dense word vectors, L2-normalized at load so cosine reduces to a dot
// product. Lookup is exact-match on the lowercased surface form.
class EmbeddingStore {
public:
    EmbeddingStore() = default;
    EmbeddingStore(size_t dim, std::vector<std::string> words, std::vector<float> vectors);

    size_t dim() const { return dim_; }
    size_t size() const { return words_.size(); }
    const std::string& word(uint32_t row) const { return words_[row]; }
    const float* vector(uint32_t row) const { return vectors_.data() + size_t(row) * dim_; }
    std::optional<uint32_t> row_of(const std::string& word_lower) const;

    size_t skipped_lines = 0;    // malformed input lines, counted at load
    size_t duplicate_words = 0;  // later duplicates dropped, first kept

private:
    size_t dim_ = 0;
    std::vector<std::string> words_;
    std::vector<float> vectors_;  // row-major, normalized
    std::unordered_map<std::string, uint32_t> lookup_;
};

// Text format, one entry per line: "word v1 v2 ... vd". Dimension is set by
// the first entry and enforced thereafter (hard error with the line number).
// A leading "<count> <dim>" header line is tolerated. Empty lines are counted
// and skipped; duplicate words keep the first occurrence.
EmbeddingStore load_embeddings(const std::string& path);

}  // namespace qrank
