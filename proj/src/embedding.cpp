#include "qrank/embedding.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace qrank {

namespace {

void normalize_rows(std::vector<float>& vectors, size_t dim) {
    for (size_t off = 0; off < vectors.size(); off += dim) {
        double sq = 0.0;
        for (size_t i = 0; i < dim; ++i) sq += double(vectors[off + i]) * vectors[off + i];
        if (sq <= 0.0) continue;
        const float inv = static_cast<float>(1.0 / std::sqrt(sq));
        for (size_t i = 0; i < dim; ++i) vectors[off + i] *= inv;
    }
}

std::string lowercase_ascii(std::string s) {
    for (char& c : s)
        if (c >= 'A' && c <= 'Z') c += 0x20;
    return s;
}

bool parse_float(std::string_view field, float& out) {
    const char* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, out);
    return ec == std::errc{} && ptr == end;
}

}  // namespace

EmbeddingStore::EmbeddingStore(size_t dim, std::vector<std::string> words,
                               std::vector<float> vectors)
    : dim_(dim), words_(std::move(words)), vectors_(std::move(vectors)) {
    if (words_.size() * dim_ != vectors_.size())
        throw std::runtime_error("embedding store shape mismatch");
    normalize_rows(vectors_, dim_);
    lookup_.reserve(words_.size());
    for (uint32_t row = 0; row < words_.size(); ++row)
        lookup_.emplace(lowercase_ascii(words_[row]), row);
}

std::optional<uint32_t> EmbeddingStore::row_of(const std::string& word_lower) const {
    auto it = lookup_.find(word_lower);
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
}

EmbeddingStore load_embeddings(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open embedding file: " + path);

    std::vector<std::string> words;
    std::vector<float> vectors;
    std::unordered_map<std::string, uint32_t> seen;
    size_t dim = 0, skipped = 0, duplicates = 0, line_no = 0;
    bool first_content_line = true;
    std::string line;
    std::vector<std::string_view> fields;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();

        fields.clear();
        size_t pos = 0;
        const std::string_view view(line);
        while (pos < view.size()) {
            while (pos < view.size() && view[pos] == ' ') ++pos;
            const size_t start = pos;
            while (pos < view.size() && view[pos] != ' ') ++pos;
            if (pos > start) fields.push_back(view.substr(start, pos - start));
        }
        if (fields.empty()) {
            ++skipped;
            continue;
        }
        // word2vec-style "<count> <dim>" header
        if (first_content_line && fields.size() == 2) {
            float a = 0, b = 0;
            if (parse_float(fields[0], a) && parse_float(fields[1], b)) {
                first_content_line = false;
                continue;
            }
        }
        first_content_line = false;

        if (fields.size() < 2)
            throw std::runtime_error("embedding line " + std::to_string(line_no) +
                                     ": no vector components");
        const size_t this_dim = fields.size() - 1;
        if (dim == 0) {
            dim = this_dim;
        } else if (this_dim != dim) {
            throw std::runtime_error("embedding line " + std::to_string(line_no) +
                                     ": dimension " + std::to_string(this_dim) +
                                     " does not match established dimension " +
                                     std::to_string(dim));
        }
        const std::string key = lowercase_ascii(std::string(fields[0]));
        if (seen.count(key)) {
            ++duplicates;
            continue;
        }
        const size_t row_off = vectors.size();
        vectors.resize(row_off + dim);
        for (size_t i = 0; i < dim; ++i) {
            if (!parse_float(fields[i + 1], vectors[row_off + i]))
                throw std::runtime_error("embedding line " + std::to_string(line_no) +
                                         ": cannot parse component '" +
                                         std::string(fields[i + 1]) + "'");
        }
        seen.emplace(key, static_cast<uint32_t>(words.size()));
        words.push_back(std::string(fields[0]));
    }
    if (words.empty())
        throw std::runtime_error("embedding file has no valid entries: " + path);

    EmbeddingStore store(dim, std::move(words), std::move(vectors));
    store.skipped_lines = skipped;
    store.duplicate_words = duplicates;
    return store;
}

}  // namespace qrank
