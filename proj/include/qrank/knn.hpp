#pragma once

#include <string>
#include <unordered_set>
#include <vector>

#include "qrank/embedding.hpp"

namespace qrank {

struct Neighbor {
    std::string word;
    double similarity = 0.0;
};

// Top-k cosine neighbors of the given row, skipping the row itself and any
// word whose lowercased form is in `exclude`. Order: similarity desc, ties
// word asc. The serial variant is the reference; the parallel variant splits
// the vocabulary scan across OpenMP threads and must produce identical
// output (per-row dot products are computed the same way in both).
std::vector<Neighbor> top_k_neighbors_serial(const EmbeddingStore& store, uint32_t query_row,
                                             size_t k,
                                             const std::unordered_set<std::string>& exclude);

std::vector<Neighbor> top_k_neighbors_parallel(const EmbeddingStore& store, uint32_t query_row,
                                               size_t k,
                                               const std::unordered_set<std::string>& exclude,
                                               int threads);

// Dispatch: threads <= 1 runs the serial reference.
std::vector<Neighbor> top_k_neighbors(const EmbeddingStore& store, uint32_t query_row, size_t k,
                                      const std::unordered_set<std::string>& exclude,
                                      int threads);

double cosine_rows(const EmbeddingStore& store, uint32_t a, uint32_t b);

}  // namespace qrank
