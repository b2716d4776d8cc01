#include "qrank/knn.hpp"

#include <algorithm>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qrank {

namespace {

bool better(const Neighbor& a, const Neighbor& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.word < b.word;
}

// Bounded best-k list; k is tiny (2 by default) so insertion sort is fine.
struct TopK {
    explicit TopK(size_t k) : k_(k) {}

    void offer(Neighbor n) {
        if (k_ == 0) return;
        if (items.size() == k_ && !better(n, items.back())) return;
        auto pos = std::upper_bound(items.begin(), items.end(), n, better);
        items.insert(pos, std::move(n));
        if (items.size() > k_) items.pop_back();
    }

    std::vector<Neighbor> items;

private:
    size_t k_;
};

bool is_excluded(const std::string& word, const std::unordered_set<std::string>& exclude) {
    bool has_upper = false;
    for (const char c : word)
        if (c >= 'A' && c <= 'Z') {
            has_upper = true;
            break;
        }
    if (!has_upper) return exclude.count(word) != 0;
    std::string lower(word);
    for (char& c : lower)
        if (c >= 'A' && c <= 'Z') c += 0x20;
    return exclude.count(lower) != 0;
}

double dot_rows(const EmbeddingStore& store, uint32_t a, uint32_t b) {
    const float* va = store.vector(a);
    const float* vb = store.vector(b);
    double sum = 0.0;
    for (size_t i = 0; i < store.dim(); ++i) sum += double(va[i]) * double(vb[i]);
    return sum;
}

void scan_range(const EmbeddingStore& store, uint32_t query_row, uint32_t begin, uint32_t end,
                const std::unordered_set<std::string>& exclude, TopK& top) {
    for (uint32_t row = begin; row < end; ++row) {
        if (row == query_row) continue;
        if (is_excluded(store.word(row), exclude)) continue;
        top.offer({store.word(row), dot_rows(store, query_row, row)});
    }
}

}  // namespace

double cosine_rows(const EmbeddingStore& store, uint32_t a, uint32_t b) {
    return dot_rows(store, a, b);
}

std::vector<Neighbor> top_k_neighbors_serial(const EmbeddingStore& store, uint32_t query_row,
                                             size_t k,
                                             const std::unordered_set<std::string>& exclude) {
    TopK top(k);
    scan_range(store, query_row, 0, static_cast<uint32_t>(store.size()), exclude, top);
    return std::move(top.items);
}

std::vector<Neighbor> top_k_neighbors_parallel(const EmbeddingStore& store, uint32_t query_row,
                                               size_t k,
                                               const std::unordered_set<std::string>& exclude,
                                               int threads) {
    TopK merged(k);
#ifdef _OPENMP
    const auto n = static_cast<uint32_t>(store.size());
#pragma omp parallel num_threads(threads > 0 ? threads : omp_get_max_threads())
    {
        const int nt = omp_get_num_threads();
        const int tid = omp_get_thread_num();
        const uint32_t chunk = (n + nt - 1) / nt;
        const uint32_t begin = std::min(n, chunk * static_cast<uint32_t>(tid));
        const uint32_t end = std::min(n, begin + chunk);
        TopK local(k);
        scan_range(store, query_row, begin, end, exclude, local);
#pragma omp critical
        for (auto& item : local.items) merged.offer(std::move(item));
    }
#else
    (void)threads;
    scan_range(store, query_row, 0, static_cast<uint32_t>(store.size()), exclude, merged);
#endif
    return std::move(merged.items);
}

std::vector<Neighbor> top_k_neighbors(const EmbeddingStore& store, uint32_t query_row, size_t k,
                                      const std::unordered_set<std::string>& exclude,
                                      int threads) {
    if (threads <= 1) return top_k_neighbors_serial(store, query_row, k, exclude);
    return top_k_neighbors_parallel(store, query_row, k, exclude, threads);
}

}  // namespace qrank
