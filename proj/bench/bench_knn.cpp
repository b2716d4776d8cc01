// Compares the serial reference kernels with their OpenMP counterparts on
// synthetic data sized like the real workload (GloVe-scale rows, ten
// candidates per query).

#include <benchmark/benchmark.h>

#include <qrank/embedding.hpp>
#include <qrank/expand.hpp>
#include <qrank/index.hpp>
#include <qrank/knn.hpp>

#include <random>
#include <string>
#include <vector>

namespace {

qrank::EmbeddingStore make_store(size_t words, size_t dim) {
    std::mt19937 rng(4242);
    std::uniform_real_distribution<float> comp(-1.0f, 1.0f);
    std::vector<std::string> names;
    std::vector<float> vectors;
    names.reserve(words);
    vectors.reserve(words * dim);
    for (size_t i = 0; i < words; ++i) {
        names.push_back("w" + std::to_string(i));
        for (size_t j = 0; j < dim; ++j) vectors.push_back(comp(rng));
    }
    return qrank::EmbeddingStore(dim, std::move(names), std::move(vectors));
}

const qrank::EmbeddingStore& store() {
    static const qrank::EmbeddingStore s = make_store(20000, 100);
    return s;
}

void bm_knn_serial(benchmark::State& state) {
    const auto& s = store();
    uint32_t row = 0;
    for (auto _ : state) {
        auto neighbors = qrank::top_k_neighbors_serial(s, row, 2, {});
        benchmark::DoNotOptimize(neighbors);
        row = (row + 37) % uint32_t(s.size());
    }
    state.SetItemsProcessed(int64_t(state.iterations()) * int64_t(s.size()));
}

void bm_knn_parallel(benchmark::State& state) {
    const auto& s = store();
    const int threads = int(state.range(0));
    uint32_t row = 0;
    for (auto _ : state) {
        auto neighbors = qrank::top_k_neighbors_parallel(s, row, 2, {}, threads);
        benchmark::DoNotOptimize(neighbors);
        row = (row + 37) % uint32_t(s.size());
    }
    state.SetItemsProcessed(int64_t(state.iterations()) * int64_t(s.size()));
}

struct RerankFixture {
    qrank::InvertedIndex index;
    std::vector<std::vector<std::string>> queries;
    std::vector<std::string> candidates;

    RerankFixture() {
        std::mt19937 rng(99);
        std::uniform_int_distribution<int> len(4, 40);
        std::uniform_int_distribution<int> word(0, 499);
        std::vector<qrank::Document> docs;
        for (int i = 0; i < 1000; ++i) {
            qrank::Document d;
            d.doc_id = "d" + std::to_string(i);
            d.query_id = "q";
            const int n = len(rng);
            for (int j = 0; j < n; ++j) d.terms.push_back("t" + std::to_string(word(rng)));
            docs.push_back(std::move(d));
        }
        index = qrank::build_index(docs);
        for (int i = 0; i < 64; ++i) {
            std::vector<std::string> q;
            for (int j = 0; j < 12; ++j) q.push_back("t" + std::to_string(word(rng)));
            queries.push_back(std::move(q));
        }
        for (int i = 0; i < 10; ++i) candidates.push_back("d" + std::to_string(i * 97));
    }
};

void bm_rerank_batch(benchmark::State& state) {
    static const RerankFixture fx;
    const qrank::Bm25Params params;
    for (auto _ : state) {
        for (const auto& q : fx.queries) {
            auto ranked = qrank::rerank_candidates(fx.index, q, "q", fx.candidates, params);
            benchmark::DoNotOptimize(ranked);
        }
    }
    state.SetItemsProcessed(int64_t(state.iterations()) * int64_t(fx.queries.size()));
}

}  // namespace

BENCHMARK(bm_knn_serial);
BENCHMARK(bm_knn_parallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8);
BENCHMARK(bm_rerank_batch);

BENCHMARK_MAIN();
