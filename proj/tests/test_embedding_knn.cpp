#include <doctest.h>

#include <qrank/embedding.hpp>
#include <qrank/knn.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

using namespace qrank;

namespace {

std::string fixture_path(const std::string& name) {
    const char* dir = std::getenv("QRANK_FIXTURES");
    REQUIRE_MESSAGE(dir != nullptr, "QRANK_FIXTURES must point at tests/fixtures");
    return (std::filesystem::path(dir) / name).string();
}

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
    auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path;
}

// Exhaustive oracle: cosine against every other row, similarity desc, word asc.
std::vector<Neighbor> brute_force_knn(const EmbeddingStore& store, uint32_t query_row, size_t k,
                                      const std::unordered_set<std::string>& exclude) {
    std::vector<Neighbor> all;
    for (uint32_t row = 0; row < store.size(); ++row) {
        if (row == query_row) continue;
        std::string lower = store.word(row);
        for (char& c : lower)
            if (c >= 'A' && c <= 'Z') c += 0x20;
        if (exclude.count(lower)) continue;
        all.push_back({store.word(row), cosine_rows(store, query_row, row)});
    }
    std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.word < b.word;
    });
    if (all.size() > k) all.resize(k);
    return all;
}

EmbeddingStore random_store(std::mt19937& rng, size_t n, size_t dim) {
    std::vector<std::string> words;
    std::vector<float> vectors;
    std::uniform_real_distribution<float> comp(-1.0f, 1.0f);
    for (size_t i = 0; i < n; ++i) {
        words.push_back("w" + std::to_string(i));
        for (size_t j = 0; j < dim; ++j) vectors.push_back(comp(rng));
    }
    return EmbeddingStore(dim, std::move(words), std::move(vectors));
}

}  // namespace

TEST_CASE("loads the toy embedding fixture") {
    auto store = load_embeddings(fixture_path("embeddings_toy.txt"));
    CHECK(store.dim() == 5);
    CHECK(store.size() == 42);
    CHECK(store.skipped_lines == 0);
    CHECK(store.duplicate_words == 0);
    REQUIRE(store.row_of("traveling").has_value());
    CHECK(!store.row_of("notaword").has_value());

    // rows come back L2-normalized
    auto row = *store.row_of("travel");
    const float* v = store.vector(row);
    double sq = 0;
    for (size_t i = 0; i < store.dim(); ++i) sq += double(v[i]) * v[i];
    CHECK(sq == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("word2vec header line is tolerated") {
    auto path = write_temp("qrank_emb_header.txt", "2 3\nalpha 1 0 0\nbeta 0 1 0\n");
    auto store = load_embeddings(path.string());
    CHECK(store.size() == 2);
    CHECK(store.dim() == 3);
    std::filesystem::remove(path);
}

TEST_CASE("lookup is case-insensitive on the lowercased surface form") {
    auto path = write_temp("qrank_emb_case.txt", "Rome 1 0\nparis 0 1\n");
    auto store = load_embeddings(path.string());
    REQUIRE(store.row_of("rome").has_value());
    CHECK(!store.row_of("Rome").has_value());  // callers pass lowercase
    CHECK(store.word(*store.row_of("rome")) == "Rome");
    std::filesystem::remove(path);
}

TEST_CASE("dimension mismatch is a hard error naming the line") {
    auto path = write_temp("qrank_emb_dim.txt", "alpha 1 0 0\nbeta 0 1 0\ngamma 1 0\n");
    CHECK_THROWS_WITH_AS(load_embeddings(path.string()), doctest::Contains("line 3"),
                         std::runtime_error);
    std::filesystem::remove(path);
}

TEST_CASE("unparseable component is a hard error naming the line") {
    auto path = write_temp("qrank_emb_float.txt", "alpha 1 0\nbeta 0 oops\n");
    CHECK_THROWS_WITH_AS(load_embeddings(path.string()), doctest::Contains("line 2"),
                         std::runtime_error);
    std::filesystem::remove(path);
}

TEST_CASE("duplicate words keep the first vector") {
    auto path = write_temp("qrank_emb_dup.txt", "alpha 1 0\nALPHA 0 1\nbeta 0 1\n");
    auto store = load_embeddings(path.string());
    CHECK(store.size() == 2);
    CHECK(store.duplicate_words == 1);
    auto row = *store.row_of("alpha");
    CHECK(store.vector(row)[0] == doctest::Approx(1.0));
    std::filesystem::remove(path);
}

TEST_CASE("empty lines are skipped and counted") {
    auto path = write_temp("qrank_emb_blank.txt", "\nalpha 1 0\n\nbeta 0 1\n");
    auto store = load_embeddings(path.string());
    CHECK(store.size() == 2);
    CHECK(store.skipped_lines == 2);
    std::filesystem::remove(path);
}

TEST_CASE("file with no valid entries is rejected") {
    auto path = write_temp("qrank_emb_empty.txt", "\n\n");
    CHECK_THROWS_WITH_AS(load_embeddings(path.string()), doctest::Contains("no valid entries"),
                         std::runtime_error);
    std::filesystem::remove(path);
    CHECK_THROWS(load_embeddings("/nonexistent/embeddings.txt"));
}

TEST_CASE("zero vectors stay zero and never rank above real neighbors") {
    auto path = write_temp("qrank_emb_zero.txt", "null 0 0 0\nalpha 1 0 0\nbeta 0.9 0.1 0\n");
    auto store = load_embeddings(path.string());
    auto row = *store.row_of("alpha");
    auto neighbors = top_k_neighbors_serial(store, row, 2, {});
    REQUIRE(neighbors.size() == 2);
    CHECK(neighbors[0].word == "beta");
    CHECK(neighbors[1].word == "null");
    CHECK(neighbors[1].similarity == 0.0);
    std::filesystem::remove(path);
}

TEST_CASE("known neighborhoods in the toy store") {
    auto store = load_embeddings(fixture_path("embeddings_toy.txt"));

    auto row = *store.row_of("traveling");
    auto top2 = top_k_neighbors_serial(store, row, 2, {});
    REQUIRE(top2.size() == 2);
    CHECK(top2[0].word == "travelers");
    CHECK(top2[1].word == "trips");

    row = *store.row_of("travel");
    top2 = top_k_neighbors_serial(store, row, 2, {});
    REQUIRE(top2.size() == 2);
    CHECK(top2[0].word == "trips");
    CHECK(top2[1].word == "travelers");
}

TEST_CASE("exact similarity ties break alphabetically") {
    auto store = load_embeddings(fixture_path("embeddings_toy.txt"));
    // vacation and holiday share one vector, so any third query sees an exact tie
    auto row = *store.row_of("vacation");
    auto top1 = top_k_neighbors_serial(store, row, 1, {});
    REQUIRE(top1.size() == 1);
    CHECK(top1[0].word == "holiday");
    CHECK(top1[0].similarity == doctest::Approx(1.0).epsilon(1e-6));

    for (uint32_t q = 0; q < store.size(); ++q) {
        auto neighbors = top_k_neighbors_serial(store, q, store.size(), {});
        const Neighbor* hol = nullptr;
        const Neighbor* vac = nullptr;
        for (const auto& n : neighbors) {
            if (n.word == "holiday") hol = &n;
            if (n.word == "vacation") vac = &n;
        }
        if (hol && vac && hol->similarity == vac->similarity) {
            // alphabetical order on equal similarity
            auto pos = [&](const Neighbor* p) {
                return static_cast<size_t>(p - neighbors.data());
            };
            CHECK(pos(hol) < pos(vac));
        }
    }
}

TEST_CASE("exclusion set removes words from consideration") {
    auto store = load_embeddings(fixture_path("embeddings_toy.txt"));
    auto row = *store.row_of("traveling");
    auto filtered = top_k_neighbors_serial(store, row, 2, {"travelers", "trips"});
    REQUIRE(filtered.size() == 2);
    CHECK(filtered[0].word == "travel");
    for (const auto& n : filtered) {
        CHECK(n.word != "travelers");
        CHECK(n.word != "trips");
    }
}

TEST_CASE("k larger than vocabulary returns everything available") {
    auto store = load_embeddings(fixture_path("embeddings_toy.txt"));
    auto row = *store.row_of("travel");
    auto all = top_k_neighbors_serial(store, row, 1000, {});
    CHECK(all.size() == store.size() - 1);
    auto none = top_k_neighbors_serial(store, row, 0, {});
    CHECK(none.empty());
}

TEST_CASE("serial results match the exhaustive oracle for every vocabulary word") {
    auto store = load_embeddings(fixture_path("embeddings_toy.txt"));
    const std::unordered_set<std::string> exclude = {"the", "of"};
    for (uint32_t row = 0; row < store.size(); ++row) {
        auto got = top_k_neighbors_serial(store, row, 4, exclude);
        auto want = brute_force_knn(store, row, 4, exclude);
        REQUIRE(got.size() == want.size());
        for (size_t i = 0; i < got.size(); ++i) {
            CAPTURE(store.word(row));
            CAPTURE(i);
            CHECK(got[i].word == want[i].word);
            CHECK(got[i].similarity == want[i].similarity);
        }
    }
}

TEST_CASE("parallel kernel is bitwise identical to the serial reference") {
    std::mt19937 rng(20160613);
    auto store = random_store(rng, 200, 8);
    std::unordered_set<std::string> exclude = {"w3", "w77", "w150"};
    for (int threads : {2, 3, 8}) {
        for (uint32_t row : {0u, 17u, 99u, 199u}) {
            auto serial = top_k_neighbors_serial(store, row, 5, exclude);
            auto parallel = top_k_neighbors_parallel(store, row, 5, exclude, threads);
            REQUIRE(serial.size() == parallel.size());
            for (size_t i = 0; i < serial.size(); ++i) {
                CAPTURE(threads);
                CAPTURE(row);
                CHECK(serial[i].word == parallel[i].word);
                // bitwise, not approximate
                CHECK(serial[i].similarity == parallel[i].similarity);
            }
        }
    }
}

TEST_CASE("dispatch routes to serial for threads <= 1") {
    std::mt19937 rng(7);
    auto store = random_store(rng, 50, 4);
    auto a = top_k_neighbors(store, 3, 5, {}, 1);
    auto b = top_k_neighbors_serial(store, 3, 5, {});
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].word == b[i].word);
        CHECK(a[i].similarity == b[i].similarity);
    }
    auto c = top_k_neighbors(store, 3, 5, {}, 4);
    REQUIRE(c.size() == b.size());
    for (size_t i = 0; i < c.size(); ++i) CHECK(c[i].word == b[i].word);
}
