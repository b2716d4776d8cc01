#include <doctest.h>

#include <qrank/analysis.hpp>
#include <qrank/embedding.hpp>
#include <qrank/expand.hpp>
#include <qrank/hypernym.hpp>
#include <qrank/kb.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

using namespace qrank;

namespace {

std::string fixture_path(const std::string& name) {
    const char* dir = std::getenv("QRANK_FIXTURES");
    REQUIRE_MESSAGE(dir != nullptr, "QRANK_FIXTURES must point at tests/fixtures");
    return (std::filesystem::path(dir) / name).string();
}

struct Toy {
    AnalyzerConfig analyzer = default_analyzer();
    EmbeddingStore embeddings;
    HypernymGraph hypernyms;
    KbSubjectCache cache;
    std::unique_ptr<CachedKbLookup> kb;

    Toy() {
        embeddings = load_embeddings(fixture_path("embeddings_toy.txt"));
        hypernyms = load_hypernym_graph(fixture_path("hypernym_toy.tsv"));
        cache = load_kb_cache(fixture_path("kb_cache_toy.jsonl"));
        kb = std::make_unique<CachedKbLookup>(cache);
    }

    ExpansionResources resources() {
        ExpansionResources r;
        r.analyzer = &analyzer;
        r.embeddings = &embeddings;
        r.hypernyms = &hypernyms;
        r.kb = kb.get();
        return r;
    }
};

const std::string kTravelQuery =
    "I will be traveling to Rome in June with a group of high school students .";

std::set<std::string> token_set(const ExpandedQuery& q) {
    auto toks = q.tokens();
    return {toks.begin(), toks.end()};
}

}  // namespace

TEST_CASE("source names round-trip and parse short or long forms") {
    CHECK(source_name(Source::keyword) == "keyword");
    CHECK(source_name(Source::word_embedding) == "word_embedding");
    CHECK(source_from_name("kw") == Source::keyword);
    CHECK(source_from_name("we") == Source::word_embedding);
    CHECK(source_from_name("db") == Source::dbpedia);
    CHECK(source_from_name("hn") == Source::hypernym);
    CHECK(source_from_name("dbpedia") == Source::dbpedia);
    CHECK_THROWS(source_from_name("wordnet"));

    auto set = SourceSet::parse("kw,we,db,hn");
    CHECK(set.size() == 4);
    CHECK(set.to_string() == "kw,we,db,hn");
    CHECK(SourceSet::parse("hypernym, keyword").to_string() == "kw,hn");
    CHECK(SourceSet::parse("kw,,we").to_string() == "kw,we");
    CHECK_THROWS(SourceSet::parse(""));
    CHECK_THROWS(SourceSet::parse("kw,wordnet"));

    const auto& order = SourceSet::precedence_order();
    CHECK(order[0] == Source::keyword);
    CHECK(order[1] == Source::word_embedding);
    CHECK(order[2] == Source::dbpedia);
    CHECK(order[3] == Source::hypernym);
}

TEST_CASE("embedding expansion returns analyzed neighbors of surface words") {
    Toy toy;
    auto terms = expand_word_embedding({"traveling"}, toy.embeddings, toy.analyzer, 2);
    REQUIRE(terms.size() == 2);
    // neighbors travelers, trips arrive analyzed (light stem)
    std::set<std::string> got;
    for (const auto& t : terms) {
        got.insert(t.term);
        CHECK(t.source == Source::word_embedding);
        CHECK(t.origin_query_term == "traveling");
        CHECK(!t.confidence.has_value());
    }
    CHECK(got == std::set<std::string>{"traveler", "trip"});
}

TEST_CASE("embedding expansion excludes query terms and stopwords") {
    Toy toy;
    // "travel" would normally surface in traveling's neighborhood
    auto terms = expand_word_embedding({"traveling", "travel"}, toy.embeddings, toy.analyzer, 3);
    for (const auto& t : terms) {
        CHECK(t.raw_value != "traveling");
        CHECK(t.raw_value != "travel");
        CHECK(toy.analyzer.stopwords.count(t.raw_value) == 0);
    }
}

TEST_CASE("embedding expansion skips out-of-vocabulary query words") {
    Toy toy;
    auto terms = expand_word_embedding({"xylophone"}, toy.embeddings, toy.analyzer, 2);
    CHECK(terms.empty());
    auto mixed = expand_word_embedding({"xylophone", "traveling"}, toy.embeddings, toy.analyzer, 2);
    CHECK(mixed.size() == 2);
}

TEST_CASE("embedding expansion validates its inputs") {
    Toy toy;
    EmbeddingStore empty;
    CHECK_THROWS_WITH_AS(expand_word_embedding({"travel"}, empty, toy.analyzer, 2),
                         doctest::Contains("empty"), std::runtime_error);
    CHECK_THROWS_WITH_AS(expand_word_embedding({"travel"}, toy.embeddings, toy.analyzer, 0),
                         doctest::Contains("k >= 1"), std::runtime_error);
}

TEST_CASE("knowledge-base expansion analyzes subject labels") {
    Toy toy;
    auto terms = expand_dbpedia({"traveling"}, *toy.kb, toy.analyzer);
    std::set<std::string> got;
    for (const auto& t : terms) {
        got.insert(t.term);
        CHECK(t.source == Source::dbpedia);
        CHECK(t.origin_query_term == "traveling");
    }
    // Tourism, Tourist activities, Transport culture
    CHECK(got == std::set<std::string>{"tourism", "tourist", "activity", "transport", "culture"});
}

TEST_CASE("knowledge-base expansion skips unresolvable terms and caps subjects") {
    Toy toy;
    CHECK(expand_dbpedia({"xylophone"}, *toy.kb, toy.analyzer).empty());

    auto capped = expand_dbpedia({"traveling"}, *toy.kb, toy.analyzer, 1);
    std::set<std::string> got;
    for (const auto& t : capped) {
        got.insert(t.term);
        CHECK(t.raw_value == "Tourism");
    }
    CHECK(got == std::set<std::string>{"tourism"});
}

TEST_CASE("hypernym expansion honors the inclusive confidence threshold") {
    Toy toy;
    auto terms = expand_hypernym({"travel"}, toy.hypernyms, toy.analyzer, 0.75);
    std::set<std::string> raw;
    for (const auto& t : terms) {
        raw.insert(t.raw_value);
        CHECK(t.source == Source::hypernym);
        REQUIRE(t.confidence.has_value());
        CHECK(*t.confidence >= 0.75);
    }
    // 0.82, 0.80 and the boundary row at 0.76; "business trip" at 0.74 is out
    CHECK(raw == std::set<std::string>{"operating expense", "related expense", "personal expense"});

    HypernymGraph g;
    g.add_edge("travel", "at threshold", 0.75);
    g.add_edge("travel", "below threshold", 0.7499);
    auto boundary = expand_hypernym({"travel"}, g, toy.analyzer, 0.75);
    REQUIRE(boundary.size() == 1);
    CHECK(boundary[0].raw_value == "at threshold");
    CHECK(*boundary[0].confidence == 0.75);
}

TEST_CASE("combine unions sources and tags terms by precedence") {
    Toy toy;
    auto res = toy.resources();
    auto all = combine("q01", Scenario::EN, kTravelQuery,
                       {Source::keyword, Source::word_embedding, Source::dbpedia,
                        Source::hypernym},
                       res);
    CHECK(all.query_id == "q01");
    CHECK(all.scenario == Scenario::EN);

    // terms arrive sorted by token and unique
    auto toks = all.tokens();
    CHECK(std::is_sorted(toks.begin(), toks.end()));
    CHECK(std::adjacent_find(toks.begin(), toks.end()) == toks.end());

    // keyword tokens all present
    for (const auto& kw : analyze(kTravelQuery, toy.analyzer)) {
        CAPTURE(kw);
        CHECK(std::find(toks.begin(), toks.end(), kw) != toks.end());
    }
    // known contributions of each source
    auto set = token_set(all);
    for (const char* t : {"traveler", "trip", "tourism", "tourist", "activity",
                          "operating", "expense"}) {
        CAPTURE(t);
        CHECK(set.count(t) == 1);
    }
}

TEST_CASE("dedup keeps the highest-precedence source") {
    Toy toy;
    auto res = toy.resources();

    // The WE neighbor "trips" analyzes to "trip", colliding with the keyword
    // token of the query word "trip" (itself out of the embedding vocabulary,
    // so the neighbor survives the query-term exclusion).
    auto weq = combine("q", Scenario::EN, "traveling trip", {Source::word_embedding}, res);
    auto both = combine("q", Scenario::EN, "traveling trip",
                        {Source::keyword, Source::word_embedding}, res);
    bool found = false;
    for (const auto& t : both.terms) {
        if (t.term == "trip") {
            CHECK(t.source == Source::keyword);  // keyword outranks embedding
            found = true;
        }
    }
    CHECK(found);
    // the same token exists in the WE-only expansion tagged word_embedding
    found = false;
    for (const auto& t : weq.terms) {
        if (t.term == "trip") {
            CHECK(t.source == Source::word_embedding);
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("union laws: containment, monotonicity, compositionality") {
    Toy toy;
    auto res = toy.resources();
    const std::vector<std::string> pool = {
        kTravelQuery,
        "traveling trips",
        "school group in rome",
        "holiday vacation tour",
        "expense of travel",
        "rome june",
    };
    const std::vector<SourceSet> singles = {{Source::keyword},
                                            {Source::word_embedding},
                                            {Source::dbpedia},
                                            {Source::hypernym}};
    std::mt19937 rng(42);
    std::uniform_int_distribution<size_t> pick_text(0, pool.size() - 1);
    std::uniform_int_distribution<int> coin(0, 1);

    for (int trial = 0; trial < 50; ++trial) {
        const auto& text = pool[pick_text(rng)];
        SourceSet a, b;
        for (const auto& s : singles) {
            if (coin(rng)) a = a.united(s);
            if (coin(rng)) b = b.united(s);
        }
        if (a.empty()) a = {Source::keyword};
        if (b.empty()) b = {Source::hypernym};

        auto qa = combine("q", Scenario::EN, text, a, res);
        auto qb = combine("q", Scenario::EN, text, b, res);
        auto qab = combine("q", Scenario::EN, text, a.united(b), res);

        auto sa = token_set(qa);
        auto sb = token_set(qb);
        auto sab = token_set(qab);

        // compositionality: tokens(A ∪ B) = tokens(A) ∪ tokens(B)
        std::set<std::string> expected = sa;
        expected.insert(sb.begin(), sb.end());
        CAPTURE(trial);
        CAPTURE(text);
        CHECK(sab == expected);

        // monotonicity
        for (const auto& t : sa) CHECK(sab.count(t) == 1);

        // baseline containment when keyword is enabled
        if (a.contains(Source::keyword)) {
            for (const auto& kw : analyze(text, toy.analyzer)) CHECK(sa.count(kw) == 1);
        }
    }
}

TEST_CASE("combine validates sources and resources") {
    Toy toy;
    auto res = toy.resources();
    CHECK_THROWS(combine("q", Scenario::EN, "text", SourceSet{}, res));

    ExpansionResources missing_kb = res;
    missing_kb.kb = nullptr;
    CHECK_NOTHROW(combine("q", Scenario::EN, "text", {Source::keyword}, missing_kb));
    CHECK_THROWS(combine("q", Scenario::EN, "text", {Source::dbpedia}, missing_kb));

    ExpansionResources missing_emb = res;
    missing_emb.embeddings = nullptr;
    CHECK_THROWS(combine("q", Scenario::EN, "text", {Source::word_embedding}, missing_emb));

    ExpansionResources missing_hyp = res;
    missing_hyp.hypernyms = nullptr;
    CHECK_THROWS(combine("q", Scenario::EN, "text", {Source::hypernym}, missing_hyp));

    ExpansionResources no_analyzer = res;
    no_analyzer.analyzer = nullptr;
    CHECK_THROWS(combine("q", Scenario::EN, "text", {Source::keyword}, no_analyzer));
}

TEST_CASE("expanded query accessors") {
    Toy toy;
    auto res = toy.resources();
    auto q = combine("q01", Scenario::MT, kTravelQuery,
                     {Source::keyword, Source::hypernym}, res);
    CHECK(q.scenario == Scenario::MT);
    CHECK(q.count_of(Source::keyword) == q.tokens_of(Source::keyword).size());
    CHECK(q.count_of(Source::word_embedding) == 0);
    CHECK(q.count_of(Source::keyword) + q.count_of(Source::hypernym) == q.terms.size());
    for (const auto& t : q.tokens_of(Source::hypernym))
        CHECK(std::find(q.tokens().begin(), q.tokens().end(), t) != q.tokens().end());
}

TEST_CASE("origin and raw values are recorded") {
    Toy toy;
    auto res = toy.resources();
    auto q = combine("q", Scenario::EN, "traveling", {Source::dbpedia}, res);
    for (const auto& t : q.terms) {
        CHECK(t.origin_query_term == "traveling");
        CHECK(!t.raw_value.empty());
    }
}

TEST_CASE("expansion statistics") {
    Toy toy;
    auto res = toy.resources();
    std::vector<ExpandedQuery> queries;
    queries.push_back(combine("q1", Scenario::EN, "traveling",
                              {Source::keyword, Source::word_embedding}, res));
    queries.push_back(combine("q2", Scenario::EN, "rome june",
                              {Source::keyword, Source::word_embedding}, res));
    auto stats = expansion_stats(queries);
    CHECK(stats.query_count == 2);
    const double kw = (double(queries[0].count_of(Source::keyword)) +
                       double(queries[1].count_of(Source::keyword))) / 2.0;
    CHECK(stats.avg_keyword_terms == doctest::Approx(kw));
    const double we = (double(queries[0].count_of(Source::word_embedding)) +
                       double(queries[1].count_of(Source::word_embedding))) / 2.0;
    CHECK(stats.avg_added.at(Source::word_embedding) == doctest::Approx(we));
    CHECK_THROWS(expansion_stats({}));
}
