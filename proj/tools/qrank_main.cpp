#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qrank/analysis.hpp"
#include "qrank/dataset.hpp"
#include "qrank/embedding.hpp"
#include "qrank/eval.hpp"
#include "qrank/expand.hpp"
#include "qrank/hypernym.hpp"
#include "qrank/index.hpp"
#include "qrank/io_util.hpp"
#include "qrank/kb.hpp"
#include "qrank/knn.hpp"
#include "qrank/scenario.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qrank;

namespace {

struct RunConfig {
    std::string dataset_en_dev, dataset_en_test, dataset_mt_dev, dataset_mt_test;
    std::string embeddings, hypernyms, kb_cache, stopwords;
    std::string index_dev, index_test;
    std::string out_dir = "out";
    std::string stemmer = "light";
    double k1 = 1.2;
    double b = 0.75;
    int k_neighbors = 2;
    double hypernym_threshold = 0.75;
    int max_subjects = 0;  // 0 = unlimited
    int threads = 1;
    bool offline = false;
    std::string kb_endpoint = "https://dbpedia.org/data/{term}.json";
    int kb_delay_ms = 1000;
    int expected_candidates = 10;
};

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::runtime_error("config key " + key + ": expected a boolean, got \"" + v + "\"");
}

std::string trim(const std::string& s) {
    const size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

void apply_config_line(RunConfig& cfg, const std::string& key, const std::string& value) {
    const auto set_path = [&](std::string RunConfig::*field) { cfg.*field = value; };
    if (key == "dataset_en_dev") return set_path(&RunConfig::dataset_en_dev);
    if (key == "dataset_en_test") return set_path(&RunConfig::dataset_en_test);
    if (key == "dataset_mt_dev") return set_path(&RunConfig::dataset_mt_dev);
    if (key == "dataset_mt_test") return set_path(&RunConfig::dataset_mt_test);
    if (key == "embeddings") return set_path(&RunConfig::embeddings);
    if (key == "hypernyms") return set_path(&RunConfig::hypernyms);
    if (key == "kb_cache") return set_path(&RunConfig::kb_cache);
    if (key == "stopwords") return set_path(&RunConfig::stopwords);
    if (key == "index_dev") return set_path(&RunConfig::index_dev);
    if (key == "index_test") return set_path(&RunConfig::index_test);
    if (key == "out_dir") return set_path(&RunConfig::out_dir);
    if (key == "stemmer") return set_path(&RunConfig::stemmer);
    if (key == "kb_endpoint") return set_path(&RunConfig::kb_endpoint);
    if (key == "k1") { cfg.k1 = std::stod(value); return; }
    if (key == "b") { cfg.b = std::stod(value); return; }
    if (key == "hypernym_threshold") { cfg.hypernym_threshold = std::stod(value); return; }
    if (key == "k_neighbors") { cfg.k_neighbors = std::stoi(value); return; }
    if (key == "max_subjects") { cfg.max_subjects = std::stoi(value); return; }
    if (key == "threads") { cfg.threads = std::stoi(value); return; }
    if (key == "kb_delay_ms") { cfg.kb_delay_ms = std::stoi(value); return; }
    if (key == "expected_candidates") { cfg.expected_candidates = std::stoi(value); return; }
    if (key == "offline") { cfg.offline = parse_bool(value, key); return; }
    throw std::runtime_error("unknown config key: " + key);
}

void load_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[' && t.back() == ']') continue;  // section headers are cosmetic
        const size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + " line " + std::to_string(line_no) +
                                     ": expected key = value");
        try {
            apply_config_line(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
        } catch (const std::exception& e) {
            throw std::runtime_error(path + " line " + std::to_string(line_no) + ": " + e.what());
        }
    }
}

void validate_config(const RunConfig& cfg) {
    if (cfg.hypernym_threshold < 0.0 || cfg.hypernym_threshold > 1.0)
        throw std::runtime_error("hypernym_threshold must be in [0,1]");
    if (cfg.k_neighbors < 1) throw std::runtime_error("k_neighbors must be >= 1");
    if (cfg.threads < 1) throw std::runtime_error("threads must be >= 1");
    if (cfg.k1 < 0.0) throw std::runtime_error("k1 must be >= 0");
    if (cfg.b < 0.0 || cfg.b > 1.0) throw std::runtime_error("b must be in [0,1]");
    if (cfg.max_subjects < 0) throw std::runtime_error("max_subjects must be >= 0");
    if (cfg.expected_candidates < 0)
        throw std::runtime_error("expected_candidates must be >= 0");
    stemmer_from_name(cfg.stemmer);  // throws on unknown names
}

const std::string& dataset_path(const RunConfig& cfg, SplitName split, Scenario scenario) {
    if (scenario == Scenario::EN)
        return split == SplitName::dev ? cfg.dataset_en_dev : cfg.dataset_en_test;
    return split == SplitName::dev ? cfg.dataset_mt_dev : cfg.dataset_mt_test;
}

const std::string& index_path(const RunConfig& cfg, SplitName split) {
    return split == SplitName::dev ? cfg.index_dev : cfg.index_test;
}

// Lazily loaded shared state for one command invocation.
struct Resources {
    AnalyzerConfig analyzer;
    std::optional<EmbeddingStore> embeddings;
    std::optional<HypernymGraph> hypernyms;
    KbSubjectCache frozen_cache;  // backs CachedKbLookup
    std::unique_ptr<KbLookup> kb;
    LiveKbLookup* live_kb = nullptr;
    std::string cache_path;  // where to persist write-through updates

    ExpansionResources expansion(const RunConfig& cfg) const {
        ExpansionResources r;
        r.analyzer = &analyzer;
        r.embeddings = embeddings ? &*embeddings : nullptr;
        r.hypernyms = hypernyms ? &*hypernyms : nullptr;
        r.kb = kb.get();
        r.k_neighbors = size_t(cfg.k_neighbors);
        r.hypernym_threshold = cfg.hypernym_threshold;
        r.max_subjects = size_t(cfg.max_subjects);
        r.threads = cfg.threads;
        return r;
    }
};

AnalyzerConfig make_analyzer(const RunConfig& cfg) {
    AnalyzerConfig analyzer = default_analyzer();
    if (!cfg.stopwords.empty()) analyzer.stopwords = load_stopwords(cfg.stopwords);
    analyzer.stemmer = stemmer_from_name(cfg.stemmer);
    return analyzer;
}

void load_sources(Resources& res, const RunConfig& cfg, SourceSet sources) {
    if (sources.contains(Source::word_embedding) && !res.embeddings) {
        if (cfg.embeddings.empty())
            throw std::runtime_error("word_embedding source enabled but no embeddings path "
                                     "configured (key: embeddings)");
        res.embeddings = load_embeddings(cfg.embeddings);
        if (res.embeddings->skipped_lines > 0)
            std::fprintf(stderr, "note: %zu malformed embedding lines skipped\n",
                         res.embeddings->skipped_lines);
    }
    if (sources.contains(Source::hypernym) && !res.hypernyms) {
        if (cfg.hypernyms.empty())
            throw std::runtime_error("hypernym source enabled but no hypernym graph path "
                                     "configured (key: hypernyms)");
        res.hypernyms = load_hypernym_graph(cfg.hypernyms);
        if (!res.hypernyms->rejected_lines.empty())
            std::fprintf(stderr, "note: %zu hypernym rows with out-of-range confidence skipped\n",
                         res.hypernyms->rejected_lines.size());
    }
    if (sources.contains(Source::dbpedia) && !res.kb) {
        KbSubjectCache cache;
        if (!cfg.kb_cache.empty() && fs::exists(cfg.kb_cache)) {
            cache = load_kb_cache(cfg.kb_cache);
        } else if (!cfg.kb_cache.empty() && cfg.offline) {
            throw std::runtime_error("offline mode but KB cache file does not exist: " +
                                     cfg.kb_cache);
        } else if (cfg.kb_cache.empty()) {
            std::fprintf(stderr, "note: no kb_cache configured; subject lookups start empty\n");
        }
        if (cfg.offline) {
            res.frozen_cache = std::move(cache);
            res.kb = std::make_unique<CachedKbLookup>(res.frozen_cache);
        } else {
            auto client = std::make_shared<KbClient>(cfg.kb_endpoint, cfg.kb_delay_ms);
            auto live = std::make_unique<LiveKbLookup>(std::move(cache), std::move(client));
            res.live_kb = live.get();
            res.kb = std::move(live);
            res.cache_path = cfg.kb_cache;
        }
    }
}

// Persist write-through KB updates and surface soft failures.
void finish_kb(Resources& res) {
    if (!res.live_kb) return;
    for (const auto& item : res.live_kb->report().items)
        if (item.status == KbFetchItem::Status::error)
            std::fprintf(stderr, "warning: KB fetch failed for \"%s\": %s\n", item.term.c_str(),
                         item.detail.c_str());
    if (!res.cache_path.empty()) save_kb_cache(res.live_kb->cache(), res.cache_path);
}

DatasetSplit load_split(const RunConfig& cfg, SplitName split, Scenario scenario,
                        const AnalyzerConfig& analyzer) {
    const std::string& path = dataset_path(cfg, split, scenario);
    if (path.empty())
        throw std::runtime_error(std::string("no dataset path configured for ") +
                                 std::string(scenario_name(scenario)) + " " +
                                 std::string(split_name(split)));
    return load_dataset(path, split, scenario, analyzer, size_t(cfg.expected_candidates));
}

InvertedIndex load_split_index(const RunConfig& cfg, SplitName split) {
    const std::string& path = index_path(cfg, split);
    if (path.empty())
        throw std::runtime_error(std::string("no index path configured for the ") +
                                 std::string(split_name(split)) + " split (key: index_" +
                                 std::string(split_name(split)) + ")");
    if (!fs::exists(path))
        throw std::runtime_error("index file not found: " + path + " (run `qrank index --split " +
                                 std::string(split_name(split)) + "` first)");
    return load_index(path);
}

const QueryRecord& find_query(const DatasetSplit& split, const std::string& query_id) {
    for (const auto& q : split.queries)
        if (q.query_id == query_id) return q;
    throw std::runtime_error("unknown query_id: " + query_id + " (split " +
                             std::string(split_name(split.name)) + ")");
}

json expansion_to_json(const ExpandedQuery& eq, const std::string& text) {
    json out;
    out["query_id"] = eq.query_id;
    out["scenario"] = std::string(scenario_name(eq.scenario));
    out["sources"] = eq.enabled_sources.to_string();
    out["text"] = text;
    json terms = json::array();
    for (const auto& t : eq.terms) {
        json e;
        e["term"] = t.term;
        e["source"] = std::string(source_name(t.source));
        e["origin"] = t.origin_query_term;
        e["raw"] = t.raw_value;
        if (t.confidence) e["confidence"] = *t.confidence;
        terms.push_back(std::move(e));
    }
    out["terms"] = std::move(terms);
    return out;
}

void print_expansion(const ExpandedQuery& eq, const std::string& text) {
    std::printf("query %s (%s): %s\n", eq.query_id.c_str(),
                std::string(scenario_name(eq.scenario)).c_str(), text.c_str());
    for (const Source s : SourceSet::precedence_order()) {
        if (!eq.enabled_sources.contains(s)) continue;
        std::printf("%s (%zu):\n", std::string(source_name(s)).c_str(), eq.count_of(s));
        for (const auto& t : eq.terms) {
            if (t.source != s) continue;
            if (s == Source::keyword) {
                std::printf("  %s  [%s]\n", t.term.c_str(), t.raw_value.c_str());
            } else if (t.confidence) {
                std::printf("  %s -> %s  [%s, %.2f]\n", t.origin_query_term.c_str(),
                            t.term.c_str(), t.raw_value.c_str(), *t.confidence);
            } else {
                std::printf("  %s -> %s  [%s]\n", t.origin_query_term.c_str(), t.term.c_str(),
                            t.raw_value.c_str());
            }
        }
    }
}

std::vector<Scenario> parse_scenarios(const std::string& s) {
    if (s == "both") return {Scenario::EN, Scenario::MT};
    return {scenario_from_name(s)};
}

std::vector<SplitName> parse_splits(const std::string& s) {
    if (s == "both") return {SplitName::dev, SplitName::test};
    return {split_from_name(s)};
}

std::vector<double> parse_double_list(const std::string& csv, const std::string& what) {
    std::vector<double> out;
    size_t pos = 0;
    while (pos <= csv.size()) {
        size_t comma = csv.find(',', pos);
        if (comma == std::string::npos) comma = csv.size();
        const std::string item = trim(csv.substr(pos, comma - pos));
        if (!item.empty()) {
            try {
                size_t used = 0;
                const double v = std::stod(item, &used);
                if (used != item.size()) throw std::invalid_argument(item);
                out.push_back(v);
            } catch (...) {
                throw std::runtime_error("malformed " + what + " value: \"" + item + "\"");
            }
        }
        pos = comma + 1;
    }
    if (out.empty()) throw std::runtime_error(what + " list is empty");
    return out;
}

// "k1=0.4,0.8 b=0.5,0.75" -> the two axes; either may be omitted.
void parse_grid_spec(const std::string& spec, std::vector<double>& k1s, std::vector<double>& bs) {
    size_t pos = 0;
    while (pos < spec.size()) {
        while (pos < spec.size() && (spec[pos] == ' ' || spec[pos] == '\t')) ++pos;
        if (pos >= spec.size()) break;
        size_t end = spec.find_first_of(" \t", pos);
        if (end == std::string::npos) end = spec.size();
        const std::string token = spec.substr(pos, end - pos);
        pos = end;
        const size_t eq = token.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("malformed grid token \"" + token +
                                     "\" (expected k1=... or b=...)");
        const std::string key = token.substr(0, eq);
        const std::string values = token.substr(eq + 1);
        if (key == "k1") k1s = parse_double_list(values, "k1");
        else if (key == "b") bs = parse_double_list(values, "b");
        else throw std::runtime_error("unknown grid axis \"" + key + "\" (expected k1 or b)");
    }
}

int cmd_index(const RunConfig& cfg, const std::string& split_arg, bool as_json) {
    const SplitName split = split_from_name(split_arg);
    const AnalyzerConfig analyzer = make_analyzer(cfg);

    // EN and MT share documents; build from whichever dataset is configured.
    Scenario scenario = Scenario::EN;
    if (dataset_path(cfg, split, Scenario::EN).empty()) {
        if (dataset_path(cfg, split, Scenario::MT).empty())
            throw std::runtime_error(std::string("no dataset configured for the ") +
                                     std::string(split_name(split)) + " split");
        scenario = Scenario::MT;
    }
    const DatasetSplit data = load_split(cfg, split, scenario, analyzer);
    if (data.documents.empty()) throw std::runtime_error("dataset has no documents");

    const InvertedIndex index = build_index(data.documents);
    const std::string& out = index_path(cfg, split);
    if (out.empty())
        throw std::runtime_error("no index output path configured (key: index_" +
                                 std::string(split_name(split)) + ")");
    save_index(index, out);

    if (as_json) {
        json j;
        j["documents"] = index.n_docs();
        j["avg_doc_length"] = index.avg_doc_length();
        j["vocabulary"] = index.vocab_size();
        j["path"] = out;
        std::printf("%s\n", j.dump().c_str());
    } else {
        std::printf("%zu documents indexed\n", index.n_docs());
        std::printf("avg doc length: %.4f\n", index.avg_doc_length());
        std::printf("vocabulary: %zu terms\n", index.vocab_size());
        std::printf("index written to %s\n", out.c_str());
    }
    return 0;
}

int cmd_expand(const RunConfig& cfg, const std::string& query_id, const std::string& text,
               const std::string& split_arg, const std::string& scenario_arg,
               const std::string& sources_arg, bool as_json) {
    const SourceSet sources = SourceSet::parse(sources_arg);
    if (sources.empty()) throw std::runtime_error("no sources given");
    const Scenario scenario = scenario_from_name(scenario_arg);

    Resources res;
    res.analyzer = make_analyzer(cfg);
    load_sources(res, cfg, sources);

    std::string qid = query_id, qtext = text;
    if (!query_id.empty()) {
        const DatasetSplit split =
            load_split(cfg, split_from_name(split_arg), scenario, res.analyzer);
        qtext = find_query(split, query_id).text;
    } else if (!text.empty()) {
        qid = "adhoc";
    } else {
        throw std::runtime_error("expand needs --query-id or --text");
    }

    const ExpandedQuery eq = combine(qid, scenario, qtext, sources, res.expansion(cfg));
    if (as_json)
        std::printf("%s\n", expansion_to_json(eq, qtext).dump().c_str());
    else
        print_expansion(eq, qtext);
    finish_kb(res);
    return 0;
}

int cmd_search(const RunConfig& cfg, const std::string& query_id, const std::string& split_arg,
               const std::string& scenario_arg, const std::string& sources_arg,
               const std::string& run_file, bool as_json) {
    const SourceSet sources = SourceSet::parse(sources_arg);
    const Scenario scenario = scenario_from_name(scenario_arg);
    const SplitName split = split_from_name(split_arg);

    Resources res;
    res.analyzer = make_analyzer(cfg);
    load_sources(res, cfg, sources);

    const DatasetSplit data = load_split(cfg, split, scenario, res.analyzer);
    const QueryRecord& query = find_query(data, query_id);
    const InvertedIndex index = load_split_index(cfg, split);

    const ExpandedQuery eq = combine(query.query_id, scenario, query.text, sources,
                                     res.expansion(cfg));
    const Bm25Params params{cfg.k1, cfg.b};
    const RankedList ranking =
        rerank_candidates(index, eq.tokens(), query.query_id, query.candidates, params);

    const SystemSpec spec = make_system(sources, scenario);
    if (!run_file.empty()) emit_run_file({ranking}, spec.run_tag(), run_file);

    if (as_json) {
        json j;
        j["query_id"] = query.query_id;
        j["system"] = spec.run_tag();
        json entries = json::array();
        for (const auto& e : ranking.entries) {
            entries.push_back({{"rank", e.rank},
                               {"doc_id", e.doc_id},
                               {"score", e.score},
                               {"relevance", std::string(relevance_name(query.qrels.at(e.doc_id)))}});
        }
        j["ranking"] = std::move(entries);
        std::printf("%s\n", j.dump().c_str());
    } else {
        std::printf("query %s (%s), system %s\n", query.query_id.c_str(),
                    std::string(scenario_name(scenario)).c_str(), spec.id.c_str());
        std::printf("rank  score        doc_id            relevance\n");
        for (const auto& e : ranking.entries)
            std::printf("%4u  %11.6f  %-16s  %s\n", e.rank, e.score, e.doc_id.c_str(),
                        std::string(relevance_name(query.qrels.at(e.doc_id))).c_str());
    }
    finish_kb(res);
    return 0;
}

int cmd_eval(const RunConfig& cfg, bool grid, const std::string& sources_arg,
             const std::string& scenario_arg, const std::string& split_arg, bool as_json) {
    std::vector<SystemSpec> systems;
    if (grid) {
        systems = canonical_grid();
    } else {
        const SourceSet sources = SourceSet::parse(sources_arg);
        for (const Scenario s : parse_scenarios(scenario_arg))
            systems.push_back(make_system(sources, s));
    }

    SourceSet all_sources;
    for (const auto& s : systems) all_sources = all_sources.united(s.sources);

    Resources res;
    res.analyzer = make_analyzer(cfg);
    load_sources(res, cfg, all_sources);

    const bool want_en = std::any_of(systems.begin(), systems.end(),
                                     [](const auto& s) { return s.scenario == Scenario::EN; });
    const bool want_mt = std::any_of(systems.begin(), systems.end(),
                                     [](const auto& s) { return s.scenario == Scenario::MT; });

    GridInputs inputs;
    std::map<SplitName, DatasetSplit> en_splits, mt_splits;
    std::map<SplitName, InvertedIndex> indexes;
    for (const SplitName split : parse_splits(split_arg)) {
        bool any = false;
        if (want_en && !dataset_path(cfg, split, Scenario::EN).empty()) {
            en_splits[split] = load_split(cfg, split, Scenario::EN, res.analyzer);
            any = true;
        }
        if (want_mt && !dataset_path(cfg, split, Scenario::MT).empty()) {
            mt_splits[split] = load_split(cfg, split, Scenario::MT, res.analyzer);
            any = true;
        }
        if (en_splits.count(split) && mt_splits.count(split))
            verify_alignment(en_splits.at(split), mt_splits.at(split));
        if (any) indexes.emplace(split, load_split_index(cfg, split));

        SplitInputs& si = split == SplitName::dev ? inputs.dev : inputs.test;
        if (en_splits.count(split)) si.en = &en_splits.at(split);
        if (mt_splits.count(split)) si.mt = &mt_splits.at(split);
        if (indexes.count(split)) si.index = &indexes.at(split);
    }
    if (en_splits.empty() && mt_splits.empty())
        throw std::runtime_error("no datasets configured for the requested splits");

    const Bm25Params params{cfg.k1, cfg.b};
    const GridResult result =
        run_grid(inputs, res.expansion(cfg), params, systems, cfg.threads, true);

    fs::create_directories(cfg.out_dir);
    for (const auto& sys : result.systems) {
        if (!sys.dev_rankings.empty())
            emit_run_file(sys.dev_rankings, sys.system.run_tag(),
                          fs::path(cfg.out_dir) / ("dev." + sys.system.run_tag() + ".run"));
        if (!sys.test_rankings.empty())
            emit_run_file(sys.test_rankings, sys.system.run_tag(),
                          fs::path(cfg.out_dir) / ("test." + sys.system.run_tag() + ".run"));
    }
    for (const auto& [split, data] : en_splits)
        emit_qrels_file(data, fs::path(cfg.out_dir) /
                                  ("qrels_" + std::string(split_name(split)) + ".txt"));
    for (const auto& [split, data] : mt_splits) {
        if (en_splits.count(split)) continue;  // identical by alignment
        emit_qrels_file(data, fs::path(cfg.out_dir) /
                                  ("qrels_" + std::string(split_name(split)) + ".txt"));
    }
    write_reports(result, fs::path(cfg.out_dir) / "reports.jsonl");

    const std::string table = render_table(result);
    write_file_atomic((fs::path(cfg.out_dir) / "summary.txt").string(), table);

    if (as_json) {
        std::ifstream in(fs::path(cfg.out_dir) / "reports.jsonl");
        std::printf("%s", std::string(std::istreambuf_iterator<char>(in), {}).c_str());
    } else {
        std::printf("%s", table.c_str());
        std::printf("artifacts written to %s\n", cfg.out_dir.c_str());
    }
    for (const auto& w : result.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    finish_kb(res);
    return 0;
}

int cmd_tune(const RunConfig& cfg, const std::string& sources_arg,
             const std::string& scenario_arg, const std::string& grid_spec, bool as_json) {
    std::vector<double> k1s = {0.4, 0.8, 1.2, 1.6, 2.0};
    std::vector<double> bs = {0.0, 0.25, 0.5, 0.75, 1.0};
    if (!grid_spec.empty()) parse_grid_spec(grid_spec, k1s, bs);

    const SourceSet sources = SourceSet::parse(sources_arg);
    const Scenario scenario = scenario_from_name(scenario_arg);
    const SystemSpec spec = make_system(sources, scenario);

    Resources res;
    res.analyzer = make_analyzer(cfg);
    load_sources(res, cfg, sources);

    const DatasetSplit dev = load_split(cfg, SplitName::dev, scenario, res.analyzer);
    const InvertedIndex index = load_split_index(cfg, SplitName::dev);

    const TuneResult result =
        tune_params(spec, dev, index, res.expansion(cfg), k1s, bs, cfg.threads);

    fs::create_directories(cfg.out_dir);
    write_file_atomic((fs::path(cfg.out_dir) / "tune_grid.txt").string(),
                      render_tune_table(result));

    if (as_json) {
        json j;
        j["k1"] = result.best.k1;
        j["b"] = result.best.b;
        j["dev_map"] = result.best_map;
        std::printf("%s\n", j.dump().c_str());
    } else {
        std::printf("%s", render_tune_table(result).c_str());
        std::printf("grid table written to %s\n",
                    (fs::path(cfg.out_dir) / "tune_grid.txt").string().c_str());
    }
    finish_kb(res);
    return 0;
}

int cmd_fetch_kb(const RunConfig& cfg, const std::string& terms_arg, bool from_dataset,
                 const std::string& split_arg, const std::string& scenario_arg, bool as_json) {
    if (cfg.offline)
        throw std::runtime_error("fetch-kb contacts the knowledge base and cannot run with "
                                 "--offline; drop the flag (or the config key) to proceed");
    if (cfg.kb_cache.empty())
        throw std::runtime_error("no kb_cache path configured; nowhere to store fetched entries");

    const AnalyzerConfig analyzer = make_analyzer(cfg);
    std::set<std::string> terms;
    size_t pos = 0;
    while (pos <= terms_arg.size()) {
        size_t comma = terms_arg.find(',', pos);
        if (comma == std::string::npos) comma = terms_arg.size();
        const std::string t = trim(terms_arg.substr(pos, comma - pos));
        if (!t.empty())
            for (const auto& w : query_words(t, analyzer)) terms.insert(w);
        pos = comma + 1;
    }
    if (from_dataset) {
        for (const SplitName split : parse_splits(split_arg)) {
            for (const Scenario scenario : parse_scenarios(scenario_arg)) {
                if (dataset_path(cfg, split, scenario).empty()) continue;
                const DatasetSplit data = load_split(cfg, split, scenario, analyzer);
                for (const auto& q : data.queries)
                    for (const auto& w : query_words(q.text, analyzer)) terms.insert(w);
            }
        }
    }
    if (terms.empty()) throw std::runtime_error("no terms to fetch (use --terms or --from-dataset)");

    KbSubjectCache cache;
    if (fs::exists(cfg.kb_cache)) cache = load_kb_cache(cfg.kb_cache);

    KbClient client(cfg.kb_endpoint, cfg.kb_delay_ms);
    KbFetchReport report;
    for (const std::string& term : terms) {
        KbFetchItem item;
        item.term = term;
        if (cache.has(term)) {
            item.status = KbFetchItem::Status::cached;
        } else {
            std::string error;
            const auto subjects = client.fetch_subjects(term, error);
            if (!subjects) {
                item.status = KbFetchItem::Status::error;
                item.detail = error;
            } else {
                cache.put(term, {*subjects, iso8601_now()});
                item.status = subjects->empty() ? KbFetchItem::Status::miss
                                                : KbFetchItem::Status::ok;
                item.detail = std::to_string(subjects->size()) + " subjects";
            }
        }
        report.items.push_back(std::move(item));
    }
    save_kb_cache(cache, cfg.kb_cache);

    const auto status_str = [](KbFetchItem::Status s) {
        switch (s) {
            case KbFetchItem::Status::ok: return "ok";
            case KbFetchItem::Status::miss: return "miss";
            case KbFetchItem::Status::error: return "error";
            case KbFetchItem::Status::cached: return "cached";
        }
        return "?";
    };
    if (as_json) {
        json items = json::array();
        for (const auto& item : report.items)
            items.push_back({{"term", item.term},
                             {"status", status_str(item.status)},
                             {"detail", item.detail}});
        std::printf("%s\n", json{{"items", items}}.dump().c_str());
    } else {
        for (const auto& item : report.items)
            std::printf("%-24s %-7s %s\n", item.term.c_str(), status_str(item.status),
                        item.detail.c_str());
        std::printf("ok: %zu  miss: %zu  error: %zu  cached: %zu\n",
                    report.count(KbFetchItem::Status::ok), report.count(KbFetchItem::Status::miss),
                    report.count(KbFetchItem::Status::error),
                    report.count(KbFetchItem::Status::cached));
    }
    return report.count(KbFetchItem::Status::error) == 0 ? 0 : 1;
}

int cmd_stats(const RunConfig& cfg, const std::string& sources_arg,
              const std::string& scenario_arg, const std::string& split_arg, bool as_json) {
    const SourceSet sources = SourceSet::parse(sources_arg);
    const Scenario scenario = scenario_from_name(scenario_arg);
    const SplitName split = split_from_name(split_arg);

    Resources res;
    res.analyzer = make_analyzer(cfg);
    load_sources(res, cfg, sources);

    const DatasetSplit data = load_split(cfg, split, scenario, res.analyzer);
    const ExpansionResources er = res.expansion(cfg);

    std::vector<ExpandedQuery> expanded;
    expanded.reserve(data.queries.size());
    for (const auto& q : data.queries)
        expanded.push_back(combine(q.query_id, scenario, q.text, sources, er));
    const ExpansionStats stats = expansion_stats(expanded);

    if (as_json) {
        json j;
        j["queries"] = stats.query_count;
        j["avg_keyword_terms"] = stats.avg_keyword_terms;
        for (const auto& [source, avg] : stats.avg_added)
            if (sources.contains(source))
                j[std::string("avg_added_") + std::string(source_name(source))] = avg;
        std::printf("%s\n", j.dump().c_str());
    } else {
        std::printf("queries: %zu (%s %s)\n", stats.query_count,
                    std::string(scenario_name(scenario)).c_str(),
                    std::string(split_name(split)).c_str());
        std::printf("avg keyword terms per query: %.2f\n", stats.avg_keyword_terms);
        for (const auto& [source, avg] : stats.avg_added)
            if (sources.contains(source))
                std::printf("avg %s terms added per query: %.2f\n",
                            std::string(source_name(source)).c_str(), avg);
    }
    finish_kb(res);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"BM25 candidate re-ranking with multi-source query expansion"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    bool offline = false, as_json = false;
    app.add_option("--config", config_path, "Config file (key = value lines)");
    app.add_flag("--offline", offline, "Never touch the network; KB lookups use the cache only");
    app.add_flag("--json", as_json, "Machine-readable output");

    // Flag overrides for every config key; flags win over the file.
    std::map<std::string, std::optional<std::string>> str_over;
    for (const char* key :
         {"dataset_en_dev", "dataset_en_test", "dataset_mt_dev", "dataset_mt_test", "embeddings",
          "hypernyms", "kb_cache", "stopwords", "index_dev", "index_test", "out_dir", "stemmer",
          "kb_endpoint", "k1", "b", "k_neighbors", "hypernym_threshold", "max_subjects", "threads",
          "kb_delay_ms", "expected_candidates"}) {
        std::string flag = "--" + std::string(key);
        std::replace(flag.begin(), flag.end(), '_', '-');
        app.add_option_function<std::string>(
            flag, [&str_over, key](const std::string& v) { str_over[key] = v; },
            "Override config key " + std::string(key));
    }

    auto* c_index = app.add_subcommand("index", "Build and persist the per-split index");
    std::string idx_split = "test";
    c_index->add_option("--split", idx_split, "dev or test")
        ->check(CLI::IsMember({"dev", "test"}));

    auto* c_expand = app.add_subcommand("expand", "Show a query's expansion with provenance");
    std::string ex_qid, ex_text, ex_split = "test", ex_scen = "en", ex_sources = "kw,we,db,hn";
    c_expand->add_option("--query-id", ex_qid, "Query id from the dataset");
    c_expand->add_option("--text", ex_text, "Ad-hoc query text instead of --query-id");
    c_expand->add_option("--split", ex_split, "dev or test (with --query-id)")
        ->check(CLI::IsMember({"dev", "test"}));
    c_expand->add_option("--scenario", ex_scen, "en or mt")->check(CLI::IsMember({"en", "mt"}));
    c_expand->add_option("--sources", ex_sources, "Comma list of kw,we,db,hn");

    auto* c_search = app.add_subcommand("search", "Re-rank one query's candidates");
    std::string se_qid, se_split = "test", se_scen = "en", se_sources = "kw", se_run;
    c_search->add_option("--query-id", se_qid, "Query id from the dataset")->required();
    c_search->add_option("--split", se_split, "dev or test")
        ->check(CLI::IsMember({"dev", "test"}));
    c_search->add_option("--scenario", se_scen, "en or mt")->check(CLI::IsMember({"en", "mt"}));
    c_search->add_option("--sources", se_sources, "Comma list of kw,we,db,hn");
    c_search->add_option("--run-file", se_run, "Also write the ranking as a run file");

    auto* c_eval = app.add_subcommand("eval", "Evaluate systems; write run files and reports");
    bool ev_grid = false;
    std::string ev_sources = "kw", ev_scen = "both", ev_split = "both";
    c_eval->add_flag("--grid", ev_grid, "Run the full canonical system grid");
    c_eval->add_option("--sources", ev_sources, "Comma list of kw,we,db,hn (without --grid)");
    c_eval->add_option("--scenario", ev_scen, "en, mt or both")
        ->check(CLI::IsMember({"en", "mt", "both"}));
    c_eval->add_option("--split", ev_split, "dev, test or both")
        ->check(CLI::IsMember({"dev", "test", "both"}));

    auto* c_tune = app.add_subcommand("tune", "Grid-search k1 and b on the dev split");
    std::string tu_sources = "kw", tu_scen = "en", tu_grid;
    c_tune->add_option("--sources", tu_sources, "Comma list of kw,we,db,hn");
    c_tune->add_option("--scenario", tu_scen, "en or mt")->check(CLI::IsMember({"en", "mt"}));
    c_tune->add_option("--grid", tu_grid, "Grid spec, e.g. \"k1=0.4,0.8 b=0.5,0.75\"");

    auto* c_fetch = app.add_subcommand("fetch-kb", "Fetch subject labels into the KB cache");
    std::string fk_terms, fk_split = "both", fk_scen = "both";
    bool fk_from_dataset = false;
    c_fetch->add_option("--terms", fk_terms, "Comma list of terms to fetch");
    c_fetch->add_flag("--from-dataset", fk_from_dataset,
                      "Fetch every query word of the configured datasets");
    c_fetch->add_option("--split", fk_split, "dev, test or both (with --from-dataset)")
        ->check(CLI::IsMember({"dev", "test", "both"}));
    c_fetch->add_option("--scenario", fk_scen, "en, mt or both (with --from-dataset)")
        ->check(CLI::IsMember({"en", "mt", "both"}));

    auto* c_stats = app.add_subcommand("stats", "Expansion statistics over a split");
    std::string st_sources = "kw,we,db,hn", st_scen = "en", st_split = "test";
    c_stats->add_option("--sources", st_sources, "Comma list of kw,we,db,hn");
    c_stats->add_option("--scenario", st_scen, "en or mt")->check(CLI::IsMember({"en", "mt"}));
    c_stats->add_option("--split", st_split, "dev or test")
        ->check(CLI::IsMember({"dev", "test"}));

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg;
        if (!config_path.empty()) load_config_file(cfg, config_path);
        for (const auto& [key, value] : str_over)
            if (value) apply_config_line(cfg, key, *value);
        if (offline) cfg.offline = true;
        if (const char* endpoint = std::getenv("QRANK_KB_ENDPOINT"))
            if (*endpoint) cfg.kb_endpoint = endpoint;
        validate_config(cfg);

        if (app.got_subcommand(c_index)) return cmd_index(cfg, idx_split, as_json);
        if (app.got_subcommand(c_expand))
            return cmd_expand(cfg, ex_qid, ex_text, ex_split, ex_scen, ex_sources, as_json);
        if (app.got_subcommand(c_search))
            return cmd_search(cfg, se_qid, se_split, se_scen, se_sources, se_run, as_json);
        if (app.got_subcommand(c_eval))
            return cmd_eval(cfg, ev_grid, ev_sources, ev_scen, ev_split, as_json);
        if (app.got_subcommand(c_tune))
            return cmd_tune(cfg, tu_sources, tu_scen, tu_grid, as_json);
        if (app.got_subcommand(c_fetch))
            return cmd_fetch_kb(cfg, fk_terms, fk_from_dataset, fk_split, fk_scen, as_json);
        if (app.got_subcommand(c_stats))
            return cmd_stats(cfg, st_sources, st_scen, st_split, as_json);
        throw std::runtime_error("no subcommand");
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
