#include "qrank/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "qrank/io_util.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qrank {

namespace {

std::string format(const char* fmt, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

std::vector<ExpandedQuery> expand_all(const SystemSpec& spec, const DatasetSplit& split,
                                      const ExpansionResources& resources, int threads) {
    const size_t n = split.queries.size();
    std::vector<ExpandedQuery> expanded(n);
    std::vector<std::exception_ptr> errors(n);

    ExpansionResources local = resources;
    local.threads = 1;  // per-query parallelism subsumes the kNN kernel's

    const auto work = [&](size_t i) {
        try {
            const QueryRecord& q = split.queries[i];
            expanded[i] = combine(q.query_id, spec.scenario, q.text, spec.sources, local);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };

#ifdef _OPENMP
    if (threads > 1) {
#pragma omp parallel for num_threads(threads) schedule(dynamic)
        for (size_t i = 0; i < n; ++i) work(i);
    } else {
        for (size_t i = 0; i < n; ++i) work(i);
    }
#else
    (void)threads;
    for (size_t i = 0; i < n; ++i) work(i);
#endif

    for (size_t i = 0; i < n; ++i)
        if (errors[i]) std::rethrow_exception(errors[i]);
    return expanded;
}

EvalReport score_expanded(const SystemSpec& spec, const DatasetSplit& split,
                          const std::vector<ExpandedQuery>& expanded, const InvertedIndex& index,
                          const Bm25Params& params, std::vector<RankedList>* rankings) {
    EvalReport report;
    report.system = spec;
    report.split = split.name;

    std::vector<RankedList> ranked(split.queries.size());
    double total = 0.0;
    for (size_t i = 0; i < split.queries.size(); ++i) {
        const QueryRecord& q = split.queries[i];
        ranked[i] = rerank_candidates(index, expanded[i].tokens(), q.query_id, q.candidates,
                                      params);
        const double ap = average_precision(ranked[i], q.qrels);
        report.per_query_ap.emplace_back(q.query_id, ap);
        total += ap;
    }
    report.map_score = split.queries.empty() ? 0.0 : total / double(split.queries.size());

    std::sort(report.per_query_ap.begin(), report.per_query_ap.end());
    if (rankings) {
        std::sort(ranked.begin(), ranked.end(),
                  [](const RankedList& a, const RankedList& b) { return a.query_id < b.query_id; });
        *rankings = std::move(ranked);
    }
    return report;
}

}  // namespace

std::string SystemSpec::run_tag() const {
    std::string tag;
    for (char c : id) tag.push_back(c >= 'A' && c <= 'Z' ? char(c + 0x20) : c);
    tag.push_back('-');
    tag += scenario_name(scenario);
    return tag;
}

std::string SystemSpec::qr() const {
    const int base = scenario == Scenario::EN ? 1 : 12;
    std::string out;
    for (const Source s : SourceSet::precedence_order()) {
        if (!sources.contains(s)) continue;
        if (!out.empty()) out.push_back('+');
        out += std::to_string(base + static_cast<int>(s));
    }
    return out;
}

SystemSpec make_system(SourceSet sources, Scenario scenario) {
    if (sources.empty()) throw std::runtime_error("a system needs at least one source");
    static constexpr std::string_view kLabel[] = {"KW", "WE", "DB", "HN"};
    SystemSpec spec;
    spec.scenario = scenario;
    spec.sources = sources;
    for (const Source s : SourceSet::precedence_order()) {
        if (!sources.contains(s)) continue;
        if (!spec.id.empty()) spec.id.push_back('+');
        spec.id += kLabel[static_cast<int>(s)];
    }
    return spec;
}

std::vector<SystemSpec> canonical_grid() {
    using S = Source;
    static const std::vector<SourceSet> combos = {
        {S::keyword},
        {S::word_embedding},
        {S::dbpedia},
        {S::hypernym},
        {S::keyword, S::word_embedding},
        {S::keyword, S::dbpedia},
        {S::keyword, S::hypernym},
        {S::word_embedding, S::dbpedia, S::hypernym},
        {S::keyword, S::word_embedding, S::dbpedia, S::hypernym},
    };
    std::vector<SystemSpec> grid;
    for (const Scenario scenario : {Scenario::EN, Scenario::MT})
        for (const SourceSet& combo : combos) grid.push_back(make_system(combo, scenario));
    return grid;
}

double average_precision(const RankedList& ranking,
                         const std::map<std::string, Relevance>& qrels) {
    size_t total_relevant = 0;
    for (const auto& entry : ranking.entries) {
        const auto it = qrels.find(entry.doc_id);
        if (it == qrels.end())
            throw std::runtime_error("ranked doc " + entry.doc_id + " has no relevance label");
        if (it->second == Relevance::relevant) ++total_relevant;
    }
    if (total_relevant == 0) return 0.0;

    double sum = 0.0;
    size_t seen_relevant = 0;
    for (size_t r = 1; r <= ranking.entries.size(); ++r) {
        if (qrels.at(ranking.entries[r - 1].doc_id) == Relevance::relevant) {
            ++seen_relevant;
            sum += double(seen_relevant) / double(r);
        }
    }
    return sum / double(total_relevant);
}

EvalReport evaluate_system(const SystemSpec& spec, const DatasetSplit& split,
                           const InvertedIndex& index, const Bm25Params& params,
                           const ExpansionResources& resources, int threads,
                           std::vector<RankedList>* rankings) {
    const auto expanded = expand_all(spec, split, resources, threads);
    return score_expanded(spec, split, expanded, index, params, rankings);
}

GridResult run_grid(const GridInputs& inputs, const ExpansionResources& resources,
                    const Bm25Params& params, const std::vector<SystemSpec>& systems,
                    int threads, bool collect_rankings) {
    GridResult result;
    std::set<std::string> warned;

    const auto split_for = [](const SplitInputs& in, Scenario s) -> const DatasetSplit* {
        return s == Scenario::EN ? in.en : in.mt;
    };

    for (const SystemSpec& spec : systems) {
        SystemResult res;
        res.system = spec;
        bool evaluated = false;
        for (const SplitInputs* in : {&inputs.dev, &inputs.test}) {
            const DatasetSplit* split = split_for(*in, spec.scenario);
            if (!split) continue;
            if (!in->index)
                throw std::runtime_error(std::string("no index provided for the ") +
                                         std::string(split_name(split->name)) + " split");
            auto* sink = collect_rankings
                             ? (in == &inputs.dev ? &res.dev_rankings : &res.test_rankings)
                             : nullptr;
            EvalReport report =
                evaluate_system(spec, *split, *in->index, params, resources, threads, sink);
            (split->name == SplitName::dev ? res.dev : res.test) = std::move(report);
            evaluated = true;
        }
        if (!evaluated) {
            const std::string key(scenario_name(spec.scenario));
            if (warned.insert(key).second)
                result.warnings.push_back("no " + key +
                                          " dataset loaded; skipping its systems");
            continue;
        }
        result.systems.push_back(std::move(res));
    }

    // Delta vs the same-scenario keyword baseline, per split.
    for (const SplitName split : {SplitName::dev, SplitName::test}) {
        for (const Scenario scenario : {Scenario::EN, Scenario::MT}) {
            const SourceSet baseline_sources = {Source::keyword};
            const EvalReport* baseline = nullptr;
            for (const auto& res : result.systems) {
                if (res.system.scenario != scenario || !(res.system.sources == baseline_sources))
                    continue;
                const auto& report = split == SplitName::dev ? res.dev : res.test;
                if (report) baseline = &*report;
                break;
            }
            if (!baseline) continue;
            for (auto& res : result.systems) {
                if (res.system.scenario != scenario) continue;
                auto& report = split == SplitName::dev ? res.dev : res.test;
                if (report) report->delta_vs_baseline = report->map_score - baseline->map_score;
            }
        }
    }
    return result;
}

std::string render_table(const GridResult& grid) {
    size_t id_width = 6, qr_width = 2;
    for (const auto& res : grid.systems) {
        id_width = std::max(id_width, res.system.id.size());
        qr_width = std::max(qr_width, res.system.qr().size());
    }

    const auto pad = [](std::string s, size_t w) {
        if (s.size() < w) s.append(w - s.size(), ' ');
        return s;
    };
    const auto map_cell = [&pad](const std::optional<EvalReport>& r) {
        return r ? format("%8.2f", r->map_score * 100.0) : pad("       -", 8);
    };

    std::string out;
    out += pad("System", id_width) + "  " + pad("QR", qr_width) + "   Dev MAP  Test MAP    Delta\n";
    out += std::string(id_width + qr_width + 32, '-') + "\n";
    std::optional<Scenario> last;
    for (const auto& res : grid.systems) {
        if (last && *last != res.system.scenario)
            out += std::string(id_width + qr_width + 32, '-') + "\n";
        last = res.system.scenario;
        out += pad(res.system.id, id_width) + "  " + pad(res.system.qr(), qr_width);
        out += map_cell(res.dev) + map_cell(res.test);
        const auto& delta_src = res.test ? res.test : res.dev;
        if (delta_src && delta_src->delta_vs_baseline)
            out += format("%+9.2f", *delta_src->delta_vs_baseline * 100.0);
        else
            out += pad("        -", 9);
        out += "\n";
    }
    for (const auto& warning : grid.warnings) out += "warning: " + warning + "\n";
    return out;
}

void write_reports(const GridResult& grid, const std::filesystem::path& path) {
    using nlohmann::json;
    std::string out;
    for (const auto& res : grid.systems) {
        json rec;
        rec["id"] = res.system.id;
        rec["scenario"] = std::string(scenario_name(res.system.scenario));
        rec["sources"] = res.system.sources.to_string();
        rec["qr"] = res.system.qr();
        for (const auto* report : {&res.dev, &res.test}) {
            if (!*report) continue;
            const EvalReport& r = **report;
            json block;
            block["map"] = r.map_score;
            if (r.delta_vs_baseline) block["delta"] = *r.delta_vs_baseline;
            json aps = json::object();
            for (const auto& [qid, ap] : r.per_query_ap) aps[qid] = ap;
            block["per_query_ap"] = std::move(aps);
            rec[std::string(split_name(r.split))] = std::move(block);
        }
        out += rec.dump();
        out += "\n";
    }
    write_file_atomic(path.string(), out);
}

void emit_run_file(const std::vector<RankedList>& rankings, const std::string& system_id,
                   const std::filesystem::path& path) {
    std::vector<const RankedList*> ordered;
    ordered.reserve(rankings.size());
    for (const auto& r : rankings) ordered.push_back(&r);
    std::sort(ordered.begin(), ordered.end(),
              [](const RankedList* a, const RankedList* b) { return a->query_id < b->query_id; });

    std::string out;
    char buf[64];
    for (const RankedList* ranking : ordered) {
        for (const RankedEntry& e : ranking->entries) {
            std::snprintf(buf, sizeof(buf), " %u %.6f ", e.rank, e.score);
            out += ranking->query_id + " Q0 " + e.doc_id + buf + system_id + "\n";
        }
    }
    write_file_atomic(path.string(), out);
}

void emit_qrels_file(const DatasetSplit& split, const std::filesystem::path& path) {
    std::vector<const QueryRecord*> ordered;
    for (const auto& q : split.queries) ordered.push_back(&q);
    std::sort(ordered.begin(), ordered.end(),
              [](const QueryRecord* a, const QueryRecord* b) { return a->query_id < b->query_id; });

    std::string out;
    for (const QueryRecord* q : ordered)
        for (const auto& [doc_id, rel] : q->qrels)
            out += q->query_id + " 0 " + doc_id + (rel == Relevance::relevant ? " 1\n" : " 0\n");
    write_file_atomic(path.string(), out);
}

TuneResult tune_params(const SystemSpec& spec, const DatasetSplit& dev,
                       const InvertedIndex& index, const ExpansionResources& resources,
                       const std::vector<double>& k1_grid, const std::vector<double>& b_grid,
                       int threads) {
    if (dev.queries.empty()) throw std::runtime_error("tune: dev set is empty");
    if (k1_grid.empty() || b_grid.empty()) throw std::runtime_error("tune: empty grid");

    std::vector<double> k1s = k1_grid, bs = b_grid;
    std::sort(k1s.begin(), k1s.end());
    k1s.erase(std::unique(k1s.begin(), k1s.end()), k1s.end());
    std::sort(bs.begin(), bs.end());
    bs.erase(std::unique(bs.begin(), bs.end()), bs.end());

    const auto expanded = expand_all(spec, dev, resources, threads);

    TuneResult result;
    bool first = true;
    for (const double k1 : k1s) {
        for (const double b : bs) {
            const Bm25Params params{k1, b};
            const EvalReport report =
                score_expanded(spec, dev, expanded, index, params, nullptr);
            result.points.push_back({k1, b, report.map_score});
            // Ascending iteration order makes "strictly greater" implement
            // the smaller-k1-then-smaller-b tie rule.
            if (first || report.map_score > result.best_map) {
                result.best = params;
                result.best_map = report.map_score;
                first = false;
            }
        }
    }
    return result;
}

std::string render_tune_table(const TuneResult& result) {
    std::string out = "   k1      b  Dev MAP\n----------------------\n";
    for (const TunePoint& p : result.points) {
        out += format("%5.2f", p.k1) + format("%7.2f", p.b) +
               format("%9.2f", p.map_score * 100.0) + "\n";
    }
    out += "best: k1=" + format("%.2f", result.best.k1) + " b=" + format("%.2f", result.best.b) +
           " dev MAP=" + format("%.2f", result.best_map * 100.0) + "\n";
    return out;
}

}  // namespace qrank
