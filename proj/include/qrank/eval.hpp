#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qrank/dataset.hpp"
#include "qrank/expand.hpp"
#include "qrank/index.hpp"

namespace qrank {

struct SystemSpec {
    std::string id;  // e.g. "KW+WE"
    Scenario scenario = Scenario::EN;
    SourceSet sources;

    // Run-file system column, e.g. "kw+we-en". No spaces.
    std::string run_tag() const;
    // Numeric combination label for the summary table: sources are numbered
    // 1..4 in the EN block and 12..15 in the MT block, joined with '+'.
    std::string qr() const;
};

SystemSpec make_system(SourceSet sources, Scenario scenario);

// The canonical grid: nine source combinations per scenario (four singletons,
// the three keyword pairs, WE+DB+HN, and all four), EN block then MT block.
std::vector<SystemSpec> canonical_grid();

struct EvalReport {
    SystemSpec system;
    SplitName split = SplitName::dev;
    std::vector<std::pair<std::string, double>> per_query_ap;  // query_id asc
    double map_score = 0.0;  // mean of per_query_ap, in [0,1]
    // MAP minus the same-scenario keyword baseline's MAP on the same split;
    // set by run_grid (0 for the baselines themselves).
    std::optional<double> delta_vs_baseline;
};

// AP = (1/R) * sum over relevant ranks r of (relevant in top r) / r, with
// R = relevant docs among the ranked candidates; R = 0 scores 0 and stays in
// the mean. Throws on a ranked doc missing from qrels.
double average_precision(const RankedList& ranking,
                         const std::map<std::string, Relevance>& qrels);

// Expand, rerank, and score every query of the split. Per-query work runs on
// `threads` OpenMP threads; assembly is ordered by query_id so the report and
// rankings are byte-stable regardless of thread count. When `rankings` is
// given it receives one RankedList per query, query_id asc.
EvalReport evaluate_system(const SystemSpec& spec, const DatasetSplit& split,
                           const InvertedIndex& index, const Bm25Params& params,
                           const ExpansionResources& resources, int threads = 1,
                           std::vector<RankedList>* rankings = nullptr);

struct SplitInputs {
    const DatasetSplit* en = nullptr;
    const DatasetSplit* mt = nullptr;
    const InvertedIndex* index = nullptr;  // required if en or mt is set
};

struct GridInputs {
    SplitInputs dev;
    SplitInputs test;
};

struct SystemResult {
    SystemSpec system;
    std::optional<EvalReport> dev;
    std::optional<EvalReport> test;
    std::vector<RankedList> dev_rankings;   // filled when collect_rankings
    std::vector<RankedList> test_rankings;
};

struct GridResult {
    std::vector<SystemResult> systems;
    std::vector<std::string> warnings;
};

// Evaluates each system on every provided split. Systems whose scenario has
// no split degrade to a warning instead of an error.
GridResult run_grid(const GridInputs& inputs, const ExpansionResources& resources,
                    const Bm25Params& params, const std::vector<SystemSpec>& systems,
                    int threads = 1, bool collect_rankings = false);

// Plain-text summary in the layout System | QR | Dev MAP | Test MAP | Δ.
// MAP is shown x100 with 2 decimals; Δ comes from the test split when
// present, otherwise dev.
std::string render_table(const GridResult& grid);

// Line-delimited report, one JSON object per system, per-query APs embedded,
// full precision. Deterministic bytes for identical inputs.
void write_reports(const GridResult& grid, const std::filesystem::path& path);

// Standard 6-column run format: `query_id Q0 doc_id rank score system_id`,
// scores with 6 decimals, ordered by query_id then rank.
void emit_run_file(const std::vector<RankedList>& rankings, const std::string& system_id,
                   const std::filesystem::path& path);

// TREC-style qrels: `query_id 0 doc_id rel` with rel in {0,1}.
void emit_qrels_file(const DatasetSplit& split, const std::filesystem::path& path);

struct TunePoint {
    double k1 = 0.0;
    double b = 0.0;
    double map_score = 0.0;
};

struct TuneResult {
    Bm25Params best;
    double best_map = 0.0;
    std::vector<TunePoint> points;  // k1 asc, then b asc
};

// Exhaustive grid search maximizing dev MAP; ties prefer smaller k1, then
// smaller b. Expansion is computed once and reused across grid points.
TuneResult tune_params(const SystemSpec& spec, const DatasetSplit& dev,
                       const InvertedIndex& index, const ExpansionResources& resources,
                       const std::vector<double>& k1_grid, const std::vector<double>& b_grid,
                       int threads = 1);

std::string render_tune_table(const TuneResult& result);

}  // namespace qrank
