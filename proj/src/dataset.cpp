#include "qrank/dataset.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace qrank {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::filesystem::path& path, size_t line, const std::string& what) {
    throw std::runtime_error(path.string() + " line " + std::to_string(line) + ": " + what);
}

const json& require_field(const json& obj, const char* key, const json::value_t type,
                          const std::filesystem::path& path, size_t line) {
    const auto it = obj.find(key);
    if (it == obj.end()) fail(path, line, std::string("missing field \"") + key + "\"");
    if (it->type() != type) fail(path, line, std::string("field \"") + key + "\" has wrong type");
    return *it;
}

}  // namespace

SplitName split_from_name(std::string_view name) {
    if (name == "dev") return SplitName::dev;
    if (name == "test") return SplitName::test;
    throw std::runtime_error("unknown split: " + std::string(name) + " (expected dev or test)");
}

std::string_view split_name(SplitName s) {
    return s == SplitName::dev ? "dev" : "test";
}

Relevance relevance_from_label(std::string_view label) {
    if (label == "PerfectMatch" || label == "Relevant" || label == "relevant")
        return Relevance::relevant;
    if (label == "Irrelevant" || label == "irrelevant") return Relevance::irrelevant;
    throw std::runtime_error("unknown relevance label: " + std::string(label));
}

std::string_view relevance_name(Relevance r) {
    return r == Relevance::relevant ? "relevant" : "irrelevant";
}

DatasetSplit load_dataset(const std::filesystem::path& path, SplitName name, Scenario scenario,
                          const AnalyzerConfig& analyzer, size_t expected_candidates) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path.string());

    DatasetSplit split;
    split.name = name;
    std::set<std::string> seen_queries;
    std::set<std::string> seen_docs;

    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            fail(path, line_no, std::string("malformed JSON: ") + e.what());
        }
        if (!rec.is_object()) fail(path, line_no, "record is not a JSON object");

        QueryRecord query;
        query.query_id =
            require_field(rec, "query_id", json::value_t::string, path, line_no).get<std::string>();
        query.scenario = scenario;
        if (const auto it = rec.find("scenario"); it != rec.end()) {
            if (!it->is_string()) fail(path, line_no, "field \"scenario\" has wrong type");
            const Scenario declared = scenario_from_name(it->get<std::string>());
            if (declared != scenario)
                fail(path, line_no,
                     "query " + query.query_id + ": scenario \"" +
                         std::string(scenario_name(declared)) + "\" does not match requested \"" +
                         std::string(scenario_name(scenario)) + "\"");
        }
        query.text =
            require_field(rec, "text", json::value_t::string, path, line_no).get<std::string>();

        if (!seen_queries.insert(query.query_id).second)
            fail(path, line_no, "duplicate query_id " + query.query_id);

        const json& cands =
            require_field(rec, "candidates", json::value_t::array, path, line_no);
        if (expected_candidates > 0 && cands.size() != expected_candidates)
            fail(path, line_no,
                 "query " + query.query_id + ": expected " + std::to_string(expected_candidates) +
                     " candidates, got " + std::to_string(cands.size()));

        for (const json& cand : cands) {
            if (!cand.is_object()) fail(path, line_no, "candidate entry is not a JSON object");
            Document doc;
            doc.doc_id = require_field(cand, "doc_id", json::value_t::string, path, line_no)
                             .get<std::string>();
            doc.query_id = query.query_id;
            doc.raw_text =
                require_field(cand, "text", json::value_t::string, path, line_no)
                    .get<std::string>();
            const std::string label =
                require_field(cand, "relevance", json::value_t::string, path, line_no)
                    .get<std::string>();
            Relevance rel;
            try {
                rel = relevance_from_label(label);
            } catch (const std::exception& e) {
                fail(path, line_no, "query " + query.query_id + " doc " + doc.doc_id + ": " +
                                        e.what());
            }
            if (!seen_docs.insert(doc.doc_id).second)
                fail(path, line_no,
                     "query " + query.query_id + ": duplicate doc_id " + doc.doc_id);
            doc.terms = analyze(doc.raw_text, analyzer);
            query.candidates.push_back(doc.doc_id);
            query.qrels.emplace(doc.doc_id, rel);
            split.documents.push_back(std::move(doc));
        }
        split.queries.push_back(std::move(query));
    }
    return split;
}

void verify_alignment(const DatasetSplit& en, const DatasetSplit& mt) {
    const auto describe = [](const QueryRecord& q) { return "query " + q.query_id; };

    std::map<std::string, const QueryRecord*> mt_by_id;
    for (const auto& q : mt.queries) mt_by_id.emplace(q.query_id, &q);

    if (en.queries.size() != mt.queries.size())
        throw std::runtime_error("EN/MT splits disagree: " + std::to_string(en.queries.size()) +
                                 " vs " + std::to_string(mt.queries.size()) + " queries");

    for (const auto& q : en.queries) {
        const auto it = mt_by_id.find(q.query_id);
        if (it == mt_by_id.end())
            throw std::runtime_error(describe(q) + " present in EN split but missing in MT");
        const QueryRecord& m = *it->second;
        if (q.candidates != m.candidates)
            throw std::runtime_error(describe(q) + ": candidate lists differ between EN and MT");
        if (q.qrels != m.qrels)
            throw std::runtime_error(describe(q) + ": qrels differ between EN and MT");
    }

    std::map<std::string, const Document*> mt_docs;
    for (const auto& d : mt.documents) mt_docs.emplace(d.doc_id, &d);
    for (const auto& d : en.documents) {
        const auto it = mt_docs.find(d.doc_id);
        if (it == mt_docs.end())
            throw std::runtime_error("doc " + d.doc_id + " present in EN split but missing in MT");
        if (d.raw_text != it->second->raw_text)
            throw std::runtime_error("doc " + d.doc_id + ": text differs between EN and MT");
    }
}

}  // namespace qrank
