#include "qrank/index.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "qrank/io_util.hpp"

namespace qrank {

namespace {

double mean_length(const std::vector<uint32_t>& lengths) {
    if (lengths.empty()) return 0.0;
    uint64_t total = 0;
    for (const uint32_t len : lengths) total += len;
    return static_cast<double>(total) / static_cast<double>(lengths.size());
}

std::vector<std::string> distinct_terms(const std::vector<std::string>& terms) {
    std::vector<std::string> out(terms);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace

uint32_t InvertedIndex::doc_freq(const std::string& term) const {
    auto it = postings_.find(term);
    return it == postings_.end() ? 0 : static_cast<uint32_t>(it->second.size());
}

bool InvertedIndex::has_doc(const std::string& doc_id) const {
    return doc_ordinal_.count(doc_id) != 0;
}

uint32_t InvertedIndex::ordinal_or_throw(const std::string& doc_id) const {
    auto it = doc_ordinal_.find(doc_id);
    if (it == doc_ordinal_.end())
        throw std::runtime_error("unknown doc_id: " + doc_id);
    return it->second;
}

uint32_t InvertedIndex::doc_length(const std::string& doc_id) const {
    return doc_lengths_[ordinal_or_throw(doc_id)];
}

double InvertedIndex::idf(const std::string& term) const {
    const uint32_t df = doc_freq(term);
    if (df == 0) return 0.0;
    const double n = static_cast<double>(n_docs());
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

double InvertedIndex::score_ordinal(const std::vector<std::string>& terms, uint32_t ord,
                                    const Bm25Params& params) const {
    const double norm = 1.0 - params.b +
                        params.b * static_cast<double>(doc_lengths_[ord]) / avg_doc_length_;
    double score = 0.0;
    for (const auto& term : terms) {
        auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const auto& plist = it->second;
        auto pos = std::lower_bound(plist.begin(), plist.end(), ord,
                                    [](const Posting& p, uint32_t o) { return p.doc < o; });
        if (pos == plist.end() || pos->doc != ord) continue;
        const double tf = pos->tf;
        const double df = static_cast<double>(plist.size());
        const double n = static_cast<double>(n_docs());
        const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        score += idf * (tf * (params.k1 + 1.0)) / (tf + params.k1 * norm);
    }
    return score;
}

InvertedIndex build_index(const std::vector<Document>& docs) {
    InvertedIndex index;
    index.doc_ids_.reserve(docs.size());
    index.doc_lengths_.reserve(docs.size());
    for (const auto& doc : docs) {
        if (!index.doc_ordinal_.emplace(doc.doc_id, static_cast<uint32_t>(index.doc_ids_.size()))
                 .second)
            throw std::runtime_error("duplicate doc_id: " + doc.doc_id);
        const auto ord = static_cast<uint32_t>(index.doc_ids_.size());
        index.doc_ids_.push_back(doc.doc_id);
        index.doc_lengths_.push_back(static_cast<uint32_t>(doc.terms.size()));
        std::map<std::string, uint32_t> counts;
        for (const auto& term : doc.terms) ++counts[term];
        for (const auto& [term, tf] : counts)
            index.postings_[term].push_back({ord, tf});
    }
    index.avg_doc_length_ = mean_length(index.doc_lengths_);
    return index;
}

double bm25_score(const InvertedIndex& index, const std::vector<std::string>& query_terms,
                  const std::string& doc_id, const Bm25Params& params) {
    if (index.n_docs() == 0) throw std::runtime_error("bm25_score on an empty index");
    const uint32_t ord = index.ordinal_or_throw(doc_id);
    return index.score_ordinal(distinct_terms(query_terms), ord, params);
}

RankedList rerank_candidates(const InvertedIndex& index,
                             const std::vector<std::string>& query_terms,
                             const std::string& query_id,
                             const std::vector<std::string>& candidate_ids,
                             const Bm25Params& params) {
    if (index.n_docs() == 0 && !candidate_ids.empty())
        throw std::runtime_error("rerank_candidates on an empty index");
    const auto terms = distinct_terms(query_terms);
    RankedList out;
    out.query_id = query_id;
    out.entries.reserve(candidate_ids.size());
    for (const auto& id : candidate_ids) {
        const uint32_t ord = index.ordinal_or_throw(id);
        out.entries.push_back({id, index.score_ordinal(terms, ord, params), 0});
    }
    std::sort(out.entries.begin(), out.entries.end(), [](const RankedEntry& a, const RankedEntry& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc_id < b.doc_id;
    });
    for (size_t i = 0; i < out.entries.size(); ++i)
        out.entries[i].rank = static_cast<uint32_t>(i + 1);
    return out;
}

void save_index(const InvertedIndex& index, const std::string& path) {
    std::ostringstream out;
    out << "qrank-index 1\n";
    out << "docs " << index.doc_ids_.size() << "\n";
    for (size_t i = 0; i < index.doc_ids_.size(); ++i) {
        const auto& id = index.doc_ids_[i];
        if (id.find_first_of(" \t\n") != std::string::npos)
            throw std::runtime_error("doc_id contains whitespace, cannot persist: " + id);
        out << "d " << id << " " << index.doc_lengths_[i] << "\n";
    }
    std::vector<const std::string*> terms;
    terms.reserve(index.postings_.size());
    for (const auto& [term, _] : index.postings_) terms.push_back(&term);
    std::sort(terms.begin(), terms.end(),
              [](const std::string* a, const std::string* b) { return *a < *b; });
    out << "terms " << terms.size() << "\n";
    for (const auto* term : terms) {
        const auto& plist = index.postings_.at(*term);
        out << "t " << *term << " " << plist.size();
        for (const auto& p : plist) out << " " << p.doc << ":" << p.tf;
        out << "\n";
    }
    write_file_atomic(path, out.str());
}

InvertedIndex load_index(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open index file: " + path);
    std::string header;
    std::getline(in, header);
    if (header != "qrank-index 1")
        throw std::runtime_error("unsupported index file header in " + path + ": " + header);

    InvertedIndex index;
    std::string tag;
    size_t n = 0;
    if (!(in >> tag >> n) || tag != "docs")
        throw std::runtime_error("malformed index file (docs header): " + path);
    index.doc_ids_.reserve(n);
    index.doc_lengths_.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        std::string id;
        uint32_t len = 0;
        if (!(in >> tag >> id >> len) || tag != "d")
            throw std::runtime_error("malformed index file (doc record): " + path);
        index.doc_ordinal_.emplace(id, static_cast<uint32_t>(index.doc_ids_.size()));
        index.doc_ids_.push_back(std::move(id));
        index.doc_lengths_.push_back(len);
    }
    size_t n_terms = 0;
    if (!(in >> tag >> n_terms) || tag != "terms")
        throw std::runtime_error("malformed index file (terms header): " + path);
    for (size_t i = 0; i < n_terms; ++i) {
        std::string term;
        size_t df = 0;
        if (!(in >> tag >> term >> df) || tag != "t")
            throw std::runtime_error("malformed index file (term record): " + path);
        auto& plist = index.postings_[term];
        plist.reserve(df);
        for (size_t j = 0; j < df; ++j) {
            std::string cell;
            if (!(in >> cell))
                throw std::runtime_error("malformed index file (posting): " + path);
            const auto colon = cell.find(':');
            if (colon == std::string::npos)
                throw std::runtime_error("malformed posting '" + cell + "' in " + path);
            InvertedIndex::Posting p;
            p.doc = static_cast<uint32_t>(std::stoul(cell.substr(0, colon)));
            p.tf = static_cast<uint32_t>(std::stoul(cell.substr(colon + 1)));
            if (p.doc >= index.doc_ids_.size())
                throw std::runtime_error("posting references unknown doc ordinal in " + path);
            plist.push_back(p);
        }
    }
    index.avg_doc_length_ = mean_length(index.doc_lengths_);
    return index;
}

}  // namespace qrank
