#include "qrank/hypernym.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <stdexcept>

namespace qrank {

namespace {

std::string lowercase_ascii(std::string s) {
    for (char& c : s)
        if (c >= 'A' && c <= 'Z') c += 0x20;
    return s;
}

bool parse_confidence(const std::string& field, double& out) {
    const char* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, out);
    return ec == std::errc{} && ptr == end;
}

}  // namespace

void HypernymGraph::add_edge(const std::string& hypernym, const std::string& hyponym_label,
                             double confidence) {
    auto& list = edges_[lowercase_ascii(hypernym)];
    for (auto& [label, conf] : list) {
        if (label == hyponym_label) {
            conf = std::max(conf, confidence);
            return;
        }
    }
    list.emplace_back(hyponym_label, confidence);
}

std::vector<std::pair<std::string, double>> HypernymGraph::hyponyms_at_least(
    const std::string& hypernym, double threshold) const {
    std::vector<std::pair<std::string, double>> out;
    auto it = edges_.find(lowercase_ascii(hypernym));
    if (it == edges_.end()) return out;
    for (const auto& [label, conf] : it->second)
        if (conf >= threshold) out.emplace_back(label, conf);
    std::sort(out.begin(), out.end());
    return out;
}

size_t HypernymGraph::edge_count() const {
    size_t n = 0;
    for (const auto& [_, list] : edges_) n += list.size();
    return n;
}

HypernymGraph load_hypernym_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open hypernym graph file: " + path);

    HypernymGraph graph;
    std::string line;
    size_t line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        const size_t t1 = line.find('\t');
        const size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t1 == std::string::npos || t2 == std::string::npos)
            throw std::runtime_error("hypernym graph line " + std::to_string(line_no) +
                                     ": expected 3 tab-separated columns");
        const std::string hyponym = line.substr(0, t1);
        const std::string hypernym = line.substr(t1 + 1, t2 - t1 - 1);
        const std::string conf_str = line.substr(t2 + 1);

        double conf = 0.0;
        if (!parse_confidence(conf_str, conf)) {
            if (first) {  // header line
                first = false;
                continue;
            }
            throw std::runtime_error("hypernym graph line " + std::to_string(line_no) +
                                     ": cannot parse confidence '" + conf_str + "'");
        }
        first = false;
        if (conf < 0.0 || conf > 1.0) {
            graph.rejected_lines.push_back(line_no);
            continue;
        }
        graph.add_edge(hypernym, hyponym, conf);
    }
    return graph;
}

}  // namespace qrank
