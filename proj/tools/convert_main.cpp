// Converts the original shared-task XML (Subtask B layout) into the JSONL
// dataset format consumed by the pipeline. One record per original question;
// candidate questions become the embedded documents.

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

namespace {

std::string unescape_entities(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    size_t i = 0;
    while (i < s.size()) {
        if (s[i] != '&') {
            out.push_back(s[i++]);
            continue;
        }
        const size_t semi = s.find(';', i);
        if (semi == std::string::npos || semi - i > 10) {
            out.push_back(s[i++]);
            continue;
        }
        const std::string name = s.substr(i + 1, semi - i - 1);
        if (name == "amp") out.push_back('&');
        else if (name == "lt") out.push_back('<');
        else if (name == "gt") out.push_back('>');
        else if (name == "quot") out.push_back('"');
        else if (name == "apos") out.push_back('\'');
        else if (!name.empty() && name[0] == '#') {
            const bool hex = name.size() > 1 && (name[1] == 'x' || name[1] == 'X');
            unsigned long cp = 0;
            try {
                cp = std::stoul(name.substr(hex ? 2 : 1), nullptr, hex ? 16 : 10);
            } catch (...) {
                out += "&" + name + ";";
                i = semi + 1;
                continue;
            }
            // encode code point as UTF-8
            if (cp < 0x80) {
                out.push_back(char(cp));
            } else if (cp < 0x800) {
                out.push_back(char(0xC0 | (cp >> 6)));
                out.push_back(char(0x80 | (cp & 0x3F)));
            } else if (cp < 0x10000) {
                out.push_back(char(0xE0 | (cp >> 12)));
                out.push_back(char(0x80 | ((cp >> 6) & 0x3F)));
                out.push_back(char(0x80 | (cp & 0x3F)));
            } else {
                out.push_back(char(0xF0 | (cp >> 18)));
                out.push_back(char(0x80 | ((cp >> 12) & 0x3F)));
                out.push_back(char(0x80 | ((cp >> 6) & 0x3F)));
                out.push_back(char(0x80 | (cp & 0x3F)));
            }
        } else {
            out += "&" + name + ";";
        }
        i = semi + 1;
    }
    return out;
}

std::string trim(const std::string& s) {
    const size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

struct TagBlock {
    std::string attrs;
    std::string inner;
    size_t end = std::string::npos;  // position just past the closing tag
};

// Finds the next <tag ...>...</tag> starting at or after pos. The schema has
// no self-nesting, so scanning for the first closing tag is enough.
std::optional<TagBlock> next_block(const std::string& xml, const std::string& tag, size_t pos) {
    const std::string open = "<" + tag;
    while (true) {
        const size_t start = xml.find(open, pos);
        if (start == std::string::npos) return std::nullopt;
        const char after = start + open.size() < xml.size() ? xml[start + open.size()] : '\0';
        if (after != ' ' && after != '>' && after != '\t' && after != '\n' && after != '/') {
            pos = start + open.size();
            continue;  // e.g. <OrgQSubject> while looking for <OrgQ>
        }
        const size_t open_end = xml.find('>', start);
        if (open_end == std::string::npos) return std::nullopt;
        TagBlock block;
        block.attrs = xml.substr(start + open.size(), open_end - start - open.size());
        if (!block.attrs.empty() && block.attrs.back() == '/') {  // self-closing
            block.end = open_end + 1;
            return block;
        }
        const std::string close = "</" + tag + ">";
        const size_t close_pos = xml.find(close, open_end);
        if (close_pos == std::string::npos)
            throw std::runtime_error("unclosed <" + tag + "> element");
        block.inner = xml.substr(open_end + 1, close_pos - open_end - 1);
        block.end = close_pos + close.size();
        return block;
    }
}

std::string attr_value(const std::string& attrs, const std::string& name) {
    const size_t at = attrs.find(name + "=\"");
    if (at == std::string::npos)
        throw std::runtime_error("missing attribute " + name);
    const size_t begin = at + name.size() + 2;
    const size_t end = attrs.find('"', begin);
    if (end == std::string::npos) throw std::runtime_error("unterminated attribute " + name);
    return unescape_entities(attrs.substr(begin, end - begin));
}

std::string tag_text(const std::string& xml, const std::string& tag) {
    const auto block = next_block(xml, tag, 0);
    return block ? trim(unescape_entities(block->inner)) : "";
}

std::string join_subject_body(const std::string& subject, const std::string& body) {
    if (subject.empty()) return body;
    if (body.empty()) return subject;
    return subject + " " + body;
}

struct Candidate {
    std::string doc_id;
    std::string text;
    std::string relevance;
};

struct Query {
    std::string query_id;
    std::string text;
    std::vector<Candidate> candidates;
};

std::vector<Query> parse_xml(const std::string& xml) {
    std::vector<Query> queries;
    std::map<std::string, size_t> by_id;

    size_t pos = 0;
    while (auto org = next_block(xml, "OrgQuestion", pos)) {
        pos = org->end;
        const std::string org_id = attr_value(org->attrs, "ORGQ_ID");

        size_t slot;
        if (const auto it = by_id.find(org_id); it != by_id.end()) {
            slot = it->second;  // repeated element, one per thread
        } else {
            slot = queries.size();
            by_id.emplace(org_id, slot);
            Query q;
            q.query_id = org_id;
            q.text = join_subject_body(tag_text(org->inner, "OrgQSubject"),
                                       tag_text(org->inner, "OrgQBody"));
            queries.push_back(std::move(q));
        }

        size_t thread_pos = 0;
        while (auto thread = next_block(org->inner, "Thread", thread_pos)) {
            thread_pos = thread->end;
            const auto rel = next_block(thread->inner, "RelQuestion", 0);
            if (!rel) throw std::runtime_error("thread without RelQuestion under " + org_id);
            Candidate cand;
            cand.doc_id = attr_value(rel->attrs, "RELQ_ID");
            cand.relevance = attr_value(rel->attrs, "RELQ_RELEVANCE2ORGQ");
            cand.text = join_subject_body(tag_text(rel->inner, "RelQSubject"),
                                          tag_text(rel->inner, "RelQBody"));
            queries[slot].candidates.push_back(std::move(cand));
        }
    }
    if (queries.empty()) throw std::runtime_error("no OrgQuestion elements found");
    return queries;
}

std::map<std::string, std::string> load_replacements(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open replacement file: " + path);
    std::map<std::string, std::string> out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw std::runtime_error(path + " line " + std::to_string(line_no) +
                                     ": expected query_id<TAB>text");
        out[line.substr(0, tab)] = line.substr(tab + 1);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Convert shared-task XML into the JSONL dataset format"};
    std::string input, output, scenario = "en", replace_path;
    app.add_option("-i,--input", input, "XML input file")->required();
    app.add_option("-o,--output", output, "JSONL output file")->required();
    app.add_option("--scenario", scenario, "Scenario tag for the records: en or mt")
        ->check(CLI::IsMember({"en", "mt"}));
    app.add_option("--replace-query-text", replace_path,
                   "TSV of query_id<TAB>text; replaces each query's text (for MT queries)");
    CLI11_PARSE(app, argc, argv);

    try {
        std::ifstream in(input);
        if (!in) throw std::runtime_error("cannot open input: " + input);
        std::stringstream buf;
        buf << in.rdbuf();
        auto queries = parse_xml(buf.str());

        if (!replace_path.empty()) {
            const auto replacements = load_replacements(replace_path);
            for (auto& q : queries) {
                const auto it = replacements.find(q.query_id);
                if (it == replacements.end())
                    throw std::runtime_error("no replacement text for query " + q.query_id);
                q.text = it->second;
            }
        }

        std::ofstream out(output);
        if (!out) throw std::runtime_error("cannot open output: " + output);
        for (const auto& q : queries) {
            nlohmann::json rec;
            rec["query_id"] = q.query_id;
            rec["scenario"] = scenario;
            rec["text"] = q.text;
            nlohmann::json cands = nlohmann::json::array();
            for (const auto& c : q.candidates)
                cands.push_back({{"doc_id", c.doc_id}, {"text", c.text}, {"relevance", c.relevance}});
            rec["candidates"] = std::move(cands);
            out << rec.dump() << "\n";
        }
        std::fprintf(stderr, "wrote %zu queries to %s\n", queries.size(), output.c_str());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
