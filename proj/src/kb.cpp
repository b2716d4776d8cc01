#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "qrank/kb.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "qrank/io_util.hpp"

namespace qrank {

namespace {

std::string lowercase_ascii(std::string s) {
    for (char& c : s)
        if (c >= 'A' && c <= 'Z') c += 0x20;
    return s;
}

std::string capitalize_first(std::string s) {
    if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] -= 0x20;
    return s;
}

std::string percent_encode(const std::string& s) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    for (const unsigned char c : s) {
        const bool unreserved = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                                (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.' ||
                                c == '~';
        if (unreserved) {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 0xF]);
        }
    }
    return out;
}

long long steady_now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

std::string last_path_segment(const std::string& uri) {
    const size_t slash = uri.find_last_of('/');
    return slash == std::string::npos ? uri : uri.substr(slash + 1);
}

}  // namespace

std::string normalize_subject_label(std::string label) {
    static constexpr std::string_view kPrefix = "Category:";
    if (label.rfind(kPrefix, 0) == 0) label.erase(0, kPrefix.size());
    for (char& c : label)
        if (c == '_') c = ' ';
    return label;
}

std::string iso8601_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void KbSubjectCache::put(const std::string& term_lower, KbEntry entry) {
    entries[lowercase_ascii(term_lower)] = std::move(entry);
}

KbSubjectCache load_kb_cache(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open KB cache file: " + path);
    KbSubjectCache cache;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        nlohmann::json rec = nlohmann::json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.is_object() || !rec.contains("key") ||
            !rec["key"].is_string() || !rec.contains("subjects") || !rec["subjects"].is_array())
            throw std::runtime_error("KB cache line " + std::to_string(line_no) +
                                     ": malformed record");
        KbEntry entry;
        for (const auto& s : rec["subjects"]) {
            if (!s.is_string() || s.get<std::string>().empty())
                throw std::runtime_error("KB cache line " + std::to_string(line_no) +
                                         ": subjects must be nonempty strings");
            entry.subjects.push_back(normalize_subject_label(s.get<std::string>()));
        }
        if (rec.contains("fetched_at") && rec["fetched_at"].is_string())
            entry.fetched_at = rec["fetched_at"].get<std::string>();
        cache.put(rec["key"].get<std::string>(), std::move(entry));
    }
    return cache;
}

void save_kb_cache(const KbSubjectCache& cache, const std::string& path) {
    std::ostringstream out;
    for (const auto& [key, entry] : cache.entries) {
        nlohmann::json rec;
        rec["key"] = key;
        rec["subjects"] = entry.subjects;
        rec["fetched_at"] = entry.fetched_at;
        out << rec.dump() << "\n";
    }
    write_file_atomic(path, out.str());
}

size_t KbFetchReport::count(KbFetchItem::Status s) const {
    size_t n = 0;
    for (const auto& item : items)
        if (item.status == s) ++n;
    return n;
}

KbClient::KbClient(std::string endpoint_template, int min_delay_ms)
    : endpoint_template_(std::move(endpoint_template)), min_delay_ms_(min_delay_ms) {
    if (endpoint_template_.find("{term}") == std::string::npos)
        throw std::runtime_error("KB endpoint template must contain {term}: " +
                                 endpoint_template_);
}

std::optional<std::vector<std::string>> KbClient::fetch_subjects(const std::string& term,
                                                                 std::string& error) {
    const std::string resource_name = capitalize_first(lowercase_ascii(term));
    std::string url = endpoint_template_;
    url.replace(url.find("{term}"), 6, percent_encode(resource_name));

    // split scheme://host[:port] from the path
    const size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        error = "endpoint has no scheme: " + url;
        return std::nullopt;
    }
    const size_t path_start = url.find('/', scheme_end + 3);
    const std::string base = path_start == std::string::npos ? url : url.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

    std::lock_guard<std::mutex> lock(mutex_);  // one request in flight
    const long long now = steady_now_ms();
    if (last_request_ms_ != 0 && now - last_request_ms_ < min_delay_ms_)
        std::this_thread::sleep_for(
            std::chrono::milliseconds(min_delay_ms_ - (now - last_request_ms_)));
    last_request_ms_ = steady_now_ms();

    httplib::Client client(base);
    client.set_follow_location(true);
    client.set_connection_timeout(10);
    client.set_read_timeout(20);
    auto res = client.Get(path);
    if (!res) {
        error = "request failed: " + httplib::to_string(res.error());
        return std::nullopt;
    }
    if (res->status == 404) return std::vector<std::string>{};  // no such concept
    if (res->status != 200) {
        error = "HTTP " + std::to_string(res->status);
        return std::nullopt;
    }

    nlohmann::json body = nlohmann::json::parse(res->body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) {
        error = "response is not a JSON object";
        return std::nullopt;
    }

    // The resource document keys every entity by URI; take dct:subject from
    // the entity matching the concept, falling back to any entity that has it.
    static constexpr std::string_view kSubjectProp = "http://purl.org/dc/terms/subject";
    const std::string wanted_suffix = "/" + resource_name;
    const nlohmann::json* subjects = nullptr;
    for (auto it = body.begin(); it != body.end(); ++it) {
        if (!it.value().is_object() || !it.value().contains(kSubjectProp)) continue;
        const std::string& resource = it.key();
        const bool exact = resource.size() >= wanted_suffix.size() &&
                           resource.compare(resource.size() - wanted_suffix.size(),
                                            wanted_suffix.size(), wanted_suffix) == 0;
        if (exact) {
            subjects = &it.value()[std::string(kSubjectProp)];
            break;
        }
        if (!subjects) subjects = &it.value()[std::string(kSubjectProp)];
    }
    std::vector<std::string> labels;
    if (subjects && subjects->is_array()) {
        for (const auto& entry : *subjects) {
            if (!entry.is_object() || !entry.contains("value") || !entry["value"].is_string())
                continue;
            std::string label =
                normalize_subject_label(last_path_segment(entry["value"].get<std::string>()));
            if (!label.empty()) labels.push_back(std::move(label));
        }
    }
    return labels;
}

std::optional<std::vector<std::string>> CachedKbLookup::subjects(const std::string& term_lower) {
    auto it = cache_.entries.find(term_lower);
    if (it == cache_.entries.end()) return std::nullopt;
    return it->second.subjects;
}

LiveKbLookup::LiveKbLookup(KbSubjectCache cache, std::shared_ptr<KbClient> client)
    : cache_(std::move(cache)), client_(std::move(client)) {
    cache_.provenance = KbProvenance::live;
}

std::optional<std::vector<std::string>> LiveKbLookup::subjects(const std::string& term_lower) {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = cache_.entries.find(term_lower);
        if (it != cache_.entries.end()) {
            report_.items.push_back({term_lower, KbFetchItem::Status::cached, ""});
            return it->second.subjects;
        }
    }
    std::string error;
    auto fetched = client_->fetch_subjects(term_lower, error);
    std::lock_guard<std::mutex> lock(mutex_);
    if (!fetched) {
        // soft failure: record it, expansion for this term stays empty
        report_.items.push_back({term_lower, KbFetchItem::Status::error, error});
        return std::nullopt;
    }
    KbEntry entry;
    entry.subjects = *fetched;
    entry.fetched_at = iso8601_now();
    cache_.entries[term_lower] = entry;
    report_.items.push_back({term_lower,
                             fetched->empty() ? KbFetchItem::Status::miss : KbFetchItem::Status::ok,
                             ""});
    return entry.subjects;
}

}  // namespace qrank
