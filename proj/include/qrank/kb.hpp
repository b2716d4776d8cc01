#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace qrank {

struct KbEntry {
    std::vector<std::string> subjects;  // "Category:" prefix stripped
    std::string fetched_at;             // ISO-8601, may be empty for handmade caches

    bool operator==(const KbEntry&) const = default;
};

enum class KbProvenance { live, cached };

// Subject labels per concept key (lowercased term).
struct KbSubjectCache {
    std::map<std::string, KbEntry> entries;
    KbProvenance provenance = KbProvenance::cached;

    bool has(const std::string& term_lower) const { return entries.count(term_lower) != 0; }
    void put(const std::string& term_lower, KbEntry entry);

    bool operator==(const KbSubjectCache& other) const { return entries == other.entries; }
};

// Line-delimited JSON: {"key": str, "subjects": [str], "fetched_at": str}.
// Unknown extra fields are tolerated on read. Malformed line -> hard error
// with the line number.
KbSubjectCache load_kb_cache(const std::string& path);
void save_kb_cache(const KbSubjectCache& cache, const std::string& path);

struct KbFetchItem {
    enum class Status { ok, miss, error, cached };
    std::string term;
    Status status;
    std::string detail;
};

struct KbFetchReport {
    std::vector<KbFetchItem> items;
    size_t count(KbFetchItem::Status s) const;
};

// Live subject-property lookup. The endpoint is a URL template with a
// "{term}" placeholder; the term is capitalized and percent-encoded the way
// knowledge-base resource names are. At most one request is in flight and
// consecutive requests are separated by min_delay_ms.
class KbClient {
public:
    KbClient(std::string endpoint_template, int min_delay_ms);

    // nullopt = resolvable failure recorded in `error`; empty vector = the
    // concept exists but has no subjects (or does not resolve).
    std::optional<std::vector<std::string>> fetch_subjects(const std::string& term,
                                                           std::string& error);

    const std::string& endpoint() const { return endpoint_template_; }

private:
    std::string endpoint_template_;
    int min_delay_ms_;
    std::mutex mutex_;
    long long last_request_ms_ = 0;
};

// Expansion-time lookup surface: either a frozen cache or cache+client with
// write-through. Thread-safe.
class KbLookup {
public:
    virtual ~KbLookup() = default;
    // nullopt -> unresolvable / fetch failed; expansion treats it as empty.
    virtual std::optional<std::vector<std::string>> subjects(const std::string& term_lower) = 0;
};

class CachedKbLookup final : public KbLookup {
public:
    explicit CachedKbLookup(const KbSubjectCache& cache) : cache_(cache) {}
    std::optional<std::vector<std::string>> subjects(const std::string& term_lower) override;

private:
    const KbSubjectCache& cache_;
};

class LiveKbLookup final : public KbLookup {
public:
    LiveKbLookup(KbSubjectCache cache, std::shared_ptr<KbClient> client);
    std::optional<std::vector<std::string>> subjects(const std::string& term_lower) override;

    const KbSubjectCache& cache() const { return cache_; }
    const KbFetchReport& report() const { return report_; }

private:
    std::mutex mutex_;
    KbSubjectCache cache_;
    std::shared_ptr<KbClient> client_;
    KbFetchReport report_;
};

// "Category:Tourist_activities" -> "Tourist activities"
std::string normalize_subject_label(std::string label);

// Current time, ISO-8601 UTC.
std::string iso8601_now();

}  // namespace qrank
