#include "qrank/analysis.hpp"

#include <array>
#include <fstream>
#include <stdexcept>

namespace qrank {

namespace {

// ---- utf-8 iteration ------------------------------------------------------

struct Codepoint {
    uint32_t value;
    size_t bytes;
};

Codepoint decode_utf8(std::string_view s, size_t pos) {
    const auto b0 = static_cast<unsigned char>(s[pos]);
    if (b0 < 0x80) return {b0, 1};
    auto cont = [&](size_t i) {
        return i < s.size() && (static_cast<unsigned char>(s[i]) & 0xC0) == 0x80;
    };
    if ((b0 & 0xE0) == 0xC0 && cont(pos + 1)) {
        uint32_t cp = (b0 & 0x1Fu) << 6 | (static_cast<unsigned char>(s[pos + 1]) & 0x3Fu);
        return {cp, 2};
    }
    if ((b0 & 0xF0) == 0xE0 && cont(pos + 1) && cont(pos + 2)) {
        uint32_t cp = (b0 & 0x0Fu) << 12 | (static_cast<unsigned char>(s[pos + 1]) & 0x3Fu) << 6 |
                      (static_cast<unsigned char>(s[pos + 2]) & 0x3Fu);
        return {cp, 3};
    }
    if ((b0 & 0xF8) == 0xF0 && cont(pos + 1) && cont(pos + 2) && cont(pos + 3)) {
        uint32_t cp = (b0 & 0x07u) << 18 | (static_cast<unsigned char>(s[pos + 1]) & 0x3Fu) << 12 |
                      (static_cast<unsigned char>(s[pos + 2]) & 0x3Fu) << 6 |
                      (static_cast<unsigned char>(s[pos + 3]) & 0x3Fu);
        return {cp, 4};
    }
    // invalid byte: pass it through as a latin-1 codepoint
    return {b0, 1};
}

void encode_utf8(uint32_t cp, std::string& out) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

bool is_whitespace_cp(uint32_t cp) {
    if (cp < 0x20) return true;  // controls split like whitespace
    switch (cp) {
        case 0x20: case 0x85: case 0xA0: case 0x1680:
        case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return (cp >= 0x2000 && cp <= 0x200A);
    }
}

// Punctuation per the common Unicode punctuation blocks, plus ASCII symbols.
// Informal CQA text leans on ellipses and mixed quote styles, so the curly
// quote / dash / ellipsis range is included.
bool is_punct_cp(uint32_t cp) {
    if (cp < 0x80) {
        return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
               (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
    }
    if (cp >= 0xA1 && cp <= 0xBF) return true;   // latin-1 punctuation/symbols
    if (cp == 0xD7 || cp == 0xF7) return true;
    if (cp >= 0x2010 && cp <= 0x205E) return true;  // general punctuation
    if (cp >= 0x2E00 && cp <= 0x2E7F) return true;  // supplemental punctuation
    if (cp >= 0x3001 && cp <= 0x303F) return true;  // CJK punctuation
    if (cp >= 0xFF01 && cp <= 0xFF0F) return true;  // fullwidth forms
    if (cp >= 0xFF1A && cp <= 0xFF20) return true;
    if (cp >= 0xFF3B && cp <= 0xFF40) return true;
    if (cp >= 0xFF5B && cp <= 0xFF65) return true;
    return false;
}

uint32_t lowercase_cp(uint32_t cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;  // latin-1
    if (cp == 0x178) return 0xFF;
    return cp;
}

// Split into lowercased words; punctuation acts as a separator when
// strip_punctuation is set, otherwise only whitespace splits.
std::vector<std::string> split_words(std::string_view text, bool strip_punctuation) {
    std::vector<std::string> words;
    std::string current;
    size_t pos = 0;
    while (pos < text.size()) {
        const auto [cp, n] = decode_utf8(text, pos);
        pos += n;
        const bool sep = is_whitespace_cp(cp) || (strip_punctuation && is_punct_cp(cp));
        if (sep) {
            if (!current.empty()) {
                words.push_back(std::move(current));
                current.clear();
            }
        } else {
            encode_utf8(lowercase_cp(cp), current);
        }
    }
    if (!current.empty()) words.push_back(std::move(current));
    return words;
}

// ---- porter stemmer (original 1980 algorithm) -----------------------------

bool porter_is_consonant(const std::string& w, size_t i) {
    const char c = w[i];
    if (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u') return false;
    if (c == 'y') return i == 0 ? true : !porter_is_consonant(w, i - 1);
    return true;
}

// m in [C](VC)^m[V], computed over w[0..len)
int porter_measure(const std::string& w, size_t len) {
    int m = 0;
    size_t i = 0;
    while (i < len && porter_is_consonant(w, i)) ++i;
    while (i < len) {
        while (i < len && !porter_is_consonant(w, i)) ++i;
        if (i == len) break;
        ++m;
        while (i < len && porter_is_consonant(w, i)) ++i;
    }
    return m;
}

bool porter_has_vowel(const std::string& w, size_t len) {
    for (size_t i = 0; i < len; ++i)
        if (!porter_is_consonant(w, i)) return true;
    return false;
}

bool porter_double_consonant(const std::string& w, size_t len) {
    return len >= 2 && w[len - 1] == w[len - 2] && porter_is_consonant(w, len - 1);
}

// *o: stem ends cvc where the final c is not w, x or y
bool porter_cvc(const std::string& w, size_t len) {
    if (len < 3) return false;
    if (!porter_is_consonant(w, len - 3) || porter_is_consonant(w, len - 2) ||
        !porter_is_consonant(w, len - 1))
        return false;
    const char c = w[len - 1];
    return c != 'w' && c != 'x' && c != 'y';
}

bool ends_with(const std::string& w, std::string_view suffix) {
    return w.size() >= suffix.size() &&
           w.compare(w.size() - suffix.size(), suffix.size(), suffix) == 0;
}

struct SuffixRule {
    std::string_view from;
    std::string_view to;
};

// Longest matching suffix is selected, then its measure condition is tested;
// on failure no other rule in the step applies.
bool apply_rule_list(std::string& w, const SuffixRule* rules, size_t n, int min_measure) {
    const SuffixRule* best = nullptr;
    for (size_t i = 0; i < n; ++i) {
        if (ends_with(w, rules[i].from) && (!best || rules[i].from.size() > best->from.size()))
            best = &rules[i];
    }
    if (!best) return false;
    const size_t stem_len = w.size() - best->from.size();
    if (porter_measure(w, stem_len) > min_measure) {
        w.resize(stem_len);
        w.append(best->to);
        return true;
    }
    return false;
}

void porter_step1a(std::string& w) {
    if (ends_with(w, "sses")) {
        w.resize(w.size() - 2);
    } else if (ends_with(w, "ies")) {
        w.resize(w.size() - 2);
    } else if (ends_with(w, "ss")) {
        // keep
    } else if (ends_with(w, "s")) {
        w.resize(w.size() - 1);
    }
}

void porter_step1b(std::string& w) {
    if (ends_with(w, "eed")) {
        if (porter_measure(w, w.size() - 3) > 0) w.resize(w.size() - 1);
        return;
    }
    bool removed = false;
    if (ends_with(w, "ed") && porter_has_vowel(w, w.size() - 2)) {
        w.resize(w.size() - 2);
        removed = true;
    } else if (ends_with(w, "ing") && porter_has_vowel(w, w.size() - 3)) {
        w.resize(w.size() - 3);
        removed = true;
    }
    if (!removed) return;
    if (ends_with(w, "at") || ends_with(w, "bl") || ends_with(w, "iz")) {
        w.push_back('e');
    } else if (porter_double_consonant(w, w.size())) {
        const char c = w.back();
        if (c != 'l' && c != 's' && c != 'z') w.resize(w.size() - 1);
    } else if (porter_measure(w, w.size()) == 1 && porter_cvc(w, w.size())) {
        w.push_back('e');
    }
}

void porter_step1c(std::string& w) {
    if (ends_with(w, "y") && porter_has_vowel(w, w.size() - 1)) w.back() = 'i';
}

void porter_step2(std::string& w) {
    static constexpr SuffixRule rules[] = {
        {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"}, {"anci", "ance"},
        {"izer", "ize"},    {"abli", "able"},   {"alli", "al"},   {"entli", "ent"},
        {"eli", "e"},       {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
        {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"}, {"fulness", "ful"},
        {"ousness", "ous"}, {"aliti", "al"},    {"iviti", "ive"},   {"biliti", "ble"},
    };
    apply_rule_list(w, rules, std::size(rules), 0);
}

void porter_step3(std::string& w) {
    static constexpr SuffixRule rules[] = {
        {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"},
        {"ical", "ic"},  {"ful", ""},   {"ness", ""},
    };
    apply_rule_list(w, rules, std::size(rules), 0);
}

void porter_step4(std::string& w) {
    static constexpr std::array<std::string_view, 19> suffixes = {
        "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement", "ment",
        "ent", "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize"};
    std::string_view best;
    for (const auto s : suffixes) {
        if (ends_with(w, s) && s.size() > best.size()) best = s;
    }
    if (best.empty()) return;
    const size_t stem_len = w.size() - best.size();
    if (porter_measure(w, stem_len) <= 1) return;
    if (best == "ion") {
        const char c = stem_len > 0 ? w[stem_len - 1] : '\0';
        if (c != 's' && c != 't') return;
    }
    w.resize(stem_len);
}

void porter_step5a(std::string& w) {
    if (!ends_with(w, "e")) return;
    const int m = porter_measure(w, w.size() - 1);
    if (m > 1 || (m == 1 && !porter_cvc(w, w.size() - 1))) w.resize(w.size() - 1);
}

void porter_step5b(std::string& w) {
    if (w.size() >= 2 && w.back() == 'l' && porter_double_consonant(w, w.size()) &&
        porter_measure(w, w.size()) > 1)
        w.resize(w.size() - 1);
}

}  // namespace

std::string porter_stem(std::string word) {
    if (word.empty()) return word;
    porter_step1a(word);
    if (word.empty()) return word;
    porter_step1b(word);
    porter_step1c(word);
    porter_step2(word);
    porter_step3(word);
    porter_step4(word);
    porter_step5a(word);
    porter_step5b(word);
    return word;
}

// Harman's S-stemmer: three plural rules, first match wins.
std::string light_stem(std::string word) {
    if (ends_with(word, "ies")) {
        if (!ends_with(word, "eies") && !ends_with(word, "aies")) {
            word.resize(word.size() - 3);
            word.push_back('y');
        }
    } else if (ends_with(word, "es")) {
        if (!ends_with(word, "aes") && !ends_with(word, "ees") && !ends_with(word, "oes"))
            word.resize(word.size() - 1);
    } else if (ends_with(word, "s")) {
        if (!ends_with(word, "us") && !ends_with(word, "ss")) word.resize(word.size() - 1);
    }
    return word;
}

std::string apply_stemmer(Stemmer s, std::string word) {
    switch (s) {
        case Stemmer::none: return word;
        case Stemmer::english_light: return light_stem(std::move(word));
        case Stemmer::porter: return porter_stem(std::move(word));
    }
    return word;
}

Stemmer stemmer_from_name(std::string_view name) {
    if (name == "none") return Stemmer::none;
    if (name == "light" || name == "english-light") return Stemmer::english_light;
    if (name == "porter") return Stemmer::porter;
    throw std::runtime_error("unknown stemmer: " + std::string(name) +
                             " (expected none, light or porter)");
}

std::string_view stemmer_name(Stemmer s) {
    switch (s) {
        case Stemmer::none: return "none";
        case Stemmer::english_light: return "light";
        case Stemmer::porter: return "porter";
    }
    return "none";
}

AnalyzerConfig default_analyzer() {
    static const char* kDefaultStopwords[] = {
        "a",    "an",   "and",  "are",  "as",    "at",   "be",   "but",  "by",
        "for",  "if",   "in",   "into", "is",    "it",   "no",   "not",  "of",
        "on",   "or",   "such", "that", "the",   "their", "then", "there",
        "these", "they", "this", "to",  "was",   "will", "with"};
    AnalyzerConfig cfg;
    for (const char* w : kDefaultStopwords) cfg.stopwords.insert(w);
    return cfg;
}

std::set<std::string> load_stopwords(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open stopword file: " + path);
    std::set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        size_t begin = line.find_first_not_of(" \t");
        if (begin == std::string::npos) continue;
        size_t end = line.find_last_not_of(" \t");
        std::string word = line.substr(begin, end - begin + 1);
        if (word.empty() || word[0] == '#') continue;
        words.insert(word);
    }
    return words;
}

std::vector<std::string> query_words(std::string_view text, const AnalyzerConfig& config) {
    std::vector<std::string> out;
    for (auto& w : split_words(text, config.strip_punctuation)) {
        if (config.stopwords.count(w)) continue;
        out.push_back(std::move(w));
    }
    return out;
}

TokenStream analyze(std::string_view text, const AnalyzerConfig& config) {
    TokenStream tokens;
    for (auto& w : split_words(text, config.strip_punctuation)) {
        if (config.stopwords.count(w)) continue;
        std::string stemmed = apply_stemmer(config.stemmer, std::move(w));
        if (!stemmed.empty()) tokens.push_back(std::move(stemmed));
    }
    return tokens;
}

TokenStream analyze_phrase(std::string_view phrase, const AnalyzerConfig& config) {
    return analyze(phrase, config);
}

}  // namespace qrank
