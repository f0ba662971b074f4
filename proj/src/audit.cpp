#include "secgen/audit.hpp"

#include <cctype>
#include <regex>
#include <unordered_set>

namespace secgen {

std::vector<std::string> tokenize_code(std::string_view text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (std::isspace(c)) {
            ++i;
            continue;
        }
        if (std::isalpha(c) || c == '_') {
            std::size_t start = i;
            while (i < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_'))
                ++i;
            tokens.emplace_back(text.substr(start, i - start));
        } else if (std::isdigit(c)) {
            // Keeps 3.14 and 0xFF whole; 1e-9 splits at the sign.
            std::size_t start = i;
            while (i < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(text[i])) ||
                    text[i] == '_' || text[i] == '.'))
                ++i;
            tokens.emplace_back(text.substr(start, i - start));
        } else {
            tokens.emplace_back(1, text[i]);
            ++i;
        }
    }
    return tokens;
}

namespace {

// n-grams as joined strings with an unlikely separator; desk-scale sizes
// make this cheap enough.
std::unordered_set<std::string> ngram_set(const std::vector<std::string>& tokens, int n) {
    std::unordered_set<std::string> grams;
    if (n <= 0 || tokens.size() < static_cast<std::size_t>(n))
        return grams;
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
        std::string gram;
        for (std::size_t j = 0; j < static_cast<std::size_t>(n); ++j) {
            if (j)
                gram += '\x1f';
            gram += tokens[i + j];
        }
        grams.insert(std::move(gram));
    }
    return grams;
}

} // namespace

std::size_t shared_ngrams(const std::vector<std::string>& a,
                          const std::vector<std::string>& b, int n) {
    auto grams_a = ngram_set(a, n);
    if (grams_a.empty())
        return 0;
    auto grams_b = ngram_set(b, n);
    const auto& small = grams_a.size() <= grams_b.size() ? grams_a : grams_b;
    const auto& large = grams_a.size() <= grams_b.size() ? grams_b : grams_a;
    std::size_t shared = 0;
    for (const auto& gram : small)
        if (large.count(gram))
            ++shared;
    return shared;
}

std::string unit_id(const SourceUnit& unit) {
    return unit.commit_hash + ":" + unit.file_path + ":" + to_string(unit.granularity) +
           ":" + std::to_string(unit.start_line) + "-" + std::to_string(unit.end_line);
}

OverlapReport ngram_overlap(const Corpus& corpus,
                            const std::vector<Scenario>& prompts, int n) {
    if (n < 1)
        throw PatternError("n-gram order must be >= 1");
    OverlapReport report;
    report.n = n;

    std::vector<std::vector<std::string>> prompt_tokens;
    prompt_tokens.reserve(prompts.size());
    for (const Scenario& prompt : prompts)
        prompt_tokens.push_back(tokenize_code(prompt.prompt));

    for (const SourceUnit& unit : corpus.units) {
        auto tokens = tokenize_code(unit.content);
        for (std::size_t p = 0; p < prompts.size(); ++p) {
            std::size_t shared = shared_ngrams(tokens, prompt_tokens[p], n);
            if (shared > 0) {
                report.pairs.push_back({unit_id(unit), prompts[p].id, shared});
                report.total_shared += shared;
            }
        }
    }
    return report;
}

std::string overlap_report_text(const OverlapReport& report) {
    std::string out;
    out += "n\t" + std::to_string(report.n) + "\n";
    out += "total_shared\t" + std::to_string(report.total_shared) + "\n";
    out += report.contaminated() ? "verdict\tcontaminated\n" : "verdict\tclean\n";
    out += "unit_id\tprompt_id\tshared\n";
    for (const OverlapPair& pair : report.pairs)
        out += pair.unit_id + "\t" + pair.prompt_id + "\t" +
               std::to_string(pair.shared) + "\n";
    return out;
}

std::vector<PatternHit> pattern_search(const Corpus& corpus, const std::string& pattern) {
    std::regex re;
    try {
        re = std::regex(pattern, std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
        // std::regex_error carries no offset; probe prefixes for the
        // shortest one that already fails as an approximate position.
        std::size_t position = pattern.size();
        for (std::size_t len = 1; len <= pattern.size(); ++len) {
            try {
                std::regex probe(pattern.substr(0, len), std::regex::ECMAScript);
            } catch (const std::regex_error&) {
                position = len;
                break;
            }
        }
        throw PatternError("invalid pattern near position " + std::to_string(position) +
                           ": " + e.what());
    }

    std::vector<PatternHit> hits;
    for (const SourceUnit& unit : corpus.units) {
        auto begin = std::sregex_iterator(unit.content.begin(), unit.content.end(), re);
        auto count = static_cast<std::size_t>(std::distance(begin, std::sregex_iterator()));
        if (count > 0)
            hits.push_back({unit_id(unit), count});
    }
    return hits;
}

} // namespace secgen
