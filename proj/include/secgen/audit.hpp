#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "secgen/extract.hpp"
#include "secgen/scenario.hpp"

namespace secgen {

class PatternError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Tokenizer rule used for overlap detection, case-sensitive:
// identifiers ([A-Za-z_][A-Za-z0-9_]*) and numbers ([0-9][0-9A-Za-z_.]*)
// are single tokens, every other non-space character is its own token.
std::vector<std::string> tokenize_code(std::string_view text);

// Count of distinct token n-grams present in both sequences.
std::size_t shared_ngrams(const std::vector<std::string>& a,
                          const std::vector<std::string>& b, int n);

struct OverlapPair {
    std::string unit_id;
    std::string prompt_id;
    std::size_t shared = 0; // > 0 by construction
};

struct OverlapReport {
    int n = 0;
    std::vector<OverlapPair> pairs;
    std::size_t total_shared = 0;

    bool contaminated() const { return total_shared > 0; }
};

std::string unit_id(const SourceUnit& unit);

// Pairwise n-gram overlap between corpus units and scenario prompts.
// Only pairs with a shared n-gram are listed.
OverlapReport ngram_overlap(const Corpus& corpus,
                            const std::vector<Scenario>& prompts, int n);

std::string overlap_report_text(const OverlapReport& report);

struct PatternHit {
    std::string unit_id;
    std::size_t match_count = 0;
};

// Units with at least one regex match, in corpus order. Throws
// PatternError (with a best-effort position) when the pattern does not
// compile.
std::vector<PatternHit> pattern_search(const Corpus& corpus, const std::string& pattern);

} // namespace secgen
