#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "secgen/commit.hpp"

namespace secgen {

enum class Granularity { File, Function, Block, Line };

std::string to_string(Granularity granularity);

// One fine-tuning item sliced from the post-fix version of a changed file.
struct SourceUnit {
    Granularity granularity = Granularity::File;
    std::string commit_hash;
    std::string file_path;
    long start_line = 0; // 1-based, inclusive, in the post-fix file
    long end_line = 0;
    bool orphan = false; // block outside any detected function
    std::string content;
};

struct Corpus {
    Granularity granularity = Granularity::File;
    std::string provenance; // digest of the source CommitSet
    std::vector<SourceUnit> units; // deduplicated, deterministic order
};

struct ExtractSkip {
    std::string commit_hash;
    std::string file_path;
    std::string reason;
};

struct ExtractResult {
    Corpus corpus;
    std::vector<ExtractSkip> skips;
};

// All four extractors read the post-fix sources. Units are deduplicated
// by (commit_hash, file_path, granularity, line range) and ordered by
// (commit_hash, file_path, start_line).
ExtractResult extract_file_level(const CommitSet& set);

// Functions containing the added lines of each file's diff. Added lines
// outside any detected function contribute nothing here; files whose scan
// is unbalanced (or whose diff does not parse) are skipped with a reason.
ExtractResult extract_function_level(const CommitSet& set);

// Innermost brace blocks containing the added lines. Blocks outside any
// detected function are emitted with orphan=true.
ExtractResult extract_block_level(const CommitSet& set);

// One unit per added line; whitespace-only lines are dropped.
ExtractResult extract_line_level(const CommitSet& set);

ExtractResult extract(const CommitSet& set, Granularity granularity);

class SamplingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Nested subsets by commit: a seeded permutation of the commit hashes is
// taken once and each requested size is a prefix of it, so
// subset_i ⊂ subset_{i+1}. Sizes must be strictly ascending and within
// the set size.
std::vector<CommitSet> sample_commit_subsets(const CommitSet& set,
                                             const std::vector<std::size_t>& sizes,
                                             std::uint64_t seed);

CommitSet filter_by_cwe(const CommitSet& set, const std::string& cwe_id);

std::string to_jsonl(const Corpus& corpus);
Corpus corpus_from_jsonl(const std::string& text);

// Totals table over the four granularities, one row per level.
std::string counts_summary(const std::vector<Corpus>& corpora);

} // namespace secgen
