#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace secgen {

class DiffParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class LineTag { Context, Added, Deleted };

struct HunkLine {
    LineTag tag = LineTag::Context;
    std::string text;

    bool operator==(const HunkLine&) const = default;
};

// One "@@ -old_start,old_len +new_start,new_len @@" section.
// Invariants: new_len == #context + #added, old_len == #context + #deleted.
struct Hunk {
    long old_start = 0;
    long old_len = 0;
    long new_start = 0;
    long new_len = 0;
    std::vector<HunkLine> lines;

    bool operator==(const Hunk&) const = default;
};

struct UnifiedDiff {
    std::vector<Hunk> hunks; // non-overlapping, ordered by new_start

    bool operator==(const UnifiedDiff&) const = default;
};

// Parses `git diff` style unified diff text. File headers (---, +++,
// "diff --git", index, mode lines) are skipped, not interpreted.
// "\ No newline at end of file" markers are consumed and ignored.
// Throws DiffParseError if a hunk body does not match its header lengths
// or a body line carries an unknown tag.
UnifiedDiff parse_unified_diff(std::string_view text);

std::string to_text(const UnifiedDiff& diff);

// Line numbers of added lines in the post-change file, ascending.
std::vector<long> modified_new_lines(const UnifiedDiff& diff);

// Line numbers of deleted lines in the pre-change file, ascending.
std::vector<long> modified_old_lines(const UnifiedDiff& diff);

} // namespace secgen
