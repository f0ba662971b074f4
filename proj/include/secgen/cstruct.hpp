#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "secgen/language.hpp"

namespace secgen {

// Brace-delimited compound statement. Lines are 1-based and inclusive.
struct BlockSpan {
    long open_line = 0;
    long close_line = 0;
    int depth = 0;   // nesting depth, >= 1
    int parent = -1; // index into StructureIndex::blocks, -1 for top level
};

struct FunctionSpan {
    std::string name;
    long start_line = 0; // line of the function name identifier
    long end_line = 0;   // line of the body's closing brace
    int body_block = -1; // index into StructureIndex::blocks
};

// Structural index built by a lexical scan, not a grammar. Function
// detection is heuristic: an identifier followed by a parenthesized list
// followed by '{' at brace depth 0, where the identifier is not a control
// keyword. Known misses: K&R definitions, functions produced by macro
// expansion, member functions inside class bodies, definitions inside
// `extern "C" { ... }`. Digraphs and trigraphs are not handled.
struct StructureIndex {
    std::vector<int> depth_map; // brace depth at the start of line i+1
    std::vector<BlockSpan> blocks;
    std::vector<FunctionSpan> functions;
    bool unbalanced = false;
};

namespace detail {

// Lexical mode tracker shared by scan() and BraceWalker. Classifies each
// character as code or non-code (comment, string, char, raw string,
// preprocessor directive) so that only code braces count.
class CodeLexer {
public:
    explicit CodeLexer(Language language) : language_(language) {}

    // Advances over one character and reports whether it is active code.
    // Quote and comment delimiters themselves are not active.
    bool step(char c);

    bool in_preprocessor() const;

private:
    enum class Mode {
        Normal,
        LineComment,
        BlockComment,
        String,
        CharLit,
        RawString,
        Preproc,
        PreprocLineComment,
        PreprocBlockComment,
    };

    bool enter_raw_string_if_prefixed();

    Language language_;
    Mode mode_ = Mode::Normal;
    Mode block_comment_return_ = Mode::Normal;
    bool escape_ = false;
    bool line_only_ws_ = true;
    bool backslash_pending_ = false; // preproc continuation, tolerates \r
    char history_[4] = {0, 0, 0, 0}; // recent chars, raw-string prefix lookback
    bool raw_collecting_ = false;    // reading the raw string delimiter
    std::string raw_closer_;         // ")delim\"" once the delimiter is known
    std::size_t raw_match_ = 0;      // progress through raw_closer_
};

} // namespace detail

// Scans source text. Braces inside comments, string/char literals, raw
// string literals (C++ only) and preprocessor directives (including '\'
// continuations) do not affect depth. Unbalanced input yields a
// best-effort index with unbalanced=true; blocks lacking a close are
// dropped.
StructureIndex scan(std::string_view source, Language language);

// The unique function whose [start_line, end_line] contains `line`.
const FunctionSpan* enclosing_function(const StructureIndex& index, long line);

// Deepest block whose [open_line, close_line] contains `line`. When two
// blocks of equal depth share the line, the later-opened one wins.
const BlockSpan* innermost_block(const StructureIndex& index, long line);

// Streaming brace-depth walker with scan()'s lexical rules. Used to
// continue depth tracking across a text boundary (a prompt followed by a
// model completion).
class BraceWalker {
public:
    enum class Event { None, ClosedToZero, Underflow };

    explicit BraceWalker(Language language) : lexer_(language) {}

    void feed(std::string_view text);

    // Feeds one char. ClosedToZero: this char brought the depth from
    // positive back to zero. Underflow: a code '}' at depth zero (depth
    // stays clamped at zero).
    Event feed_char(char c);

    int depth() const { return depth_; }
    bool has_been_positive() const { return has_been_positive_; }

private:
    detail::CodeLexer lexer_;
    int depth_ = 0;
    bool has_been_positive_ = false;
};

} // namespace secgen
