#include "secgen/cstruct.hpp"

#include <array>
#include <cctype>

namespace secgen {

namespace detail {

namespace {

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

} // namespace

bool CodeLexer::in_preprocessor() const {
    return mode_ == Mode::Preproc || mode_ == Mode::PreprocLineComment ||
           mode_ == Mode::PreprocBlockComment;
}

// history_[0] is the previously processed character.
bool CodeLexer::enter_raw_string_if_prefixed() {
    if (language_ != Language::Cpp)
        return false;
    if (history_[0] != 'R')
        return false;
    char before = history_[1];
    if (!is_ident_char(before))
        return true; // R"..."
    if ((before == 'u' || before == 'U' || before == 'L') && !is_ident_char(history_[2]))
        return true; // uR"..." UR"..." LR"..."
    if (before == '8' && history_[2] == 'u' && !is_ident_char(history_[3]))
        return true; // u8R"..."
    return false;
}

bool CodeLexer::step(char c) {
    bool active = false;
    // The '*' of an opener and the '/' of a closer are cleared from the
    // lookback so "/*/" cannot close and "*//" cannot re-open.
    bool clear_history = false;

    switch (mode_) {
    case Mode::Normal:
        if (c == '/' && history_[0] == '/') {
            mode_ = Mode::LineComment;
            backslash_pending_ = false;
        } else if (c == '*' && history_[0] == '/') {
            mode_ = Mode::BlockComment;
            block_comment_return_ = Mode::Normal;
            clear_history = true;
        } else if (c == '"') {
            if (enter_raw_string_if_prefixed()) {
                mode_ = Mode::RawString;
                raw_collecting_ = true;
                raw_closer_ = ")";
                raw_match_ = 0;
            } else {
                mode_ = Mode::String;
                escape_ = false;
            }
        } else if (c == '\'') {
            // Guard against digit separators (1'000) and numeric suffixes:
            // only a quote not glued to an identifier/number opens a char
            // literal, except for the u/U/L encoding prefixes.
            char before = history_[0];
            bool opens = !is_ident_char(before) ||
                         ((before == 'u' || before == 'U' || before == 'L') &&
                          !is_ident_char(history_[1])) ||
                         (before == '8' && history_[1] == 'u' && !is_ident_char(history_[2]));
            if (opens) {
                mode_ = Mode::CharLit;
                escape_ = false;
            } else {
                active = true;
            }
        } else if (c == '#' && line_only_ws_) {
            mode_ = Mode::Preproc;
            backslash_pending_ = false;
        } else {
            active = true;
        }
        // Comments count as whitespace before a directive, so comment
        // chars (and a '/' that may open one) leave the flag alone.
        if (c == '\n')
            line_only_ws_ = true;
        else if (!std::isspace(static_cast<unsigned char>(c)) && c != '/' &&
                 mode_ == Mode::Normal)
            line_only_ws_ = false;
        else if (mode_ == Mode::String || mode_ == Mode::CharLit ||
                 mode_ == Mode::RawString)
            line_only_ws_ = false;
        break;

    case Mode::LineComment:
        if (c == '\\') {
            backslash_pending_ = true;
        } else if (c == '\n') {
            line_only_ws_ = true;
            if (backslash_pending_)
                backslash_pending_ = false; // spliced, comment continues
            else
                mode_ = Mode::Normal;
        } else if (c != '\r') {
            backslash_pending_ = false;
        }
        break;

    case Mode::BlockComment:
        if (c == '/' && history_[0] == '*') {
            mode_ = block_comment_return_;
            clear_history = true;
        }
        if (c == '\n')
            line_only_ws_ = true;
        break;

    case Mode::String:
    case Mode::CharLit: {
        char closer = mode_ == Mode::String ? '"' : '\'';
        if (escape_) {
            escape_ = false;
        } else if (c == '\\') {
            escape_ = true;
        } else if (c == closer) {
            mode_ = Mode::Normal;
        } else if (c == '\n') {
            // Unterminated literal; recover at end of line.
            mode_ = Mode::Normal;
            line_only_ws_ = true;
        }
        break;
    }

    case Mode::RawString:
        if (raw_collecting_) {
            if (c == '(') {
                raw_closer_ += '"'; // closer is ")delim\"", delimiter now known
                raw_collecting_ = false;
                raw_match_ = 0;
            } else if (c == '\n' || raw_closer_.size() > 17) {
                // Malformed opener (delimiters are <= 16 chars and cannot
                // span lines); recover.
                mode_ = Mode::Normal;
                line_only_ws_ = true;
            } else {
                raw_closer_ += c;
            }
        } else if (c == raw_closer_[raw_match_]) {
            if (++raw_match_ == raw_closer_.size())
                mode_ = Mode::Normal;
        } else {
            // The closer starts with ')' and the delimiter cannot contain
            // one, so ')' is the only restart point.
            raw_match_ = c == ')' ? 1 : 0;
        }
        if (c == '\n')
            line_only_ws_ = true;
        break;

    case Mode::Preproc:
        if (c == '/' && history_[0] == '/') {
            mode_ = Mode::PreprocLineComment;
        } else if (c == '*' && history_[0] == '/') {
            mode_ = Mode::PreprocBlockComment;
            block_comment_return_ = Mode::Preproc;
            clear_history = true;
        } else if (c == '\\') {
            backslash_pending_ = true;
        } else if (c == '\n') {
            line_only_ws_ = true;
            if (backslash_pending_)
                backslash_pending_ = false; // continued directive
            else
                mode_ = Mode::Normal;
        } else if (c != '\r') {
            backslash_pending_ = false;
        }
        break;

    case Mode::PreprocLineComment:
        if (c == '\\') {
            backslash_pending_ = true;
        } else if (c == '\n') {
            line_only_ws_ = true;
            if (backslash_pending_)
                backslash_pending_ = false;
            else
                mode_ = Mode::Normal; // comment and directive both end
        } else if (c != '\r') {
            backslash_pending_ = false;
        }
        break;

    case Mode::PreprocBlockComment:
        if (c == '/' && history_[0] == '*') {
            mode_ = block_comment_return_;
            clear_history = true;
        }
        if (c == '\n')
            line_only_ws_ = true;
        break;
    }

    history_[3] = history_[2];
    history_[2] = history_[1];
    history_[1] = history_[0];
    history_[0] = clear_history ? '\0' : c;
    return active;
}

} // namespace detail

namespace {

bool is_control_keyword(const std::string& name) {
    static const std::array<const char*, 9> kKeywords = {
        "if", "for", "while", "switch", "do", "else", "catch", "return", "sizeof",
    };
    for (const char* k : kKeywords)
        if (name == k)
            return true;
    return false;
}

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

} // namespace

StructureIndex scan(std::string_view source, Language language) {
    StructureIndex index;
    if (source.empty())
        return index;

    detail::CodeLexer lexer(language);
    long line = 1;
    int depth = 0;
    index.depth_map.push_back(0);

    std::vector<int> open_stack;

    // Function-candidate tracking, live only at depth 0.
    enum class Cand { None, Ident, Parens, AfterParens };
    Cand cand = Cand::None;
    std::string cand_name;
    long cand_line = 0;
    int cand_paren_depth = 0;

    std::string ident;
    long ident_line = 0;

    // Blocks pending a close, by index; a function waiting on its body
    // close is found through pending_function_body.
    std::vector<std::pair<int, int>> pending_function_body; // (block idx, function idx)

    auto flush_ident = [&] {
        if (ident.empty())
            return;
        if (depth == 0 && cand != Cand::Parens &&
            !std::isdigit(static_cast<unsigned char>(ident[0]))) {
            if (cand == Cand::AfterParens && (ident == "const" || ident == "noexcept")) {
                // qualifier between the parameter list and the body
            } else {
                cand = Cand::Ident;
                cand_name = ident;
                cand_line = ident_line;
            }
        }
        ident.clear();
    };

    for (std::size_t i = 0; i < source.size(); ++i) {
        char c = source[i];
        bool active = lexer.step(c);

        if (active) {
            if (is_ident_char(c)) {
                if (ident.empty())
                    ident_line = line;
                ident += c;
            } else {
                flush_ident();
                if (std::isspace(static_cast<unsigned char>(c))) {
                    // whitespace never cancels a candidate
                } else if (c == '(') {
                    if (depth == 0) {
                        if (cand == Cand::Ident) {
                            cand = Cand::Parens;
                            cand_paren_depth = 1;
                        } else if (cand == Cand::Parens) {
                            ++cand_paren_depth;
                        } else {
                            cand = Cand::None;
                        }
                    }
                } else if (c == ')') {
                    if (depth == 0 && cand == Cand::Parens && --cand_paren_depth == 0)
                        cand = Cand::AfterParens;
                } else if (c == '{') {
                    BlockSpan block;
                    block.open_line = line;
                    block.depth = depth + 1;
                    block.parent = open_stack.empty() ? -1 : open_stack.back();
                    int block_index = static_cast<int>(index.blocks.size());
                    index.blocks.push_back(block);
                    open_stack.push_back(block_index);

                    if (depth == 0 && cand == Cand::AfterParens &&
                        !is_control_keyword(cand_name)) {
                        FunctionSpan fn;
                        fn.name = cand_name;
                        fn.start_line = cand_line;
                        fn.body_block = block_index;
                        int fn_index = static_cast<int>(index.functions.size());
                        index.functions.push_back(fn);
                        pending_function_body.emplace_back(block_index, fn_index);
                    }
                    ++depth;
                    cand = Cand::None;
                } else if (c == '}') {
                    if (open_stack.empty()) {
                        index.unbalanced = true; // stray close, depth clamps at 0
                    } else {
                        int block_index = open_stack.back();
                        open_stack.pop_back();
                        index.blocks[static_cast<std::size_t>(block_index)].close_line = line;
                        --depth;
                        if (!pending_function_body.empty() &&
                            pending_function_body.back().first == block_index) {
                            auto [bidx, fidx] = pending_function_body.back();
                            (void)bidx;
                            index.functions[static_cast<std::size_t>(fidx)].end_line = line;
                            pending_function_body.pop_back();
                        }
                    }
                    cand = Cand::None;
                } else {
                    // Punctuation cancels a candidate except inside the
                    // parameter list, where it is part of the parameters.
                    if (depth == 0 && cand != Cand::Parens)
                        cand = Cand::None;
                }
            }
        } else if (!ident.empty()) {
            flush_ident();
        }

        if (c == '\n' && i + 1 < source.size()) {
            ++line;
            index.depth_map.push_back(depth);
        }
    }
    flush_ident();

    if (!open_stack.empty()) {
        index.unbalanced = true;
        // Drop blocks that never closed and remap surviving references.
        std::vector<int> remap(index.blocks.size(), -1);
        std::vector<BlockSpan> kept;
        for (std::size_t b = 0; b < index.blocks.size(); ++b) {
            if (index.blocks[b].close_line != 0) {
                remap[b] = static_cast<int>(kept.size());
                kept.push_back(index.blocks[b]);
            }
        }
        for (BlockSpan& block : kept)
            block.parent = block.parent >= 0 ? remap[static_cast<std::size_t>(block.parent)] : -1;
        std::vector<FunctionSpan> kept_functions;
        for (FunctionSpan& fn : index.functions) {
            int mapped = remap[static_cast<std::size_t>(fn.body_block)];
            if (fn.end_line != 0 && mapped >= 0) {
                fn.body_block = mapped;
                kept_functions.push_back(fn);
            }
        }
        index.blocks = std::move(kept);
        index.functions = std::move(kept_functions);
    }
    return index;
}

const FunctionSpan* enclosing_function(const StructureIndex& index, long line) {
    if (line < 1)
        return nullptr;
    for (const FunctionSpan& fn : index.functions)
        if (fn.start_line <= line && line <= fn.end_line)
            return &fn;
    return nullptr;
}

const BlockSpan* innermost_block(const StructureIndex& index, long line) {
    if (line < 1)
        return nullptr;
    const BlockSpan* best = nullptr;
    for (const BlockSpan& block : index.blocks) {
        if (block.open_line <= line && line <= block.close_line) {
            if (!best || block.depth >= best->depth)
                best = &block;
        }
    }
    return best;
}

void BraceWalker::feed(std::string_view text) {
    for (char c : text)
        feed_char(c);
}

BraceWalker::Event BraceWalker::feed_char(char c) {
    if (!lexer_.step(c))
        return Event::None;
    if (c == '{') {
        ++depth_;
        has_been_positive_ = true;
        return Event::None;
    }
    if (c == '}') {
        if (depth_ == 0)
            return Event::Underflow;
        --depth_;
        return depth_ == 0 ? Event::ClosedToZero : Event::None;
    }
    return Event::None;
}

} // namespace secgen
