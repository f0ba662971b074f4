#include "secgen/diff.hpp"

#include <charconv>
#include <cstdio>

#include "secgen/util.hpp"

namespace secgen {

namespace {

bool parse_long(std::string_view text, long& out) {
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc() && ptr == text.data() + text.size();
}

// "-a,b" or "-a" (b defaults to 1); same for '+'.
bool parse_range(std::string_view field, char sign, long& start, long& len) {
    if (field.empty() || field[0] != sign)
        return false;
    field.remove_prefix(1);
    auto comma = field.find(',');
    if (comma == std::string_view::npos) {
        len = 1;
        return parse_long(field, start);
    }
    return parse_long(field.substr(0, comma), start) &&
           parse_long(field.substr(comma + 1), len);
}

// "@@ -a[,b] +c[,d] @@" with optional trailing section heading.
bool parse_hunk_header(std::string_view line, Hunk& hunk) {
    if (!starts_with(line, "@@ "))
        return false;
    auto close = line.find(" @@", 3);
    if (close == std::string_view::npos)
        return false;
    std::string_view ranges = line.substr(3, close - 3);
    auto space = ranges.find(' ');
    if (space == std::string_view::npos)
        return false;
    return parse_range(ranges.substr(0, space), '-', hunk.old_start, hunk.old_len) &&
           parse_range(ranges.substr(space + 1), '+', hunk.new_start, hunk.new_len);
}

std::string hunk_name(std::size_t index, const Hunk& hunk) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "hunk %zu (@@ -%ld,%ld +%ld,%ld @@)",
                  index + 1, hunk.old_start, hunk.old_len, hunk.new_start, hunk.new_len);
    return buf;
}

} // namespace

UnifiedDiff parse_unified_diff(std::string_view text) {
    UnifiedDiff diff;
    auto lines = split_lines(text);

    std::size_t i = 0;
    while (i < lines.size()) {
        Hunk hunk;
        if (!parse_hunk_header(lines[i], hunk)) {
            const std::string& line = lines[i];
            // Git file headers and extended headers (rename, mode, index)
            // are skipped between hunks. A bare +/-/space line here is a
            // hunk body line escaping its header counts.
            bool file_header = starts_with(line, "--- ") || starts_with(line, "+++ ") ||
                               line == "---" || line == "+++";
            if (!line.empty() && !file_header &&
                (line[0] == '+' || line[0] == '-' || line[0] == ' '))
                throw DiffParseError("stray hunk body line outside any hunk: '" +
                                     line + "'");
            ++i;
            continue;
        }
        ++i;

        long seen_old = 0;
        long seen_new = 0;
        while (i < lines.size() && (seen_old < hunk.old_len || seen_new < hunk.new_len)) {
            const std::string& body = lines[i];
            if (starts_with(body, "\\")) { // "\ No newline at end of file"
                ++i;
                continue;
            }
            HunkLine entry;
            if (body.empty()) {
                // Context lines stripped of trailing whitespace by mail
                // clients arrive as empty lines; accept them as context.
                entry.tag = LineTag::Context;
            } else {
                switch (body[0]) {
                case ' ': entry.tag = LineTag::Context; break;
                case '+': entry.tag = LineTag::Added; break;
                case '-': entry.tag = LineTag::Deleted; break;
                default:
                    throw DiffParseError("unknown line tag '" + body.substr(0, 1) +
                                         "' in " + hunk_name(diff.hunks.size(), hunk));
                }
                entry.text = body.substr(1);
            }
            if (entry.tag != LineTag::Added)
                ++seen_old;
            if (entry.tag != LineTag::Deleted)
                ++seen_new;
            hunk.lines.push_back(std::move(entry));
            ++i;
        }
        // Trailing no-newline marker for the last line of the hunk.
        if (i < lines.size() && starts_with(lines[i], "\\"))
            ++i;

        if (seen_old != hunk.old_len || seen_new != hunk.new_len)
            throw DiffParseError("body does not match header lengths in " +
                                 hunk_name(diff.hunks.size(), hunk));

        if (!diff.hunks.empty()) {
            const Hunk& prev = diff.hunks.back();
            if (hunk.new_start < prev.new_start + prev.new_len ||
                hunk.old_start < prev.old_start + prev.old_len)
                throw DiffParseError("overlapping or unordered " +
                                     hunk_name(diff.hunks.size(), hunk));
        }
        diff.hunks.push_back(std::move(hunk));
    }
    return diff;
}

std::string to_text(const UnifiedDiff& diff) {
    std::string out;
    for (const Hunk& hunk : diff.hunks) {
        char header[80];
        std::snprintf(header, sizeof(header), "@@ -%ld,%ld +%ld,%ld @@\n",
                      hunk.old_start, hunk.old_len, hunk.new_start, hunk.new_len);
        out += header;
        for (const HunkLine& line : hunk.lines) {
            switch (line.tag) {
            case LineTag::Context: out += ' '; break;
            case LineTag::Added: out += '+'; break;
            case LineTag::Deleted: out += '-'; break;
            }
            out += line.text;
            out += '\n';
        }
    }
    return out;
}

std::vector<long> modified_new_lines(const UnifiedDiff& diff) {
    std::vector<long> result;
    for (const Hunk& hunk : diff.hunks) {
        long new_line = hunk.new_start;
        for (const HunkLine& line : hunk.lines) {
            switch (line.tag) {
            case LineTag::Context:
                ++new_line;
                break;
            case LineTag::Added:
                result.push_back(new_line);
                ++new_line;
                break;
            case LineTag::Deleted:
                break;
            }
        }
    }
    return result;
}

std::vector<long> modified_old_lines(const UnifiedDiff& diff) {
    std::vector<long> result;
    for (const Hunk& hunk : diff.hunks) {
        long old_line = hunk.old_start;
        for (const HunkLine& line : hunk.lines) {
            switch (line.tag) {
            case LineTag::Context:
                ++old_line;
                break;
            case LineTag::Deleted:
                result.push_back(old_line);
                ++old_line;
                break;
            case LineTag::Added:
                break;
            }
        }
    }
    return result;
}

} // namespace secgen
