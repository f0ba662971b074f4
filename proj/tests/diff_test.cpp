#include <doctest.h>

#include <random>
#include <string>

#include "secgen/diff.hpp"

using namespace secgen;

TEST_CASE("empty text parses to zero hunks") {
    UnifiedDiff diff = parse_unified_diff("");
    CHECK(diff.hunks.empty());
    CHECK(modified_new_lines(diff).empty());
    CHECK(modified_old_lines(diff).empty());
}

TEST_CASE("single hunk with context and one addition") {
    // 3 context lines + 1 added line -> old_len 3, new_len 4
    std::string text =
        "@@ -1,3 +1,4 @@\n"
        " alpha\n"
        " beta\n"
        "+inserted\n"
        " gamma\n";
    UnifiedDiff diff = parse_unified_diff(text);
    REQUIRE(diff.hunks.size() == 1);
    const Hunk& hunk = diff.hunks[0];
    CHECK(hunk.old_len == 3);
    CHECK(hunk.new_len == 4);
    CHECK(hunk.lines.size() == 4);
}

TEST_CASE("git file headers are skipped") {
    std::string text =
        "diff --git a/f.c b/f.c\n"
        "index 123..456 100644\n"
        "--- a/f.c\n"
        "+++ b/f.c\n"
        "@@ -1,1 +1,2 @@\n"
        " keep\n"
        "+new\n";
    UnifiedDiff diff = parse_unified_diff(text);
    REQUIRE(diff.hunks.size() == 1);
    CHECK(modified_new_lines(diff) == std::vector<long>{2});
}

TEST_CASE("length mismatch is a parse error") {
    std::string text =
        "@@ -1,0 +1,1 @@\n"
        "+one\n"
        "+two\n";
    CHECK_THROWS_AS(parse_unified_diff(text), DiffParseError);
}

TEST_CASE("unknown body tag is a parse error") {
    std::string text =
        "@@ -1,1 +1,1 @@\n"
        "*what\n";
    CHECK_THROWS_AS(parse_unified_diff(text), DiffParseError);
}

TEST_CASE("omitted lengths default to 1") {
    std::string text =
        "@@ -2 +3 @@\n"
        "-old\n"
        "+new\n";
    UnifiedDiff diff = parse_unified_diff(text);
    REQUIRE(diff.hunks.size() == 1);
    CHECK(diff.hunks[0].old_len == 1);
    CHECK(diff.hunks[0].new_len == 1);
    CHECK(modified_new_lines(diff) == std::vector<long>{3});
    CHECK(modified_old_lines(diff) == std::vector<long>{2});
}

TEST_CASE("no-newline markers are ignored") {
    std::string text =
        "@@ -1,1 +1,1 @@\n"
        "-old\n"
        "\\ No newline at end of file\n"
        "+new\n"
        "\\ No newline at end of file\n";
    UnifiedDiff diff = parse_unified_diff(text);
    REQUIRE(diff.hunks.size() == 1);
    CHECK(diff.hunks[0].lines.size() == 2);
}

TEST_CASE("modified new lines walks context and additions") {
    // (context, added, context) under @@ -1,2 +1,3 @@ -> added is new line 2
    std::string text =
        "@@ -1,2 +1,3 @@\n"
        " a\n"
        "+b\n"
        " c\n";
    UnifiedDiff diff = parse_unified_diff(text);
    CHECK(modified_new_lines(diff) == std::vector<long>{2});
    CHECK(modified_old_lines(diff).empty());
}

TEST_CASE("two hunks give ascending line numbers") {
    std::string text =
        "@@ -3,1 +3,2 @@\n"
        " x\n"
        "+at4\n"
        "@@ -8,1 +9,2 @@\n"
        " y\n"
        "+at10\n";
    UnifiedDiff diff = parse_unified_diff(text);
    CHECK(modified_new_lines(diff) == std::vector<long>{4, 10});
}

TEST_CASE("deleted line at old position 5") {
    std::string text =
        "@@ -5,1 +4,0 @@\n"
        "-gone\n";
    UnifiedDiff diff = parse_unified_diff(text);
    CHECK(modified_old_lines(diff) == std::vector<long>{5});
    CHECK(modified_new_lines(diff).empty());
}

TEST_CASE("pure addition has no deleted lines") {
    std::string text =
        "@@ -0,0 +1,2 @@\n"
        "+a\n"
        "+b\n";
    UnifiedDiff diff = parse_unified_diff(text);
    CHECK(modified_old_lines(diff).empty());
    CHECK(modified_new_lines(diff) == std::vector<long>{1, 2});
}

TEST_CASE("hunk headers may carry a section heading") {
    std::string text =
        "@@ -10,2 +10,3 @@ int parse_header(void)\n"
        " a\n"
        "+b\n"
        " c\n";
    UnifiedDiff diff = parse_unified_diff(text);
    REQUIRE(diff.hunks.size() == 1);
    CHECK(diff.hunks[0].old_start == 10);
    CHECK(modified_new_lines(diff) == std::vector<long>{11});
}

TEST_CASE("crlf input parses like lf input") {
    std::string text = "@@ -1,1 +1,2 @@\r\n keep\r\n+new\r\n";
    UnifiedDiff diff = parse_unified_diff(text);
    REQUIRE(diff.hunks.size() == 1);
    CHECK(diff.hunks[0].lines[1].text == "new");
}

TEST_CASE("overlapping hunks are rejected") {
    std::string text =
        "@@ -1,3 +1,3 @@\n"
        " a\n"
        " b\n"
        " c\n"
        "@@ -2,1 +2,1 @@\n"
        " b\n";
    CHECK_THROWS_AS(parse_unified_diff(text), DiffParseError);
}

namespace {

// Generates a random valid diff; header lengths are derived from the body
// so the invariants hold by construction.
UnifiedDiff random_diff(std::mt19937_64& rng) {
    UnifiedDiff diff;
    long old_cursor = 1;
    long new_cursor = 1;
    std::size_t hunk_count = rng() % 4;
    for (std::size_t h = 0; h < hunk_count; ++h) {
        Hunk hunk;
        old_cursor += static_cast<long>(rng() % 5);
        new_cursor += static_cast<long>(rng() % 5);
        hunk.old_start = old_cursor;
        hunk.new_start = new_cursor;
        std::size_t body = 1 + rng() % 8;
        for (std::size_t i = 0; i < body; ++i) {
            HunkLine line;
            switch (rng() % 3) {
            case 0: line.tag = LineTag::Context; break;
            case 1: line.tag = LineTag::Added; break;
            default: line.tag = LineTag::Deleted; break;
            }
            line.text = "t" + std::to_string(rng() % 100);
            if (line.tag != LineTag::Added)
                ++hunk.old_len;
            if (line.tag != LineTag::Deleted)
                ++hunk.new_len;
            hunk.lines.push_back(std::move(line));
        }
        old_cursor = hunk.old_start + hunk.old_len;
        new_cursor = hunk.new_start + hunk.new_len;
        diff.hunks.push_back(std::move(hunk));
    }
    return diff;
}

} // namespace

TEST_CASE("property: serialize + reparse round-trips and honors counts") {
    std::mt19937_64 rng(20240817);
    for (int iteration = 0; iteration < 500; ++iteration) {
        UnifiedDiff diff = random_diff(rng);
        UnifiedDiff reparsed = parse_unified_diff(to_text(diff));
        CHECK(reparsed == diff);

        std::size_t added = 0;
        for (const Hunk& hunk : diff.hunks)
            for (const HunkLine& line : hunk.lines)
                if (line.tag == LineTag::Added)
                    ++added;
        auto new_lines = modified_new_lines(diff);
        CHECK(new_lines.size() == added);
        // every reported line falls inside its hunk's new range
        for (long line : new_lines) {
            bool in_some_hunk = false;
            for (const Hunk& hunk : diff.hunks)
                if (line >= hunk.new_start && line < hunk.new_start + hunk.new_len)
                    in_some_hunk = true;
            CHECK(in_some_hunk);
        }
    }
}
