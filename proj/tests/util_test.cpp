#include <doctest.h>

#include "secgen/language.hpp"
#include "secgen/util.hpp"

using namespace secgen;

TEST_CASE("split_lines semantics") {
    CHECK(split_lines("").empty());
    CHECK(split_lines("a\nb\n") == std::vector<std::string>{"a", "b"});
    CHECK(split_lines("a\nb") == std::vector<std::string>{"a", "b"});
    CHECK(split_lines("a\r\nb\r\n") == std::vector<std::string>{"a", "b"});
    CHECK(split_lines("\n\n") == std::vector<std::string>{"", ""});
}

TEST_CASE("slice_lines clamps and rejoins with newlines") {
    std::vector<std::string> lines = {"one", "two", "three"};
    CHECK(slice_lines(lines, 2, 3) == "two\nthree\n");
    CHECK(slice_lines(lines, 1, 99) == "one\ntwo\nthree\n");
    CHECK(slice_lines(lines, 3, 2).empty());
}

TEST_CASE("fnv1a64 is stable and spreads") {
    CHECK(fnv1a64_hex("") == "cbf29ce484222325");
    CHECK(fnv1a64_hex("a") != fnv1a64_hex("b"));
    CHECK(fnv1a64_hex("abc") == fnv1a64_hex("abc"));
}

TEST_CASE("language extension table") {
    CHECK(language_from_path("x/y/z.c") == Language::C);
    CHECK(language_from_path("legacy.h") == Language::C);
    CHECK(language_from_path("a.cc") == Language::Cpp);
    CHECK(language_from_path("a.cpp") == Language::Cpp);
    CHECK(language_from_path("a.CXX") == Language::Cpp); // case-insensitive
    CHECK(language_from_path("a.hpp") == Language::Cpp);
    CHECK_FALSE(language_from_path("notes.txt").has_value());
    CHECK_FALSE(language_from_path("Makefile").has_value());
    CHECK(to_string(Language::Cpp) == "C++");
    CHECK(language_from_string("cpp") == Language::Cpp);
    CHECK_FALSE(language_from_string("rust").has_value());
}

TEST_CASE("trim strips ascii whitespace") {
    CHECK(trim("  x \t\r\n") == "x");
    CHECK(trim("\n\t ").empty());
    CHECK(trim("inner space kept") == "inner space kept");
}
