#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace secgen {

enum class Language { C, Cpp };

// Extension table (fixed):
//   C:   .c .h
//   C++: .cc .cpp .cxx .c++ .hpp .hh .hxx
// .h defaults to C; mixed-language projects that use .h for C++ headers
// are scanned with the C rules (no raw string literals).
std::optional<Language> language_from_path(std::string_view path);

std::string to_string(Language language);
std::optional<Language> language_from_string(std::string_view name);

} // namespace secgen
