#include "secgen/language.hpp"

#include <algorithm>
#include <cctype>

namespace secgen {

std::optional<Language> language_from_path(std::string_view path) {
    auto dot = path.rfind('.');
    if (dot == std::string_view::npos)
        return std::nullopt;
    std::string ext(path.substr(dot));
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".c" || ext == ".h")
        return Language::C;
    if (ext == ".cc" || ext == ".cpp" || ext == ".cxx" || ext == ".c++" ||
        ext == ".hpp" || ext == ".hh" || ext == ".hxx")
        return Language::Cpp;
    return std::nullopt;
}

std::string to_string(Language language) {
    return language == Language::C ? "C" : "C++";
}

std::optional<Language> language_from_string(std::string_view name) {
    if (name == "C" || name == "c")
        return Language::C;
    if (name == "C++" || name == "c++" || name == "cpp" || name == "CPP" || name == "Cpp")
        return Language::Cpp;
    return std::nullopt;
}

} // namespace secgen
