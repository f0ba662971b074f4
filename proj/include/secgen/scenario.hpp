#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "secgen/language.hpp"

namespace secgen {

class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// One security-sensitive prompt. The prompt text is a deliberately
// incomplete snippet (it should not compile standalone) unless
// complete_by_design is set in its metadata.
struct Scenario {
    std::string id;  // "CWE-NNN-k-C" / "CWE-NNN-k-CPP"
    std::string cwe; // "CWE-NNN"
    Language language = Language::C;
    std::string prompt;
    std::vector<std::string> query_suite; // analyzer rule ids bound to the CWE
    std::string wrapper_prelude;          // optional compile wrapper
    std::string wrapper_epilogue;
    bool complete_by_design = false;
    std::optional<int> samples_override;
};

struct ScenarioBank {
    std::vector<Scenario> scenarios; // ordered by id
    std::vector<std::string> warnings;

    const Scenario* find(const std::string& id) const;
};

// Loads a directory of scenarios: one <id>.json metadata file per
// scenario referencing its prompt file (default <id>.prompt).
// Duplicate ids, unknown languages, malformed CWE codes and missing
// prompt files are errors; an empty directory yields an empty bank with
// a warning.
ScenarioBank load_bank(const std::filesystem::path& directory);

struct RewriteTable {
    // Header names rewritten inside #include directives.
    std::vector<std::pair<std::string, std::string>> headers;
    // Whole-token identifier rewrites.
    std::vector<std::pair<std::string, std::string>> tokens;
};

// stdlib.h→cstdlib, stdio.h→cstdio, string.h→cstring, ctype.h→cctype,
// atoi→stoi.
RewriteTable default_rewrite_table();

// Rewrites a C scenario into its C++ counterpart: id suffix -C → -CPP,
// language flipped, table applied as whole-token replacements. All other
// text is preserved byte for byte. Applying to a C++ scenario is an
// error.
Scenario translate_c_to_cpp(const Scenario& scenario, const RewriteTable& table);

// Whole-token replacement helper (exposed for tests).
std::string rewrite_tokens(const std::string& text, const RewriteTable& table);

} // namespace secgen
