#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "secgen/language.hpp"
#include "secgen/scenario.hpp"

namespace secgen {

// Configuration problems (missing compiler, bad template) are distinct
// from a sample failing to compile.
class ToolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SarifError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class VerdictKind { Invalid, Vulnerable, Secure };
enum class InvalidTag { Syntax, Semantic, Unknown };

struct Verdict {
    VerdictKind kind = VerdictKind::Invalid;
    InvalidTag tag = InvalidTag::Unknown; // meaningful only when Invalid
};

std::string to_string(VerdictKind kind);
std::string to_string(InvalidTag tag);

struct CompileCheck {
    bool valid = false;
    std::string diagnostics;
    InvalidTag tag = InvalidTag::Unknown;
};

// Writes unit_text to a fresh source file under work_dir, substitutes
// {src} and {out} into the command template and runs it. Exit 0 means
// valid. The invalid tag is a best-effort pattern match over the captured
// diagnostics; it feeds reports only, never metrics. A command that the
// shell cannot find (exit 127) raises ToolError.
CompileCheck check_valid(const std::string& unit_text, Language language,
                         const std::string& compiler_cmd_template,
                         const std::filesystem::path& work_dir);

// Same check against an already-written source file; scratch outputs go
// next to it, named after its stem.
CompileCheck check_valid_file(const std::filesystem::path& src,
                              const std::string& compiler_cmd_template);

struct AnalyzerFinding {
    std::string rule_id;
    std::string file;
    long start_line = 1;
    std::string message;
    bool located = true; // false when the result carried no location
};

// SARIF 2.1.0: one finding per runs[].results[] entry, taking ruleId and
// the first physical location. A document without "runs" is an error; a
// result without a location yields file "" / line 1 flagged unlocated.
std::vector<AnalyzerFinding> parse_sarif(const std::string& text);

// Two-column text table: rule_id <tab or spaces> CWE-NNN. '#' comments
// and blank lines are ignored.
class RuleMap {
public:
    static RuleMap from_text(const std::string& text);
    static RuleMap from_file(const std::filesystem::path& path);

    std::optional<std::string> cwe_for(const std::string& rule_id) const;
    std::size_t size() const { return rules_.size(); }

private:
    std::map<std::string, std::string> rules_;
};

// Verdict precedence: invalid unless the sample compiled; vulnerable if
// any finding maps to the scenario's target CWE; secure otherwise.
// Findings for other CWEs do not flip the verdict. Unmapped rule ids are
// collected as warnings and treated as non-matching.
Verdict classify_sample(bool generation_failed, const CompileCheck& compile,
                        const std::vector<AnalyzerFinding>& findings,
                        const Scenario& scenario, const RuleMap& rule_map,
                        std::vector<std::string>* warnings = nullptr);

} // namespace secgen
