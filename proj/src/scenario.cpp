#include "secgen/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include <json.hpp>

#include "secgen/util.hpp"

namespace secgen {

namespace {

bool is_token_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// Header names may contain '.', so the boundary class for them includes
// the dot.
bool is_header_char(char c) {
    return is_token_char(c) || c == '.';
}

std::string replace_bounded(const std::string& text, const std::string& from,
                            const std::string& to, bool header) {
    std::string out;
    std::size_t pos = 0;
    auto boundary = header ? is_header_char : is_token_char;
    while (pos < text.size()) {
        std::size_t hit = text.find(from, pos);
        if (hit == std::string::npos) {
            out.append(text, pos, std::string::npos);
            break;
        }
        bool left_ok = hit == 0 || !boundary(text[hit - 1]);
        std::size_t after = hit + from.size();
        bool right_ok = after >= text.size() || !boundary(text[after]);
        out.append(text, pos, hit - pos);
        if (left_ok && right_ok) {
            out += to;
        } else {
            out.append(text, hit, from.size());
        }
        pos = after;
    }
    return out;
}

void validate_cwe(const std::string& cwe, const std::string& id) {
    if (!starts_with(cwe, "CWE-") || cwe.size() <= 4)
        throw ScenarioError("scenario " + id + ": malformed cwe '" + cwe + "'");
    for (std::size_t i = 4; i < cwe.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(cwe[i])))
            throw ScenarioError("scenario " + id + ": malformed cwe '" + cwe + "'");
    if (std::stol(cwe.substr(4)) <= 0)
        throw ScenarioError("scenario " + id + ": cwe code must be positive");
}

} // namespace

const Scenario* ScenarioBank::find(const std::string& id) const {
    for (const Scenario& scenario : scenarios)
        if (scenario.id == id)
            return &scenario;
    return nullptr;
}

ScenarioBank load_bank(const std::filesystem::path& directory) {
    if (!std::filesystem::is_directory(directory))
        throw ScenarioError("scenario directory not found: " + directory.string());

    std::vector<std::filesystem::path> metadata_files;
    for (const auto& entry : std::filesystem::directory_iterator(directory))
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            metadata_files.push_back(entry.path());
    std::sort(metadata_files.begin(), metadata_files.end());

    ScenarioBank bank;
    if (metadata_files.empty()) {
        bank.warnings.push_back("scenario directory is empty: " + directory.string());
        return bank;
    }

    std::set<std::string> ids;
    for (const auto& path : metadata_files) {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(read_file(path));
        } catch (const nlohmann::json::exception& e) {
            throw ScenarioError("bad metadata " + path.string() + ": " + e.what());
        }
        Scenario scenario;
        scenario.id = doc.value("id", "");
        if (scenario.id.empty())
            throw ScenarioError("metadata missing id: " + path.string());
        if (!ids.insert(scenario.id).second)
            throw ScenarioError("duplicate scenario id: " + scenario.id);

        scenario.cwe = doc.value("cwe", "");
        validate_cwe(scenario.cwe, scenario.id);

        auto language = language_from_string(doc.value("language", ""));
        if (!language)
            throw ScenarioError("scenario " + scenario.id + ": unknown language '" +
                                doc.value("language", "") + "'");
        scenario.language = *language;

        std::string prompt_file = doc.value("prompt_file", scenario.id + ".prompt");
        auto prompt_path = directory / prompt_file;
        if (!std::filesystem::exists(prompt_path))
            throw ScenarioError("scenario " + scenario.id + ": missing prompt file " +
                                prompt_path.string());
        scenario.prompt = read_file(prompt_path);
        if (scenario.prompt.empty())
            throw ScenarioError("scenario " + scenario.id + ": empty prompt");

        if (doc.contains("query_suite"))
            for (const auto& rule : doc["query_suite"])
                scenario.query_suite.push_back(rule.get<std::string>());
        scenario.wrapper_prelude = doc.value("wrapper_prelude", "");
        scenario.wrapper_epilogue = doc.value("wrapper_epilogue", "");
        scenario.complete_by_design = doc.value("complete_by_design", false);
        if (doc.contains("samples_override"))
            scenario.samples_override = doc["samples_override"].get<int>();

        bank.scenarios.push_back(std::move(scenario));
    }

    std::sort(bank.scenarios.begin(), bank.scenarios.end(),
              [](const Scenario& a, const Scenario& b) { return a.id < b.id; });
    return bank;
}

RewriteTable default_rewrite_table() {
    RewriteTable table;
    table.headers = {
        {"stdlib.h", "cstdlib"},
        {"stdio.h", "cstdio"},
        {"string.h", "cstring"},
        {"ctype.h", "cctype"},
    };
    table.tokens = {
        {"atoi", "stoi"},
    };
    return table;
}

std::string rewrite_tokens(const std::string& text, const RewriteTable& table) {
    std::string out = text;
    for (const auto& [from, to] : table.headers)
        out = replace_bounded(out, from, to, /*header=*/true);
    for (const auto& [from, to] : table.tokens)
        out = replace_bounded(out, from, to, /*header=*/false);
    return out;
}

Scenario translate_c_to_cpp(const Scenario& scenario, const RewriteTable& table) {
    if (scenario.language != Language::C)
        throw ScenarioError("translate_c_to_cpp: scenario " + scenario.id +
                            " is not a C scenario");
    Scenario out = scenario;
    out.language = Language::Cpp;
    if (out.id.size() >= 2 && out.id.compare(out.id.size() - 2, 2, "-C") == 0)
        out.id = out.id.substr(0, out.id.size() - 2) + "-CPP";
    else
        out.id += "-CPP";
    out.prompt = rewrite_tokens(scenario.prompt, table);
    out.wrapper_prelude = rewrite_tokens(scenario.wrapper_prelude, table);
    out.wrapper_epilogue = rewrite_tokens(scenario.wrapper_epilogue, table);
    return out;
}

} // namespace secgen
