// Deterministic analyzer stand-in producing SARIF 2.1.0. Usage:
//   stub_analyzer <src_dir> <out.sarif>
// Scans *.c/*.cc/*.cpp files (sorted) for lines containing "flag:<rule>"
// and reports one result per marker with that rule id.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;

int main(int argc, char** argv) {
    if (argc < 3) {
        std::fprintf(stderr, "usage: stub_analyzer <src_dir> <out.sarif>\n");
        return 2;
    }
    fs::path src_dir(argv[1]);
    if (!fs::is_directory(src_dir)) {
        std::fprintf(stderr, "stub_analyzer: not a directory: %s\n", argv[1]);
        return 2;
    }

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(src_dir)) {
        auto ext = entry.path().extension();
        if (entry.is_regular_file() && (ext == ".c" || ext == ".cc" || ext == ".cpp"))
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    std::regex marker("flag:([A-Za-z0-9_./-]+)");
    nlohmann::ordered_json results = nlohmann::ordered_json::array();
    for (const auto& file : files) {
        std::ifstream in(file, std::ios::binary);
        std::string line;
        long line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            std::smatch match;
            if (!std::regex_search(line, match, marker))
                continue;
            nlohmann::ordered_json result;
            result["ruleId"] = match[1].str();
            result["message"]["text"] = "marker finding";
            nlohmann::ordered_json location;
            location["physicalLocation"]["artifactLocation"]["uri"] =
                file.filename().string();
            location["physicalLocation"]["region"]["startLine"] = line_no;
            result["locations"] = nlohmann::ordered_json::array({location});
            results.push_back(std::move(result));
        }
    }

    nlohmann::ordered_json doc;
    doc["version"] = "2.1.0";
    doc["$schema"] =
        "https://raw.githubusercontent.com/oasis-tcs/sarif-spec/master/Schemata/"
        "sarif-schema-2.1.0.json";
    nlohmann::ordered_json run;
    run["tool"]["driver"]["name"] = "stub-analyzer";
    run["results"] = std::move(results);
    doc["runs"] = nlohmann::ordered_json::array({run});

    std::ofstream out(argv[2], std::ios::binary | std::ios::trunc);
    if (!out) {
        std::fprintf(stderr, "stub_analyzer: cannot write %s\n", argv[2]);
        return 2;
    }
    out << doc.dump(2) << "\n";
    return 0;
}
