#include "secgen/commit.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "secgen/util.hpp"

namespace secgen {

using ordered_json = nlohmann::ordered_json;

CommitSet::CommitSet(std::vector<CommitRecord> records) : records_(std::move(records)) {
    std::stable_sort(records_.begin(), records_.end(),
                     [](const CommitRecord& a, const CommitRecord& b) {
                         return a.commit_hash < b.commit_hash;
                     });
}

namespace {

std::string lowercase(std::string text) {
    std::transform(text.begin(), text.end(), text.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return text;
}

// Parses one record line. Returns false with `reason` set when the record
// must be skipped.
bool parse_record(const std::string& line, std::size_t line_no, CommitRecord& out,
                  std::vector<SkipEntry>& skips) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        skips.push_back({line_no, std::string("malformed record: ") + e.what()});
        return false;
    }
    if (!doc.is_object()) {
        skips.push_back({line_no, "malformed record: not an object"});
        return false;
    }
    out.cve_id = doc.value("cve_id", "");
    out.cwe_id = doc.value("cwe_id", "");
    out.project = doc.value("project", "");
    out.commit_hash = lowercase(doc.value("commit_hash", ""));
    if (out.commit_hash.empty()) {
        skips.push_back({line_no, "record dropped: empty commit_hash"});
        return false;
    }
    if (!doc.contains("files") || !doc["files"].is_array()) {
        skips.push_back({line_no, "record dropped: missing files array (" +
                                       out.commit_hash + ")"});
        return false;
    }

    std::unordered_set<std::string> seen_paths;
    for (const auto& file : doc["files"]) {
        if (!file.is_object() || !file.contains("path")) {
            skips.push_back({line_no, "file entry dropped: missing path (" +
                                           out.commit_hash + ")"});
            continue;
        }
        FileChange change;
        change.path = file.value("path", "");
        auto language = language_from_path(change.path);
        if (!language) {
            skips.push_back({line_no, "file dropped: not C/C++: " + change.path +
                                           " (" + out.commit_hash + ")"});
            continue;
        }
        if (!seen_paths.insert(change.path).second) {
            skips.push_back({line_no, "file dropped: duplicate path: " + change.path +
                                           " (" + out.commit_hash + ")"});
            continue;
        }
        change.language = *language;
        change.post_fix_source = file.value("post_fix_source", "");
        change.diff_text = file.value("diff_text", "");
        out.files.push_back(std::move(change));
    }
    if (out.files.empty()) {
        skips.push_back({line_no, "record dropped: no C/C++ files (" +
                                       out.commit_hash + ")"});
        return false;
    }
    return true;
}

} // namespace

IngestResult ingest_records(std::istream& in) {
    if (!in)
        throw IngestError("input stream is not readable");

    IngestResult result;
    std::vector<CommitRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (trim(line).empty())
            continue;
        CommitRecord record;
        if (parse_record(line, line_no, record, result.skips))
            records.push_back(std::move(record));
    }
    if (in.bad())
        throw IngestError("stream failed while reading");
    result.set = CommitSet(std::move(records));
    return result;
}

IngestResult ingest_records_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IngestError("cannot open dataset: " + path);
    return ingest_records(in);
}

MergeResult merge_dedup(const std::vector<CommitSet>& sets) {
    MergeResult result;
    std::vector<CommitRecord> merged;
    std::unordered_map<std::string, std::string> hash_to_project;
    std::unordered_set<std::string> warned;
    for (const CommitSet& set : sets) {
        for (const CommitRecord& record : set.records()) {
            auto [it, inserted] = hash_to_project.emplace(record.commit_hash, record.project);
            if (inserted) {
                merged.push_back(record);
            } else if (it->second != record.project &&
                       warned.insert(record.commit_hash).second) {
                result.warnings.push_back("commit hash " + record.commit_hash +
                                          " appears in projects '" + it->second +
                                          "' and '" + record.project + "'");
            }
        }
    }
    result.set = CommitSet(std::move(merged));
    return result;
}

DatasetStats stats(const CommitSet& set) {
    std::unordered_set<std::string> cves, commits, projects;
    for (const CommitRecord& record : set.records()) {
        if (!record.cve_id.empty())
            cves.insert(record.cve_id);
        commits.insert(record.commit_hash);
        if (!record.project.empty())
            projects.insert(record.project);
    }
    DatasetStats result;
    result.n_cves = cves.size();
    result.n_commits = commits.size();
    result.n_projects = projects.size();
    return result;
}

std::string to_jsonl(const CommitSet& set) {
    std::string out;
    for (const CommitRecord& record : set.records()) {
        ordered_json doc;
        doc["cve_id"] = record.cve_id;
        doc["cwe_id"] = record.cwe_id;
        doc["project"] = record.project;
        doc["commit_hash"] = record.commit_hash;
        doc["files"] = ordered_json::array();
        for (const FileChange& file : record.files) {
            ordered_json f;
            f["path"] = file.path;
            f["post_fix_source"] = file.post_fix_source;
            f["diff_text"] = file.diff_text;
            doc["files"].push_back(std::move(f));
        }
        out += doc.dump();
        out += '\n';
    }
    return out;
}

std::string skips_to_jsonl(const std::vector<SkipEntry>& skips) {
    std::string out;
    for (const SkipEntry& skip : skips) {
        ordered_json doc;
        doc["line"] = skip.line_no;
        doc["reason"] = skip.reason;
        out += doc.dump();
        out += '\n';
    }
    return out;
}

std::string commit_set_digest(const CommitSet& set) {
    return fnv1a64_hex(to_jsonl(set));
}

} // namespace secgen
