#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "secgen/language.hpp"

namespace secgen {

class IngestError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct FileChange {
    std::string path; // unique within one commit
    Language language = Language::C;
    std::string post_fix_source;
    std::string diff_text;
};

struct CommitRecord {
    std::string cve_id;
    std::string cwe_id; // may be empty
    std::string project;
    std::string commit_hash; // non-empty, lowercase hex
    std::vector<FileChange> files; // non-empty after ingestion
};

struct DatasetStats {
    std::size_t n_cves = 0;
    std::size_t n_commits = 0;
    std::size_t n_projects = 0;
};

// Immutable once built; records kept in a canonical order (stable sort by
// commit_hash) so serialization is deterministic.
class CommitSet {
public:
    CommitSet() = default;
    explicit CommitSet(std::vector<CommitRecord> records);

    const std::vector<CommitRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }

private:
    std::vector<CommitRecord> records_;
};

struct SkipEntry {
    std::size_t line_no = 0; // 1-based input line, 0 when not line-bound
    std::string reason;
};

struct IngestResult {
    CommitSet set;
    std::vector<SkipEntry> skips;
};

// Reads the canonical line-delimited record format: one JSON object per
// line with keys cve_id, cwe_id, project, commit_hash,
// files[{path, post_fix_source, diff_text}]. Files whose extension is not
// C/C++ are dropped and noted in the skip report; records left with an
// empty commit hash or no files are dropped likewise. Malformed lines are
// recorded with their line number. An unreadable stream throws.
IngestResult ingest_records(std::istream& in);
IngestResult ingest_records_file(const std::string& path);

struct MergeResult {
    CommitSet set;
    // One entry per commit hash seen with conflicting project names.
    std::vector<std::string> warnings;
};

// Union with first-seen-wins dedup keyed on commit_hash alone; output is
// in canonical order.
MergeResult merge_dedup(const std::vector<CommitSet>& sets);

DatasetStats stats(const CommitSet& set);

std::string to_jsonl(const CommitSet& set);
std::string skips_to_jsonl(const std::vector<SkipEntry>& skips);

// fnv1a64 over the canonical serialization; used as corpus provenance.
std::string commit_set_digest(const CommitSet& set);

} // namespace secgen
