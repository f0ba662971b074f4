#include "secgen/extract.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <tuple>

#include <json.hpp>

#include "secgen/cstruct.hpp"
#include "secgen/diff.hpp"
#include "secgen/util.hpp"

namespace secgen {

using ordered_json = nlohmann::ordered_json;

std::string to_string(Granularity granularity) {
    switch (granularity) {
    case Granularity::File: return "file";
    case Granularity::Function: return "function";
    case Granularity::Block: return "block";
    case Granularity::Line: return "line";
    }
    return "file";
}

namespace {

Granularity granularity_from_string(const std::string& name) {
    if (name == "function") return Granularity::Function;
    if (name == "block") return Granularity::Block;
    if (name == "line") return Granularity::Line;
    return Granularity::File;
}

void finalize(Corpus& corpus) {
    std::set<std::tuple<std::string, std::string, long, long>> seen;
    std::vector<SourceUnit> kept;
    for (SourceUnit& unit : corpus.units) {
        auto key = std::make_tuple(unit.commit_hash, unit.file_path,
                                   unit.start_line, unit.end_line);
        if (seen.insert(key).second)
            kept.push_back(std::move(unit));
    }
    std::sort(kept.begin(), kept.end(), [](const SourceUnit& a, const SourceUnit& b) {
        return std::tie(a.commit_hash, a.file_path, a.start_line, a.end_line) <
               std::tie(b.commit_hash, b.file_path, b.start_line, b.end_line);
    });
    corpus.units = std::move(kept);
}

// Shared walk for the three diff-driven granularities.
template <typename PerFile>
ExtractResult extract_by_diff(const CommitSet& set, Granularity granularity,
                              PerFile per_file) {
    ExtractResult result;
    result.corpus.granularity = granularity;
    result.corpus.provenance = commit_set_digest(set);
    for (const CommitRecord& record : set.records()) {
        for (const FileChange& file : record.files) {
            std::vector<long> added;
            try {
                added = modified_new_lines(parse_unified_diff(file.diff_text));
            } catch (const DiffParseError& e) {
                result.skips.push_back({record.commit_hash, file.path,
                                        std::string("diff parse error: ") + e.what()});
                continue;
            }
            if (added.empty())
                continue;
            per_file(record, file, added, result);
        }
    }
    finalize(result.corpus);
    return result;
}

} // namespace

ExtractResult extract_file_level(const CommitSet& set) {
    ExtractResult result;
    result.corpus.granularity = Granularity::File;
    result.corpus.provenance = commit_set_digest(set);
    for (const CommitRecord& record : set.records()) {
        for (const FileChange& file : record.files) {
            SourceUnit unit;
            unit.granularity = Granularity::File;
            unit.commit_hash = record.commit_hash;
            unit.file_path = file.path;
            unit.start_line = 1;
            unit.end_line = static_cast<long>(split_lines(file.post_fix_source).size());
            unit.content = file.post_fix_source;
            if (unit.content.empty()) {
                result.skips.push_back({record.commit_hash, file.path,
                                        "empty post-fix source"});
                continue;
            }
            result.corpus.units.push_back(std::move(unit));
        }
    }
    finalize(result.corpus);
    return result;
}

ExtractResult extract_function_level(const CommitSet& set) {
    return extract_by_diff(
        set, Granularity::Function,
        [](const CommitRecord& record, const FileChange& file,
           const std::vector<long>& added, ExtractResult& result) {
            StructureIndex index = scan(file.post_fix_source, file.language);
            if (index.unbalanced) {
                result.skips.push_back({record.commit_hash, file.path,
                                        "unbalanced braces; file skipped"});
                return;
            }
            auto lines = split_lines(file.post_fix_source);
            std::set<std::pair<long, long>> spans;
            for (long line : added) {
                const FunctionSpan* fn = enclosing_function(index, line);
                if (!fn)
                    continue; // global-scope change, nothing at this granularity
                if (!spans.insert({fn->start_line, fn->end_line}).second)
                    continue;
                SourceUnit unit;
                unit.granularity = Granularity::Function;
                unit.commit_hash = record.commit_hash;
                unit.file_path = file.path;
                unit.start_line = fn->start_line;
                unit.end_line = fn->end_line;
                unit.content = slice_lines(lines, fn->start_line, fn->end_line);
                result.corpus.units.push_back(std::move(unit));
            }
        });
}

ExtractResult extract_block_level(const CommitSet& set) {
    return extract_by_diff(
        set, Granularity::Block,
        [](const CommitRecord& record, const FileChange& file,
           const std::vector<long>& added, ExtractResult& result) {
            StructureIndex index = scan(file.post_fix_source, file.language);
            if (index.unbalanced) {
                result.skips.push_back({record.commit_hash, file.path,
                                        "unbalanced braces; file skipped"});
                return;
            }
            auto lines = split_lines(file.post_fix_source);
            std::set<std::pair<long, long>> spans;
            for (long line : added) {
                const BlockSpan* block = innermost_block(index, line);
                if (!block)
                    continue;
                if (!spans.insert({block->open_line, block->close_line}).second)
                    continue;
                SourceUnit unit;
                unit.granularity = Granularity::Block;
                unit.commit_hash = record.commit_hash;
                unit.file_path = file.path;
                unit.start_line = block->open_line;
                unit.end_line = block->close_line;
                unit.orphan = true;
                for (const FunctionSpan& fn : index.functions) {
                    if (fn.start_line <= block->open_line && block->close_line <= fn.end_line) {
                        unit.orphan = false;
                        break;
                    }
                }
                unit.content = slice_lines(lines, block->open_line, block->close_line);
                result.corpus.units.push_back(std::move(unit));
            }
        });
}

ExtractResult extract_line_level(const CommitSet& set) {
    return extract_by_diff(
        set, Granularity::Line,
        [](const CommitRecord& record, const FileChange& file,
           const std::vector<long>& added, ExtractResult& result) {
            auto lines = split_lines(file.post_fix_source);
            for (long line : added) {
                if (line < 1 || line > static_cast<long>(lines.size())) {
                    result.skips.push_back({record.commit_hash, file.path,
                                            "added line " + std::to_string(line) +
                                                " outside post-fix file"});
                    continue;
                }
                const std::string& text = lines[static_cast<std::size_t>(line - 1)];
                if (trim(text).empty())
                    continue; // whitespace-only lines carry no signal
                SourceUnit unit;
                unit.granularity = Granularity::Line;
                unit.commit_hash = record.commit_hash;
                unit.file_path = file.path;
                unit.start_line = line;
                unit.end_line = line;
                unit.content = text + "\n";
                result.corpus.units.push_back(std::move(unit));
            }
        });
}

ExtractResult extract(const CommitSet& set, Granularity granularity) {
    switch (granularity) {
    case Granularity::File: return extract_file_level(set);
    case Granularity::Function: return extract_function_level(set);
    case Granularity::Block: return extract_block_level(set);
    case Granularity::Line: return extract_line_level(set);
    }
    return extract_file_level(set);
}

std::vector<CommitSet> sample_commit_subsets(const CommitSet& set,
                                             const std::vector<std::size_t>& sizes,
                                             std::uint64_t seed) {
    for (std::size_t i = 1; i < sizes.size(); ++i)
        if (sizes[i] <= sizes[i - 1])
            throw SamplingError("subset sizes must be strictly ascending");
    if (!sizes.empty() && sizes.back() > set.size())
        throw SamplingError("subset size " + std::to_string(sizes.back()) +
                            " exceeds commit count " + std::to_string(set.size()));

    // Hand-rolled Fisher-Yates: std::shuffle's output is not pinned by the
    // standard, and subsets must be reproducible across toolchains.
    std::vector<std::size_t> order(set.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::mt19937_64 rng(seed);
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng() % i]);

    std::vector<CommitSet> subsets;
    subsets.reserve(sizes.size());
    for (std::size_t size : sizes) {
        std::vector<CommitRecord> records;
        records.reserve(size);
        for (std::size_t i = 0; i < size; ++i)
            records.push_back(set.records()[order[i]]);
        subsets.emplace_back(std::move(records));
    }
    return subsets;
}

CommitSet filter_by_cwe(const CommitSet& set, const std::string& cwe_id) {
    std::vector<CommitRecord> records;
    for (const CommitRecord& record : set.records())
        if (record.cwe_id == cwe_id)
            records.push_back(record);
    return CommitSet(std::move(records));
}

std::string to_jsonl(const Corpus& corpus) {
    std::string out;
    for (const SourceUnit& unit : corpus.units) {
        ordered_json doc;
        doc["granularity"] = to_string(unit.granularity);
        doc["provenance"] = corpus.provenance;
        doc["commit_hash"] = unit.commit_hash;
        doc["file_path"] = unit.file_path;
        doc["start_line"] = unit.start_line;
        doc["end_line"] = unit.end_line;
        if (unit.orphan)
            doc["orphan"] = true;
        doc["content"] = unit.content;
        out += doc.dump();
        out += '\n';
    }
    return out;
}

Corpus corpus_from_jsonl(const std::string& text) {
    Corpus corpus;
    bool first = true;
    for (const std::string& line : split_lines(text)) {
        if (trim(line).empty())
            continue;
        ordered_json doc = ordered_json::parse(line);
        SourceUnit unit;
        unit.granularity = granularity_from_string(doc.value("granularity", "file"));
        unit.commit_hash = doc.value("commit_hash", "");
        unit.file_path = doc.value("file_path", "");
        unit.start_line = doc.value("start_line", 0L);
        unit.end_line = doc.value("end_line", 0L);
        unit.orphan = doc.value("orphan", false);
        unit.content = doc.value("content", "");
        if (first) {
            corpus.granularity = unit.granularity;
            corpus.provenance = doc.value("provenance", "");
            first = false;
        }
        corpus.units.push_back(std::move(unit));
    }
    return corpus;
}

std::string counts_summary(const std::vector<Corpus>& corpora) {
    std::string out = "granularity\titems\n";
    for (const Corpus& corpus : corpora) {
        out += to_string(corpus.granularity);
        out += "-level\t";
        out += std::to_string(corpus.units.size());
        out += '\n';
    }
    return out;
}

} // namespace secgen
