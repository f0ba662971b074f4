#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "secgen/extract.hpp"
#include "secgen/generate.hpp"
#include "secgen/language.hpp"

namespace secgen {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A stage input is missing; `producer` names the stage that writes it.
class DependencyError : public std::runtime_error {
public:
    DependencyError(const std::string& what, std::string producer)
        : std::runtime_error(what), producer_(std::move(producer)) {}
    const std::string& producer() const { return producer_; }

private:
    std::string producer_;
};

struct AuditConfig {
    int ngram = 10;
    std::vector<std::string> patterns;
};

struct SubsetConfig {
    std::string cwe; // empty: whole set
    std::vector<std::size_t> sizes;
    std::string allowlist; // optional file, one commit hash per line
    std::string denylist;
};

struct BenchmarkConfig {
    std::string results;  // per-task task_id,n,c CSV
    std::string baseline; // optional second table for paired Fisher tests
    long k = 1;
};

struct PipelineConfig {
    std::vector<std::filesystem::path> dataset_inputs;
    std::filesystem::path corpus_dir;
    std::filesystem::path scenario_dir;
    std::filesystem::path results_dir;
    std::filesystem::path rule_map;
    std::uint64_t seed = 0;
    std::string model_tag = "model";
    GenerationConfig generation;
    std::string compiler_cmd_c;
    std::string compiler_cmd_cpp;
    std::string analyzer_cmd; // {src_dir} and {out} placeholders
    AuditConfig audit;
    SubsetConfig subsets;
    BenchmarkConfig benchmark;

    std::string digest; // fnv1a64 of the raw config file bytes
};

// Loads config JSON; relative paths resolve against the config file's
// directory. Validates that configured input paths exist.
PipelineConfig load_config(const std::filesystem::path& path);

struct StageOptions {
    std::optional<Granularity> granularity;
    std::optional<Language> language;
    std::optional<std::uint64_t> seed;
    std::optional<int> max_parallel;
};

enum class StageStatus { Ran, UpToDate };

struct StageResult {
    StageStatus status = StageStatus::Ran;
    std::vector<std::filesystem::path> outputs;
};

// Runs one stage. Inputs produced by earlier stages must exist
// (DependencyError names the producing stage otherwise). Outputs are
// written atomically and recorded in a per-stage manifest with input and
// config digests; a stage whose manifest still matches its inputs is
// skipped as up to date.
StageResult run_stage(const std::string& name, const PipelineConfig& config,
                      const StageOptions& options = {});

} // namespace secgen
