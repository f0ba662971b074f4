#include "secgen/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <json.hpp>

#include "secgen/audit.hpp"
#include "secgen/classify.hpp"
#include "secgen/metrics.hpp"
#include "secgen/util.hpp"

namespace secgen {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr const char* kToolVersion = "secgen 0.1.0";

std::filesystem::path resolve(const std::filesystem::path& base, std::string value) {
    std::filesystem::path p(value);
    if (p.is_absolute() || value.empty())
        return p;
    return base / p;
}

} // namespace

PipelineConfig load_config(const std::filesystem::path& path) {
    std::string raw;
    try {
        raw = read_file(path);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }

    PipelineConfig config;
    config.digest = fnv1a64_hex(raw);
    auto base = path.parent_path();

    for (const auto& input : doc.value("dataset_inputs", std::vector<std::string>{}))
        config.dataset_inputs.push_back(resolve(base, input));
    config.corpus_dir = resolve(base, doc.value("corpus_dir", "corpus"));
    config.scenario_dir = resolve(base, doc.value("scenario_dir", "scenarios"));
    config.results_dir = resolve(base, doc.value("results_dir", "results"));
    config.rule_map = resolve(base, doc.value("rule_map", ""));
    config.seed = doc.value("seed", 0ull);
    config.model_tag = doc.value("model_tag", "model");

    if (doc.contains("generation")) {
        const auto& gen = doc["generation"];
        config.generation.samples_per_scenario = gen.value("samples_per_scenario", 30);
        config.generation.temperature = gen.value("temperature", 0.6);
        config.generation.max_new_tokens = gen.value("max_new_tokens", 512);
        config.generation.endpoint = gen.value("endpoint", "mock");
        config.generation.max_parallel = gen.value("max_parallel", 4);
        config.generation.retry_limit = gen.value("retry_limit", 3);
        config.generation.backoff_ms = gen.value("backoff_ms", 250);
        config.generation.auth_token_env = gen.value("auth_token_env", "");
        if (gen.contains("stop"))
            for (const auto& s : gen["stop"])
                config.generation.stop.push_back(s.get<std::string>());
    } else {
        config.generation.endpoint = "mock";
    }

    config.compiler_cmd_c = doc.value("compiler_cmd_c", "cc -fsyntax-only {src}");
    config.compiler_cmd_cpp = doc.value("compiler_cmd_cpp", "c++ -fsyntax-only {src}");
    config.analyzer_cmd = doc.value("analyzer_cmd", "");

    if (doc.contains("audit")) {
        config.audit.ngram = doc["audit"].value("ngram", 10);
        if (doc["audit"].contains("patterns"))
            for (const auto& p : doc["audit"]["patterns"])
                config.audit.patterns.push_back(p.get<std::string>());
    }
    if (doc.contains("subsets")) {
        const auto& sub = doc["subsets"];
        config.subsets.cwe = sub.value("cwe", "");
        if (sub.contains("sizes"))
            for (const auto& s : sub["sizes"])
                config.subsets.sizes.push_back(s.get<std::size_t>());
        config.subsets.allowlist = resolve(base, sub.value("allowlist", "")).string();
        config.subsets.denylist = resolve(base, sub.value("denylist", "")).string();
    }
    if (doc.contains("benchmark")) {
        config.benchmark.results =
            resolve(base, doc["benchmark"].value("results", "")).string();
        config.benchmark.baseline =
            resolve(base, doc["benchmark"].value("baseline", "")).string();
        config.benchmark.k = doc["benchmark"].value("k", 1L);
    }

    for (const auto& input : config.dataset_inputs)
        if (!std::filesystem::exists(input))
            throw ConfigError("dataset input does not exist: " + input.string());
    return config;
}

namespace {

// ---- manifests -----------------------------------------------------------

std::string file_digest(const std::filesystem::path& path) {
    return fnv1a64_hex(read_file(path));
}

struct Manifest {
    std::string stage;
    std::string config_digest;
    std::map<std::string, std::string> inputs;  // path -> digest
    std::map<std::string, std::string> outputs; // path -> digest
};

std::filesystem::path manifest_path(const PipelineConfig& config, const std::string& stage) {
    auto dir = stage == "generate" || stage == "classify" || stage == "report" ||
                       stage == "audit"
                   ? config.results_dir
                   : config.corpus_dir;
    return dir / (stage + ".manifest.json");
}

void write_manifest(const PipelineConfig& config, const Manifest& manifest) {
    ordered_json doc;
    doc["stage"] = manifest.stage;
    doc["tool"] = kToolVersion;
    doc["config_digest"] = manifest.config_digest;
    doc["inputs"] = ordered_json::object();
    for (const auto& [path, digest] : manifest.inputs)
        doc["inputs"][path] = digest;
    doc["outputs"] = ordered_json::object();
    for (const auto& [path, digest] : manifest.outputs)
        doc["outputs"][path] = digest;
    write_file_atomic(manifest_path(config, manifest.stage), doc.dump(2) + "\n");
}

// True when the previous run of this stage is still valid for the same
// inputs and config.
bool up_to_date(const PipelineConfig& config, const std::string& stage,
                const std::map<std::string, std::string>& inputs) {
    auto path = manifest_path(config, stage);
    if (!std::filesystem::exists(path))
        return false;
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const std::exception&) {
        return false;
    }
    if (doc.value("config_digest", "") != config.digest)
        return false;
    std::map<std::string, std::string> recorded;
    if (doc.contains("inputs"))
        for (const auto& [key, value] : doc["inputs"].items())
            recorded[key] = value.get<std::string>();
    if (recorded != inputs)
        return false;
    if (doc.contains("outputs")) {
        for (const auto& [key, value] : doc["outputs"].items()) {
            if (!std::filesystem::exists(key))
                return false;
            if (file_digest(key) != value.get<std::string>())
                return false;
        }
    }
    return true;
}

void require_input(const std::filesystem::path& path, const std::string& stage,
                   const std::string& producer) {
    if (!std::filesystem::exists(path))
        throw DependencyError("stage '" + stage + "' needs " + path.string() +
                                  "; run stage '" + producer + "' first",
                              producer);
}

std::string substitute_all(std::string text, const std::string& key,
                           const std::string& value) {
    std::size_t pos;
    while ((pos = text.find(key)) != std::string::npos)
        text.replace(pos, key.size(), value);
    return text;
}

// ---- stages --------------------------------------------------------------

StageResult stage_ingest(const PipelineConfig& config) {
    if (config.dataset_inputs.empty())
        throw ConfigError("ingest: no dataset_inputs configured");

    std::map<std::string, std::string> inputs;
    for (const auto& path : config.dataset_inputs)
        inputs[path.string()] = file_digest(path);
    if (up_to_date(config, "ingest", inputs))
        return {StageStatus::UpToDate, {}};

    std::vector<CommitSet> sets;
    std::vector<SkipEntry> skips;
    for (const auto& path : config.dataset_inputs) {
        IngestResult result = ingest_records_file(path.string());
        for (SkipEntry& skip : result.skips) {
            skip.reason = path.filename().string() + ": " + skip.reason;
            skips.push_back(std::move(skip));
        }
        sets.push_back(std::move(result.set));
    }
    MergeResult merged = merge_dedup(sets);
    for (const std::string& warning : merged.warnings)
        skips.push_back({0, "warning: " + warning});

    std::filesystem::create_directories(config.corpus_dir);
    auto commits_path = config.corpus_dir / "commits.jsonl";
    auto skips_path = config.corpus_dir / "ingest-skips.jsonl";
    auto stats_path = config.corpus_dir / "stats.json";
    write_file_atomic(commits_path, to_jsonl(merged.set));
    write_file_atomic(skips_path, skips_to_jsonl(skips));

    DatasetStats s = stats(merged.set);
    ordered_json stats_doc;
    stats_doc["n_cves"] = s.n_cves;
    stats_doc["n_commits"] = s.n_commits;
    stats_doc["n_projects"] = s.n_projects;
    write_file_atomic(stats_path, stats_doc.dump(2) + "\n");

    Manifest manifest{"ingest", config.digest, inputs, {}};
    for (const auto& out : {commits_path, skips_path, stats_path})
        manifest.outputs[out.string()] = file_digest(out);
    write_manifest(config, manifest);
    return {StageStatus::Ran, {commits_path, skips_path, stats_path}};
}

// Stage options change outputs, so they take part in the manifest
// freshness check as pseudo-inputs.
void record_options(std::map<std::string, std::string>& inputs,
                    const StageOptions& options) {
    if (options.granularity)
        inputs["option:granularity"] = to_string(*options.granularity);
    if (options.language)
        inputs["option:language"] = to_string(*options.language);
    if (options.seed)
        inputs["option:seed"] = std::to_string(*options.seed);
}

StageResult stage_extract(const PipelineConfig& config, const StageOptions& options) {
    auto commits_path = config.corpus_dir / "commits.jsonl";
    require_input(commits_path, "extract", "ingest");

    std::map<std::string, std::string> inputs{
        {commits_path.string(), file_digest(commits_path)}};
    record_options(inputs, options);
    if (up_to_date(config, "extract", inputs))
        return {StageStatus::UpToDate, {}};

    CommitSet set = ingest_records_file(commits_path.string()).set;

    std::vector<Granularity> levels;
    if (options.granularity)
        levels.push_back(*options.granularity);
    else
        levels = {Granularity::File, Granularity::Function, Granularity::Block,
                  Granularity::Line};

    StageResult result;
    std::vector<Corpus> corpora;
    std::string skip_lines;
    for (Granularity level : levels) {
        ExtractResult extracted = extract(set, level);
        auto out = config.corpus_dir / ("corpus-" + to_string(level) + ".jsonl");
        write_file_atomic(out, to_jsonl(extracted.corpus));
        result.outputs.push_back(out);
        corpora.push_back(std::move(extracted.corpus));
        for (const ExtractSkip& skip : extracted.skips) {
            ordered_json doc;
            doc["granularity"] = to_string(level);
            doc["commit_hash"] = skip.commit_hash;
            doc["file_path"] = skip.file_path;
            doc["reason"] = skip.reason;
            skip_lines += doc.dump();
            skip_lines += '\n';
        }
    }
    auto counts_path = config.corpus_dir / "counts.txt";
    auto skips_path = config.corpus_dir / "extract-skips.jsonl";
    write_file_atomic(counts_path, counts_summary(corpora));
    write_file_atomic(skips_path, skip_lines);
    result.outputs.push_back(counts_path);
    result.outputs.push_back(skips_path);

    Manifest manifest{"extract", config.digest, inputs, {}};
    for (const auto& out : result.outputs)
        manifest.outputs[out.string()] = file_digest(out);
    write_manifest(config, manifest);
    return result;
}

std::set<std::string> read_hash_list(const std::filesystem::path& path) {
    std::set<std::string> hashes;
    for (const std::string& line : split_lines(read_file(path))) {
        std::string hash = trim(line);
        if (!hash.empty() && hash[0] != '#')
            hashes.insert(hash);
    }
    return hashes;
}

StageResult stage_sample_subsets(const PipelineConfig& config, const StageOptions& options) {
    auto commits_path = config.corpus_dir / "commits.jsonl";
    require_input(commits_path, "sample-subsets", "ingest");
    if (config.subsets.sizes.empty())
        throw ConfigError("sample-subsets: no subsets.sizes configured");

    std::map<std::string, std::string> inputs{
        {commits_path.string(), file_digest(commits_path)}};
    record_options(inputs, options);
    if (up_to_date(config, "sample-subsets", inputs))
        return {StageStatus::UpToDate, {}};

    CommitSet set = ingest_records_file(commits_path.string()).set;
    if (!config.subsets.cwe.empty())
        set = filter_by_cwe(set, config.subsets.cwe);

    // Manual fix-relevance filtering arrives as allow/deny lists.
    if (!config.subsets.allowlist.empty()) {
        auto allowed = read_hash_list(config.subsets.allowlist);
        std::vector<CommitRecord> kept;
        for (const CommitRecord& record : set.records())
            if (allowed.count(record.commit_hash))
                kept.push_back(record);
        set = CommitSet(std::move(kept));
    }
    if (!config.subsets.denylist.empty()) {
        auto denied = read_hash_list(config.subsets.denylist);
        std::vector<CommitRecord> kept;
        for (const CommitRecord& record : set.records())
            if (!denied.count(record.commit_hash))
                kept.push_back(record);
        set = CommitSet(std::move(kept));
    }

    std::uint64_t seed = options.seed.value_or(config.seed);
    auto subsets = sample_commit_subsets(set, config.subsets.sizes, seed);

    auto subset_dir = config.corpus_dir / "subsets";
    std::filesystem::create_directories(subset_dir);
    StageResult result;
    std::string summary = "commits\tfiles\n";
    for (std::size_t i = 0; i < subsets.size(); ++i) {
        auto out = subset_dir /
                   ("commits-" + std::to_string(config.subsets.sizes[i]) + ".jsonl");
        write_file_atomic(out, to_jsonl(subsets[i]));
        result.outputs.push_back(out);
        std::size_t files = 0;
        for (const CommitRecord& record : subsets[i].records())
            files += record.files.size();
        summary += std::to_string(subsets[i].size()) + "\t" + std::to_string(files) + "\n";
    }
    auto summary_path = subset_dir / "summary.txt";
    write_file_atomic(summary_path, summary);
    result.outputs.push_back(summary_path);

    Manifest manifest{"sample-subsets", config.digest, inputs, {}};
    for (const auto& out : result.outputs)
        manifest.outputs[out.string()] = file_digest(out);
    write_manifest(config, manifest);
    return result;
}

StageResult stage_audit(const PipelineConfig& config, const StageOptions& options) {
    Granularity level = options.granularity.value_or(Granularity::File);
    auto corpus_path = config.corpus_dir / ("corpus-" + to_string(level) + ".jsonl");
    require_input(corpus_path, "audit", "extract");
    if (!std::filesystem::is_directory(config.scenario_dir))
        throw ConfigError("audit: scenario_dir does not exist: " +
                          config.scenario_dir.string());

    std::map<std::string, std::string> inputs{
        {corpus_path.string(), file_digest(corpus_path)}};
    record_options(inputs, options);
    if (up_to_date(config, "audit", inputs))
        return {StageStatus::UpToDate, {}};

    Corpus corpus = corpus_from_jsonl(read_file(corpus_path));
    ScenarioBank bank = load_bank(config.scenario_dir);

    OverlapReport report = ngram_overlap(corpus, bank.scenarios, config.audit.ngram);
    std::filesystem::create_directories(config.results_dir);
    auto overlap_path = config.results_dir / "overlap.txt";
    write_file_atomic(overlap_path, overlap_report_text(report));

    StageResult result;
    result.outputs.push_back(overlap_path);
    if (!config.audit.patterns.empty()) {
        std::string text = "pattern\tunit_id\tmatches\n";
        for (const std::string& pattern : config.audit.patterns) {
            for (const PatternHit& hit : pattern_search(corpus, pattern))
                text += pattern + "\t" + hit.unit_id + "\t" +
                        std::to_string(hit.match_count) + "\n";
        }
        auto patterns_path = config.results_dir / "patterns.txt";
        write_file_atomic(patterns_path, text);
        result.outputs.push_back(patterns_path);
    }

    if (report.contaminated())
        std::fprintf(stderr, "audit: contamination flagged (%zu shared %d-grams)\n",
                     report.total_shared, report.n);

    Manifest manifest{"audit", config.digest, inputs, {}};
    for (const auto& out : result.outputs)
        manifest.outputs[out.string()] = file_digest(out);
    write_manifest(config, manifest);
    return result;
}

StageResult stage_generate(const PipelineConfig& config, const StageOptions& options) {
    if (!std::filesystem::is_directory(config.scenario_dir))
        throw ConfigError("generate: scenario_dir does not exist: " +
                          config.scenario_dir.string());

    ScenarioBank bank = load_bank(config.scenario_dir);
    if (options.language) {
        std::vector<Scenario> filtered;
        for (Scenario& scenario : bank.scenarios)
            if (scenario.language == *options.language)
                filtered.push_back(std::move(scenario));
        bank.scenarios = std::move(filtered);
    }

    std::map<std::string, std::string> inputs;
    for (const Scenario& scenario : bank.scenarios)
        inputs["scenario:" + scenario.id] = fnv1a64_hex(scenario.prompt);
    record_options(inputs, options);
    if (up_to_date(config, "generate", inputs))
        return {StageStatus::UpToDate, {}};

    GenerationConfig gen = config.generation;
    if (options.max_parallel)
        gen.max_parallel = *options.max_parallel;

    std::unique_ptr<CompletionClient> client;
    if (gen.endpoint == "mock") {
        client = std::make_unique<MockCompletionClient>();
    } else {
        std::string token;
        if (!gen.auth_token_env.empty()) {
            const char* value = std::getenv(gen.auth_token_env.c_str());
            token = value ? value : "";
        }
        client = std::make_unique<HttpCompletionClient>(gen.endpoint, token);
    }

    std::filesystem::create_directories(config.results_dir);
    auto journal_path = config.results_dir / "samples.journal.jsonl";
    std::ofstream journal(journal_path, std::ios::binary | std::ios::trunc);
    auto sink = [&journal](const GeneratedSample& sample) {
        journal << samples_to_jsonl({sample});
        journal.flush();
    };

    auto samples = generate(bank, gen, *client, sink);
    journal.close();

    auto samples_path = config.results_dir / "samples.jsonl";
    write_file_atomic(samples_path, samples_to_jsonl(samples));

    Manifest manifest{"generate", config.digest, inputs, {}};
    manifest.outputs[samples_path.string()] = file_digest(samples_path);
    write_manifest(config, manifest);
    return {StageStatus::Ran, {samples_path}};
}

StageResult stage_classify(const PipelineConfig& config, const StageOptions& options) {
    auto samples_path = config.results_dir / "samples.jsonl";
    require_input(samples_path, "classify", "generate");
    if (config.rule_map.empty() || !std::filesystem::exists(config.rule_map))
        throw ConfigError("classify: rule_map file not found: " +
                          config.rule_map.string());
    if (config.analyzer_cmd.empty())
        throw ConfigError("classify: analyzer_cmd is not configured");

    std::map<std::string, std::string> inputs{
        {samples_path.string(), file_digest(samples_path)},
        {config.rule_map.string(), file_digest(config.rule_map)}};
    if (up_to_date(config, "classify", inputs))
        return {StageStatus::UpToDate, {}};

    ScenarioBank bank = load_bank(config.scenario_dir);
    RuleMap rule_map = RuleMap::from_file(config.rule_map);
    auto samples = samples_from_jsonl(read_file(samples_path));

    auto units_dir = config.results_dir / "units";
    std::filesystem::remove_all(units_dir);
    std::filesystem::create_directories(units_dir);

    struct Row {
        const GeneratedSample* sample = nullptr;
        const Scenario* scenario = nullptr;
        std::string unit_file; // empty unless compiled successfully
        CompileCheck compile;
        Verdict verdict;
    };
    std::vector<Row> rows(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        rows[i].sample = &samples[i];
        rows[i].scenario = bank.find(samples[i].scenario_id);
        if (!rows[i].scenario)
            throw ConfigError("classify: sample references unknown scenario " +
                              samples[i].scenario_id);
    }

    // Compile checks; each sample touches only its own files.
    std::atomic<std::size_t> next{0};
    std::atomic<bool> tool_failure{false};
    std::mutex error_mutex;
    std::string tool_error;
    auto worker = [&] {
        for (;;) {
            std::size_t index = next.fetch_add(1);
            if (index >= rows.size() || tool_failure.load())
                return;
            Row& row = rows[index];
            if (row.sample->failed)
                continue;
            const Scenario& scenario = *row.scenario;
            char name[160];
            std::snprintf(name, sizeof(name), "%s-%03d.%s", scenario.id.c_str(),
                          row.sample->sample_index,
                          scenario.language == Language::C ? "c" : "cpp");
            auto unit_path = units_dir / name;
            std::string wrapped = scenario.wrapper_prelude + row.sample->assembled +
                                  scenario.wrapper_epilogue;
            write_file_atomic(unit_path, wrapped);
            const std::string& tmpl = scenario.language == Language::C
                                          ? config.compiler_cmd_c
                                          : config.compiler_cmd_cpp;
            try {
                row.compile = check_valid_file(unit_path, tmpl);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                tool_error = e.what();
                tool_failure = true;
                return;
            }
            if (row.compile.valid) {
                row.unit_file = name;
            } else {
                std::filesystem::remove(unit_path); // keep units/ analyzable
            }
        }
    };
    int parallel = options.max_parallel.value_or(config.generation.max_parallel);
    std::size_t thread_count =
        std::min<std::size_t>(static_cast<std::size_t>(std::max(parallel, 1)), rows.size());
    if (thread_count <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < thread_count; ++i)
            pool.emplace_back(worker);
        for (std::thread& t : pool)
            t.join();
    }
    if (tool_failure)
        throw ToolError(tool_error);

    // One analyzer batch over all valid units.
    auto sarif_path = config.results_dir / "analysis.sarif";
    bool any_valid = false;
    for (const Row& row : rows)
        if (!row.unit_file.empty())
            any_valid = true;
    std::vector<AnalyzerFinding> findings;
    if (any_valid) {
        std::string cmd = substitute_all(config.analyzer_cmd, "{src_dir}",
                                         units_dir.string());
        cmd = substitute_all(cmd, "{out}", sarif_path.string());
        int rc = std::system(cmd.c_str());
        int exit_code = rc == -1 ? -1 : (WIFEXITED(rc) ? WEXITSTATUS(rc) : -1);
        if (exit_code == 127)
            throw ToolError("analyzer not found (exit 127): " + config.analyzer_cmd);
        if (exit_code != 0)
            throw ToolError("analyzer command failed (exit " +
                            std::to_string(exit_code) + "): " + cmd);
        findings = parse_sarif(read_file(sarif_path));
    } else {
        write_file_atomic(sarif_path, "{\"version\":\"2.1.0\",\"runs\":[]}\n");
    }

    // Findings keyed by unit file basename.
    std::map<std::string, std::vector<AnalyzerFinding>> by_file;
    for (AnalyzerFinding& finding : findings) {
        std::string base = std::filesystem::path(finding.file).filename().string();
        by_file[base].push_back(std::move(finding));
    }

    std::vector<std::string> warnings;
    std::string verdict_lines;
    for (Row& row : rows) {
        static const std::vector<AnalyzerFinding> kNone;
        const auto it = by_file.find(row.unit_file);
        const auto& unit_findings =
            row.unit_file.empty() || it == by_file.end() ? kNone : it->second;
        row.verdict = classify_sample(row.sample->failed, row.compile, unit_findings,
                                      *row.scenario, rule_map, &warnings);
        ordered_json doc;
        doc["scenario_id"] = row.sample->scenario_id;
        doc["sample_index"] = row.sample->sample_index;
        doc["verdict"] = to_string(row.verdict.kind);
        if (row.verdict.kind == VerdictKind::Invalid)
            doc["tag"] = to_string(row.verdict.tag);
        verdict_lines += doc.dump();
        verdict_lines += '\n';
    }

    auto verdicts_path = config.results_dir / "verdicts.jsonl";
    write_file_atomic(verdicts_path, verdict_lines);
    auto warnings_path = config.results_dir / "classify-warnings.txt";
    std::string warning_text;
    std::set<std::string> unique_warnings(warnings.begin(), warnings.end());
    for (const std::string& warning : unique_warnings)
        warning_text += warning + "\n";
    write_file_atomic(warnings_path, warning_text);

    Manifest manifest{"classify", config.digest, inputs, {}};
    manifest.outputs[verdicts_path.string()] = file_digest(verdicts_path);
    write_manifest(config, manifest);
    return {StageStatus::Ran, {verdicts_path, sarif_path, warnings_path}};
}

StageResult stage_report(const PipelineConfig& config) {
    auto verdicts_path = config.results_dir / "verdicts.jsonl";
    require_input(verdicts_path, "report", "classify");

    std::map<std::string, std::string> inputs{
        {verdicts_path.string(), file_digest(verdicts_path)}};
    if (up_to_date(config, "report", inputs))
        return {StageStatus::UpToDate, {}};

    ScenarioBank bank = load_bank(config.scenario_dir);

    std::map<std::string, ScenarioTally> tallies;
    for (const std::string& line : split_lines(read_file(verdicts_path))) {
        if (trim(line).empty())
            continue;
        auto doc = nlohmann::json::parse(line);
        std::string id = doc.value("scenario_id", "");
        const Scenario* scenario = bank.find(id);
        if (!scenario)
            throw ConfigError("report: verdict references unknown scenario " + id);
        ScenarioTally& tally = tallies[id];
        tally.scenario_id = id;
        tally.cwe = scenario->cwe;
        tally.language = scenario->language;
        std::string verdict = doc.value("verdict", "");
        if (verdict == "vulnerable")
            ++tally.vulnerable;
        else if (verdict == "secure")
            ++tally.secure;
        else
            ++tally.invalid;
    }

    Report report;
    report.model_tag = config.model_tag;
    report.config_digest = config.digest;
    for (auto& [id, tally] : tallies)
        report.tallies.push_back(tally);

    std::filesystem::create_directories(config.results_dir);
    auto csv_path = config.results_dir / "report.csv";
    auto text_path = config.results_dir / "report.txt";
    auto cwe_path = config.results_dir / "cwe_breakdown.csv";
    write_file_atomic(csv_path, report_csv(report));
    write_file_atomic(text_path, report_text(report));
    write_file_atomic(cwe_path, cwe_breakdown_csv(report));

    StageResult result;
    result.outputs = {csv_path, text_path, cwe_path};

    if (!config.benchmark.results.empty()) {
        auto tasks = parse_pass_tasks_csv(read_file(config.benchmark.results));
        std::string text = "tasks\t" + std::to_string(tasks.size()) + "\n";
        text += "pass@" + std::to_string(config.benchmark.k) + "\t" +
                format_percent2(mean_pass_at_k(tasks, config.benchmark.k)) + "\n";
        if (!config.benchmark.baseline.empty()) {
            auto baseline = parse_pass_tasks_csv(read_file(config.benchmark.baseline));
            std::map<std::string, PassTask> by_id;
            for (const PassTask& task : baseline)
                by_id[task.task_id] = task;
            std::size_t significant = 0;
            std::string rows = "task_id\tp_value\n";
            for (const PassTask& task : tasks) {
                auto it = by_id.find(task.task_id);
                if (it == by_id.end())
                    continue;
                double p = fisher_exact_2x2(task.c, task.n - task.c, it->second.c,
                                            it->second.n - it->second.c);
                if (p < 0.05)
                    ++significant;
                char buf[64];
                std::snprintf(buf, sizeof(buf), "%.6f", p);
                rows += task.task_id + "\t" + buf + "\n";
            }
            text += "significant_tasks\t" + std::to_string(significant) + "\n" + rows;
        }
        auto bench_path = config.results_dir / "benchmark.txt";
        write_file_atomic(bench_path, text);
        result.outputs.push_back(bench_path);
    }

    Manifest manifest{"report", config.digest, inputs, {}};
    for (const auto& out : result.outputs)
        manifest.outputs[out.string()] = file_digest(out);
    write_manifest(config, manifest);
    return result;
}

} // namespace

StageResult run_stage(const std::string& name, const PipelineConfig& config,
                      const StageOptions& options) {
    if (name == "ingest")
        return stage_ingest(config);
    if (name == "extract")
        return stage_extract(config, options);
    if (name == "sample-subsets")
        return stage_sample_subsets(config, options);
    if (name == "audit")
        return stage_audit(config, options);
    if (name == "generate")
        return stage_generate(config, options);
    if (name == "classify")
        return stage_classify(config, options);
    if (name == "report")
        return stage_report(config);
    throw ConfigError("unknown stage: " + name);
}

} // namespace secgen
