#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "fixture_commits.hpp"
#include "secgen/generate.hpp"
#include "secgen/pipeline.hpp"
#include "secgen/util.hpp"

using namespace secgen;
namespace fs = std::filesystem;

namespace {

fs::path bin_dir() {
    if (const char* env = std::getenv("SECGEN_BIN_DIR"))
        return env;
    return fs::path(SECGEN_SOURCE_ROOT) / "build" / "bin";
}

const char* kMiniScenarios[4] = {"CWE-125-1-C", "CWE-125-1-CPP", "CWE-787-2-C",
                                 "CWE-787-2-CPP"};

// Builds a working tree: fixture commits (plus two bad lines for the skip
// report), the four mini scenarios, a stub-rule map and a config wired to
// the mock client and the stub compiler/analyzer.
fs::path setup_tree(const std::string& name) {
    fs::path root = fs::temp_directory_path() / ("secgen-pipe-" + name);
    fs::remove_all(root);
    fs::create_directories(root / "scenarios");

    std::string commits = to_jsonl(fixture::commit_set());
    commits += "{\"cve_id\":\"CVE-X\",\"cwe_id\":\"CWE-1\",\"project\":\"p\","
               "\"commit_hash\":\"ffff\",\"files\":[{\"path\":\"readme.txt\","
               "\"post_fix_source\":\"\",\"diff_text\":\"\"}]}\n";
    commits += "not a json line\n";
    write_file_atomic(root / "commits.jsonl", commits);

    fs::path shipped = fs::path(SECGEN_SOURCE_ROOT) / "data" / "scenarios";
    for (const char* id : kMiniScenarios) {
        fs::copy_file(shipped / (std::string(id) + ".json"),
                      root / "scenarios" / (std::string(id) + ".json"));
        fs::copy_file(shipped / (std::string(id) + ".prompt"),
                      root / "scenarios" / (std::string(id) + ".prompt"));
    }

    write_file_atomic(root / "rule_map.tsv",
                      "stub/cwe-125\tCWE-125\nstub/cwe-787\tCWE-787\n");

    write_file_atomic(root / "bench.csv", "task_id,n,c\nt0,10,1\nt1,10,1\nt2,10,0\n");
    write_file_atomic(root / "bench_base.csv", "task_id,n,c\nt0,10,1\nt1,10,2\nt2,10,0\n");

    nlohmann::ordered_json config;
    config["dataset_inputs"] = {"commits.jsonl"};
    config["corpus_dir"] = "corpus";
    config["scenario_dir"] = "scenarios";
    config["results_dir"] = "results";
    config["rule_map"] = "rule_map.tsv";
    config["seed"] = 7;
    config["model_tag"] = "mock-model";
    config["generation"] = {{"endpoint", "mock"},
                            {"samples_per_scenario", 3},
                            {"max_parallel", 2},
                            {"retry_limit", 1},
                            {"backoff_ms", 0}};
    config["compiler_cmd_c"] = (bin_dir() / "stub_compiler").string() + " {src} {out}";
    config["compiler_cmd_cpp"] = (bin_dir() / "stub_compiler").string() + " {src} {out}";
    config["analyzer_cmd"] = (bin_dir() / "stub_analyzer").string() + " {src_dir} {out}";
    config["audit"] = {{"ngram", 10}};
    config["subsets"] = {{"sizes", {1, 2}}};
    config["benchmark"] =
        {{"results", "bench.csv"}, {"baseline", "bench_base.csv"}, {"k", 1}};
    write_file_atomic(root / "config.json", config.dump(2) + "\n");
    return root;
}

} // namespace

TEST_CASE("stages demand their producers") {
    fs::path root = setup_tree("deps");
    PipelineConfig config = load_config(root / "config.json");

    try {
        run_stage("report", config);
        FAIL("expected DependencyError");
    } catch (const DependencyError& e) {
        CHECK(e.producer() == "classify");
        CHECK(std::string(e.what()).find("classify") != std::string::npos);
    }
    try {
        run_stage("extract", config);
        FAIL("expected DependencyError");
    } catch (const DependencyError& e) {
        CHECK(e.producer() == "ingest");
    }
    CHECK_THROWS_AS(run_stage("no-such-stage", config), ConfigError);
}

TEST_CASE("full pipeline over the mini fixture") {
    fs::path root = setup_tree("full");
    PipelineConfig config = load_config(root / "config.json");

    // ingest: 3 good records survive, the txt-only record and the garbage
    // line land in the skip report
    auto ingest = run_stage("ingest", config);
    CHECK(ingest.status == StageStatus::Ran);
    auto stats_doc =
        nlohmann::json::parse(read_file(root / "corpus" / "stats.json"));
    CHECK(stats_doc["n_cves"] == 3);
    CHECK(stats_doc["n_commits"] == 3);
    CHECK(stats_doc["n_projects"] == 2);
    std::string skips = read_file(root / "corpus" / "ingest-skips.jsonl");
    CHECK(skips.find("readme.txt") != std::string::npos);
    CHECK(skips.find("malformed") != std::string::npos);

    // extract: hand-counted unit totals
    run_stage("extract", config);
    CHECK(read_file(root / "corpus" / "counts.txt") ==
          "granularity\titems\n"
          "file-level\t3\n"
          "function-level\t4\n"
          "block-level\t5\n"
          "line-level\t9\n");

    // idempotence: unchanged inputs short-circuit
    auto again = run_stage("extract", config);
    CHECK(again.status == StageStatus::UpToDate);

    run_stage("sample-subsets", config);
    CHECK(fs::exists(root / "corpus" / "subsets" / "commits-1.jsonl"));
    CHECK(fs::exists(root / "corpus" / "subsets" / "commits-2.jsonl"));

    run_stage("audit", config);
    std::string overlap = read_file(root / "results" / "overlap.txt");
    CHECK(overlap.find("verdict\tclean") != std::string::npos);

    run_stage("generate", config);
    auto samples = samples_from_jsonl(read_file(root / "results" / "samples.jsonl"));
    CHECK(samples.size() == 12); // 4 scenarios x 3 samples

    run_stage("classify", config);
    std::map<std::string, std::map<std::string, int>> verdicts;
    for (const std::string& line :
         split_lines(read_file(root / "results" / "verdicts.jsonl"))) {
        if (line.empty())
            continue;
        auto doc = nlohmann::json::parse(line);
        verdicts[doc["scenario_id"]][doc["verdict"]] += 1;
    }
    REQUIRE(verdicts.size() == 4);
    for (const char* id : kMiniScenarios) {
        CHECK(verdicts[id]["secure"] == 1);
        CHECK(verdicts[id]["vulnerable"] == 1);
        CHECK(verdicts[id]["invalid"] == 1);
    }

    auto report = run_stage("report", config);
    CHECK(report.status == StageStatus::Ran);
    std::string csv = read_file(root / "results" / "report.csv");
    for (const char* id : kMiniScenarios)
        CHECK(csv.find(std::string(id) + ",") != std::string::npos);
    CHECK(csv.find("66.7%,50.0%") != std::string::npos);

    std::string breakdown = read_file(root / "results" / "cwe_breakdown.csv");
    CHECK(breakdown.find("CWE-125,2,2,2,50.0%") != std::string::npos);
    CHECK(breakdown.find("CWE-787,2,2,2,50.0%") != std::string::npos);

    std::string bench = read_file(root / "results" / "benchmark.txt");
    CHECK(bench.find("pass@1\t6.67%") != std::string::npos);
    CHECK(bench.find("significant_tasks\t0") != std::string::npos);

    // second full report run is up to date, outputs unchanged
    auto report_again = run_stage("report", config);
    CHECK(report_again.status == StageStatus::UpToDate);
    CHECK(read_file(root / "results" / "report.csv") == csv);
}

TEST_CASE("changing stage options invalidates the manifest") {
    fs::path root = setup_tree("opts");
    PipelineConfig config = load_config(root / "config.json");
    run_stage("ingest", config);
    run_stage("extract", config);
    CHECK(run_stage("extract", config).status == StageStatus::UpToDate);

    StageOptions narrowed;
    narrowed.granularity = Granularity::Function;
    CHECK(run_stage("extract", config, narrowed).status == StageStatus::Ran);
    CHECK(read_file(root / "corpus" / "counts.txt") ==
          "granularity\titems\nfunction-level\t4\n");
    // and back again: the option change is seen both ways
    CHECK(run_stage("extract", config).status == StageStatus::Ran);
}

TEST_CASE("subset stage honors cwe filter and denylist") {
    fs::path root = setup_tree("subsets");
    // fixture commits: a1c0ffee CWE-119, b2deadbe CWE-787, c3feedfa CWE-125
    write_file_atomic(root / "deny.txt", "# drop one commit\nb2deadbe\n");
    auto doc = nlohmann::ordered_json::parse(read_file(root / "config.json"));
    doc["subsets"]["denylist"] = "deny.txt";
    write_file_atomic(root / "config.json", doc.dump(2) + "\n");

    PipelineConfig config = load_config(root / "config.json");
    run_stage("ingest", config);
    run_stage("sample-subsets", config);
    auto two = ingest_records_file((root / "corpus" / "subsets" / "commits-2.jsonl")
                                       .string())
                   .set;
    CHECK(two.size() == 2);
    for (const CommitRecord& record : two.records())
        CHECK(record.commit_hash != "b2deadbe");
    CHECK(read_file(root / "corpus" / "subsets" / "summary.txt") ==
          "commits\tfiles\n1\t1\n2\t2\n");
}

TEST_CASE("generate honors a language filter") {
    fs::path root = setup_tree("lang");
    PipelineConfig config = load_config(root / "config.json");
    run_stage("ingest", config);
    StageOptions options;
    options.language = Language::C;
    run_stage("generate", config, options);
    auto samples = samples_from_jsonl(read_file(root / "results" / "samples.jsonl"));
    CHECK(samples.size() == 6); // two C scenarios only
    for (const auto& sample : samples)
        CHECK(sample.scenario_id.find("CPP") == std::string::npos);
}

TEST_CASE("config validation surfaces missing inputs") {
    fs::path root = setup_tree("badcfg");
    fs::remove(root / "commits.jsonl");
    CHECK_THROWS_AS(load_config(root / "config.json"), ConfigError);
    CHECK_THROWS_AS(load_config(root / "missing-config.json"), ConfigError);
}

TEST_CASE("audit stage flags a planted overlap and reports pattern hits") {
    fs::path root = setup_tree("contam");
    PipelineConfig config = load_config(root / "config.json");
    run_stage("ingest", config);

    // plant a corpus unit that contains a prompt verbatim
    std::string prompt = read_file(root / "scenarios" / "CWE-125-1-C.prompt");
    Corpus planted;
    planted.granularity = Granularity::File;
    planted.provenance = "planted";
    SourceUnit unit;
    unit.granularity = Granularity::File;
    unit.commit_hash = "a1c0ffee";
    unit.file_path = "planted.c";
    unit.start_line = 1;
    unit.end_line = 40;
    unit.content = "/* padding */\n" + prompt + "\nwhile (isspace(c)) { c = next(); }\n";
    planted.units.push_back(unit);
    write_file_atomic(root / "corpus" / "corpus-file.jsonl", to_jsonl(planted));

    auto doc = nlohmann::ordered_json::parse(read_file(root / "config.json"));
    doc["audit"]["patterns"] = {R"((while|for)\s*\(.*isspace)"};
    write_file_atomic(root / "config.json", doc.dump(2) + "\n");
    config = load_config(root / "config.json");

    run_stage("audit", config);
    std::string overlap = read_file(root / "results" / "overlap.txt");
    CHECK(overlap.find("verdict\tcontaminated") != std::string::npos);
    CHECK(overlap.find("CWE-125-1-C") != std::string::npos);

    std::string patterns = read_file(root / "results" / "patterns.txt");
    CHECK(patterns.find("planted.c") != std::string::npos);
}

TEST_CASE("generate stage speaks the http contract with a bearer token") {
    fs::path root = setup_tree("http");

    httplib::Server server;
    std::atomic<int> authorized{0};
    server.Post("/v1/completions", [&](const httplib::Request& req,
                                       httplib::Response& res) {
        if (req.get_header_value("Authorization") == "Bearer sesame")
            ++authorized;
        auto body = nlohmann::json::parse(req.body);
        nlohmann::json out;
        out["completions"] = nlohmann::json::array();
        for (int i = 0; i < body["n"].get<int>(); ++i)
            out["completions"].push_back("\n    return 0;\n}\n");
        res.set_content(out.dump(), "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    auto doc = nlohmann::ordered_json::parse(read_file(root / "config.json"));
    doc["generation"]["endpoint"] =
        "http://127.0.0.1:" + std::to_string(port) + "/v1/completions";
    doc["generation"]["auth_token_env"] = "SECGEN_TEST_TOKEN";
    write_file_atomic(root / "config.json", doc.dump(2) + "\n");
    setenv("SECGEN_TEST_TOKEN", "sesame", 1);

    PipelineConfig config = load_config(root / "config.json");
    run_stage("generate", config);
    server.stop();
    server_thread.join();
    unsetenv("SECGEN_TEST_TOKEN");

    auto samples = samples_from_jsonl(read_file(root / "results" / "samples.jsonl"));
    CHECK(samples.size() == 12);
    CHECK(authorized == 12);
    for (const auto& sample : samples) {
        CHECK_FALSE(sample.failed);
        CHECK(sample.completion == "\n    return 0;\n}\n");
    }
}

TEST_CASE("samples jsonl from generate stage is stable across reruns") {
    fs::path root = setup_tree("stable");
    PipelineConfig config = load_config(root / "config.json");
    run_stage("generate", config);
    std::string first = read_file(root / "results" / "samples.jsonl");
    fs::remove(root / "results" / "generate.manifest.json");
    run_stage("generate", config);
    CHECK(read_file(root / "results" / "samples.jsonl") == first);
}
