#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "secgen/classify.hpp"
#include "secgen/pipeline.hpp"

namespace {

// 0 ok, 1 failure, 2 config/usage, 3 missing stage dependency,
// 4 external tool missing.
enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kDependency = 3, kTool = 4 };

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"secure-code corpus and evaluation pipeline"};

    std::string config_path;
    std::string stage;
    std::string granularity_name;
    std::string language_name;
    std::uint64_t seed = 0;
    int max_parallel = 0;

    app.add_option("--config", config_path, "pipeline config JSON")->required();
    app.add_option("--stage", stage,
                   "one of: ingest, extract, sample-subsets, audit, generate, "
                   "classify, report")
        ->required();
    app.add_option("--granularity", granularity_name, "file|function|block|line");
    app.add_option("--language", language_name, "c|cpp (generate only)");
    auto* seed_opt = app.add_option("--seed", seed, "sampling seed override");
    auto* parallel_opt =
        app.add_option("--max-parallel", max_parallel, "worker override (>= 1)");

    CLI11_PARSE(app, argc, argv);

    secgen::StageOptions options;
    if (!granularity_name.empty()) {
        if (granularity_name == "file")
            options.granularity = secgen::Granularity::File;
        else if (granularity_name == "function")
            options.granularity = secgen::Granularity::Function;
        else if (granularity_name == "block")
            options.granularity = secgen::Granularity::Block;
        else if (granularity_name == "line")
            options.granularity = secgen::Granularity::Line;
        else {
            std::fprintf(stderr, "unknown granularity: %s\n", granularity_name.c_str());
            return kConfig;
        }
    }
    if (!language_name.empty()) {
        auto language = secgen::language_from_string(language_name);
        if (!language) {
            std::fprintf(stderr, "unknown language: %s\n", language_name.c_str());
            return kConfig;
        }
        options.language = language;
    }
    if (!seed_opt->empty())
        options.seed = seed;
    if (!parallel_opt->empty()) {
        if (max_parallel < 1) {
            std::fprintf(stderr, "--max-parallel must be >= 1\n");
            return kConfig;
        }
        options.max_parallel = max_parallel;
    }

    try {
        secgen::PipelineConfig config = secgen::load_config(config_path);
        secgen::StageResult result = secgen::run_stage(stage, config, options);
        if (result.status == secgen::StageStatus::UpToDate) {
            std::printf("%s: up-to-date\n", stage.c_str());
        } else {
            std::printf("%s: ok\n", stage.c_str());
            for (const auto& output : result.outputs)
                std::printf("  %s\n", output.string().c_str());
        }
        return kOk;
    } catch (const secgen::DependencyError& e) {
        std::fprintf(stderr, "dependency error: %s\n", e.what());
        return kDependency;
    } catch (const secgen::ToolError& e) {
        std::fprintf(stderr, "tool error: %s\n", e.what());
        return kTool;
    } catch (const secgen::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kFailure;
    }
}
