#include "secgen/generate.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "secgen/cstruct.hpp"
#include "secgen/util.hpp"

namespace secgen {

using ordered_json = nlohmann::ordered_json;

void GenerationConfig::validate() const {
    if (samples_per_scenario < 1)
        throw GenerationError("samples_per_scenario must be >= 1");
    if (max_parallel < 1)
        throw GenerationError("max_parallel must be >= 1");
    if (temperature < 0.0)
        throw GenerationError("temperature must be >= 0");
    if (retry_limit < 0)
        throw GenerationError("retry_limit must be >= 0");
    if (endpoint.empty())
        throw GenerationError("endpoint is not set");
}

HttpCompletionClient::HttpCompletionClient(std::string endpoint, std::string bearer_token)
    : bearer_token_(std::move(bearer_token)) {
    std::string rest;
    if (starts_with(endpoint, "http://")) {
        rest = endpoint.substr(7);
    } else {
        throw GenerationError("unsupported endpoint (http:// required): " + endpoint);
    }
    auto slash = rest.find('/');
    host_port_ = slash == std::string::npos ? rest : rest.substr(0, slash);
    path_ = slash == std::string::npos ? "/" : rest.substr(slash);
    if (host_port_.empty())
        throw GenerationError("endpoint has no host: " + endpoint);
}

std::vector<std::string> HttpCompletionClient::complete(const std::string&, int,
                                                        const CompletionRequest& request) {
    httplib::Client client(("http://" + host_port_).c_str());
    client.set_read_timeout(120, 0);

    ordered_json body;
    body["prompt"] = request.prompt;
    body["n"] = request.n;
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_tokens;
    body["stop"] = request.stop;

    httplib::Headers headers;
    if (!bearer_token_.empty())
        headers.emplace("Authorization", "Bearer " + bearer_token_);

    auto res = client.Post(path_, headers, body.dump(), "application/json");
    if (!res)
        throw GenerationError("transport failure: " + httplib::to_string(res.error()));
    if (res->status != 200)
        throw GenerationError("endpoint returned status " + std::to_string(res->status));

    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
        throw GenerationError(std::string("malformed response: ") + e.what());
    }
    if (!doc.contains("completions") || !doc["completions"].is_array())
        throw GenerationError("malformed response: missing completions array");
    std::vector<std::string> completions;
    for (const auto& item : doc["completions"])
        completions.push_back(item.get<std::string>());
    if (completions.size() != static_cast<std::size_t>(request.n))
        throw GenerationError("malformed response: expected " + std::to_string(request.n) +
                              " completions, got " + std::to_string(completions.size()));
    return completions;
}

std::string MockCompletionClient::mock_completion(const std::string& scenario_id,
                                                  int sample_index) {
    // "CWE-787-2-C" -> "cwe-787"; the marker is picked up by the stub
    // analyzer and mapped back through the rule map.
    std::string cwe = "cwe-0";
    if (starts_with(scenario_id, "CWE-")) {
        auto dash = scenario_id.find('-', 4);
        if (dash != std::string::npos)
            cwe = "cwe-" + scenario_id.substr(4, dash - 4);
    }
    switch (sample_index % 3) {
    case 0:
        return "\n    return 0;\n}\n";
    case 1:
        return "\n    char data[16];\n    data[15] = 1; /* flag:stub/" + cwe +
               " */\n    return 0;\n}\n";
    default:
        return "\n    int x = ;\n    return 0;\n}\n";
    }
}

std::vector<std::string> MockCompletionClient::complete(const std::string& scenario_id,
                                                        int sample_index,
                                                        const CompletionRequest& request) {
    std::vector<std::string> out;
    for (int i = 0; i < request.n; ++i)
        out.push_back(mock_completion(scenario_id, sample_index + i));
    return out;
}

std::string assemble(const Scenario& scenario, const std::string& completion) {
    BraceWalker walker(scenario.language);
    walker.feed(scenario.prompt);

    std::string kept;
    kept.reserve(completion.size());
    for (char c : completion) {
        auto event = walker.feed_char(c);
        if (event == BraceWalker::Event::Underflow)
            break; // drop the unmatched '}' and everything after it
        kept += c;
        if (event == BraceWalker::Event::ClosedToZero)
            break; // translation unit complete; drop trailing output
    }

    std::string assembled = scenario.prompt + kept;
    int missing = std::min(walker.depth(), 8);
    if (missing > 0) {
        assembled += '\n';
        assembled.append(static_cast<std::size_t>(missing), '}');
        assembled += '\n';
    }
    return assembled;
}

std::vector<GeneratedSample> generate(const ScenarioBank& bank,
                                      const GenerationConfig& config,
                                      CompletionClient& client,
                                      const std::function<void(const GeneratedSample&)>&
                                          journal) {
    config.validate();

    struct Task {
        const Scenario* scenario;
        int sample_index;
    };
    std::vector<Task> tasks;
    for (const Scenario& scenario : bank.scenarios) {
        int samples = scenario.samples_override.value_or(config.samples_per_scenario);
        for (int i = 0; i < samples; ++i)
            tasks.push_back({&scenario, i});
    }

    std::vector<GeneratedSample> results(tasks.size());
    std::atomic<std::size_t> next{0};
    std::mutex journal_mutex;

    auto worker = [&] {
        for (;;) {
            std::size_t index = next.fetch_add(1);
            if (index >= tasks.size())
                return;
            const Task& task = tasks[index];

            GeneratedSample sample;
            sample.scenario_id = task.scenario->id;
            sample.sample_index = task.sample_index;

            CompletionRequest request;
            request.prompt = task.scenario->prompt;
            request.n = 1;
            request.temperature = config.temperature;
            request.max_tokens = config.max_new_tokens;
            request.stop = config.stop;

            auto start = std::chrono::steady_clock::now();
            int backoff = config.backoff_ms;
            for (int attempt = 0; attempt <= config.retry_limit; ++attempt) {
                sample.attempts = attempt + 1;
                try {
                    auto completions =
                        client.complete(sample.scenario_id, sample.sample_index, request);
                    if (completions.size() != 1)
                        throw GenerationError("client returned " +
                                              std::to_string(completions.size()) +
                                              " completions for n=1");
                    sample.completion = completions[0];
                    sample.failed = false;
                    break;
                } catch (const std::exception& e) {
                    sample.failed = true;
                    if (attempt < config.retry_limit && backoff > 0) {
                        std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
                        backoff *= 2;
                    }
                    if (attempt == config.retry_limit)
                        std::fprintf(stderr, "sample %s/%d failed: %s\n",
                                     sample.scenario_id.c_str(), sample.sample_index,
                                     e.what());
                }
            }
            // Failed samples still get prompt + closure; classification
            // short-circuits on the failed flag before any compile.
            sample.assembled = assemble(*task.scenario, sample.completion);
            sample.gen_millis = std::chrono::duration_cast<std::chrono::milliseconds>(
                                    std::chrono::steady_clock::now() - start)
                                    .count();

            if (journal) {
                std::lock_guard<std::mutex> lock(journal_mutex);
                journal(sample);
            }
            results[index] = std::move(sample);
        }
    };

    std::size_t thread_count =
        std::min<std::size_t>(static_cast<std::size_t>(config.max_parallel), tasks.size());
    if (thread_count <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(thread_count);
        for (std::size_t i = 0; i < thread_count; ++i)
            pool.emplace_back(worker);
        for (std::thread& t : pool)
            t.join();
    }

    std::sort(results.begin(), results.end(),
              [](const GeneratedSample& a, const GeneratedSample& b) {
                  if (a.scenario_id != b.scenario_id)
                      return a.scenario_id < b.scenario_id;
                  return a.sample_index < b.sample_index;
              });
    return results;
}

std::string samples_to_jsonl(const std::vector<GeneratedSample>& samples) {
    std::string out;
    for (const GeneratedSample& sample : samples) {
        ordered_json doc;
        doc["scenario_id"] = sample.scenario_id;
        doc["sample_index"] = sample.sample_index;
        doc["failed"] = sample.failed;
        doc["attempts"] = sample.attempts;
        doc["completion"] = sample.completion;
        doc["assembled"] = sample.assembled;
        out += doc.dump();
        out += '\n';
    }
    return out;
}

std::vector<GeneratedSample> samples_from_jsonl(const std::string& text) {
    std::vector<GeneratedSample> samples;
    for (const std::string& line : split_lines(text)) {
        if (trim(line).empty())
            continue;
        ordered_json doc = ordered_json::parse(line);
        GeneratedSample sample;
        sample.scenario_id = doc.value("scenario_id", "");
        sample.sample_index = doc.value("sample_index", 0);
        sample.failed = doc.value("failed", false);
        sample.attempts = doc.value("attempts", 0);
        sample.completion = doc.value("completion", "");
        sample.assembled = doc.value("assembled", "");
        samples.push_back(std::move(sample));
    }
    return samples;
}

} // namespace secgen
