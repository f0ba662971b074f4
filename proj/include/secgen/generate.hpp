#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "secgen/scenario.hpp"

namespace secgen {

class GenerationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GenerationConfig {
    int samples_per_scenario = 30;
    double temperature = 0.6;
    int max_new_tokens = 512;
    std::string endpoint; // "http://host:port/path" or "mock"
    int max_parallel = 4;
    int retry_limit = 3;
    int backoff_ms = 250; // doubled per retry
    std::vector<std::string> stop;
    std::string auth_token_env; // name of the env var holding a bearer token

    void validate() const; // throws GenerationError on bad values
};

struct CompletionRequest {
    std::string prompt;
    int n = 1;
    double temperature = 0.0;
    int max_tokens = 0;
    std::vector<std::string> stop;
};

// Transport abstraction. complete() must be callable from several threads
// at once; implementations that are not thread-safe must serialize
// internally. Throws on transport or protocol failure.
class CompletionClient {
public:
    virtual ~CompletionClient() = default;
    virtual std::vector<std::string> complete(const std::string& scenario_id,
                                              int sample_index,
                                              const CompletionRequest& request) = 0;
};

// POSTs {"prompt", "n", "temperature", "max_tokens", "stop"} to the
// endpoint and expects {"completions": [...]} of length n back.
class HttpCompletionClient : public CompletionClient {
public:
    HttpCompletionClient(std::string endpoint, std::string bearer_token = "");
    std::vector<std::string> complete(const std::string& scenario_id, int sample_index,
                                      const CompletionRequest& request) override;

private:
    std::string host_port_;
    std::string path_;
    std::string bearer_token_;
};

// Deterministic offline client: the completion is a pure function of
// (scenario_id, sample_index). Cycles through a compilable completion, a
// completion carrying an analyzer marker for the scenario's CWE, and a
// non-compiling completion.
class MockCompletionClient : public CompletionClient {
public:
    std::vector<std::string> complete(const std::string& scenario_id, int sample_index,
                                      const CompletionRequest& request) override;

    static std::string mock_completion(const std::string& scenario_id, int sample_index);
};

struct GeneratedSample {
    std::string scenario_id;
    int sample_index = 0;
    std::string completion; // raw model output, empty when failed
    std::string assembled;  // prompt + truncated completion + brace closure
    bool failed = false;    // retries exhausted
    int attempts = 0;
    long gen_millis = 0; // not persisted; wall time varies
};

// prompt + completion truncated at the first point where the running
// brace depth returns to zero inside the completion (or would go
// negative), plus up to 8 closing braces when the result ends unbalanced.
// The prompt is always preserved verbatim.
std::string assemble(const Scenario& scenario, const std::string& completion);

// Runs samples_per_scenario completions for every scenario with up to
// max_parallel requests in flight. A sample that exhausts its retries is
// recorded as failed. Results are ordered by (scenario_id, sample_index)
// regardless of completion order. `journal`, when set, is invoked once
// per finished sample (any order, serialized).
std::vector<GeneratedSample> generate(const ScenarioBank& bank,
                                      const GenerationConfig& config,
                                      CompletionClient& client,
                                      const std::function<void(const GeneratedSample&)>&
                                          journal = {});

std::string samples_to_jsonl(const std::vector<GeneratedSample>& samples);
std::vector<GeneratedSample> samples_from_jsonl(const std::string& text);

} // namespace secgen
