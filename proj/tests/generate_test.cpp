#include <doctest.h>

#include <atomic>
#include <map>
#include <mutex>
#include <random>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "secgen/cstruct.hpp"
#include "secgen/generate.hpp"

using namespace secgen;

namespace {

Scenario c_scenario(const std::string& id, const std::string& prompt) {
    Scenario scenario;
    scenario.id = id;
    scenario.cwe = "CWE-787";
    scenario.language = Language::C;
    scenario.prompt = prompt;
    return scenario;
}

ScenarioBank two_scenario_bank() {
    ScenarioBank bank;
    bank.scenarios.push_back(c_scenario("CWE-787-0-C", "int main() {\n"));
    bank.scenarios.push_back(c_scenario("CWE-787-1-C", "void f() {\n"));
    return bank;
}

GenerationConfig mock_config(int samples, int parallel) {
    GenerationConfig config;
    config.samples_per_scenario = samples;
    config.max_parallel = parallel;
    config.retry_limit = 1;
    config.backoff_ms = 0;
    config.endpoint = "mock";
    return config;
}

} // namespace

TEST_CASE("assemble keeps a balanced completion untouched") {
    Scenario scenario = c_scenario("S", "int main() {\n");
    std::string assembled = assemble(scenario, "return 0; }");
    CHECK(assembled == "int main() {\nreturn 0; }");
}

TEST_CASE("assemble closes a dangling brace") {
    Scenario scenario = c_scenario("S", "int main() {\n");
    std::string assembled = assemble(scenario, "return 0;");
    CHECK(assembled == "int main() {\nreturn 0;\n}\n");
}

TEST_CASE("assemble truncates trailing garbage after the unit closes") {
    Scenario scenario = c_scenario("S", "int main() {\n");
    std::string assembled = assemble(scenario, "return 0; }\ngarbage() { oops\n");
    CHECK(assembled == "int main() {\nreturn 0; }");
}

TEST_CASE("assemble ignores braces inside completion strings and comments") {
    Scenario scenario = c_scenario("S", "int main() {\n");
    std::string completion = "char *s = \"}\"; // }\nreturn 0; }";
    CHECK(assemble(scenario, completion) == scenario.prompt + completion);
}

TEST_CASE("assemble drops an underflowing close brace") {
    Scenario scenario = c_scenario("S", "int x;\n"); // depth 0 prompt
    std::string assembled = assemble(scenario, "}} int y;");
    CHECK(assembled == "int x;\n");
}

TEST_CASE("assemble caps the closure at eight braces") {
    Scenario scenario = c_scenario("S", "int main() {\n");
    std::string completion = "if (a) { if (b) { if (c) { if (d) { if (e) { "
                             "if (f) { if (g) { if (h) { if (i) { x();";
    std::string assembled = assemble(scenario, completion);
    std::size_t closers = 0;
    auto tail = assembled.substr(assembled.size() - 11);
    for (char c : tail)
        if (c == '}')
            ++closers;
    CHECK(closers == 8);
}

TEST_CASE("assemble handles a complete helper before the open function") {
    // depth returns to zero inside the prompt; the completion must still
    // be allowed to close the second function
    Scenario scenario = c_scenario("S", "void done() {}\nint main() {\n");
    std::string assembled = assemble(scenario, "return 0; }\nleftover");
    CHECK(assembled == "void done() {}\nint main() {\nreturn 0; }");
}

TEST_CASE("property: assemble preserves the prompt and never ends below depth zero") {
    std::mt19937_64 rng(20240818);
    const char* prompts[] = {"int main() {\n", "int x;\n", "void f() { if (1) {\n",
                             "void done() {}\nint g() {\n"};
    const char* pieces[] = {"{", "}", "\"}\"", "'{'", "// }\n", "/* { */",
                            "return 0;", "\n", "x(", ")", ";"};
    for (int iteration = 0; iteration < 500; ++iteration) {
        Scenario scenario = c_scenario("S", prompts[rng() % 4]);
        std::string completion;
        std::size_t parts = rng() % 12;
        for (std::size_t p = 0; p < parts; ++p)
            completion += pieces[rng() % 11];
        std::string assembled = assemble(scenario, completion);
        REQUIRE(assembled.rfind(scenario.prompt, 0) == 0);
        // re-walk: the running depth never dips below zero anywhere
        BraceWalker walker(scenario.language);
        bool underflow = false;
        for (char c : assembled)
            if (walker.feed_char(c) == BraceWalker::Event::Underflow)
                underflow = true;
        CHECK_FALSE(underflow);
    }
}

TEST_CASE("mock generation produces the full sample grid in order") {
    ScenarioBank bank = two_scenario_bank();
    MockCompletionClient client;
    auto samples = generate(bank, mock_config(3, 2), client);
    REQUIRE(samples.size() == 6);
    CHECK(samples[0].scenario_id == "CWE-787-0-C");
    CHECK(samples[0].sample_index == 0);
    CHECK(samples[5].scenario_id == "CWE-787-1-C");
    CHECK(samples[5].sample_index == 2);
    for (const auto& sample : samples) {
        CHECK_FALSE(sample.failed);
        CHECK(sample.assembled.rfind(bank.find(sample.scenario_id)->prompt, 0) == 0);
    }
}

TEST_CASE("persisted samples are byte-identical across parallelism levels") {
    ScenarioBank bank = two_scenario_bank();
    MockCompletionClient client;
    auto serial = samples_to_jsonl(generate(bank, mock_config(5, 1), client));
    auto parallel4 = samples_to_jsonl(generate(bank, mock_config(5, 4), client));
    auto parallel9 = samples_to_jsonl(generate(bank, mock_config(5, 9), client));
    CHECK(serial == parallel4);
    CHECK(serial == parallel9);
}

TEST_CASE("the shipped bank at 30 samples per scenario yields 1560 records") {
    auto bank = load_bank(std::filesystem::path(SECGEN_SOURCE_ROOT) / "data" /
                          "scenarios");
    REQUIRE(bank.scenarios.size() == 52);
    MockCompletionClient client;
    auto all = generate(bank, mock_config(30, 8), client);
    CHECK(all.size() == 1560); // 52 x 30

    ScenarioBank c_only;
    for (const Scenario& scenario : bank.scenarios)
        if (scenario.language == Language::C)
            c_only.scenarios.push_back(scenario);
    auto c_samples = generate(c_only, mock_config(30, 8), client);
    CHECK(c_samples.size() == 780); // 26 x 30, one language's grid
}

TEST_CASE("zero samples per scenario is a configuration error") {
    ScenarioBank bank = two_scenario_bank();
    MockCompletionClient client;
    CHECK_THROWS_AS(generate(bank, mock_config(0, 1), client), GenerationError);
}

namespace {

// Fails a fixed number of times per sample before succeeding, or always.
class FlakyClient : public CompletionClient {
public:
    explicit FlakyClient(int failures_before_success)
        : failures_(failures_before_success) {}

    std::vector<std::string> complete(const std::string& scenario_id, int sample_index,
                                      const CompletionRequest&) override {
        std::string key = scenario_id + "#" + std::to_string(sample_index);
        int seen;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            seen = ++attempts_[key];
        }
        if (failures_ < 0 || seen <= failures_)
            throw GenerationError("transport down");
        return {"completion"};
    }

private:
    int failures_;
    std::mutex mutex_;
    std::map<std::string, int> attempts_;
};

} // namespace

TEST_CASE("a retry succeeds after transient failures") {
    ScenarioBank bank;
    bank.scenarios.push_back(c_scenario("CWE-787-0-C", "int main() {\n"));
    GenerationConfig config = mock_config(2, 2);
    config.retry_limit = 2;
    FlakyClient client(1); // first attempt fails, second succeeds
    auto samples = generate(bank, config, client);
    REQUIRE(samples.size() == 2);
    for (const auto& sample : samples) {
        CHECK_FALSE(sample.failed);
        CHECK(sample.attempts == 2);
    }
}

TEST_CASE("exhausted retries leave a failed sample with an empty completion") {
    ScenarioBank bank;
    bank.scenarios.push_back(c_scenario("CWE-787-0-C", "int main() {\n"));
    GenerationConfig config = mock_config(3, 2);
    config.retry_limit = 1;
    FlakyClient client(-1); // never succeeds
    auto samples = generate(bank, config, client);
    REQUIRE(samples.size() == 3); // conservation includes failures
    for (const auto& sample : samples) {
        CHECK(sample.failed);
        CHECK(sample.completion.empty());
        CHECK(sample.attempts == 2);
        CHECK(sample.assembled.rfind("int main() {", 0) == 0);
    }
}

TEST_CASE("http client round-trips against an in-process server") {
    httplib::Server server;
    std::atomic<int> requests{0};
    server.Post("/v1/completions", [&](const httplib::Request& req,
                                       httplib::Response& res) {
        ++requests;
        auto body = nlohmann::json::parse(req.body);
        REQUIRE(body.contains("prompt"));
        REQUIRE(body.contains("n"));
        REQUIRE(body.contains("temperature"));
        REQUIRE(body.contains("max_tokens"));
        REQUIRE(body.contains("stop"));
        nlohmann::json out;
        out["completions"] = nlohmann::json::array();
        for (int i = 0; i < body["n"].get<int>(); ++i)
            out["completions"].push_back("echo:" + body["prompt"].get<std::string>());
        res.set_content(out.dump(), "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpCompletionClient client("http://127.0.0.1:" + std::to_string(port) +
                                "/v1/completions");
    CompletionRequest request;
    request.prompt = "int main() {";
    request.n = 2;
    auto completions = client.complete("S", 0, request);
    REQUIRE(completions.size() == 2);
    CHECK(completions[0] == "echo:int main() {");
    CHECK(requests == 1);

    server.stop();
    server_thread.join();
}

TEST_CASE("http client rejects malformed responses") {
    httplib::Server server;
    server.Post("/bad", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("{\"nope\":1}", "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpCompletionClient client("http://127.0.0.1:" + std::to_string(port) + "/bad");
    CompletionRequest request;
    request.prompt = "x";
    request.n = 1;
    CHECK_THROWS_AS(client.complete("S", 0, request), GenerationError);

    server.stop();
    server_thread.join();
}
