// Offline stand-in for a code-generation endpoint. Implements the wire
// contract the generate stage speaks: POST {prompt, n, temperature,
// max_tokens, stop} -> {completions: [...]} with n entries. Completions
// are a pure function of the prompt and the sample slot, so runs are
// reproducible.

#include <cstdio>
#include <cstdlib>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "secgen/util.hpp"

int main(int argc, char** argv) {
    int port = 8089;
    if (argc > 1)
        port = std::atoi(argv[1]);

    httplib::Server server;

    server.Post("/v1/completions", [](const httplib::Request& req, httplib::Response& res) {
        nlohmann::json body;
        try {
            body = nlohmann::json::parse(req.body);
        } catch (const nlohmann::json::exception&) {
            res.status = 400;
            res.set_content("{\"error\":\"bad json\"}", "application/json");
            return;
        }
        std::string prompt = body.value("prompt", "");
        int n = body.value("n", 1);
        if (prompt.empty() || n < 1) {
            res.status = 400;
            res.set_content("{\"error\":\"prompt and n required\"}", "application/json");
            return;
        }

        nlohmann::json out;
        out["completions"] = nlohmann::json::array();
        for (int i = 0; i < n; ++i) {
            // Vary by prompt digest and slot; always a plausible snippet.
            auto digest = secgen::fnv1a64(prompt) + static_cast<unsigned>(i);
            std::string completion;
            switch (digest % 3) {
            case 0:
                completion = "\n    return 0;\n}\n";
                break;
            case 1:
                completion = "\n    int value = 1;\n    (void)value;\n    return 0;\n}\n";
                break;
            default:
                completion = "\n    /* slot " + std::to_string(i) + " */\n    return 0;\n}\n";
                break;
            }
            out["completions"].push_back(completion);
        }
        res.set_content(out.dump(), "application/json");
    });

    server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("ok", "text/plain");
    });

    std::printf("mock model server listening on 127.0.0.1:%d\n", port);
    if (!server.listen("127.0.0.1", port)) {
        std::fprintf(stderr, "failed to bind port %d\n", port);
        return 1;
    }
    return 0;
}
