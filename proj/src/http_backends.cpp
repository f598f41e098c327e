#include "kds/http_backends.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "kds/errors.hpp"

namespace kds {

namespace {

struct Endpoint {
    std::string origin;      // scheme://host[:port]
    std::string path_prefix; // optional, no trailing slash
};

Endpoint split_endpoint(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw_config("endpoint_url is not a URL: " + url);
    }
    const auto path_start = url.find('/', scheme_end + 3);
    Endpoint ep;
    if (path_start == std::string::npos) {
        ep.origin = url;
    } else {
        ep.origin = url.substr(0, path_start);
        ep.path_prefix = url.substr(path_start);
        while (!ep.path_prefix.empty() && ep.path_prefix.back() == '/') {
            ep.path_prefix.pop_back();
        }
    }
    return ep;
}

httplib::Headers make_headers() {
    httplib::Headers headers;
    if (const char* key = std::getenv("KDS_API_KEY"); key && *key) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }
    return headers;
}

// POSTs JSON with exponential backoff; `retries` is the number of attempts
// after the first. Throws ErrorKind::Backend when all attempts fail.
nlohmann::json post_json(const BackendConfig& cfg, const std::string& route,
                         const nlohmann::json& body) {
    const Endpoint ep = split_endpoint(cfg.endpoint_url);
    const std::string path = ep.path_prefix + route;
    std::string last_error = "no attempt made";

    for (int attempt = 0; attempt <= cfg.retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(100) * (1 << (attempt - 1)));
        }
        // One client per request keeps this callable from many threads.
        httplib::Client client(ep.origin);
        const auto secs =
            std::chrono::duration_cast<std::chrono::seconds>(cfg.timeout);
        client.set_connection_timeout(secs.count() > 0 ? secs.count() : 1, 0);
        client.set_read_timeout(secs.count() > 0 ? secs.count() : 1, 0);

        const auto res =
            client.Post(path, make_headers(), body.dump(), "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            last_error = "HTTP " + std::to_string(res->status) + ": " + res->body;
            continue;
        }
        try {
            return nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
            last_error = std::string("invalid JSON reply: ") + e.what();
            continue;
        }
    }
    throw_backend("POST " + cfg.endpoint_url + route + " failed after " +
                  std::to_string(cfg.retries + 1) + " attempts; last error: " +
                  last_error);
}

} // namespace

// ---------------------------------------------------------------------------
// Chat completions

HttpChatBackend::HttpChatBackend(BackendConfig cfg, std::string capability)
    : cfg_(std::move(cfg)),
      id_(capability + ":" + cfg_.endpoint_url + "#" + cfg_.model_name) {}

std::vector<std::string> HttpChatBackend::complete(
    const std::vector<ChatMessage>& messages, int n, double temperature) {
    count_call();

    nlohmann::json body;
    body["model"] = cfg_.model_name;
    body["temperature"] = temperature;
    body["n"] = n;
    body["max_tokens"] = cfg_.max_tokens;
    auto& msgs = body["messages"] = nlohmann::json::array();
    for (const auto& m : messages) {
        msgs.push_back({{"role", m.role}, {"content", m.content}});
    }

    const auto reply = post_json(cfg_, "/v1/chat/completions", body);
    if (!reply.contains("choices") || !reply["choices"].is_array()) {
        throw_backend("chat reply has no choices array");
    }
    std::vector<std::string> out;
    out.reserve(reply["choices"].size());
    for (const auto& choice : reply["choices"]) {
        try {
            out.push_back(choice.at("message").at("content").get<std::string>());
        } catch (const nlohmann::json::exception& e) {
            throw_backend(std::string("malformed chat choice: ") + e.what());
        }
    }
    if (static_cast<int>(out.size()) != n) {
        throw_backend("chat reply returned " + std::to_string(out.size()) +
                      " choices, requested " + std::to_string(n));
    }
    return out;
}

// ---------------------------------------------------------------------------
// NLI

HttpNliBackend::HttpNliBackend(BackendConfig cfg)
    : cfg_(std::move(cfg)), id_("nli:" + cfg_.endpoint_url + "#" + cfg_.model_name) {}

NliVerdict HttpNliBackend::classify(const std::string& premise,
                                    const std::string& hypothesis) {
    count_call();
    const nlohmann::json body{{"premise", premise}, {"hypothesis", hypothesis}};
    const auto reply = post_json(cfg_, "/v1/nli", body);
    try {
        return reply.get<NliVerdict>();
    } catch (const nlohmann::json::exception& e) {
        throw_backend(std::string("malformed NLI reply: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Embeddings

HttpEmbeddingBackend::HttpEmbeddingBackend(BackendConfig cfg)
    : cfg_(std::move(cfg)),
      id_("embedding:" + cfg_.endpoint_url + "#" + cfg_.model_name) {}

std::vector<double> HttpEmbeddingBackend::embed(const std::string& text) {
    count_call();
    const nlohmann::json body{{"model", cfg_.model_name},
                              {"input", nlohmann::json::array({text})}};
    const auto reply = post_json(cfg_, "/v1/embeddings", body);
    try {
        const auto& data = reply.at("data");
        if (!data.is_array() || data.empty()) {
            throw_backend("embeddings reply has empty data array");
        }
        return data.at(0).at("embedding").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw_backend(std::string("malformed embeddings reply: ") + e.what());
    }
}

} // namespace kds
