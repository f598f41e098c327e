#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "kds/errors.hpp"
#include "kds/http_backends.hpp"

using namespace kds;

namespace {

// In-process OpenAI-style endpoint capturing request bodies.
class LocalServer {
public:
    LocalServer() {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                    httplib::Response& res) {
            last_body = nlohmann::json::parse(req.body);
            last_auth = req.get_header_value("Authorization");
            ++chat_calls;
            if (fail_next_with_500.exchange(false)) {
                res.status = 500;
                res.set_content("boom", "text/plain");
                return;
            }
            const int n = last_body.value("n", 1);
            nlohmann::json reply;
            reply["choices"] = nlohmann::json::array();
            for (int i = 0; i < n; ++i) {
                reply["choices"].push_back(
                    {{"message",
                      {{"role", "assistant"},
                       {"content", "reply " + std::to_string(i)}}}});
            }
            res.set_content(reply.dump(), "application/json");
        });

        server_.Post("/v1/nli", [this](const httplib::Request& req,
                                       httplib::Response& res) {
            last_body = nlohmann::json::parse(req.body);
            ++nli_calls;
            const nlohmann::json reply{
                {"label", "contradiction"},
                {"scores",
                 {{"entailment", 0.05}, {"neutral", 0.15}, {"contradiction", 0.8}}}};
            res.set_content(reply.dump(), "application/json");
        });

        server_.Post("/v1/embeddings", [this](const httplib::Request& req,
                                              httplib::Response& res) {
            last_body = nlohmann::json::parse(req.body);
            ++embedding_calls;
            const nlohmann::json reply{
                {"data", nlohmann::json::array(
                             {{{"embedding", {0.1, 0.2, 0.3, 0.4}}}})}};
            res.set_content(reply.dump(), "application/json");
        });

        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~LocalServer() {
        server_.stop();
        thread_.join();
    }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

    nlohmann::json last_body;
    std::string last_auth;
    std::atomic<int> chat_calls{0};
    std::atomic<int> nli_calls{0};
    std::atomic<int> embedding_calls{0};
    std::atomic<bool> fail_next_with_500{false};

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

BackendConfig config_for(const LocalServer& server) {
    BackendConfig cfg;
    cfg.endpoint_url = server.url();
    cfg.model_name = "test-model";
    cfg.retries = 2;
    cfg.timeout = std::chrono::milliseconds(5000);
    return cfg;
}

} // namespace

TEST_CASE("chat client sends the OpenAI-compatible request shape") {
    LocalServer server;
    HttpChatBackend chat(config_for(server), "generation");

    const auto replies = chat.complete(
        {{"system", "be brief"}, {"user", "what is it?"}}, 3, 0.7);
    REQUIRE(replies.size() == 3);
    CHECK(replies[0] == "reply 0");
    CHECK(replies[2] == "reply 2");

    CHECK(server.last_body.at("model") == "test-model");
    CHECK(server.last_body.at("temperature") == doctest::Approx(0.7));
    CHECK(server.last_body.at("n") == 3);
    CHECK(server.last_body.at("max_tokens") == 256);
    REQUIRE(server.last_body.at("messages").size() == 2);
    CHECK(server.last_body["messages"][0]["role"] == "system");
    CHECK(server.last_body["messages"][0]["content"] == "be brief");
    CHECK(server.last_body["messages"][1]["role"] == "user");
}

TEST_CASE("chat client retries a 500 then succeeds") {
    LocalServer server;
    auto cfg = config_for(server);
    HttpChatBackend chat(cfg, "generation");
    server.fail_next_with_500 = true;

    const auto replies = chat.complete({{"user", "q"}}, 1, 0.0);
    REQUIRE(replies.size() == 1);
    CHECK(server.chat_calls.load() == 2);
    CHECK(chat.transport_calls() == 1); // one logical call
}

TEST_CASE("chat client fails with a backend error when the server is gone") {
    BackendConfig cfg;
    cfg.endpoint_url = "http://127.0.0.1:9"; // discard port, nothing listens
    cfg.model_name = "m";
    cfg.retries = 0;
    cfg.timeout = std::chrono::milliseconds(500);
    HttpChatBackend chat(cfg, "generation");
    try {
        chat.complete({{"user", "q"}}, 1, 0.0);
        FAIL("expected backend error");
    } catch (const KdsError& e) {
        CHECK(e.kind() == ErrorKind::Backend);
    }
}

TEST_CASE("bearer token from KDS_API_KEY is attached") {
    LocalServer server;
    ::setenv("KDS_API_KEY", "secret-token", 1);
    HttpChatBackend chat(config_for(server), "generation");
    chat.complete({{"user", "q"}}, 1, 0.0);
    ::unsetenv("KDS_API_KEY");
    CHECK(server.last_auth == "Bearer secret-token");
}

TEST_CASE("nli client speaks the bit-exact endpoint schema") {
    LocalServer server;
    HttpNliBackend nli(config_for(server));

    const auto verdict = nli.classify("the premise text", "the hypothesis text");
    CHECK(verdict.label == NliLabel::Contradiction);
    CHECK(verdict.p_contradiction == doctest::Approx(0.8));
    CHECK(verdict.p_entailment + verdict.p_neutral + verdict.p_contradiction ==
          doctest::Approx(1.0).epsilon(1e-6));

    // request is exactly {"premise","hypothesis"}
    CHECK(server.last_body.size() == 2);
    CHECK(server.last_body.at("premise") == "the premise text");
    CHECK(server.last_body.at("hypothesis") == "the hypothesis text");
}

TEST_CASE("embedding client speaks the OpenAI embeddings schema") {
    LocalServer server;
    HttpEmbeddingBackend embedding(config_for(server));

    const auto vec = embedding.embed("text to embed");
    CHECK(vec == std::vector<double>{0.1, 0.2, 0.3, 0.4});
    CHECK(server.last_body.at("model") == "test-model");
    REQUIRE(server.last_body.at("input").is_array());
    CHECK(server.last_body.at("input")[0] == "text to embed");
}

TEST_CASE("malformed replies surface as backend errors") {
    LocalServer server;
    auto cfg = config_for(server);
    cfg.retries = 0;

    // NLI label outside the three classes
    httplib::Client probe(server.url());
    HttpNliBackend nli(cfg);
    server.last_body = nullptr;

    // reuse chat endpoint for a shape mismatch: chat parses 'choices', feed
    // it the nli route instead by pointing a chat client at /v1/nli
    BackendConfig wrong = cfg;
    wrong.endpoint_url = server.url(); // chat posts to /v1/chat/completions
    HttpChatBackend chat(wrong, "generation");
    CHECK_NOTHROW(chat.complete({{"user", "q"}}, 1, 0.0));

    // scores that do not sum to 1 are rejected by the verdict parser
    nlohmann::json bad{{"label", "entailment"},
                       {"scores",
                        {{"entailment", 0.9}, {"neutral", 0.9}, {"contradiction", 0.9}}}};
    CHECK_THROWS_AS((void)bad.get<NliVerdict>(), KdsError);
}
