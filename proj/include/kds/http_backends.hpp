#pragma once

#include <string>

#include "kds/backends.hpp"

namespace kds {

// OpenAI-compatible chat-completions client used for both response
// generation and quality judging. Request shape:
//   {model, messages:[{role,content}...], temperature, n, max_tokens}
// Reply: choices[i].message.content.
class HttpChatBackend final : public ChatBackend {
public:
    HttpChatBackend(BackendConfig cfg, std::string capability);

    std::vector<std::string> complete(const std::vector<ChatMessage>& messages,
                                      int n, double temperature) override;
    const std::string& id() const override { return id_; }

private:
    BackendConfig cfg_;
    std::string id_;
};

// Three-class NLI endpoint defined by this pipeline (bit-exact):
//   POST /v1/nli  {"premise": str, "hypothesis": str}
//   -> {"label": "entailment"|"neutral"|"contradiction",
//       "scores": {"entailment": p, "neutral": p, "contradiction": p}}
// with probabilities summing to 1 +- 1e-6.
class HttpNliBackend final : public NliBackend {
public:
    explicit HttpNliBackend(BackendConfig cfg);

    NliVerdict classify(const std::string& premise,
                        const std::string& hypothesis) override;
    const std::string& id() const override { return id_; }

private:
    BackendConfig cfg_;
    std::string id_;
};

// OpenAI-compatible /v1/embeddings client: {model, input:[str]} ->
// data[i].embedding.
class HttpEmbeddingBackend final : public EmbeddingBackend {
public:
    explicit HttpEmbeddingBackend(BackendConfig cfg);

    std::vector<double> embed(const std::string& text) override;
    const std::string& id() const override { return id_; }

private:
    BackendConfig cfg_;
    std::string id_;
};

} // namespace kds
