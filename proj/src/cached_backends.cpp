#include "kds/cached_backends.hpp"

#include "kds/canonical.hpp"
#include "kds/errors.hpp"
#include "kds/http_backends.hpp"
#include "kds/mock_backends.hpp"

namespace kds {

CachedBackends::CachedBackends(std::shared_ptr<ChatBackend> generation,
                               std::shared_ptr<NliBackend> nli,
                               std::shared_ptr<EmbeddingBackend> embedding,
                               std::shared_ptr<ChatBackend> judge,
                               ArtifactStore& store, int generation_max_tokens)
    : generation_(std::move(generation)),
      nli_(std::move(nli)),
      embedding_(std::move(embedding)),
      judge_(std::move(judge)),
      store_(store),
      generation_max_tokens_(generation_max_tokens) {}

// ---------------------------------------------------------------------------
// Generation

nlohmann::json CachedBackends::generation_request(const InstructionRecord& rec,
                                                  int m, double temperature) const {
    nlohmann::json messages = nlohmann::json::array();
    for (const auto& msg : make_generation_messages(rec)) {
        messages.push_back({{"role", msg.role}, {"content", msg.content}});
    }
    return nlohmann::json{{"record_id", rec.id},
                          {"messages", messages},
                          {"n", m},
                          {"temperature", temperature},
                          {"max_tokens", generation_max_tokens_}};
}

namespace {

GenerationOutcome outcome_from_payload(const nlohmann::json& payload) {
    GenerationOutcome out;
    if (payload.value("failed", false)) {
        out.failure = payload.value("reason", "generation failed");
        return out;
    }
    out.responses = payload.get<ResponseSet>();
    return out;
}

} // namespace

GenerationOutcome CachedBackends::sample_responses(const InstructionRecord& rec,
                                                   int m, double temperature) {
    if (m < 2) throw_config("sample_responses requires m >= 2");
    if (temperature < 0) throw_config("temperature must be >= 0");

    const auto request = generation_request(rec, m, temperature);
    const auto key = make_cache_key("responses", generation_->id(), request);
    if (const auto cached = store_.load(Stage::Responses, key)) {
        return outcome_from_payload(nlohmann::json::parse(*cached));
    }

    const auto messages = make_generation_messages(rec);
    auto texts = generation_->complete(messages, m, temperature);

    const auto has_empty = [](const std::vector<std::string>& ts) {
        for (const auto& t : ts) {
            if (trim(t).empty()) return true;
        }
        return false;
    };
    if (has_empty(texts)) {
        texts = generation_->complete(messages, m, temperature); // one retry
    }

    nlohmann::json payload;
    GenerationOutcome out;
    if (has_empty(texts) || static_cast<int>(texts.size()) != m) {
        out.failure = "empty or missing response text after retry";
        payload = nlohmann::json{{"record_id", rec.id},
                                 {"failed", true},
                                 {"reason", out.failure}};
    } else {
        ResponseSet rs;
        rs.record_id = rec.id;
        rs.responses = std::move(texts);
        rs.temperature = temperature;
        rs.backend_id = generation_->id();
        payload = rs;
        out.responses = std::move(rs);
    }
    store_.store(Stage::Responses, key, canonical_json(payload));
    return out;
}

std::optional<GenerationOutcome> CachedBackends::try_load_responses(
    const InstructionRecord& rec, int m, double temperature) const {
    const auto request = generation_request(rec, m, temperature);
    const auto key = make_cache_key("responses", generation_->id(), request);
    const auto cached = store_.load(Stage::Responses, key);
    if (!cached) return std::nullopt;
    return outcome_from_payload(nlohmann::json::parse(*cached));
}

// ---------------------------------------------------------------------------
// NLI

NliVerdict CachedBackends::nli_classify(const std::string& premise,
                                        const std::string& hypothesis) {
    if (premise.empty() || hypothesis.empty()) {
        throw_config("nli_classify requires non-empty premise and hypothesis");
    }
    const nlohmann::json request{{"premise", premise}, {"hypothesis", hypothesis}};
    const auto key = make_cache_key("nli", nli_->id(), request);
    if (const auto cached = store_.load(Stage::Nli, key)) {
        return nlohmann::json::parse(*cached).get<NliVerdict>();
    }
    const NliVerdict verdict = nli_->classify(premise, hypothesis);
    store_.store(Stage::Nli, key, canonical_json(nlohmann::json(verdict)));
    return verdict;
}

NliFn CachedBackends::nli_fn() {
    return [this](const std::string& p, const std::string& h) {
        return nli_classify(p, h).label;
    };
}

// ---------------------------------------------------------------------------
// Embeddings

std::vector<double> CachedBackends::embed_text(const std::string& text) {
    if (trim(text).empty()) throw_config("embed_text requires non-empty text");
    const nlohmann::json request{{"text", text}};
    const auto key = make_cache_key("embeddings", embedding_->id(), request);

    std::vector<double> values;
    if (const auto cached = store_.load(Stage::Embeddings, key)) {
        values = nlohmann::json::parse(*cached).at("values").get<std::vector<double>>();
    } else {
        values = embedding_->embed(text);
        store_.store(Stage::Embeddings, key,
                     canonical_json(nlohmann::json{{"values", values}}));
    }

    if (values.empty()) throw_backend("embedding backend returned an empty vector");
    int expected = 0;
    const int dim = static_cast<int>(values.size());
    if (!embed_dim_.compare_exchange_strong(expected, dim) && expected != dim) {
        throw_backend("embedding dim mismatch: got " + std::to_string(dim) +
                      ", run is using " + std::to_string(expected));
    }
    return values;
}

std::optional<std::vector<double>> CachedBackends::try_load_embedding(
    const std::string& text) const {
    const nlohmann::json request{{"text", text}};
    const auto key = make_cache_key("embeddings", embedding_->id(), request);
    const auto cached = store_.load(Stage::Embeddings, key);
    if (!cached) return std::nullopt;
    return nlohmann::json::parse(*cached).at("values").get<std::vector<double>>();
}

// ---------------------------------------------------------------------------
// Quality judging

nlohmann::json CachedBackends::quality_request(const InstructionRecord& rec) const {
    return nlohmann::json{{"record_id", rec.id},
                          {"prompt", render_quality_prompt(rec)},
                          {"temperature", 0.0},
                          {"n", 1}};
}

QualityOutcome CachedBackends::judge_quality(const InstructionRecord& rec) {
    const auto request = quality_request(rec);
    const auto key = make_cache_key("quality", judge_->id(), request);
    if (const auto cached = store_.load(Stage::Quality, key)) {
        const auto payload = nlohmann::json::parse(*cached);
        QualityOutcome out;
        out.raw_reply = payload.value("raw", "");
        if (payload.contains("score") && !payload["score"].is_null()) {
            out.score = payload["score"].get<int>();
        }
        return out;
    }

    const std::vector<ChatMessage> messages{{"user", render_quality_prompt(rec)}};
    // Judging decodes greedily (temperature 0) so verdicts are reproducible.
    auto replies = judge_->complete(messages, 1, 0.0);
    std::optional<int> score =
        replies.empty() ? std::nullopt : parse_quality(replies.front());
    if (!score) {
        replies = judge_->complete(messages, 1, 0.0); // one retry
        score = replies.empty() ? std::nullopt : parse_quality(replies.front());
    }

    QualityOutcome out;
    out.raw_reply = replies.empty() ? "" : replies.front();
    out.score = score;

    nlohmann::json payload{{"record_id", rec.id}, {"raw", out.raw_reply}};
    payload["score"] = score ? nlohmann::json(*score) : nlohmann::json(nullptr);
    store_.store(Stage::Quality, key, canonical_json(payload));
    return out;
}

std::optional<QualityOutcome> CachedBackends::try_load_quality(
    const InstructionRecord& rec) const {
    const auto request = quality_request(rec);
    const auto key = make_cache_key("quality", judge_->id(), request);
    const auto cached = store_.load(Stage::Quality, key);
    if (!cached) return std::nullopt;
    const auto payload = nlohmann::json::parse(*cached);
    QualityOutcome out;
    out.raw_reply = payload.value("raw", "");
    if (payload.contains("score") && !payload["score"].is_null()) {
        out.score = payload["score"].get<int>();
    }
    return out;
}

std::uint64_t CachedBackends::transport_calls() const {
    return generation_->transport_calls() + nli_->transport_calls() +
           embedding_->transport_calls() + judge_->transport_calls();
}

// ---------------------------------------------------------------------------
// Factories

std::shared_ptr<ChatBackend> make_generation_backend(const BackendConfig& cfg) {
    cfg.validate("generation");
    if (cfg.is_mock()) {
        return std::make_shared<MockGenerationBackend>(cfg.mock_seed());
    }
    return std::make_shared<HttpChatBackend>(cfg, "generation");
}

std::shared_ptr<ChatBackend> make_judge_backend(const BackendConfig& cfg) {
    cfg.validate("judge");
    if (cfg.is_mock()) {
        return std::make_shared<MockJudgeBackend>(cfg.mock_seed());
    }
    return std::make_shared<HttpChatBackend>(cfg, "judge");
}

std::shared_ptr<NliBackend> make_nli_backend(const BackendConfig& cfg) {
    cfg.validate("nli");
    if (cfg.is_mock()) {
        return std::make_shared<MockNliBackend>(cfg.mock_seed());
    }
    return std::make_shared<HttpNliBackend>(cfg);
}

std::shared_ptr<EmbeddingBackend> make_embedding_backend(const BackendConfig& cfg) {
    cfg.validate("embedding");
    if (cfg.is_mock()) {
        return std::make_shared<MockEmbeddingBackend>(cfg.mock_seed());
    }
    return std::make_shared<HttpEmbeddingBackend>(cfg);
}

} // namespace kds
