#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kds/artifact_store.hpp"
#include "kds/backends.hpp"

namespace kds {

// Capability view consumed by the scoring layer; returns only the label.
using NliFn =
    std::function<NliLabel(const std::string& premise, const std::string& hypothesis)>;

struct GenerationOutcome {
    std::optional<ResponseSet> responses; // absent => generation failed
    std::string failure;                  // human-readable reason when failed
    bool ok() const { return responses.has_value(); }
};

struct QualityOutcome {
    std::optional<int> score; // absent => quality-unknown
    std::string raw_reply;
};

// Cache-through facade over the four capabilities. Every call is replay
// safe: results are stored under content keys, so a warm-cache rerun
// performs zero transport operations. Failed generations and unparseable
// judge replies are cached too; clearing the artifact retries them.
//
// Safe for concurrent use; completion order never affects stored content.
class CachedBackends {
public:
    CachedBackends(std::shared_ptr<ChatBackend> generation,
                   std::shared_ptr<NliBackend> nli,
                   std::shared_ptr<EmbeddingBackend> embedding,
                   std::shared_ptr<ChatBackend> judge, ArtifactStore& store,
                   int generation_max_tokens = 256);

    // Samples m responses at the given temperature (one call with
    // candidate-count m). Empty texts are retried once, then the record is
    // flagged generation-failed.
    GenerationOutcome sample_responses(const InstructionRecord& rec, int m,
                                       double temperature);
    std::optional<GenerationOutcome> try_load_responses(const InstructionRecord& rec,
                                                        int m,
                                                        double temperature) const;

    // Directional entailment verdict, cached per ordered (premise, hypothesis).
    NliVerdict nli_classify(const std::string& premise, const std::string& hypothesis);
    NliFn nli_fn();

    // Embedding of one text; enforces a single embedding dimension per run.
    std::vector<double> embed_text(const std::string& text);
    std::optional<std::vector<double>> try_load_embedding(const std::string& text) const;

    // Quality score via the judging prompt; unparseable replies are retried
    // once and then cached as quality-unknown.
    QualityOutcome judge_quality(const InstructionRecord& rec);
    std::optional<QualityOutcome> try_load_quality(const InstructionRecord& rec) const;

    std::uint64_t transport_calls() const;

    const std::string& generation_id() const { return generation_->id(); }
    const std::string& nli_id() const { return nli_->id(); }
    const std::string& embedding_id() const { return embedding_->id(); }
    const std::string& judge_id() const { return judge_->id(); }

private:
    nlohmann::json generation_request(const InstructionRecord& rec, int m,
                                      double temperature) const;
    nlohmann::json quality_request(const InstructionRecord& rec) const;

    std::shared_ptr<ChatBackend> generation_;
    std::shared_ptr<NliBackend> nli_;
    std::shared_ptr<EmbeddingBackend> embedding_;
    std::shared_ptr<ChatBackend> judge_;
    ArtifactStore& store_;
    int generation_max_tokens_;
    mutable std::atomic<int> embed_dim_{0}; // 0 = not yet observed
};

// Builds the transport for one capability from its config: "mock:<seed>"
// selects the deterministic mock, anything else the HTTP client.
std::shared_ptr<ChatBackend> make_generation_backend(const BackendConfig& cfg);
std::shared_ptr<ChatBackend> make_judge_backend(const BackendConfig& cfg);
std::shared_ptr<NliBackend> make_nli_backend(const BackendConfig& cfg);
std::shared_ptr<EmbeddingBackend> make_embedding_backend(const BackendConfig& cfg);

} // namespace kds
