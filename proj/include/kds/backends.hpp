#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "kds/corpus.hpp"

namespace kds {

// ---------------------------------------------------------------------------
// Domain types

enum class NliLabel { Entailment, Neutral, Contradiction };

std::string_view to_string(NliLabel label);
std::optional<NliLabel> nli_label_from_string(std::string_view s);

struct NliVerdict {
    NliLabel label = NliLabel::Neutral;
    double p_entailment = 0.0;
    double p_neutral = 0.0;
    double p_contradiction = 0.0; // probabilities sum to 1 +- 1e-6
};

void to_json(nlohmann::json& j, const NliVerdict& v);
void from_json(const nlohmann::json& j, NliVerdict& v);

// The m sampled model responses for one record.
struct ResponseSet {
    std::string record_id;
    std::vector<std::string> responses; // exactly m entries
    double temperature = 0.0;
    std::string backend_id;
};

void to_json(nlohmann::json& j, const ResponseSet& r);
void from_json(const nlohmann::json& j, ResponseSet& r);

struct BackendConfig {
    std::string endpoint_url; // http(s)://... or "mock:<seed>"
    std::string model_name;
    int max_in_flight = 8;
    std::chrono::milliseconds timeout{30000};
    int retries = 3;
    int max_tokens = 256;

    void validate(std::string_view capability) const;
    bool is_mock() const { return endpoint_url.rfind("mock:", 0) == 0; }
    std::uint64_t mock_seed() const;
};

struct ChatMessage {
    std::string role;
    std::string content;
};

// ---------------------------------------------------------------------------
// Capability interfaces (transport level, uncached)

// Common base so tests can count actual backend invocations; a warm-cache
// rerun must leave every counter untouched.
class TransportCounter {
public:
    std::uint64_t transport_calls() const {
        return calls_.load(std::memory_order_relaxed);
    }

protected:
    void count_call() { calls_.fetch_add(1, std::memory_order_relaxed); }

private:
    std::atomic<std::uint64_t> calls_{0};
};

// Chat-completion capability; serves both response generation and
// quality judging. Implementations must be safe under concurrent calls.
class ChatBackend : public TransportCounter {
public:
    virtual ~ChatBackend() = default;
    // Returns n completions for the message list.
    virtual std::vector<std::string> complete(const std::vector<ChatMessage>& messages,
                                              int n, double temperature) = 0;
    virtual const std::string& id() const = 0;
};

class NliBackend : public TransportCounter {
public:
    virtual ~NliBackend() = default;
    // Directional: (premise, hypothesis) is an ordered pair.
    virtual NliVerdict classify(const std::string& premise,
                                const std::string& hypothesis) = 0;
    virtual const std::string& id() const = 0;
};

class EmbeddingBackend : public TransportCounter {
public:
    virtual ~EmbeddingBackend() = default;
    virtual std::vector<double> embed(const std::string& text) = 0;
    virtual const std::string& id() const = 0;
};

// ---------------------------------------------------------------------------
// Prompt assembly

// Directive instruction becomes the system message and the question the user
// message; instruction-only records prompt with the instruction as the user
// message.
std::vector<ChatMessage> make_generation_messages(const InstructionRecord& rec);

// The quality-scoring prompt with <instruct>, <question>, <answer>
// substituted; sent as a single user message.
std::string render_quality_prompt(const InstructionRecord& rec);

// Parses a judge reply into a score. Total function: returns the first
// standalone integer token whose value lies in [0,5]; a "k/5" fraction
// counts as k and its denominator is consumed. Everything else is
// unparseable (nullopt).
std::optional<int> parse_quality(std::string_view reply);

} // namespace kds
