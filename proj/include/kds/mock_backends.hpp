#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "kds/backends.hpp"

namespace kds {

// Deterministic offline stand-ins for the four model capabilities. Every
// mock is a pure function of (seed, inputs): two processes with the same
// seed produce identical artifacts, which is what the acceptance suite and
// CI rely on.
//
// The mocks understand a few inline markers so synthetic corpora can steer
// their behavior:
//   topic=<t>      (in a question)  the question's subject
//   fact=<t>.<v>   (in any text)    a claim: variant v of topic t's fact
//   group=<g>      (in any text)    near-duplicate family for embeddings
//   gen=fail       (in a question)  the generator returns empty text
//   judge=garbled  (in any text)    the judge replies unparseably
//
// The NLI mock judges two fact claims equal-variant as entailment and
// same-topic/different-variant as contradiction, so knowledge scores come
// out of the same machinery the production path uses.

std::uint64_t mock_hash(std::uint64_t seed, std::string_view a,
                        std::string_view b = {}, std::string_view c = {});

// Extracts "key=value" where value is a run of [A-Za-z0-9_.-]; empty when
// the marker is absent.
std::string extract_marker(std::string_view text, std::string_view key);

class MockGenerationBackend final : public ChatBackend {
public:
    explicit MockGenerationBackend(std::uint64_t seed);

    std::vector<std::string> complete(const std::vector<ChatMessage>& messages,
                                      int n, double temperature) override;
    const std::string& id() const override { return id_; }

private:
    std::uint64_t seed_;
    std::string id_;
};

class MockJudgeBackend final : public ChatBackend {
public:
    explicit MockJudgeBackend(std::uint64_t seed);

    std::vector<std::string> complete(const std::vector<ChatMessage>& messages,
                                      int n, double temperature) override;
    const std::string& id() const override { return id_; }

private:
    std::uint64_t seed_;
    std::string id_;
};

// Hand-labeled verdicts for medical response/answer pairs, matched by
// substring on both sides. Shared by the rule mock and the production
// smoke test.
struct CuratedNliCase {
    std::string_view premise_contains;
    std::string_view hypothesis_contains;
    NliLabel label;
};

const std::vector<CuratedNliCase>& curated_nli_cases();

class MockNliBackend final : public NliBackend {
public:
    explicit MockNliBackend(std::uint64_t seed);

    NliVerdict classify(const std::string& premise,
                        const std::string& hypothesis) override;
    const std::string& id() const override { return id_; }

private:
    std::uint64_t seed_;
    std::string id_;
};

class MockEmbeddingBackend final : public EmbeddingBackend {
public:
    static constexpr int kDim = 32;

    explicit MockEmbeddingBackend(std::uint64_t seed);

    std::vector<double> embed(const std::string& text) override;
    const std::string& id() const override { return id_; }

private:
    std::uint64_t seed_;
    std::string id_;
};

} // namespace kds
