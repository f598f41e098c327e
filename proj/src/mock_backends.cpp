#include "kds/mock_backends.hpp"

#include <cctype>
#include <cmath>

#include "kds/canonical.hpp"
#include "kds/errors.hpp"

namespace kds {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::uint64_t h, std::string_view s) {
    for (const unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string user_content(const std::vector<ChatMessage>& messages) {
    // Last user message carries the question (or the instruction for
    // instruction-only records).
    for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
        if (it->role == "user") return it->content;
    }
    return messages.empty() ? std::string{} : messages.back().content;
}

std::string all_content(const std::vector<ChatMessage>& messages) {
    std::string out;
    for (const auto& m : messages) {
        out += m.content;
        out += '\n';
    }
    return out;
}

} // namespace

std::uint64_t mock_hash(std::uint64_t seed, std::string_view a,
                        std::string_view b, std::string_view c) {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ splitmix64(seed);
    h = fnv1a64(h, a);
    h = fnv1a64(h, "\x1f");
    h = fnv1a64(h, b);
    h = fnv1a64(h, "\x1f");
    h = fnv1a64(h, c);
    return splitmix64(h);
}

std::string extract_marker(std::string_view text, std::string_view key) {
    const std::string needle = std::string(key) + "=";
    const auto pos = text.find(needle);
    if (pos == std::string_view::npos) return {};
    std::size_t i = pos + needle.size();
    std::size_t j = i;
    const auto is_token_char = [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
               c == '.' || c == '-';
    };
    while (j < text.size() && is_token_char(text[j])) ++j;
    return std::string(text.substr(i, j - i));
}

// ---------------------------------------------------------------------------
// Generation

MockGenerationBackend::MockGenerationBackend(std::uint64_t seed)
    : seed_(seed), id_("mock:" + std::to_string(seed) + "/generation") {}

std::vector<std::string> MockGenerationBackend::complete(
    const std::vector<ChatMessage>& messages, int n, double temperature) {
    count_call();

    const std::string question = user_content(messages);
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(n));

    if (question.find("gen=fail") != std::string::npos) {
        out.assign(static_cast<std::size_t>(n), std::string{});
        return out;
    }

    std::string topic = extract_marker(question, "topic");
    if (topic.empty()) {
        topic = "h" + std::to_string(mock_hash(seed_, question, "topic") % 1000);
    }

    // Per-topic agreement rate: how often this "model" reproduces the
    // canonical fact (variant 0) instead of a conflicting variant.
    const std::uint64_t agree_pct = mock_hash(seed_, topic, "agree") % 101;

    for (int j = 0; j < n; ++j) {
        const std::string sample_tag = std::to_string(j);
        const std::uint64_t draw = mock_hash(seed_, topic, "draw", sample_tag) % 100;
        std::uint64_t variant = 0;
        if (draw >= agree_pct) {
            variant = 1 + mock_hash(seed_, topic, "variant", sample_tag) % 3;
        }

        std::string text = "According to the available references, the accepted "
                           "finding for topic " +
                           topic + " is fact=" + topic + "." +
                           std::to_string(variant) + ".";
        // Sometimes paraphrase, so response sets mix exact duplicates with
        // same-claim rewordings.
        if (mock_hash(seed_, topic, "phrase", sample_tag) % 2 == 1) {
            text += " (sampled response " + sample_tag + ", temperature " +
                    std::to_string(temperature).substr(0, 4) + ")";
        }
        out.push_back(std::move(text));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Judge

MockJudgeBackend::MockJudgeBackend(std::uint64_t seed)
    : seed_(seed), id_("mock:" + std::to_string(seed) + "/judge") {}

std::vector<std::string> MockJudgeBackend::complete(
    const std::vector<ChatMessage>& messages, int n, double /*temperature*/) {
    count_call();

    const std::string prompt = all_content(messages);
    std::vector<std::string> out;

    if (prompt.find("judge=garbled") != std::string::npos) {
        out.assign(static_cast<std::size_t>(n), "great answer!");
        return out;
    }

    // Roughly bell-shaped score distribution centered on 3-4.
    const std::uint64_t d = mock_hash(seed_, prompt, "score") % 100;
    int score = 0;
    if (d < 3) score = 0;
    else if (d < 10) score = 1;
    else if (d < 25) score = 2;
    else if (d < 55) score = 3;
    else if (d < 85) score = 4;
    else score = 5;

    const std::uint64_t fmt = mock_hash(seed_, prompt, "format") % 5;
    std::string reply;
    switch (fmt) {
        case 0: reply = std::to_string(score); break;
        case 1: reply = "Score: " + std::to_string(score) + "/5"; break;
        case 2: reply = "I rate this " + std::to_string(score) + " out of 5"; break;
        case 3: reply = std::to_string(score) + "/5"; break;
        default: reply = "The quality score is " + std::to_string(score) + "."; break;
    }
    out.assign(static_cast<std::size_t>(n), reply);
    return out;
}

// ---------------------------------------------------------------------------
// NLI

const std::vector<CuratedNliCase>& curated_nli_cases() {
    static const std::vector<CuratedNliCase> cases = {
        // Renal potassium-reabsorption answers that name the wrong segment.
        {"proximal convoluted tubule", "thick ascending limb", NliLabel::Contradiction},
        {"distal convoluted tubule", "thick ascending limb", NliLabel::Contradiction},
        {"thick ascending limb", "proximal convoluted tubule", NliLabel::Contradiction},
        {"thick ascending limb", "distal convoluted tubule", NliLabel::Contradiction},
        {"proximal convoluted tubule", "distal convoluted tubule", NliLabel::Contradiction},
        {"distal convoluted tubule", "proximal convoluted tubule", NliLabel::Contradiction},
        {"proximal convoluted tubule", "proximal convoluted tubule", NliLabel::Entailment},
        {"distal convoluted tubule", "distal convoluted tubule", NliLabel::Entailment},
        // Cranial-nerve innervation answers agreeing on the oculomotor nerve.
        {"Oculomotor", "oculomotor nerve", NliLabel::Entailment},
        {"oculomotor", "oculomotor nerve", NliLabel::Entailment},
        {"Third Cranial Nerve", "oculomotor nerve", NliLabel::Entailment},
    };
    return cases;
}

MockNliBackend::MockNliBackend(std::uint64_t seed)
    : seed_(seed), id_("mock:" + std::to_string(seed) + "/nli") {}

NliVerdict MockNliBackend::classify(const std::string& premise,
                                    const std::string& hypothesis) {
    count_call();
    if (premise.empty() || hypothesis.empty()) {
        throw_backend("nli_classify requires non-empty premise and hypothesis");
    }

    const auto verdict_for = [](NliLabel label) {
        NliVerdict v;
        v.label = label;
        v.p_entailment = label == NliLabel::Entailment ? 0.90 : 0.05;
        v.p_neutral = label == NliLabel::Neutral ? 0.90 : 0.05;
        v.p_contradiction = label == NliLabel::Contradiction ? 0.90 : 0.05;
        return v;
    };

    // 1. Reflexivity up to whitespace.
    if (normalize_whitespace(premise) == normalize_whitespace(hypothesis)) {
        return verdict_for(NliLabel::Entailment);
    }

    // 2. Explicit contradiction markers used by tests.
    if (premise.find("<<A>>") != std::string::npos &&
        hypothesis.find("<<B>>") != std::string::npos) {
        return verdict_for(NliLabel::Contradiction);
    }

    // 3. Curated medical pairs.
    for (const auto& c : curated_nli_cases()) {
        if (premise.find(c.premise_contains) != std::string::npos &&
            hypothesis.find(c.hypothesis_contains) != std::string::npos) {
            return verdict_for(c.label);
        }
    }

    // 4. Fact claims: same variant entails, same topic with a different
    //    variant contradicts, unrelated topics are neutral.
    const std::string fact_p = extract_marker(premise, "fact");
    const std::string fact_h = extract_marker(hypothesis, "fact");
    if (!fact_p.empty() && !fact_h.empty()) {
        if (fact_p == fact_h) return verdict_for(NliLabel::Entailment);
        const auto topic_of = [](const std::string& fact) {
            const auto dot = fact.rfind('.');
            return dot == std::string::npos ? fact : fact.substr(0, dot);
        };
        if (topic_of(fact_p) == topic_of(fact_h)) {
            return verdict_for(NliLabel::Contradiction);
        }
        return verdict_for(NliLabel::Neutral);
    }

    // 5. Deterministic fallback for arbitrary text.
    switch (mock_hash(seed_, premise, hypothesis) % 3) {
        case 0: return verdict_for(NliLabel::Entailment);
        case 1: return verdict_for(NliLabel::Neutral);
        default: return verdict_for(NliLabel::Contradiction);
    }
}

// ---------------------------------------------------------------------------
// Embeddings

MockEmbeddingBackend::MockEmbeddingBackend(std::uint64_t seed)
    : seed_(seed), id_("mock:" + std::to_string(seed) + "/embedding") {}

namespace {

// Unit vector with coordinates drawn from the hash stream.
std::vector<double> unit_noise(std::uint64_t seed, std::string_view tag,
                               std::string_view text, int dim) {
    std::vector<double> v(static_cast<std::size_t>(dim));
    double norm_sq = 0.0;
    for (int i = 0; i < dim; ++i) {
        const std::uint64_t h = mock_hash(seed, tag, text, std::to_string(i));
        // Map to (-1, 1).
        const double x = (double(h % 2000001) / 1000000.0) - 1.0;
        v[static_cast<std::size_t>(i)] = x;
        norm_sq += x * x;
    }
    if (norm_sq < 1e-12) {
        v[0] = 1.0;
        norm_sq = 1.0;
    }
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (auto& x : v) x *= inv;
    return v;
}

} // namespace

std::vector<double> MockEmbeddingBackend::embed(const std::string& text) {
    count_call();
    if (trim(text).empty()) {
        throw_backend("embed_text requires non-empty text");
    }

    const std::string group = extract_marker(text, "group");
    if (group.empty()) {
        return unit_noise(seed_, "noise", text, kDim);
    }

    // Members of one group sit within ~0.005 cosine of each other: a shared
    // base direction plus a small text-specific perturbation.
    const auto base = unit_noise(seed_, "groupbase", group, kDim);
    const auto noise = unit_noise(seed_, "noise", text, kDim);
    std::vector<double> v(kDim);
    double norm_sq = 0.0;
    for (int i = 0; i < kDim; ++i) {
        const double x = base[static_cast<std::size_t>(i)] +
                         0.05 * noise[static_cast<std::size_t>(i)];
        v[static_cast<std::size_t>(i)] = x;
        norm_sq += x * x;
    }
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (auto& x : v) x *= inv;
    return v;
}

} // namespace kds
