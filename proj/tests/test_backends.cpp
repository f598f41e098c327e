#include <doctest.h>

#include <cmath>

#include "kds/cached_backends.hpp"
#include "kds/canonical.hpp"
#include "kds/errors.hpp"
#include "kds/mock_backends.hpp"
#include "support/harness.hpp"

using namespace kds;
using kds::testsupport::make_mock_stack;
using kds::testsupport::TempDir;

namespace {

InstructionRecord make_record(std::string id, std::string question,
                              std::string answer) {
    InstructionRecord rec;
    rec.id = std::move(id);
    rec.instruction = "Answer the medical question.";
    rec.question = std::move(question);
    rec.answer = std::move(answer);
    return rec;
}

} // namespace

TEST_CASE("parse_quality follows the first-standalone-integer rule") {
    CHECK(parse_quality("5") == 5);
    CHECK(parse_quality("Score: 3/5") == 3);
    CHECK(parse_quality("I rate this 2 out of 5") == 2);
    CHECK(parse_quality("4/5") == 4);
    CHECK(parse_quality("The quality score is 0.") == 0);
    CHECK(parse_quality("10") == std::nullopt);       // out of range
    CHECK(parse_quality("7/5") == std::nullopt);      // fraction out of range
    CHECK(parse_quality("great answer!") == std::nullopt);
    CHECK(parse_quality("") == std::nullopt);
    CHECK(parse_quality("v2 model says 4") == 4);     // "v2" is not standalone
    CHECK(parse_quality("rated 4.5 overall") == 4);
}

TEST_CASE("quality prompt renders the template with record fields") {
    const auto rec = make_record("r1", "What innervates it?", "The oculomotor nerve.");
    const auto prompt = render_quality_prompt(rec);
    CHECK(prompt.find("Instruction: Answer the medical question.") != std::string::npos);
    CHECK(prompt.find("Input: What innervates it?") != std::string::npos);
    CHECK(prompt.find("Response: The oculomotor nerve.") != std::string::npos);
    CHECK(prompt.find("scale of 0 to 5") != std::string::npos);
    CHECK(prompt.find("<instruct>") == std::string::npos);
    CHECK(prompt.find("<question>") == std::string::npos);
    CHECK(prompt.find("<answer>") == std::string::npos);
}

TEST_CASE("generation prompt: instruction is system, question is user") {
    auto rec = make_record("r1", "What is X?", "X.");
    auto messages = make_generation_messages(rec);
    REQUIRE(messages.size() == 2);
    CHECK(messages[0].role == "system");
    CHECK(messages[0].content == rec.instruction);
    CHECK(messages[1].role == "user");
    CHECK(messages[1].content == "What is X?");

    rec.question.clear(); // instruction-only record
    messages = make_generation_messages(rec);
    REQUIRE(messages.size() == 1);
    CHECK(messages[0].role == "user");
    CHECK(messages[0].content == rec.instruction);
}

TEST_CASE("mock generation is a pure function of seed and inputs") {
    MockGenerationBackend a(11);
    MockGenerationBackend b(11);
    MockGenerationBackend other(12);
    const std::vector<ChatMessage> messages{{"user", "topic=t1 what holds?"}};

    const auto r1 = a.complete(messages, 2, 0.7);
    const auto r2 = b.complete(messages, 2, 0.7);
    REQUIRE(r1.size() == 2);
    CHECK(r1 == r2);
    CHECK(a.complete(messages, 2, 0.7) == r1); // stable across calls
    CHECK(other.complete(messages, 2, 0.7) != r1);
    for (const auto& text : r1) CHECK_FALSE(text.empty());
}

TEST_CASE("mock nli: reflexivity, markers and curated medical pairs") {
    MockNliBackend nli(5);
    CHECK(nli.classify("the oculomotor nerve innervates it",
                       "the oculomotor nerve  innervates it").label ==
          NliLabel::Entailment);
    CHECK(nli.classify("left <<A>> right", "left <<B>> right").label ==
          NliLabel::Contradiction);
    CHECK(nli.classify(
                 "K+ reabsorption occurs in the proximal convoluted tubule (PCT)",
                 "it occurs in the thick ascending limb (loop of Henle)")
              .label == NliLabel::Contradiction);
    CHECK(nli.classify("the answer is the III (Oculomotor) nerve",
                       "it is innervated by the oculomotor nerve (cranial nerve III)")
              .label == NliLabel::Entailment);

    // fact-claim rules
    CHECK(nli.classify("we find fact=t1.0 here", "texts state fact=t1.0").label ==
          NliLabel::Entailment);
    CHECK(nli.classify("we find fact=t1.2 here", "texts state fact=t1.0").label ==
          NliLabel::Contradiction);
    CHECK(nli.classify("we find fact=t2.0 here", "texts state fact=t1.0").label ==
          NliLabel::Neutral);

    // scores sum to one
    const auto verdict = nli.classify("alpha beta", "gamma delta");
    CHECK(verdict.p_entailment + verdict.p_neutral + verdict.p_contradiction ==
          doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("mock embedder is deterministic and injective on the test set") {
    MockEmbeddingBackend emb(3);
    const auto v1 = emb.embed("some clinical text");
    const auto v2 = emb.embed("some clinical text");
    const auto v3 = emb.embed("different clinical text");
    CHECK(v1 == v2);
    CHECK(v1 != v3);
    CHECK(v1.size() == MockEmbeddingBackend::kDim);
    CHECK_THROWS_AS(emb.embed("   "), KdsError);

    // same group lands close, distinct groups stay apart
    const auto g1a = emb.embed("question one group=g1");
    const auto g1b = emb.embed("question two group=g1");
    const auto g2 = emb.embed("question three group=g2");
    const auto cosine = [](const std::vector<double>& a, const std::vector<double>& b) {
        double dot = 0, na = 0, nb = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            dot += a[i] * b[i];
            na += a[i] * a[i];
            nb += b[i] * b[i];
        }
        return dot / std::sqrt(na * nb);
    };
    CHECK(cosine(g1a, g1b) > 0.99);
    CHECK(cosine(g1a, g2) < 0.7);
}

TEST_CASE("sample_responses caches and replays byte-identically") {
    TempDir dir;
    auto stack = make_mock_stack(7, dir.path());
    const auto rec = make_record("r9", "topic=t9 what holds?", "fact=t9.0 holds.");

    const auto first = stack.backends->sample_responses(rec, 10, 0.7);
    REQUIRE(first.ok());
    CHECK(first.responses->responses.size() == 10);
    CHECK(first.responses->temperature == 0.7);
    const auto calls_after_first = stack.transport_calls();

    const auto second = stack.backends->sample_responses(rec, 10, 0.7);
    REQUIRE(second.ok());
    CHECK(second.responses->responses == first.responses->responses);
    CHECK(stack.transport_calls() == calls_after_first); // cache hit, no transport
}

TEST_CASE("generation failure is flagged, cached and replayed") {
    TempDir dir;
    auto stack = make_mock_stack(7, dir.path());
    const auto rec = make_record("r10", "gen=fail topic=t2 q?", "fact=t2.0.");

    const auto outcome = stack.backends->sample_responses(rec, 4, 0.7);
    CHECK_FALSE(outcome.ok());
    CHECK_FALSE(outcome.failure.empty());
    const auto calls = stack.transport_calls();
    CHECK(calls == 2); // initial + one retry

    const auto replay = stack.backends->sample_responses(rec, 4, 0.7);
    CHECK_FALSE(replay.ok());
    CHECK(stack.transport_calls() == calls); // replayed from cache
}

TEST_CASE("nli cache is directional") {
    TempDir dir;
    auto stack = make_mock_stack(21, dir.path());

    // With marker rule: (A,B) contradicts, but (B,A) falls through to other
    // rules, so the two directions must be cached separately.
    const std::string a = "claim <<A>> here";
    const std::string b = "claim <<B>> here";
    const auto ab = stack.backends->nli_classify(a, b);
    CHECK(ab.label == NliLabel::Contradiction);
    CHECK(stack.nli->transport_calls() == 1);

    // The reverse direction is a cache miss: (b,a) is never served from (a,b).
    stack.backends->nli_classify(b, a);
    CHECK(stack.nli->transport_calls() == 2);

    stack.backends->nli_classify(a, b);
    stack.backends->nli_classify(b, a);
    CHECK(stack.nli->transport_calls() == 2); // now both directions cached
}

TEST_CASE("judge_quality parses replies and caches unknown outcomes") {
    TempDir dir;
    auto stack = make_mock_stack(3, dir.path());

    const auto rec = make_record("r1", "topic=t3 q?", "fact=t3.0 documented.");
    const auto outcome = stack.backends->judge_quality(rec);
    REQUIRE(outcome.score.has_value());
    CHECK(*outcome.score >= 0);
    CHECK(*outcome.score <= 5);
    CHECK(stack.judge->transport_calls() == 1);

    stack.backends->judge_quality(rec);
    CHECK(stack.judge->transport_calls() == 1); // cached

    const auto garbled = make_record("r2", "judge=garbled q?", "an answer.");
    const auto unknown = stack.backends->judge_quality(garbled);
    CHECK_FALSE(unknown.score.has_value());
    CHECK(stack.judge->transport_calls() == 3); // attempt + one retry

    stack.backends->judge_quality(garbled);
    CHECK(stack.judge->transport_calls() == 3); // unknown cached too
}

TEST_CASE("embed_text enforces one dimension per run") {
    TempDir dir;
    auto stack = make_mock_stack(4, dir.path());
    CHECK(stack.backends->embed_text("text a").size() ==
          MockEmbeddingBackend::kDim);
    CHECK_THROWS_AS(stack.backends->embed_text("  "), KdsError);

    // a cached artifact of a different dimension trips the run-level check
    const nlohmann::json bogus{{"values", std::vector<double>{1.0, 2.0}}};
    stack.store->store(Stage::Embeddings,
                       make_cache_key("embeddings", stack.embedding->id(),
                                      nlohmann::json{{"text", "stale"}}),
                       bogus.dump());
    CHECK_THROWS_WITH_AS(stack.backends->embed_text("stale"),
                         doctest::Contains("dim mismatch"), KdsError);
}

TEST_CASE("warm cache means zero transport calls for a full replay") {
    TempDir dir;
    std::vector<std::string> texts;
    {
        auto stack = make_mock_stack(17, dir.path());
        const auto rec = make_record("r1", "topic=t5 q?", "fact=t5.0.");
        stack.backends->sample_responses(rec, 6, 0.7);
        stack.backends->judge_quality(rec);
        stack.backends->embed_text("embed me");
        stack.backends->nli_classify("p text", "h text");
        CHECK(stack.transport_calls() > 0);
    }
    {
        auto stack = make_mock_stack(17, dir.path()); // fresh transports, same store
        const auto rec = make_record("r1", "topic=t5 q?", "fact=t5.0.");
        stack.backends->sample_responses(rec, 6, 0.7);
        stack.backends->judge_quality(rec);
        stack.backends->embed_text("embed me");
        stack.backends->nli_classify("p text", "h text");
        CHECK(stack.transport_calls() == 0);
    }
}

TEST_CASE("backend config validation") {
    BackendConfig cfg;
    cfg.endpoint_url = "mock:42";
    cfg.validate("generation");
    CHECK(cfg.mock_seed() == 42);
    CHECK(cfg.is_mock());

    cfg.endpoint_url = "ftp://nope";
    CHECK_THROWS_AS(cfg.validate("generation"), KdsError);
    cfg.endpoint_url = "mock:abc";
    CHECK_THROWS_AS(cfg.validate("generation"), KdsError);
    cfg.endpoint_url = "http://localhost:8000";
    cfg.max_in_flight = 0;
    CHECK_THROWS_AS(cfg.validate("generation"), KdsError);
}
