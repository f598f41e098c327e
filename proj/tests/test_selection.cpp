#include <doctest.h>

#include <algorithm>
#include <random>

#include "kds/errors.hpp"
#include "kds/selection.hpp"
#include "support/reference_selection.hpp"

using namespace kds;
using kds::testsupport::ReferenceItem;
using kds::testsupport::reference_select;

namespace {

KnowledgeScores scored(const std::string& id, double value) {
    KnowledgeScores s;
    s.record_id = id;
    s.combined = value;
    s.ka = value / 2;
    s.kc = value / 2;
    s.m = 4;
    return s;
}

Eigen::VectorXd unit_axis(int dim, int axis) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
    v[axis] = 1.0;
    return v;
}

} // namespace

TEST_CASE("sort_pool: stable descending with corpus-order ties") {
    std::unordered_map<std::string, KnowledgeScores> scores;
    scores.emplace("a", scored("a", 0.9));
    scores.emplace("b", scored("b", 0.4));
    scores.emplace("c", scored("c", 0.9));
    const std::vector<std::string> corpus_order{"a", "b", "c"};

    CHECK(sort_pool(scores, Metric::KaPlusKc, corpus_order) ==
          std::vector<std::string>{"a", "c", "b"});

    // all equal -> corpus order
    std::unordered_map<std::string, KnowledgeScores> equal;
    for (const auto& id : corpus_order) equal.emplace(id, scored(id, 0.5));
    CHECK(sort_pool(equal, Metric::KaPlusKc, corpus_order) == corpus_order);
}

TEST_CASE("sort_pool matches an independent sort oracle on random scores") {
    std::mt19937 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::string> corpus_order;
        std::unordered_map<std::string, KnowledgeScores> scores;
        std::vector<std::pair<double, int>> oracle_input;
        for (int i = 0; i < 100; ++i) {
            const std::string id = "r" + std::to_string(i);
            corpus_order.push_back(id);
            const double value = (rng() % 21) / 20.0; // ties likely
            scores.emplace(id, scored(id, value));
            oracle_input.emplace_back(value, i);
        }
        // independent oracle: sort (value desc, index asc) pairs
        std::sort(oracle_input.begin(), oracle_input.end(),
                  [](const auto& a, const auto& b) {
                      if (a.first != b.first) return a.first > b.first;
                      return a.second < b.second;
                  });
        std::vector<std::string> expected;
        for (const auto& [value, idx] : oracle_input) {
            expected.push_back("r" + std::to_string(idx));
        }
        CHECK(sort_pool(scores, Metric::KaPlusKc, corpus_order) == expected);
    }
}

TEST_CASE("select_subset stops at the budget; later pool members stay unvisited") {
    const std::vector<std::string> pool{"a", "b", "c"};
    SelectionInputs inputs;
    inputs.quality_of = [](const std::string&) { return std::optional<int>(5); };
    inputs.embedding_of = [&](const std::string& id) -> std::optional<Eigen::VectorXd> {
        if (id == "a") return unit_axis(4, 0);
        if (id == "b") return unit_axis(4, 1);
        return unit_axis(4, 2);
    };
    SelectionConfig config;
    config.k = 2;
    config.m = 4;

    const auto result = select_subset(pool, inputs, config);
    CHECK(result.selected_ids == std::vector<std::string>{"a", "b"});
    CHECK(result.rejected.empty());
    CHECK(result.events.size() == 2); // c never visited
}

TEST_CASE("select_subset rejects a duplicate embedding for diversity") {
    const std::vector<std::string> pool{"a", "b"};
    const auto shared = unit_axis(3, 1);
    SelectionInputs inputs;
    inputs.quality_of = [](const std::string&) { return std::optional<int>(4); };
    inputs.embedding_of = [&](const std::string&) -> std::optional<Eigen::VectorXd> {
        return shared;
    };
    SelectionConfig config;
    config.k = 5;
    config.m = 4;
    config.lambda = 0.9;

    const auto result = select_subset(pool, inputs, config);
    CHECK(result.selected_ids == std::vector<std::string>{"a"});
    REQUIRE(result.rejected.size() == 1);
    CHECK(result.rejected[0].first == "b");
    CHECK(result.rejected[0].second == RejectReason::Diversity);

    REQUIRE(result.events.size() == 2);
    CHECK(result.events[1].blocking_id == "a");
    CHECK(*result.events[1].nn_similarity == doctest::Approx(1.0));
}

TEST_CASE("select_subset applies the quality gate with reasons") {
    const std::vector<std::string> pool{"good", "bad", "unknown"};
    SelectionInputs inputs;
    inputs.quality_of = [](const std::string& id) -> std::optional<int> {
        if (id == "good") return 4;
        if (id == "bad") return 1;
        return std::nullopt;
    };
    inputs.embedding_of = [&](const std::string&) -> std::optional<Eigen::VectorXd> {
        return unit_axis(2, 0);
    };
    SelectionConfig config;
    config.k = 10;
    config.m = 4;

    const auto result = select_subset(pool, inputs, config);
    CHECK(result.selected_ids == std::vector<std::string>{"good"});
    REQUIRE(result.rejected.size() == 2);
    CHECK(result.rejected[0].second == RejectReason::Quality);
    CHECK(result.rejected[1].second == RejectReason::QualityUnknown);
}

TEST_CASE("select_subset: missing embedding for a visited id is a hard error") {
    const std::vector<std::string> pool{"a"};
    SelectionInputs inputs;
    inputs.quality_of = [](const std::string&) { return std::optional<int>(5); };
    inputs.embedding_of = [](const std::string&) -> std::optional<Eigen::VectorXd> {
        return std::nullopt;
    };
    SelectionConfig config;
    config.m = 4;
    try {
        select_subset(pool, inputs, config);
        FAIL("expected missing-artifact error");
    } catch (const KdsError& e) {
        CHECK(e.kind() == ErrorKind::MissingArtifact);
    }
}

TEST_CASE("selection config validation bounds") {
    SelectionConfig config;
    config.validate(); // defaults are the standard operating point

    SelectionConfig bad = config;
    bad.lambda = 0.0;
    CHECK_THROWS_AS(bad.validate(), KdsError);
    bad = config;
    bad.tau = 6;
    CHECK_THROWS_AS(bad.validate(), KdsError);
    bad = config;
    bad.k = 0;
    CHECK_THROWS_AS(bad.validate(), KdsError);
    bad = config;
    bad.m = 1;
    CHECK_THROWS_AS(bad.validate(), KdsError);

    // the operating point (m=10, temp 0.7, tau=3, lambda=0.9, k=5000)
    CHECK(config.k == 5000);
    CHECK(config.tau == 3);
    CHECK(config.lambda == 0.9);
    CHECK(config.m == 10);
    CHECK(config.temperature == 0.7);
}

TEST_CASE("greedy loop agrees with the straight-line reference on random instances") {
    std::mt19937 rng(1234);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 20 + static_cast<int>(rng() % 30);
        const int dim = 6;
        std::normal_distribution<double> normal(0.0, 1.0);

        std::vector<ReferenceItem> items;
        std::unordered_map<std::string, KnowledgeScores> scores;
        std::unordered_map<std::string, std::optional<int>> quality;
        std::unordered_map<std::string, Eigen::VectorXd> embeddings;
        std::vector<std::string> corpus_order;

        for (int i = 0; i < n; ++i) {
            ReferenceItem item;
            item.id = "r" + std::to_string(i);
            corpus_order.push_back(item.id);
            item.status = "scored";
            item.score = (rng() % 11) / 10.0;
            item.quality = static_cast<int>(rng() % 6);

            Eigen::VectorXd v(dim);
            if (i > 0 && rng() % 4 == 0) {
                // near-duplicate of an earlier record
                v = embeddings["r" + std::to_string(rng() % i)] +
                    0.01 * Eigen::VectorXd::NullaryExpr(dim, [&] { return normal(rng); });
            } else {
                for (int d = 0; d < dim; ++d) v[d] = normal(rng);
            }
            embeddings[item.id] = v;
            item.embedding.assign(v.data(), v.data() + dim);

            scores.emplace(item.id, scored(item.id, *item.score));
            quality[item.id] = item.quality;
            items.push_back(std::move(item));
        }

        SelectionConfig config;
        config.k = 5 + static_cast<int>(rng() % 10);
        config.tau = 2;
        config.lambda = 0.9;
        config.m = 4;

        const auto pool = sort_pool(scores, Metric::KaPlusKc, corpus_order);
        SelectionInputs inputs;
        inputs.quality_of = [&](const std::string& id) { return quality.at(id); };
        inputs.embedding_of = [&](const std::string& id) -> std::optional<Eigen::VectorXd> {
            return embeddings.at(id);
        };
        auto ours = select_subset(pool, inputs, config);
        sort_rejected_by_corpus_order(ours.rejected, corpus_order);

        const auto reference =
            reference_select(items, config.k, config.tau, config.lambda);

        REQUIRE(ours.to_canonical_json().dump() ==
                reference.to_canonical_json().dump());
    }
}
