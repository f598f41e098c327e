#include "kds/selection.hpp"

#include <algorithm>

#include "kds/errors.hpp"

namespace kds {

void SelectionConfig::validate() const {
    if (k < 1) throw_config("k must be >= 1");
    if (tau < 0 || tau > 5) throw_config("tau must be in [0,5]");
    if (!(lambda > 0.0) || lambda > 1.0) throw_config("lambda must be in (0,1]");
    if (m < 2) throw_config("m must be >= 2");
    if (temperature < 0.0) throw_config("temperature must be >= 0");
}

void to_json(nlohmann::json& j, const SelectionConfig& c) {
    j = nlohmann::json{{"k", c.k},
                       {"tau", c.tau},
                       {"lambda", c.lambda},
                       {"metric", std::string(to_string(c.metric))},
                       {"m", c.m},
                       {"temperature", c.temperature}};
}

void from_json(const nlohmann::json& j, SelectionConfig& c) {
    j.at("k").get_to(c.k);
    j.at("tau").get_to(c.tau);
    j.at("lambda").get_to(c.lambda);
    j.at("m").get_to(c.m);
    j.at("temperature").get_to(c.temperature);
    const auto metric = metric_from_string(j.at("metric").get<std::string>());
    if (!metric) {
        throw_config("unknown metric: " + j.at("metric").get<std::string>());
    }
    c.metric = *metric;
}

std::string_view to_string(RejectReason reason) {
    switch (reason) {
        case RejectReason::Quality: return "quality";
        case RejectReason::Diversity: return "diversity";
        case RejectReason::GenerationFailed: return "generation_failed";
        case RejectReason::QualityUnknown: return "quality_unknown";
    }
    return "quality";
}

std::optional<RejectReason> reject_reason_from_string(std::string_view s) {
    if (s == "quality") return RejectReason::Quality;
    if (s == "diversity") return RejectReason::Diversity;
    if (s == "generation_failed") return RejectReason::GenerationFailed;
    if (s == "quality_unknown") return RejectReason::QualityUnknown;
    return std::nullopt;
}

nlohmann::json SelectionResult::to_canonical_json() const {
    nlohmann::json rejected_json = nlohmann::json::array();
    for (const auto& [id, reason] : rejected) {
        rejected_json.push_back(
            nlohmann::json::array({id, std::string(to_string(reason))}));
    }
    return nlohmann::json{{"selected_ids", selected_ids},
                          {"rejected", rejected_json},
                          {"sorted_pool_order", sorted_pool_order}};
}

SelectionResult SelectionResult::from_canonical_json(const nlohmann::json& j) {
    SelectionResult result;
    j.at("selected_ids").get_to(result.selected_ids);
    j.at("sorted_pool_order").get_to(result.sorted_pool_order);
    for (const auto& pair : j.at("rejected")) {
        const auto reason = reject_reason_from_string(pair.at(1).get<std::string>());
        if (!reason) {
            throw_config("unknown reject reason: " + pair.at(1).get<std::string>());
        }
        result.rejected.emplace_back(pair.at(0).get<std::string>(), *reason);
    }
    return result;
}

std::vector<std::string> sort_pool(
    const std::unordered_map<std::string, KnowledgeScores>& scores, Metric metric,
    const std::vector<std::string>& corpus_order) {
    struct Entry {
        const std::string* id;
        double value;
    };
    std::vector<Entry> entries;
    entries.reserve(scores.size());
    for (const auto& id : corpus_order) {
        const auto it = scores.find(id);
        if (it == scores.end()) continue;
        entries.push_back({&id, it->second.metric_value(metric)});
    }
    // Stable: equal scores keep corpus order.
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry& a, const Entry& b) { return a.value > b.value; });

    std::vector<std::string> pool;
    pool.reserve(entries.size());
    for (const auto& e : entries) pool.push_back(*e.id);
    return pool;
}

SelectionResult select_subset(const std::vector<std::string>& pool,
                              const SelectionInputs& inputs,
                              const SelectionConfig& config) {
    config.validate();

    SelectionResult result;
    result.sorted_pool_order = pool;

    DiversityState state;
    std::vector<std::string> accepted_ids;
    int seq = 0;

    for (const auto& id : pool) {
        if (static_cast<int>(result.selected_ids.size()) >= config.k) break;

        const auto quality = inputs.quality_of(id);

        TraceEvent event;
        event.seq = seq++;
        event.id = id;
        event.quality = quality;

        if (!passes_quality(quality, config.tau)) {
            const auto reason = quality.has_value() ? RejectReason::Quality
                                                    : RejectReason::QualityUnknown;
            event.accepted = false;
            event.reason = reason;
            result.events.push_back(std::move(event));
            result.rejected.emplace_back(id, reason);
            continue;
        }

        const auto embedding = inputs.embedding_of(id);
        if (!embedding) {
            throw_missing_artifact("no embedding artifact for visited record \"" +
                                   id + "\"; run 'embed' first");
        }

        const auto nearest = state.nearest_with_index(*embedding);
        if (nearest) event.nn_similarity = nearest->first;

        if (!passes_diversity(event.nn_similarity, config.lambda)) {
            event.accepted = false;
            event.reason = RejectReason::Diversity;
            event.blocking_id = accepted_ids[static_cast<std::size_t>(nearest->second)];
            result.events.push_back(std::move(event));
            result.rejected.emplace_back(id, RejectReason::Diversity);
            continue;
        }

        event.accepted = true;
        state.insert(*embedding);
        accepted_ids.push_back(id);
        result.selected_ids.push_back(id);
        result.events.push_back(std::move(event));
    }
    return result;
}

void sort_rejected_by_corpus_order(
    std::vector<std::pair<std::string, RejectReason>>& rejected,
    const std::vector<std::string>& corpus_order) {
    std::unordered_map<std::string, std::size_t> position;
    position.reserve(corpus_order.size());
    for (std::size_t i = 0; i < corpus_order.size(); ++i) {
        position.emplace(corpus_order[i], i);
    }
    std::stable_sort(rejected.begin(), rejected.end(),
                     [&](const auto& a, const auto& b) {
                         return position.at(a.first) < position.at(b.first);
                     });
}

} // namespace kds
