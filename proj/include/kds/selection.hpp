#pragma once

#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "kds/filters.hpp"
#include "kds/knowledge.hpp"

namespace kds {

struct SelectionConfig {
    int k = 5000;            // data budget
    int tau = 3;             // quality threshold
    double lambda = 0.9;     // diversity threshold, (0,1]
    Metric metric = Metric::KaPlusKc;
    int m = 10;              // responses per record
    double temperature = 0.7;

    void validate() const;
};

void to_json(nlohmann::json& j, const SelectionConfig& c);
void from_json(const nlohmann::json& j, SelectionConfig& c);

enum class RejectReason { Quality, Diversity, GenerationFailed, QualityUnknown };

std::string_view to_string(RejectReason reason);
std::optional<RejectReason> reject_reason_from_string(std::string_view s);

// One accept/reject decision of the greedy loop, in visit order.
struct TraceEvent {
    int seq = 0;
    std::string id;
    bool accepted = false;
    std::optional<RejectReason> reason;
    std::optional<int> quality;
    std::optional<double> nn_similarity; // absent while the state is empty
    std::optional<std::string> blocking_id; // nearest accepted neighbor on a
                                            // diversity rejection
};

struct SelectionResult {
    std::vector<std::string> selected_ids; // acceptance order
    std::vector<std::pair<std::string, RejectReason>> rejected; // corpus order
    std::vector<std::string> sorted_pool_order;
    std::vector<TraceEvent> events; // visit order

    // Ids plus reasons only (no floats), with sorted keys: stable bytes for
    // golden comparisons.
    nlohmann::json to_canonical_json() const;
    static SelectionResult from_canonical_json(const nlohmann::json& j);
};

// Descending sort by the chosen metric over the scored records; ties broken
// by original corpus order (stable). `scores` must hold an entry with the
// metric's value for every id it contains.
std::vector<std::string> sort_pool(
    const std::unordered_map<std::string, KnowledgeScores>& scores, Metric metric,
    const std::vector<std::string>& corpus_order);

// Greedy filtered selection over a sorted pool. Quality and embeddings are
// looked up lazily per visited id; a missing artifact for a visited id is a
// hard error. Pool members after the budget is met are never visited and
// appear in neither selected nor rejected.
//
// quality_of returns nullopt for a judged-but-unparseable record (rejected
// as quality_unknown) and should throw MissingArtifact when no quality
// artifact exists at all. embedding_of returning nullopt is treated as a
// missing artifact here.
struct SelectionInputs {
    std::function<std::optional<int>(const std::string& id)> quality_of;
    std::function<std::optional<Eigen::VectorXd>(const std::string& id)> embedding_of;
};

SelectionResult select_subset(const std::vector<std::string>& pool,
                              const SelectionInputs& inputs,
                              const SelectionConfig& config);

// Orders `rejected` by corpus position so results are canonical regardless
// of the schedule that produced them.
void sort_rejected_by_corpus_order(
    std::vector<std::pair<std::string, RejectReason>>& rejected,
    const std::vector<std::string>& corpus_order);

} // namespace kds
