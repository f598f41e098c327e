#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kds/backends.hpp"
#include "kds/cached_backends.hpp"

namespace kds {

// Equivalence-class partition of a response set. Cluster indices are
// assigned in order of each cluster's smallest member response index, and
// each mass is (cluster size) / m.
struct ClusterPartition {
    std::vector<int> assignments;       // per response, length m
    std::vector<double> cluster_masses; // length c, sums to 1
    int cluster_count() const { return static_cast<int>(cluster_masses.size()); }
    int response_count() const { return static_cast<int>(assignments.size()); }
};

enum class Metric { Ka, Kc, KaPlusKc };
enum class KcFormula { Normalized, Literal };

std::string_view to_string(Metric metric);
std::optional<Metric> metric_from_string(std::string_view s);

// Per-record scoring output. Metrics the chosen configuration did not
// compute stay absent and serialize as null.
struct KnowledgeScores {
    std::string record_id;
    std::optional<double> ka;
    std::optional<double> kc;
    std::optional<double> combined; // present iff both ka and kc are
    std::optional<int> quality;     // absent = quality-unknown
    std::optional<int> num_clusters;
    std::optional<int> entailment_count;
    int m = 0;

    double metric_value(Metric metric) const;
};

// Counts responses whose NLI(response, answer) verdict is entailment.
int count_entailments(const ResponseSet& responses, const std::string& answer,
                      const NliFn& nli);

// Fraction of responses entailing the reference answer; an integer multiple
// of 1/m in [0,1].
double compute_ka(const ResponseSet& responses, const std::string& answer,
                  const NliFn& nli);

struct ClusterOptions {
    // Byte-identical responses (after whitespace normalization) are unioned
    // without NLI calls; consistent with any reflexive judge.
    bool duplicate_shortcircuit = true;
};

// Groups responses into semantic clusters: a pair is equivalent iff it
// entails in both directions, closed transitively via union-find.
ClusterPartition cluster_responses(const ResponseSet& responses, const NliFn& nli,
                                   const ClusterOptions& options = {});

// Shannon entropy (natural log) over cluster masses; 0 log 0 = 0.
double cluster_entropy(const ClusterPartition& partition);

// Normalized consistency: 1 - H / log m. Exactly 1 for a single cluster and
// exactly 0 for m singletons.
double compute_kc(const ClusterPartition& partition, int m);

// The unnormalized variant log m / (log n - H), exposed for auditability
// only; it needs the corpus size n, is not bounded by [0,1], and returns
// +inf when the denominator vanishes. Not used by default.
double compute_kc_literal(const ClusterPartition& partition, int m,
                          std::size_t corpus_size);

struct ScoreOptions {
    Metric metric = Metric::KaPlusKc;
    KcFormula kc_formula = KcFormula::Normalized;
    std::size_t corpus_size = 0; // required by the literal kc formula
};

// Computes only the fields the chosen metric requires: kc-only runs never
// touch the reference answer.
KnowledgeScores score_record(const InstructionRecord& record,
                             const ResponseSet& responses, const NliFn& nli,
                             const ScoreOptions& options);

// Sidecar row: {"id","ka","kc","combined","quality","num_clusters",
// "entailment_count","m","status"} with absent values as null.
nlohmann::json scores_to_json(const KnowledgeScores& scores,
                              const std::string& status);
KnowledgeScores scores_from_json(const nlohmann::json& j, std::string* status_out);

} // namespace kds
