#include "kds/knowledge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "kds/canonical.hpp"
#include "kds/errors.hpp"
#include "kds/union_find.hpp"

namespace kds {

std::string_view to_string(Metric metric) {
    switch (metric) {
        case Metric::Ka: return "ka";
        case Metric::Kc: return "kc";
        case Metric::KaPlusKc: return "ka+kc";
    }
    return "ka+kc";
}

std::optional<Metric> metric_from_string(std::string_view s) {
    if (s == "ka") return Metric::Ka;
    if (s == "kc") return Metric::Kc;
    if (s == "ka+kc" || s == "ka_plus_kc") return Metric::KaPlusKc;
    return std::nullopt;
}

double KnowledgeScores::metric_value(Metric metric) const {
    switch (metric) {
        case Metric::Ka: return ka.value();
        case Metric::Kc: return kc.value();
        case Metric::KaPlusKc: return combined.value();
    }
    return combined.value();
}

int count_entailments(const ResponseSet& responses, const std::string& answer,
                      const NliFn& nli) {
    if (trim(answer).empty()) {
        throw_config("compute_ka requires a non-empty reference answer");
    }
    if (responses.responses.empty()) {
        throw_config("compute_ka requires at least one response");
    }
    int count = 0;
    for (const auto& response : responses.responses) {
        // Premise is the model response, hypothesis the reference answer.
        if (nli(response, answer) == NliLabel::Entailment) ++count;
    }
    return count;
}

double compute_ka(const ResponseSet& responses, const std::string& answer,
                  const NliFn& nli) {
    const int m = static_cast<int>(responses.responses.size());
    return double(count_entailments(responses, answer, nli)) / m;
}

ClusterPartition cluster_responses(const ResponseSet& responses, const NliFn& nli,
                                   const ClusterOptions& options) {
    const int m = static_cast<int>(responses.responses.size());
    if (m < 2) {
        throw_config("cluster_responses requires m >= 2");
    }

    UnionFind uf(m);

    if (options.duplicate_shortcircuit) {
        std::unordered_map<std::string, int> first_seen;
        for (int j = 0; j < m; ++j) {
            const auto norm = normalize_whitespace(responses.responses[j]);
            const auto [it, inserted] = first_seen.emplace(norm, j);
            if (!inserted) uf.unite(it->second, j);
        }
    }

    for (int a = 0; a < m; ++a) {
        for (int b = a + 1; b < m; ++b) {
            if (uf.connected(a, b)) continue; // union already implied
            if (nli(responses.responses[a], responses.responses[b]) !=
                NliLabel::Entailment) {
                continue;
            }
            if (nli(responses.responses[b], responses.responses[a]) !=
                NliLabel::Entailment) {
                continue;
            }
            uf.unite(a, b);
        }
    }

    // Cluster indices in order of smallest member.
    ClusterPartition partition;
    partition.assignments.assign(m, -1);
    std::unordered_map<int, int> root_to_cluster;
    std::vector<int> sizes;
    for (int j = 0; j < m; ++j) {
        const int root = uf.find(j);
        const auto [it, inserted] =
            root_to_cluster.emplace(root, static_cast<int>(sizes.size()));
        if (inserted) sizes.push_back(0);
        partition.assignments[j] = it->second;
        ++sizes[it->second];
    }
    partition.cluster_masses.reserve(sizes.size());
    for (const int size : sizes) {
        partition.cluster_masses.push_back(double(size) / m);
    }
    return partition;
}

double cluster_entropy(const ClusterPartition& partition) {
    // Accumulate over sorted masses: permuting responses permutes cluster
    // order, and this keeps the floating-point sum bit-identical.
    auto masses = partition.cluster_masses;
    std::sort(masses.begin(), masses.end());
    double h = 0.0;
    for (const double p : masses) {
        if (p > 0.0) h -= p * std::log(p);
    }
    return h;
}

double compute_kc(const ClusterPartition& partition, int m) {
    if (m < 2) {
        throw_config("compute_kc requires m >= 2");
    }
    const int c = partition.cluster_count();
    if (c == 1) return 1.0; // H = 0 exactly
    if (c == m) return 0.0; // all singletons: H = log m exactly
    const double kc = 1.0 - cluster_entropy(partition) / std::log(double(m));
    return std::min(1.0, std::max(0.0, kc));
}

double compute_kc_literal(const ClusterPartition& partition, int m,
                          std::size_t corpus_size) {
    if (m < 2) {
        throw_config("compute_kc requires m >= 2");
    }
    if (corpus_size < 1) {
        throw_config("the literal kc formula needs the corpus size");
    }
    const double denom =
        std::log(double(corpus_size)) - cluster_entropy(partition);
    if (denom <= 0.0) return std::numeric_limits<double>::infinity();
    return std::log(double(m)) / denom;
}

KnowledgeScores score_record(const InstructionRecord& record,
                             const ResponseSet& responses, const NliFn& nli,
                             const ScoreOptions& options) {
    KnowledgeScores scores;
    scores.record_id = record.id;
    scores.m = static_cast<int>(responses.responses.size());

    const bool want_ka =
        options.metric == Metric::Ka || options.metric == Metric::KaPlusKc;
    const bool want_kc =
        options.metric == Metric::Kc || options.metric == Metric::KaPlusKc;

    if (want_ka) {
        const int count = count_entailments(responses, record.answer, nli);
        scores.entailment_count = count;
        scores.ka = double(count) / scores.m;
    }
    if (want_kc) {
        const auto partition = cluster_responses(responses, nli);
        scores.num_clusters = partition.cluster_count();
        scores.kc = options.kc_formula == KcFormula::Normalized
                        ? compute_kc(partition, scores.m)
                        : compute_kc_literal(partition, scores.m,
                                             options.corpus_size);
    }
    if (want_ka && want_kc) {
        scores.combined = *scores.ka + *scores.kc;
    }
    return scores;
}

KnowledgeScores scores_from_json(const nlohmann::json& j, std::string* status_out) {
    KnowledgeScores scores;
    scores.record_id = j.at("id").get<std::string>();
    const auto opt_double = [&](const char* key) -> std::optional<double> {
        if (!j.contains(key) || j[key].is_null()) return std::nullopt;
        return j[key].get<double>();
    };
    const auto opt_int = [&](const char* key) -> std::optional<int> {
        if (!j.contains(key) || j[key].is_null()) return std::nullopt;
        return j[key].get<int>();
    };
    scores.ka = opt_double("ka");
    scores.kc = opt_double("kc");
    scores.combined = opt_double("combined");
    scores.quality = opt_int("quality");
    scores.num_clusters = opt_int("num_clusters");
    scores.entailment_count = opt_int("entailment_count");
    scores.m = j.value("m", 0);
    if (status_out) *status_out = j.value("status", "scored");
    return scores;
}

nlohmann::json scores_to_json(const KnowledgeScores& scores,
                              const std::string& status) {
    const auto opt = [](const auto& v) {
        return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    };
    return nlohmann::json{
        {"id", scores.record_id},
        {"ka", opt(scores.ka)},
        {"kc", opt(scores.kc)},
        {"combined", opt(scores.combined)},
        {"quality", opt(scores.quality)},
        {"num_clusters", opt(scores.num_clusters)},
        {"entailment_count", opt(scores.entailment_count)},
        {"m", scores.m},
        {"status", status},
    };
}

} // namespace kds
