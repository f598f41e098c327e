#include "kds/filters.hpp"

namespace kds {

std::optional<double> DiversityState::nearest_similarity(
    const Eigen::Ref<const Eigen::VectorXd>& candidate) const {
    const auto hit = nearest_with_index(candidate);
    if (!hit) return std::nullopt;
    return hit->first;
}

std::optional<std::pair<double, Eigen::Index>> DiversityState::nearest_with_index(
    const Eigen::Ref<const Eigen::VectorXd>& candidate) const {
    if (count_ == 0) return std::nullopt;
    if (candidate.size() != dim_) {
        throw_config("nearest_similarity: dimension mismatch (" +
                     std::to_string(candidate.size()) + " vs " +
                     std::to_string(dim_) + ")");
    }
    const double norm = candidate.norm();
    if (norm == 0.0) {
        throw_config("nearest_similarity: zero candidate vector");
    }
    Eigen::Index row = 0;
    const double max_cos =
        (unit_rows_.topRows(count_) * (candidate / norm)).maxCoeff(&row);
    return std::make_pair(std::min(1.0, std::max(-1.0, max_cos)), row);
}

void DiversityState::insert(const Eigen::Ref<const Eigen::VectorXd>& embedding) {
    const double norm = embedding.norm();
    if (norm == 0.0) {
        throw_config("DiversityState::insert: zero vector");
    }
    if (count_ == 0) {
        dim_ = embedding.size();
        unit_rows_.resize(8, dim_);
    } else if (embedding.size() != dim_) {
        throw_config("DiversityState::insert: dimension mismatch (" +
                     std::to_string(embedding.size()) + " vs " +
                     std::to_string(dim_) + ")");
    } else if (count_ == unit_rows_.rows()) {
        unit_rows_.conservativeResize(unit_rows_.rows() * 2, Eigen::NoChange);
    }
    unit_rows_.row(count_++) = (embedding / norm).transpose();
}

std::optional<double> nearest_neighbor_similarity(
    const Eigen::Ref<const Eigen::VectorXd>& candidate,
    const DiversityState& state) {
    return state.nearest_similarity(candidate);
}

bool passes_quality(std::optional<int> score, int tau) {
    if (tau < 0 || tau > 5) {
        throw_config("quality threshold tau must be in [0,5]");
    }
    return score.has_value() && *score >= tau;
}

bool passes_diversity(std::optional<double> nn_similarity, double lambda) {
    if (!(lambda > 0.0) || lambda > 1.0) {
        throw_config("diversity threshold lambda must be in (0,1]");
    }
    return !nn_similarity.has_value() || *nn_similarity < lambda;
}

std::string build_embedding_text(const InstructionRecord& rec,
                                 const std::vector<std::string>& fields) {
    std::string out;
    for (const auto& field : fields) {
        const std::string* value = nullptr;
        if (field == "instruction") value = &rec.instruction;
        else if (field == "question") value = &rec.question;
        else if (field == "answer") value = &rec.answer;
        else throw_config("unknown embedding field: " + field);
        if (!out.empty()) out += '\n';
        out += *value;
    }
    return out;
}

} // namespace kds
