#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kds/corpus.hpp"
#include "kds/errors.hpp"

namespace kds {

// Cosine similarity of two dense vector expressions, clamped to [-1, 1]
// against floating-point drift. Rejects dimension mismatches and zero
// vectors (cosine is undefined there).
template <typename DerivedA, typename DerivedB>
double cosine_similarity(const Eigen::MatrixBase<DerivedA>& a,
                         const Eigen::MatrixBase<DerivedB>& b) {
    if (a.size() != b.size()) {
        throw_config("cosine_similarity: dimension mismatch (" +
                     std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
                     ")");
    }
    const Eigen::VectorXd va = a.template cast<double>();
    const Eigen::VectorXd vb = b.template cast<double>();
    const double na = va.norm();
    const double nb = vb.norm();
    if (na == 0.0 || nb == 0.0) {
        throw_config("cosine_similarity: zero vector");
    }
    if (va == vb) return 1.0; // exact on identical vectors
    const double cos = va.dot(vb) / (na * nb);
    return std::min(1.0, std::max(-1.0, cos));
}

// Embeddings of the records accepted so far, in acceptance order. Rows are
// stored unit-normalized so a nearest-neighbor scan is one matrix-vector
// product.
class DiversityState {
public:
    // Absent result = empty state; the first candidate always passes.
    std::optional<double> nearest_similarity(
        const Eigen::Ref<const Eigen::VectorXd>& candidate) const;

    // Same scan, also reporting which accepted row is nearest.
    std::optional<std::pair<double, Eigen::Index>> nearest_with_index(
        const Eigen::Ref<const Eigen::VectorXd>& candidate) const;

    void insert(const Eigen::Ref<const Eigen::VectorXd>& embedding);

    Eigen::Index size() const { return count_; }
    Eigen::Index dim() const { return dim_; }

private:
    Eigen::MatrixXd unit_rows_; // capacity grows geometrically
    Eigen::Index count_ = 0;
    Eigen::Index dim_ = 0;
};

std::optional<double> nearest_neighbor_similarity(
    const Eigen::Ref<const Eigen::VectorXd>& candidate, const DiversityState& state);

// Quality gate: s_q >= tau, with unknown scores never passing.
bool passes_quality(std::optional<int> score, int tau);

// Diversity gate: accepted when the state is empty or the nearest-neighbor
// similarity is strictly below lambda.
bool passes_diversity(std::optional<double> nn_similarity, double lambda);

// Text fed to the embedding backend: the named record fields joined with
// newlines (default instruction, question, answer).
std::string build_embedding_text(const InstructionRecord& rec,
                                 const std::vector<std::string>& fields = {
                                     "instruction", "question", "answer"});

inline Eigen::VectorXd to_eigen(const std::vector<double>& values) {
    return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                             static_cast<Eigen::Index>(values.size()));
}

} // namespace kds
