#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "kds/artifact_store.hpp"
#include "kds/cached_backends.hpp"
#include "kds/corpus.hpp"
#include "kds/report.hpp"
#include "kds/selection.hpp"

namespace kds {

// Execution plan for the full run. QualityFirst judges quality before any
// knowledge scoring and skips scoring for records below the threshold;
// Interleaved scores everything first and gates quality inside the greedy
// loop. Both produce the same selected set; QualityFirst spends far fewer
// backend calls and is the default.
enum class SchedulePlan { QualityFirst, Interleaved };

struct PipelineOptions {
    SelectionConfig selection;
    KcFormula kc_formula = KcFormula::Normalized;
    SchedulePlan plan = SchedulePlan::QualityFirst;
    std::vector<std::string> embed_fields = {"instruction", "question", "answer"};
    FieldMap field_map; // schema for selected.jsonl pass-through
    int generation_fanout = 8;
    int judge_fanout = 8;
    int nli_fanout = 8;
    int embedding_fanout = 8;
};

struct PipelineOutputs {
    SelectionResult selection;
    std::vector<SidecarRow> sidecar; // corpus order
    RunReport report;
};

// Stage orchestration over the artifact store. Every stage is idempotent
// and resumable: warm caches are replayed without transport calls, and a
// stage invoked before its prerequisites fails naming the stage to run.
class Pipeline {
public:
    Pipeline(const Corpus& corpus, CachedBackends& backends, ArtifactStore& store,
             PipelineOptions options);

    // Stage commands (each also usable standalone).
    void cmd_generate(); // sample m responses per record
    void cmd_quality();  // judge every record
    void cmd_score();    // knowledge metrics; writes scores.jsonl
    void cmd_embed();    // embeddings for every record
    SelectionResult cmd_select(); // writes selected.jsonl + trace + selection.json
    RunReport cmd_report();       // writes report.json / report.csv

    // Full chained run under the configured plan.
    PipelineOutputs run();

    // Sidecar rows reconstructed from score artifacts, corpus order.
    std::vector<SidecarRow> load_sidecar() const;

    std::filesystem::path scores_path() const;
    std::filesystem::path selected_path() const;
    std::filesystem::path trace_path() const;
    std::filesystem::path selection_path() const;

private:
    void generate_for(const std::vector<const InstructionRecord*>& records);
    void embed_for(const std::vector<const InstructionRecord*>& records);
    std::vector<SidecarRow> score_records(bool ignore_quality_gate);
    void write_sidecar(const std::vector<SidecarRow>& rows) const;

    std::string score_key(const InstructionRecord& rec) const;
    std::string selection_key() const;
    std::string corpus_fingerprint() const;

    SelectionResult select_from_sidecar(const std::vector<SidecarRow>& sidecar);
    void write_selection_outputs(const SelectionResult& result);
    RunReport report_from(const std::vector<SidecarRow>& sidecar,
                          const SelectionResult& selection);

    const Corpus& corpus_;
    CachedBackends& backends_;
    ArtifactStore& store_;
    PipelineOptions options_;
    std::unordered_map<std::string, const InstructionRecord*> by_id_;
};

// Trace (de)serialization, shared with the replay checks.
nlohmann::json trace_to_json(const SelectionResult& result,
                             const SelectionConfig& config);
SelectionResult trace_from_json(const nlohmann::json& j);

} // namespace kds
