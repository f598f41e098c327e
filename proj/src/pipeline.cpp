#include "kds/pipeline.hpp"

#include <fstream>
#include <unordered_map>

#include "kds/canonical.hpp"
#include "kds/errors.hpp"
#include "kds/parallel.hpp"
#include "kds/sha256.hpp"

namespace kds {

Pipeline::Pipeline(const Corpus& corpus, CachedBackends& backends,
                   ArtifactStore& store, PipelineOptions options)
    : corpus_(corpus), backends_(backends), store_(store),
      options_(std::move(options)) {
    options_.selection.validate();
    by_id_.reserve(corpus_.size());
    for (const auto& rec : corpus_.records) by_id_.emplace(rec.id, &rec);
}

std::filesystem::path Pipeline::scores_path() const {
    return store_.workdir() / "scores.jsonl";
}
std::filesystem::path Pipeline::selected_path() const {
    return store_.workdir() / "selected.jsonl";
}
std::filesystem::path Pipeline::trace_path() const {
    return store_.workdir() / "selection_trace.json";
}
std::filesystem::path Pipeline::selection_path() const {
    return store_.workdir() / "selection.json";
}

std::string Pipeline::corpus_fingerprint() const {
    Sha256 h;
    for (const auto& rec : corpus_.records) {
        h.update(rec.id);
        h.update("\x1f");
        h.update(rec.instruction);
        h.update("\x1f");
        h.update(rec.question);
        h.update("\x1f");
        h.update(rec.answer);
        h.update("\x1e");
    }
    const auto d = h.digest();
    return to_hex(d.data(), d.size());
}

std::string Pipeline::score_key(const InstructionRecord& rec) const {
    nlohmann::json request{
        {"record_id", rec.id},
        {"m", options_.selection.m},
        {"temperature", options_.selection.temperature},
        {"metric", std::string(to_string(options_.selection.metric))},
        {"kc_formula",
         options_.kc_formula == KcFormula::Normalized ? "normalized" : "literal"},
        {"tau", options_.selection.tau},
        {"generation_backend", backends_.generation_id()},
        {"nli_backend", backends_.nli_id()},
        {"judge_backend", backends_.judge_id()},
    };
    if (options_.kc_formula == KcFormula::Literal) {
        request["corpus_size"] = corpus_.size();
    }
    return make_cache_key("scores", "pipeline", request);
}

std::string Pipeline::selection_key() const {
    const nlohmann::json request{
        {"corpus", corpus_fingerprint()},
        {"config", options_.selection},
        {"kc_formula",
         options_.kc_formula == KcFormula::Normalized ? "normalized" : "literal"},
        {"generation_backend", backends_.generation_id()},
        {"nli_backend", backends_.nli_id()},
        {"judge_backend", backends_.judge_id()},
        {"embedding_backend", backends_.embedding_id()},
    };
    return make_cache_key("selection", "pipeline", request);
}

// ---------------------------------------------------------------------------
// Stages

void Pipeline::cmd_quality() {
    parallel_for(corpus_.size(), options_.judge_fanout, [&](std::size_t i) {
        backends_.judge_quality(corpus_.records[i]);
    });
}

void Pipeline::generate_for(const std::vector<const InstructionRecord*>& records) {
    parallel_for(records.size(), options_.generation_fanout, [&](std::size_t i) {
        backends_.sample_responses(*records[i], options_.selection.m,
                                   options_.selection.temperature);
    });
}

void Pipeline::cmd_generate() {
    std::vector<const InstructionRecord*> all;
    all.reserve(corpus_.size());
    for (const auto& rec : corpus_.records) all.push_back(&rec);
    generate_for(all);
}

void Pipeline::embed_for(const std::vector<const InstructionRecord*>& records) {
    parallel_for(records.size(), options_.embedding_fanout, [&](std::size_t i) {
        backends_.embed_text(build_embedding_text(*records[i], options_.embed_fields));
    });
}

void Pipeline::cmd_embed() {
    std::vector<const InstructionRecord*> all;
    all.reserve(corpus_.size());
    for (const auto& rec : corpus_.records) all.push_back(&rec);
    embed_for(all);
}

std::vector<SidecarRow> Pipeline::score_records(bool ignore_quality_gate) {
    std::vector<SidecarRow> rows(corpus_.size());

    parallel_for(corpus_.size(), options_.nli_fanout, [&](std::size_t i) {
        const auto& rec = corpus_.records[i];
        SidecarRow row;
        row.scores.record_id = rec.id;
        row.scores.m = options_.selection.m;

        const auto quality = backends_.try_load_quality(rec);
        if (quality) row.scores.quality = quality->score;

        if (quality && !quality->score) {
            // Judged but unparseable: can never pass the gate, so knowledge
            // scoring is skipped for it under either plan.
            row.status = "quality_unknown";
        } else if (!ignore_quality_gate && quality &&
                   !passes_quality(quality->score, options_.selection.tau)) {
            row.status = "skipped";
        } else {
            const auto outcome = backends_.try_load_responses(
                rec, options_.selection.m, options_.selection.temperature);
            if (!outcome) {
                throw_missing_artifact("record \"" + rec.id +
                                       "\" has no responses artifact; run "
                                       "'generate' first");
            }
            if (!outcome->ok()) {
                row.status = "generation_failed";
            } else {
                ScoreOptions score_options;
                score_options.metric = options_.selection.metric;
                score_options.kc_formula = options_.kc_formula;
                score_options.corpus_size = corpus_.size();
                auto scores = score_record(rec, *outcome->responses,
                                           backends_.nli_fn(), score_options);
                scores.quality = row.scores.quality;
                row.scores = std::move(scores);
                row.status = "scored";
            }
        }

        store_.store(Stage::Scores, score_key(rec),
                     canonical_json(scores_to_json(row.scores, row.status)));
        rows[i] = std::move(row);
    });
    return rows;
}

void Pipeline::write_sidecar(const std::vector<SidecarRow>& rows) const {
    std::ofstream out(scores_path(), std::ios::binary | std::ios::trunc);
    if (!out) throw_io("cannot open " + scores_path().string());
    for (const auto& row : rows) {
        out << scores_to_json(row.scores, row.status).dump() << "\n";
    }
    if (!out) throw_io("write failed: " + scores_path().string());
}

void Pipeline::cmd_score() {
    write_sidecar(score_records(options_.plan == SchedulePlan::Interleaved));
}

std::vector<SidecarRow> Pipeline::load_sidecar() const {
    std::vector<SidecarRow> rows;
    rows.reserve(corpus_.size());
    for (const auto& rec : corpus_.records) {
        const auto payload = store_.load(Stage::Scores, score_key(rec));
        if (!payload) {
            throw_missing_artifact("record \"" + rec.id +
                                   "\" has no scores artifact; run 'score' first");
        }
        SidecarRow row;
        row.scores = scores_from_json(nlohmann::json::parse(*payload), &row.status);
        rows.push_back(std::move(row));
    }
    return rows;
}

SelectionResult Pipeline::select_from_sidecar(const std::vector<SidecarRow>& sidecar) {
    std::unordered_map<std::string, KnowledgeScores> scores;
    std::vector<std::pair<std::string, RejectReason>> excluded;
    std::vector<std::string> corpus_order;
    corpus_order.reserve(corpus_.size());

    for (std::size_t i = 0; i < corpus_.size(); ++i) {
        const auto& rec = corpus_.records[i];
        corpus_order.push_back(rec.id);
        const auto& row = sidecar[i];
        if (row.status == "scored") {
            scores.emplace(rec.id, row.scores);
        } else if (row.status == "skipped") {
            excluded.emplace_back(rec.id, RejectReason::Quality);
        } else if (row.status == "generation_failed") {
            excluded.emplace_back(rec.id, RejectReason::GenerationFailed);
        } else if (row.status == "quality_unknown") {
            excluded.emplace_back(rec.id, RejectReason::QualityUnknown);
        } else {
            throw_config("unknown sidecar status: " + row.status);
        }
    }

    const auto pool = sort_pool(scores, options_.selection.metric, corpus_order);

    SelectionInputs inputs;
    inputs.quality_of = [&](const std::string& id) -> std::optional<int> {
        const auto quality = backends_.try_load_quality(*by_id_.at(id));
        if (!quality) {
            throw_missing_artifact("record \"" + id +
                                   "\" has no quality artifact; run 'quality' first");
        }
        return quality->score;
    };
    inputs.embedding_of = [&](const std::string& id) -> std::optional<Eigen::VectorXd> {
        const auto values = backends_.try_load_embedding(
            build_embedding_text(*by_id_.at(id), options_.embed_fields));
        if (!values) return std::nullopt;
        return to_eigen(*values);
    };

    SelectionResult result = select_subset(pool, inputs, options_.selection);
    result.rejected.insert(result.rejected.end(), excluded.begin(), excluded.end());
    sort_rejected_by_corpus_order(result.rejected, corpus_order);
    return result;
}

void Pipeline::write_selection_outputs(const SelectionResult& result) {
    // Selected subset in the input schema, acceptance order.
    std::vector<const InstructionRecord*> selected;
    selected.reserve(result.selected_ids.size());
    for (const auto& id : result.selected_ids) {
        const auto it = by_id_.find(id);
        if (it == by_id_.end()) throw_config("selected id not in corpus: " + id);
        selected.push_back(it->second);
    }
    write_records_jsonl(selected_path().string(), selected, options_.field_map);

    const std::string canonical = result.to_canonical_json().dump(2) + "\n";
    {
        std::ofstream out(selection_path(), std::ios::binary | std::ios::trunc);
        if (!out) throw_io("cannot open " + selection_path().string());
        out << canonical;
        if (!out) throw_io("write failed: " + selection_path().string());
    }
    store_.store(Stage::Selection, selection_key(), canonical);

    std::ofstream trace(trace_path(), std::ios::binary | std::ios::trunc);
    if (!trace) throw_io("cannot open " + trace_path().string());
    trace << trace_to_json(result, options_.selection).dump(2) << "\n";
    if (!trace) throw_io("write failed: " + trace_path().string());
}

SelectionResult Pipeline::cmd_select() {
    auto result = select_from_sidecar(load_sidecar());
    write_selection_outputs(result);
    return result;
}

RunReport Pipeline::report_from(const std::vector<SidecarRow>& sidecar,
                                const SelectionResult& selection) {
    RunReport report = build_report(static_cast<std::int64_t>(corpus_.size()),
                                    sidecar, selection, options_.selection);
    emit_report(report, store_.workdir(),
                {ReportFormat::Json, ReportFormat::Csv});
    return report;
}

RunReport Pipeline::cmd_report() {
    const auto sidecar = load_sidecar();
    std::ifstream in(selection_path(), std::ios::binary);
    if (!in) {
        throw_missing_artifact("no selection output at " +
                               selection_path().string() + "; run 'select' first");
    }
    nlohmann::json j;
    in >> j;
    const auto selection = SelectionResult::from_canonical_json(j);
    return report_from(sidecar, selection);
}

PipelineOutputs Pipeline::run() {
    cmd_quality();

    if (options_.plan == SchedulePlan::QualityFirst) {
        std::vector<const InstructionRecord*> passers;
        for (const auto& rec : corpus_.records) {
            const auto quality = backends_.try_load_quality(rec);
            if (quality && quality->score &&
                passes_quality(quality->score, options_.selection.tau)) {
                passers.push_back(&rec);
            }
        }
        generate_for(passers);
    } else {
        cmd_generate();
    }

    const auto sidecar =
        score_records(options_.plan == SchedulePlan::Interleaved);
    write_sidecar(sidecar);

    std::vector<const InstructionRecord*> pool_candidates;
    for (std::size_t i = 0; i < corpus_.size(); ++i) {
        if (sidecar[i].status == "scored") {
            pool_candidates.push_back(&corpus_.records[i]);
        }
    }
    embed_for(pool_candidates);

    PipelineOutputs outputs;
    outputs.selection = select_from_sidecar(sidecar);
    write_selection_outputs(outputs.selection);
    outputs.sidecar = sidecar;
    outputs.report = report_from(sidecar, outputs.selection);
    return outputs;
}

// ---------------------------------------------------------------------------
// Trace serialization

nlohmann::json trace_to_json(const SelectionResult& result,
                             const SelectionConfig& config) {
    nlohmann::json events = nlohmann::json::array();
    for (const auto& e : result.events) {
        nlohmann::json ev{{"seq", e.seq},
                          {"id", e.id},
                          {"action", e.accepted ? "accept" : "reject"}};
        ev["quality"] = e.quality ? nlohmann::json(*e.quality) : nlohmann::json(nullptr);
        ev["nn_similarity"] =
            e.nn_similarity ? nlohmann::json(*e.nn_similarity) : nlohmann::json(nullptr);
        if (e.reason) ev["reason"] = std::string(to_string(*e.reason));
        if (e.blocking_id) ev["blocking_id"] = *e.blocking_id;
        events.push_back(std::move(ev));
    }

    nlohmann::json rejected = nlohmann::json::array();
    for (const auto& [id, reason] : result.rejected) {
        rejected.push_back(nlohmann::json::array({id, std::string(to_string(reason))}));
    }

    return nlohmann::json{{"config", config},
                          {"pool", result.sorted_pool_order},
                          {"events", events},
                          {"selected_ids", result.selected_ids},
                          {"rejected", rejected}};
}

SelectionResult trace_from_json(const nlohmann::json& j) {
    SelectionResult result;
    j.at("pool").get_to(result.sorted_pool_order);
    j.at("selected_ids").get_to(result.selected_ids);
    for (const auto& pair : j.at("rejected")) {
        const auto reason = reject_reason_from_string(pair.at(1).get<std::string>());
        if (!reason) {
            throw_config("unknown reject reason in trace");
        }
        result.rejected.emplace_back(pair.at(0).get<std::string>(), *reason);
    }
    for (const auto& ev : j.at("events")) {
        TraceEvent event;
        event.seq = ev.at("seq").get<int>();
        event.id = ev.at("id").get<std::string>();
        event.accepted = ev.at("action").get<std::string>() == "accept";
        if (!ev.at("quality").is_null()) event.quality = ev.at("quality").get<int>();
        if (!ev.at("nn_similarity").is_null()) {
            event.nn_similarity = ev.at("nn_similarity").get<double>();
        }
        if (ev.contains("reason")) {
            event.reason = reject_reason_from_string(ev.at("reason").get<std::string>());
        }
        if (ev.contains("blocking_id")) {
            event.blocking_id = ev.at("blocking_id").get<std::string>();
        }
        result.events.push_back(std::move(event));
    }
    return result;
}

} // namespace kds
