#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "kds/backends.hpp"
#include "kds/corpus.hpp"
#include "kds/knowledge.hpp"
#include "kds/selection.hpp"

namespace kds {

// Full pipeline configuration. Resolution precedence, highest first:
// command-line flags > environment (KDS_WORKDIR) > config file > defaults.
// Defaults mirror the standard operating point (m=10, temperature=0.7,
// tau=3, lambda=0.9, k=5000) so a bare run reproduces it.
struct PipelineConfig {
    std::string corpus_path;
    std::string workdir = "kds-work";
    FieldMap field_map;

    BackendConfig generation;
    BackendConfig nli;
    BackendConfig embedding;
    BackendConfig judge;

    SelectionConfig selection;
    KcFormula kc_formula = KcFormula::Normalized;

    // Default seed for "mock" endpoints given without an explicit ":<seed>".
    std::uint64_t seed = 0;

    std::vector<std::string> embed_fields = {"instruction", "question", "answer"};

    void validate() const;
};

// Parses the JSON config document (all keys optional).
PipelineConfig config_from_json(const nlohmann::json& j);
PipelineConfig load_config_file(const std::string& path);

// KDS_WORKDIR overrides the workdir when set. (KDS_API_KEY is read by the
// HTTP clients at request time.)
void apply_env(PipelineConfig& config);

// Applies one "--backend" value: either "<capability>=<url|mock[:seed]>" or
// a bare "mock[:seed]" which selects mocks for all four capabilities.
void apply_backend_flag(PipelineConfig& config, const std::string& value);

// Applies "--format-map instruction=...,question=...,answer=...[,id=...]".
void apply_format_map_flag(PipelineConfig& config, const std::string& value);

} // namespace kds
