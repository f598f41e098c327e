#include "kds/config.hpp"

#include <cstdlib>
#include <fstream>

#include "kds/errors.hpp"

namespace kds {

void PipelineConfig::validate() const {
    if (corpus_path.empty()) {
        throw_config("no corpus configured; pass --corpus or set it in the config file");
    }
    if (workdir.empty()) {
        throw_config("workdir must not be empty");
    }
    selection.validate();
    generation.validate("generation");
    nli.validate("nli");
    embedding.validate("embedding");
    judge.validate("judge");
    if (embed_fields.empty()) {
        throw_config("embed_fields must name at least one record field");
    }
    if (kc_formula == KcFormula::Literal && selection.metric == Metric::Ka) {
        // harmless but almost certainly a mistake
        throw_config("--kc-formula literal has no effect with --metric ka");
    }
}

namespace {

BackendConfig backend_from_json(const nlohmann::json& j, const BackendConfig& base) {
    BackendConfig cfg = base;
    if (j.contains("endpoint")) cfg.endpoint_url = j["endpoint"].get<std::string>();
    if (j.contains("model")) cfg.model_name = j["model"].get<std::string>();
    if (j.contains("max_in_flight")) cfg.max_in_flight = j["max_in_flight"].get<int>();
    if (j.contains("timeout_ms")) {
        cfg.timeout = std::chrono::milliseconds(j["timeout_ms"].get<std::int64_t>());
    }
    if (j.contains("retries")) cfg.retries = j["retries"].get<int>();
    if (j.contains("max_tokens")) cfg.max_tokens = j["max_tokens"].get<int>();
    return cfg;
}

// "mock" (no seed) resolves against the configured default seed.
std::string resolve_mock(const std::string& endpoint, std::uint64_t default_seed) {
    if (endpoint == "mock") return "mock:" + std::to_string(default_seed);
    return endpoint;
}

} // namespace

PipelineConfig config_from_json(const nlohmann::json& j) {
    PipelineConfig config;
    if (!j.is_object()) {
        throw_config("config file must hold a JSON object");
    }
    if (j.contains("corpus")) config.corpus_path = j["corpus"].get<std::string>();
    if (j.contains("workdir")) config.workdir = j["workdir"].get<std::string>();
    if (j.contains("seed")) config.seed = j["seed"].get<std::uint64_t>();

    if (j.contains("field_map")) {
        const auto& fm = j["field_map"];
        if (fm.contains("instruction")) config.field_map.instruction = fm["instruction"];
        if (fm.contains("question")) config.field_map.question = fm["question"];
        if (fm.contains("answer")) config.field_map.answer = fm["answer"];
        if (fm.contains("id")) config.field_map.id = fm["id"];
        if (fm.contains("meta")) config.field_map.meta = fm["meta"];
    }

    if (j.contains("selection")) {
        const auto& sel = j["selection"];
        if (sel.contains("k")) config.selection.k = sel["k"].get<int>();
        if (sel.contains("tau")) config.selection.tau = sel["tau"].get<int>();
        if (sel.contains("lambda")) config.selection.lambda = sel["lambda"].get<double>();
        if (sel.contains("m")) config.selection.m = sel["m"].get<int>();
        if (sel.contains("temperature")) {
            config.selection.temperature = sel["temperature"].get<double>();
        }
        if (sel.contains("metric")) {
            const auto metric = metric_from_string(sel["metric"].get<std::string>());
            if (!metric) {
                throw_config("config: unknown metric " +
                             sel["metric"].get<std::string>());
            }
            config.selection.metric = *metric;
        }
    }

    if (j.contains("kc_formula")) {
        const auto formula = j["kc_formula"].get<std::string>();
        if (formula == "normalized") config.kc_formula = KcFormula::Normalized;
        else if (formula == "literal") config.kc_formula = KcFormula::Literal;
        else throw_config("config: kc_formula must be normalized or literal");
    }

    if (j.contains("backends")) {
        const auto& b = j["backends"];
        if (b.contains("generation")) {
            config.generation = backend_from_json(b["generation"], config.generation);
        }
        if (b.contains("nli")) config.nli = backend_from_json(b["nli"], config.nli);
        if (b.contains("embedding")) {
            config.embedding = backend_from_json(b["embedding"], config.embedding);
        }
        if (b.contains("judge")) config.judge = backend_from_json(b["judge"], config.judge);
    }

    if (j.contains("embed_fields")) {
        config.embed_fields = j["embed_fields"].get<std::vector<std::string>>();
    }
    return config;
}

PipelineConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw_config("cannot open config file: " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw_config("config file " + path + " is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

void apply_env(PipelineConfig& config) {
    if (const char* workdir = std::getenv("KDS_WORKDIR"); workdir && *workdir) {
        config.workdir = workdir;
    }
}

void apply_backend_flag(PipelineConfig& config, const std::string& value) {
    const auto eq = value.find('=');
    if (eq == std::string::npos) {
        // Bare "mock[:seed]" configures every capability.
        if (value.rfind("mock", 0) != 0) {
            throw_config("--backend expects <capability>=<url|mock:seed> or "
                         "mock:<seed>, got: " + value);
        }
        const std::string endpoint = resolve_mock(value, config.seed);
        config.generation.endpoint_url = endpoint;
        config.nli.endpoint_url = endpoint;
        config.embedding.endpoint_url = endpoint;
        config.judge.endpoint_url = endpoint;
        return;
    }
    const std::string capability = value.substr(0, eq);
    const std::string endpoint = resolve_mock(value.substr(eq + 1), config.seed);
    if (capability == "generation") config.generation.endpoint_url = endpoint;
    else if (capability == "nli") config.nli.endpoint_url = endpoint;
    else if (capability == "embedding") config.embedding.endpoint_url = endpoint;
    else if (capability == "judge") config.judge.endpoint_url = endpoint;
    else {
        throw_config("--backend: unknown capability \"" + capability +
                     "\" (expected generation, nli, embedding or judge)");
    }
}

void apply_format_map_flag(PipelineConfig& config, const std::string& value) {
    std::size_t start = 0;
    while (start < value.size()) {
        auto end = value.find(',', start);
        if (end == std::string::npos) end = value.size();
        const std::string item = value.substr(start, end - start);
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 >= item.size()) {
            throw_config("--format-map expects field=key[,field=key...], got: " + item);
        }
        const std::string field = item.substr(0, eq);
        const std::string key = item.substr(eq + 1);
        if (field == "instruction") config.field_map.instruction = key;
        else if (field == "question") config.field_map.question = key;
        else if (field == "answer") config.field_map.answer = key;
        else if (field == "id") config.field_map.id = key;
        else if (field == "meta") config.field_map.meta = key;
        else throw_config("--format-map: unknown field \"" + field + "\"");
        start = end + 1;
    }
}

} // namespace kds
