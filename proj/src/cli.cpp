#include "kds/cli.hpp"

#include <CLI11.hpp>

#include "kds/cached_backends.hpp"
#include "kds/config.hpp"
#include "kds/errors.hpp"
#include "kds/pipeline.hpp"

namespace kds {

namespace {

std::string error_line(std::string_view kind, const std::string& message) {
    const nlohmann::json j{{"error", {{"kind", std::string(kind)}, {"message", message}}}};
    return j.dump();
}

std::string_view kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Config: return "config";
        case ErrorKind::Backend: return "backend";
        case ErrorKind::MissingArtifact: return "missing_artifact";
        case ErrorKind::Io: return "io";
    }
    return "io";
}

struct CliFlags {
    std::string config_file;
    std::string corpus;
    std::string workdir;
    std::string metric;
    std::string kc_formula;
    std::string format_map;
    std::vector<std::string> backends;
    int m = 10;
    double temperature = 0.7;
    int tau = 3;
    double lambda = 0.9;
    int k = 5000;
    int max_in_flight = 8;
    std::uint64_t seed = 0;
};

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
    CLI::App app{"kds - knowledge-aware instruction-tuning data selection"};
    app.require_subcommand(1);
    app.fallthrough();

    CliFlags flags;
    app.add_option("--config", flags.config_file, "JSON config file");
    app.add_option("--corpus", flags.corpus, "line-delimited JSON corpus file");
    app.add_option("--workdir", flags.workdir,
                   "artifact/cache directory (env: KDS_WORKDIR)")
        ->capture_default_str();
    app.add_option("--metric", flags.metric,
                   "sorting metric: ka, kc or ka+kc")
        ->check(CLI::IsMember({"ka", "kc", "ka+kc"}))
        ->default_str("ka+kc");
    app.add_option("--m", flags.m, "responses sampled per record")
        ->capture_default_str();
    app.add_option("--temperature", flags.temperature, "sampling temperature")
        ->capture_default_str();
    app.add_option("--tau", flags.tau, "quality threshold in [0,5]")
        ->capture_default_str();
    app.add_option("--lambda", flags.lambda,
                   "diversity threshold in (0,1]: nearest-neighbor cosine "
                   "similarity must stay below it")
        ->capture_default_str();
    app.add_option("--k", flags.k, "data budget (subset size)")
        ->capture_default_str();
    app.add_option("--kc-formula", flags.kc_formula,
                   "kc normalization: normalized (default) or the literal "
                   "log m/(log n - H) variant, for auditing only")
        ->check(CLI::IsMember({"normalized", "literal"}))
        ->default_str("normalized");
    app.add_option("--backend", flags.backends,
                   "<capability>=<url|mock:seed> (generation, nli, embedding, "
                   "judge), or mock:<seed> for all four; repeatable")
        ->take_all();
    app.add_option("--max-in-flight", flags.max_in_flight,
                   "max concurrent requests per backend")
        ->capture_default_str();
    app.add_option("--format-map", flags.format_map,
                   "input schema, e.g. instruction=instruction,question=input,"
                   "answer=output")
        ->default_str("instruction=instruction,question=input,answer=output");
    app.add_option("--seed", flags.seed,
                   "default seed for bare \"mock\" backends")
        ->capture_default_str();

    auto* cmd_generate = app.add_subcommand("generate", "sample m responses per record");
    auto* cmd_quality = app.add_subcommand("quality", "judge record quality (0-5)");
    auto* cmd_score = app.add_subcommand("score", "compute knowledge metrics");
    auto* cmd_embed = app.add_subcommand("embed", "compute record embeddings");
    auto* cmd_select = app.add_subcommand("select", "sort, gate and pick the subset");
    auto* cmd_report = app.add_subcommand("report", "summarize a finished run");
    auto* cmd_run = app.add_subcommand("run", "run every stage end to end");

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("kds");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << error_line("config", e.what()) << "\n";
        return 2;
    }

    try {
        // Precedence: defaults < config file < env < flags.
        PipelineConfig config;
        if (!flags.config_file.empty()) {
            config = load_config_file(flags.config_file);
        }
        apply_env(config);

        if (app.count("--seed")) config.seed = flags.seed;
        if (app.count("--corpus")) config.corpus_path = flags.corpus;
        if (app.count("--workdir")) config.workdir = flags.workdir;
        if (app.count("--m")) config.selection.m = flags.m;
        if (app.count("--temperature")) config.selection.temperature = flags.temperature;
        if (app.count("--tau")) config.selection.tau = flags.tau;
        if (app.count("--lambda")) config.selection.lambda = flags.lambda;
        if (app.count("--k")) config.selection.k = flags.k;
        if (app.count("--metric")) {
            config.selection.metric = *metric_from_string(flags.metric);
        }
        if (app.count("--kc-formula")) {
            config.kc_formula = flags.kc_formula == "literal" ? KcFormula::Literal
                                                              : KcFormula::Normalized;
        }
        if (app.count("--format-map")) {
            apply_format_map_flag(config, flags.format_map);
        }
        for (const auto& backend : flags.backends) {
            apply_backend_flag(config, backend);
        }
        if (app.count("--max-in-flight")) {
            config.generation.max_in_flight = flags.max_in_flight;
            config.nli.max_in_flight = flags.max_in_flight;
            config.embedding.max_in_flight = flags.max_in_flight;
            config.judge.max_in_flight = flags.max_in_flight;
        }

        config.validate(); // before any backend is contacted

        const Corpus corpus = load_corpus(config.corpus_path, config.field_map);
        ArtifactStore store(config.workdir);
        CachedBackends backends(make_generation_backend(config.generation),
                                make_nli_backend(config.nli),
                                make_embedding_backend(config.embedding),
                                make_judge_backend(config.judge), store,
                                config.generation.max_tokens);

        PipelineOptions options;
        options.selection = config.selection;
        options.kc_formula = config.kc_formula;
        options.embed_fields = config.embed_fields;
        options.field_map = config.field_map;
        options.generation_fanout = config.generation.max_in_flight;
        options.judge_fanout = config.judge.max_in_flight;
        options.nli_fanout = config.nli.max_in_flight;
        options.embedding_fanout = config.embedding.max_in_flight;

        Pipeline pipeline(corpus, backends, store, options);

        if (cmd_generate->parsed()) {
            pipeline.cmd_generate();
            out << "generated responses for " << corpus.size() << " records\n";
        } else if (cmd_quality->parsed()) {
            pipeline.cmd_quality();
            out << "judged " << corpus.size() << " records\n";
        } else if (cmd_score->parsed()) {
            pipeline.cmd_score();
            out << "scored " << corpus.size() << " records -> "
                << pipeline.scores_path().string() << "\n";
        } else if (cmd_embed->parsed()) {
            pipeline.cmd_embed();
            out << "embedded " << corpus.size() << " records\n";
        } else if (cmd_select->parsed()) {
            const auto result = pipeline.cmd_select();
            out << "selected " << result.selected_ids.size() << " of "
                << corpus.size() << " records -> "
                << pipeline.selected_path().string() << "\n";
            if (static_cast<int>(result.selected_ids.size()) < config.selection.k) {
                out << "warning: pool exhausted below budget k="
                    << config.selection.k << "\n";
            }
        } else if (cmd_report->parsed()) {
            pipeline.cmd_report();
            out << "report written to " << (store.workdir() / "report.json").string()
                << "\n";
        } else if (cmd_run->parsed()) {
            const auto outputs = pipeline.run();
            out << "selected " << outputs.selection.selected_ids.size() << " of "
                << corpus.size() << " records -> "
                << pipeline.selected_path().string() << "\n";
            if (outputs.report.summary.shortfall > 0) {
                out << "warning: pool exhausted below budget k="
                    << config.selection.k << " (shortfall "
                    << outputs.report.summary.shortfall << ")\n";
            }
        }
        return 0;
    } catch (const KdsError& e) {
        err << error_line(kind_name(e.kind()), e.what()) << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        err << error_line("io", e.what()) << "\n";
        return 1;
    }
}

int run_cli(int argc, const char* const* argv) {
    std::vector<std::string> args;
    args.reserve(static_cast<std::size_t>(argc > 0 ? argc - 1 : 0));
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args);
}

} // namespace kds
