// satkit — refine speaker-attributed ASR transcripts with N-pass LLM
// schedules and evaluate them against references (WDER, DER, WER, exact
// Wilcoxon comparisons, RTF and marker accounting).
//
// Exit codes: 0 success (outliers are data, not failures), 1 usage/config
// error, 2 data error, 3 backend exhaustion.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "satkit/cli.hpp"

namespace {

using namespace satkit;

std::vector<std::pair<std::string, fs::path>> parse_named_paths(
    const std::vector<std::string>& specs) {
    std::vector<std::pair<std::string, fs::path>> out;
    for (const auto& spec : specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 >= spec.size()) {
            throw ConfigError("expected name=path, got '" + spec + "'");
        }
        out.emplace_back(spec.substr(0, eq), fs::path(spec.substr(eq + 1)));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "satkit: multi-pass LLM refinement and word-level speaker-attribution "
        "scoring for clinical ASR transcripts"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    unsigned workers = 0;
    std::uint64_t seed = 0;
    std::string out_dir;
    app.add_option("--config", config_path, "run config file (JSON)");
    auto* workers_opt = app.add_option("--workers", workers, "parallel recordings");
    auto* seed_opt = app.add_option("--seed", seed, "random seed");
    auto* out_opt = app.add_option("--out", out_dir, "output directory");

    // evaluate ---------------------------------------------------------------
    auto* evaluate = app.add_subcommand("evaluate",
                                        "score hypothesis transcripts against references");
    std::string ev_manifest, ev_ref, ev_hyp, ev_name_map, ev_name = "evaluated";
    bool ev_word_weighted = false;
    evaluate->add_option("--manifest", ev_manifest, "corpus manifest (JSONL)");
    evaluate->add_option("--ref", ev_ref, "reference directory");
    evaluate->add_option("--hyp", ev_hyp, "hypothesis directory");
    evaluate->add_option("--name-map", ev_name_map,
                         "proper names rewritten to 'name' in references");
    evaluate->add_option("--name", ev_name, "config name used in the table");
    evaluate->add_flag("--word-weighted", ev_word_weighted,
                       "micro-average weighted by reference words");

    // refine -----------------------------------------------------------------
    auto* refine = app.add_subcommand("refine",
                                      "run an N-pass refinement schedule over a corpus");
    std::string rf_manifest, rf_hyp, rf_endpoint, rf_model, rf_strategy, rf_shots,
        rf_domain, rf_prompts, rf_few_shot;
    std::size_t rf_passes = 0, rf_chunk = 0;
    double rf_mock_latency = -1.0;
    refine->add_option("--manifest", rf_manifest, "corpus manifest (JSONL)");
    refine->add_option("--hyp", rf_hyp, "input hypothesis directory");
    refine->add_option("--endpoint", rf_endpoint,
                       "chat-completion URL or mock:identity");
    refine->add_option("--model", rf_model, "model name");
    refine->add_option("--passes", rf_passes, "schedule length (1-9)");
    refine->add_option("--strategy", rf_strategy, "SR-led | WR-led | Joint");
    refine->add_option("--shots", rf_shots, "zero | few");
    refine->add_option("--domain", rf_domain,
                       "prompt domain override (default: per-recording)");
    refine->add_option("--chunk-size", rf_chunk, "segments per chunk");
    refine->add_option("--prompts", rf_prompts, "prompt template directory");
    refine->add_option("--few-shot", rf_few_shot, "few-shot example file");
    refine->add_option("--mock-latency", rf_mock_latency,
                       "reported latency per mock call (seconds)");

    // ablate -----------------------------------------------------------------
    auto* ablate = app.add_subcommand("ablate",
                                      "run a matrix of schedules and tabulate results");
    std::string ab_matrix;
    ablate->add_option("--matrix", ab_matrix, "matrix spec (JSON)")->required();

    // stats ------------------------------------------------------------------
    auto* stats = app.add_subcommand("stats",
                                     "paired Wilcoxon comparison of evaluated configs");
    std::vector<std::string> st_reports;
    std::string st_reference, st_metric = "wder";
    bool st_holm = false;
    stats->add_option("--reports", st_reports, "name=reports.jsonl (repeatable)")
        ->required();
    stats->add_option("--reference", st_reference, "reference config name")->required();
    stats->add_option("--metric", st_metric, "wder | wer | der | attribution");
    stats->add_flag("--holm", st_holm, "Holm multiple-comparison correction");

    // synth ------------------------------------------------------------------
    auto* synth = app.add_subcommand("synth",
                                     "generate a synthetic corpus with known errors");
    std::string sy_config, sy_profile = "SP", sy_prefix = "rec";
    std::size_t sy_recordings = 10;
    double sy_sub = 0.0, sy_del = 0.0, sy_ins = 0.0, sy_flip = 0.0;
    synth->add_option("--synth-config", sy_config, "synth settings (JSON)");
    synth->add_option("--profile", sy_profile, "AN | SP");
    synth->add_option("--recordings", sy_recordings, "number of recordings");
    synth->add_option("--sub-rate", sy_sub, "per-word substitution rate");
    synth->add_option("--del-rate", sy_del, "per-word deletion rate");
    synth->add_option("--ins-rate", sy_ins, "per-word insertion rate");
    synth->add_option("--flip-rate", sy_flip, "per-segment speaker flip rate");
    synth->add_option("--id-prefix", sy_prefix, "recording id prefix");

    // report -----------------------------------------------------------------
    auto* report = app.add_subcommand("report",
                                      "render tables and WDER decomposition from bundles");
    std::vector<std::string> rp_reports;
    bool rp_word_weighted = false;
    report->add_option("--reports", rp_reports, "name=reports.jsonl (repeatable)")
        ->required();
    report->add_flag("--word-weighted", rp_word_weighted,
                     "micro-average weighted by reference words");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // help exits clean, usage errors exit 1
    }

    try {
        RunConfig config;
        if (!config_path.empty()) config = load_run_config(config_path);
        if (workers_opt->count()) config.workers = workers;
        if (seed_opt->count()) config.seed = seed;
        if (out_opt->count()) config.output_dir = out_dir;

        if (evaluate->parsed()) {
            if (!ev_manifest.empty()) config.manifest = ev_manifest;
            if (!ev_ref.empty()) config.reference_dir = ev_ref;
            if (!ev_hyp.empty()) config.hypothesis_dir = ev_hyp;
            if (!ev_name_map.empty()) config.name_map = ev_name_map;
            if (ev_word_weighted) config.word_weighted = true;
            if (config.manifest.empty()) throw ConfigError("evaluate needs --manifest");
            const auto result = cmd_evaluate(config, ev_name);
            std::cout << result.table;
            std::cout << "reports: " << (config.output_dir / "reports.jsonl").string()
                      << "\n";
            return 0;
        }

        if (refine->parsed()) {
            if (!rf_manifest.empty()) config.manifest = rf_manifest;
            if (!rf_hyp.empty()) config.hypothesis_dir = rf_hyp;
            if (!rf_endpoint.empty()) config.backend.endpoint = rf_endpoint;
            if (!rf_model.empty()) config.backend.model = rf_model;
            if (rf_passes) config.schedule.passes = rf_passes;
            if (!rf_strategy.empty()) config.schedule.strategy = rf_strategy;
            if (!rf_shots.empty()) config.schedule.shots = rf_shots;
            if (!rf_domain.empty()) config.schedule.domain = rf_domain;
            if (rf_chunk) config.schedule.chunk_size = rf_chunk;
            if (!rf_prompts.empty()) config.prompt_dir = rf_prompts;
            if (!rf_few_shot.empty()) config.schedule.few_shot_file = rf_few_shot;
            if (rf_mock_latency >= 0.0) config.backend.mock_latency_s = rf_mock_latency;
            if (config.manifest.empty()) throw ConfigError("refine needs --manifest");

            const auto records = cmd_refine(config);
            bool backend_failed = false;
            std::size_t outliers = 0;
            for (const auto& r : records) {
                backend_failed = backend_failed || r.backend_failure;
                outliers += r.outliers.size();
                if (r.aborted) {
                    std::cerr << "aborted " << r.recording_id << ": " << r.error << "\n";
                }
            }
            std::cout << "refined " << records.size() << " recording(s), "
                      << outliers << " outlier chunk(s); log: "
                      << (config.output_dir / "runlog.jsonl").string() << "\n";
            return backend_failed ? 3 : 0;
        }

        if (ablate->parsed()) {
            if (config.manifest.empty()) throw ConfigError("ablate needs --config");
            const auto cells = load_ablate_matrix(ab_matrix);
            const auto result = cmd_ablate(config, cells);
            std::cout << result.table;
            for (const auto& [name, error] : result.failed_cells) {
                std::cerr << "cell " << name << " failed: " << error << "\n";
            }
            return result.failed_cells.empty() ? 0 : 3;
        }

        if (stats->parsed()) {
            const auto metric = metric_from_name(st_metric);
            if (!metric) throw ConfigError("unknown metric: " + st_metric);
            const auto result = cmd_stats(parse_named_paths(st_reports), st_reference,
                                          config.output_dir, *metric, st_holm);
            std::cout << result.table;
            return 0;
        }

        if (synth->parsed()) {
            SynthSettings settings;
            if (!sy_config.empty()) {
                settings = load_synth_settings(sy_config);
            } else {
                settings.profile_name = sy_profile;
                if (sy_profile == "AN") {
                    settings.profile = an_profile();
                } else if (sy_profile == "SP") {
                    settings.profile = sp_profile();
                } else {
                    throw ConfigError("--profile must be AN or SP (use "
                                      "--synth-config for custom profiles)");
                }
                settings.recordings = sy_recordings;
                settings.errors.sub_rate = sy_sub;
                settings.errors.del_rate = sy_del;
                settings.errors.ins_rate = sy_ins;
                settings.errors.speaker_flip_rate = sy_flip;
                settings.id_prefix = sy_prefix;
            }
            settings.seed = config.seed;
            const auto result = cmd_synth(settings, config.output_dir);
            std::cout << "wrote " << result.manifest.size() << " recording(s) under "
                      << config.output_dir.string() << "\n";
            return 0;
        }

        if (report->parsed()) {
            const auto result = cmd_report(parse_named_paths(rp_reports),
                                           config.output_dir, rp_word_weighted);
            std::cout << result.metrics_table << "\n" << result.decomposition_table;
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const BackendError& e) {
        std::cerr << "backend error: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
