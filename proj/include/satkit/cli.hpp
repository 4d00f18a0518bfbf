#pragma once

// Command implementations behind the CLI binary: evaluate, refine, ablate,
// stats, synth, report. Everything here is a library function taking a
// structured config, so the test suite drives commands directly and the
// binary stays a thin argument-parsing shell.

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "satkit/errors.hpp"
#include "satkit/http_backend.hpp"
#include "satkit/metrics.hpp"
#include "satkit/mock_backends.hpp"
#include "satkit/orchestrator.hpp"
#include "satkit/report.hpp"
#include "satkit/stats.hpp"
#include "satkit/synth.hpp"
#include "satkit/transcript.hpp"

namespace satkit {

namespace fs = std::filesystem;

// --- small file helpers -----------------------------------------------------

inline std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

inline void write_text_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path.string());
    out << content;
}

// Name-map file: one proper name per line; applied case-insensitively, so
// lines are normalized to the same token form the scorer compares.
inline std::set<std::string> load_name_map(const fs::path& path) {
    std::set<std::string> names;
    std::istringstream in(read_text_file(path));
    std::string line;
    while (std::getline(in, line)) {
        for (auto& token : normalize(line)) names.insert(std::move(token));
    }
    return names;
}

// --- manifest ---------------------------------------------------------------

struct ManifestEntry {
    std::string id;
    std::string reference;   // relative to the reference dir; default <id>.txt
    std::string hypothesis;  // relative to the hypothesis dir; default <id>.txt
    std::string domain;
    std::optional<double> audio_duration;
};

inline std::vector<ManifestEntry> read_manifest(const fs::path& path) {
    std::istringstream in(read_text_file(path));
    std::vector<ManifestEntry> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError("manifest " + path.string() + " line " +
                            std::to_string(line_no) + ": " + e.what());
        }
        ManifestEntry entry;
        entry.id = j.value("id", std::string());
        if (entry.id.empty()) {
            throw DataError("manifest " + path.string() + " line " +
                            std::to_string(line_no) + ": missing id");
        }
        entry.reference = j.value("reference", entry.id + ".txt");
        entry.hypothesis = j.value("hypothesis", entry.id + ".txt");
        entry.domain = j.value("domain", std::string());
        if (j.contains("audio_duration") && j["audio_duration"].is_number()) {
            entry.audio_duration = j["audio_duration"].get<double>();
        }
        entries.push_back(std::move(entry));
    }
    return entries;
}

inline void write_manifest(const fs::path& path, const std::vector<ManifestEntry>& entries) {
    std::ostringstream out;
    for (const auto& e : entries) {
        nlohmann::json j{{"id", e.id},
                         {"reference", e.reference},
                         {"hypothesis", e.hypothesis},
                         {"domain", e.domain}};
        if (e.audio_duration) j["audio_duration"] = *e.audio_duration;
        out << j.dump() << "\n";
    }
    write_text_file(path, out.str());
}

// --- run configuration --------------------------------------------------

struct BackendSettings {
    std::string endpoint;  // "mock:identity" or an http(s) URL
    std::string model;
    std::string auth_env;
    std::string auth_token;
    double mock_latency_s = 0.0;
    int max_attempts = 3;
    double backoff_initial_s = 0.5;
    double timeout_s = 120.0;
};

struct ScheduleSettings {
    std::string strategy = "SR-led";
    std::size_t passes = 3;  // the three-pass SR-led default
    std::string shots = "zero";
    std::string domain;      // override; empty = use each recording's domain
    std::size_t chunk_size = 500;
    fs::path few_shot_file;
};

struct RunConfig {
    fs::path manifest;
    fs::path reference_dir;
    fs::path hypothesis_dir;
    fs::path output_dir = "out";
    fs::path name_map;    // optional
    fs::path prompt_dir;  // optional prompt template overrides
    BackendSettings backend;
    ScheduleSettings schedule;
    unsigned workers = 1;
    std::uint64_t seed = 0;
    bool word_weighted = false;
};

inline RunConfig load_run_config(const fs::path& config_file) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(config_file));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config " + config_file.string() + ": " + e.what());
    }
    const fs::path base = config_file.has_parent_path()
                              ? config_file.parent_path()
                              : fs::path(".");
    auto path_of = [&](const char* key) -> fs::path {
        const std::string v = j.value(key, std::string());
        if (v.empty()) return {};
        const fs::path p(v);
        return p.is_absolute() ? p : base / p;
    };

    RunConfig config;
    config.manifest = path_of("manifest");
    config.reference_dir = path_of("reference_dir");
    config.hypothesis_dir = path_of("hypothesis_dir");
    if (const auto p = path_of("output_dir"); !p.empty()) config.output_dir = p;
    config.name_map = path_of("name_map");
    config.prompt_dir = path_of("prompt_dir");
    config.workers = j.value("workers", 1u);
    config.seed = j.value("seed", std::uint64_t{0});
    config.word_weighted = j.value("word_weighted", false);

    if (j.contains("schedule")) {
        const auto& s = j["schedule"];
        config.schedule.strategy = s.value("strategy", config.schedule.strategy);
        config.schedule.passes = s.value("passes", config.schedule.passes);
        config.schedule.shots = s.value("shots", config.schedule.shots);
        config.schedule.domain = s.value("domain", config.schedule.domain);
        config.schedule.chunk_size = s.value("chunk_size", config.schedule.chunk_size);
        const std::string few = s.value("few_shot_file", std::string());
        if (!few.empty()) {
            const fs::path p(few);
            config.schedule.few_shot_file = p.is_absolute() ? p : base / p;
        }
    }
    if (j.contains("backend")) {
        const auto& b = j["backend"];
        config.backend.endpoint = b.value("endpoint", config.backend.endpoint);
        config.backend.model = b.value("model", config.backend.model);
        config.backend.auth_env = b.value("auth_env", config.backend.auth_env);
        config.backend.auth_token = b.value("auth_token", config.backend.auth_token);
        config.backend.mock_latency_s =
            b.value("mock_latency_s", config.backend.mock_latency_s);
        config.backend.max_attempts = b.value("max_attempts", config.backend.max_attempts);
        config.backend.backoff_initial_s =
            b.value("backoff_initial_s", config.backend.backoff_initial_s);
        config.backend.timeout_s = b.value("timeout_s", config.backend.timeout_s);
    }
    return config;
}

// --- backend resolution -------------------------------------------------

using BackendFactory = std::function<std::unique_ptr<Backend>(const BackendSettings&)>;

inline std::unique_ptr<Backend> make_backend(const BackendSettings& settings) {
    if (settings.endpoint.empty()) {
        throw ConfigError("backend endpoint is required for this command");
    }
    if (settings.endpoint == "mock:identity") {
        return std::make_unique<IdentityBackend>(settings.mock_latency_s);
    }
    if (settings.endpoint.rfind("mock:", 0) == 0) {
        throw ConfigError("unknown mock backend: " + settings.endpoint);
    }
    HttpBackendConfig http;
    http.endpoint_url = settings.endpoint;
    http.model = settings.model;
    http.auth_token = settings.auth_token;
    http.auth_env = settings.auth_env;
    http.max_attempts = settings.max_attempts;
    http.backoff_initial_s = settings.backoff_initial_s;
    http.timeout_s = settings.timeout_s;
    return std::make_unique<HttpBackend>(http);
}

// --- evaluate -------------------------------------------------------------

struct EvaluateOptions {
    ScoringOptions scoring;
    bool word_weighted = false;
    unsigned workers = 1;
    std::map<std::string, double> rtf_by_id;  // attach refine RTF to reports
};

// Scores every manifest entry. Missing files are listed exhaustively before
// aborting; per-recording format failures become outlier rows.
inline std::vector<EvalReport> evaluate_corpus(const std::vector<ManifestEntry>& entries,
                                               const fs::path& reference_dir,
                                               const fs::path& hypothesis_dir,
                                               const EvaluateOptions& options = {}) {
    std::vector<std::string> missing;
    for (const auto& e : entries) {
        const auto ref_path = reference_dir / e.reference;
        const auto hyp_path = hypothesis_dir / e.hypothesis;
        if (!fs::exists(ref_path)) missing.push_back(ref_path.string());
        if (!fs::exists(hyp_path)) missing.push_back(hyp_path.string());
    }
    if (!missing.empty()) {
        std::string msg = "missing files:";
        for (const auto& m : missing) msg += "\n  " + m;
        throw DataError(msg);
    }

    std::vector<EvalReport> reports(entries.size());
    detail::parallel_for(entries.size(), options.workers, [&](std::size_t i) {
        const auto& e = entries[i];
        EvalReport report;
        report.recording_id = e.id;
        report.domain = e.domain;
        try {
            auto ref = parse_transcript(read_text_file(reference_dir / e.reference), e.id);
            auto hyp = parse_transcript(read_text_file(hypothesis_dir / e.hypothesis), e.id);
            if (e.audio_duration) {
                ref.audio_duration = e.audio_duration;
                hyp.audio_duration = e.audio_duration;
            }
            report = evaluate_pair(ref, hyp, options.scoring, e.domain);
        } catch (const FormatError& err) {
            report.outlier = true;
            report.outlier_reason = err.what();
        } catch (const EmptyReference& err) {
            report.outlier = true;
            report.outlier_reason = err.what();
        }
        const auto rtf = options.rtf_by_id.find(e.id);
        if (rtf != options.rtf_by_id.end()) report.rtf = rtf->second;
        reports[i] = std::move(report);
    });
    return reports;
}

struct EvaluateResult {
    std::vector<EvalReport> reports;
    std::vector<CorpusAggregate> aggregates;
    std::string table;
};

inline EvaluateResult cmd_evaluate(const RunConfig& config,
                                   const std::string& config_name = "evaluated") {
    const auto entries = read_manifest(config.manifest);
    EvaluateOptions options;
    options.workers = config.workers;
    options.word_weighted = config.word_weighted;
    if (!config.name_map.empty()) {
        options.scoring.reference_name_map = load_name_map(config.name_map);
    }

    EvaluateResult result;
    result.reports = evaluate_corpus(entries, config.reference_dir,
                                     config.hypothesis_dir, options);
    result.aggregates = aggregate_reports(result.reports, config.word_weighted);
    result.table = render_metrics_table(
        {make_metrics_row(config_name, result.reports, config.word_weighted)});

    std::ostringstream jsonl;
    write_reports_jsonl(jsonl, result.reports);
    write_text_file(config.output_dir / "reports.jsonl", jsonl.str());
    std::ostringstream agg_out;
    for (const auto& a : result.aggregates) {
        nlohmann::json j{{"domain", a.domain},       {"recordings", a.recordings},
                         {"outliers", a.outliers},   {"mean_wer", a.mean_wer},
                         {"mean_der", a.mean_der},   {"mean_wder", a.mean_wder},
                         {"mean_attribution", a.mean_attribution}};
        if (a.mean_rtf) j["mean_rtf"] = *a.mean_rtf;
        agg_out << j.dump() << "\n";
    }
    write_text_file(config.output_dir / "aggregates.jsonl", agg_out.str());
    write_text_file(config.output_dir / "table.txt", result.table);
    return result;
}

// --- refine -----------------------------------------------------------------

struct RefineRecord {
    std::string recording_id;
    std::string domain;
    bool aborted = false;          // this recording produced no refined output
    bool backend_failure = false;  // abort cause was backend exhaustion
    std::string error;
    double rtf = 0.0;
    std::vector<double> per_pass_latency;
    std::vector<OutlierRecord> outliers;
    std::map<std::string, MarkerCounts> marker_audit;  // input vs refined
};

inline nlohmann::json refine_record_to_json(const RefineRecord& r) {
    nlohmann::json j;
    j["recording_id"] = r.recording_id;
    j["domain"] = r.domain;
    j["aborted"] = r.aborted;
    if (r.aborted) j["error"] = r.error;
    j["rtf"] = r.rtf;
    j["per_pass_latency"] = r.per_pass_latency;
    nlohmann::json outliers = nlohmann::json::array();
    for (const auto& o : r.outliers) {
        outliers.push_back({{"pass", o.pass_index},
                            {"chunk", o.chunk_index},
                            {"reason", o.reason}});
    }
    j["outliers"] = outliers;
    nlohmann::json markers = nlohmann::json::object();
    for (const auto& [name, c] : r.marker_audit) {
        markers[name] = {{"before", c.before}, {"after", c.after},
                         {"suppressed", c.suppressed}};
    }
    j["markers"] = markers;
    return j;
}

inline PassSchedule schedule_from_settings(const ScheduleSettings& settings,
                                           const std::string& domain,
                                           const std::string& model) {
    const auto strategy = strategy_from_name(settings.strategy);
    if (!strategy) throw ConfigError("unknown strategy: " + settings.strategy);
    Shots shots;
    if (settings.shots == "zero") {
        shots = Shots::Zero;
    } else if (settings.shots == "few") {
        shots = Shots::Few;
    } else {
        throw ConfigError("shots must be 'zero' or 'few', got '" + settings.shots + "'");
    }
    auto schedule = make_schedule(*strategy, settings.passes, shots, domain,
                                  settings.chunk_size);
    schedule.model = model;
    if (!settings.few_shot_file.empty()) {
        schedule.few_shot_example = read_text_file(settings.few_shot_file);
    }
    return schedule;
}

// Runs the configured schedule over every manifest hypothesis. A backend
// failure aborts only the affected recording; refined transcripts land in
// <output_dir>/refined/<id>.txt and the run log in <output_dir>/runlog.jsonl.
inline std::vector<RefineRecord> cmd_refine(const RunConfig& config,
                                            const BackendFactory& factory = {}) {
    const auto entries = read_manifest(config.manifest);
    std::vector<std::string> missing;
    for (const auto& e : entries) {
        const auto hyp_path = config.hypothesis_dir / e.hypothesis;
        if (!fs::exists(hyp_path)) missing.push_back(hyp_path.string());
    }
    if (!missing.empty()) {
        std::string msg = "missing files:";
        for (const auto& m : missing) msg += "\n  " + m;
        throw DataError(msg);
    }

    auto library = PromptLibrary::builtin();
    if (!config.prompt_dir.empty()) library.load_directory(config.prompt_dir);

    const auto backend =
        factory ? factory(config.backend) : make_backend(config.backend);

    std::vector<RefineRecord> records(entries.size());
    detail::parallel_for(entries.size(), config.workers, [&](std::size_t i) {
        const auto& e = entries[i];
        RefineRecord record;
        record.recording_id = e.id;
        record.domain = e.domain;
        try {
            auto input = parse_transcript(
                read_text_file(config.hypothesis_dir / e.hypothesis), e.id);
            if (e.audio_duration) input.audio_duration = e.audio_duration;

            const std::string domain = config.schedule.domain.empty()
                                           ? e.domain
                                           : config.schedule.domain;
            const auto schedule =
                schedule_from_settings(config.schedule, domain, config.backend.model);

            const auto run = run_schedule(input, schedule, *backend, library);
            write_text_file(config.output_dir / "refined" / (e.id + ".txt"),
                            serialize_transcript(run.refined));
            record.rtf = run.rtf;
            record.per_pass_latency = run.per_pass_latency;
            record.outliers = run.outlier_passes;
            record.marker_audit = marker_audit(input, run.refined);
        } catch (const BackendError& err) {
            record.aborted = true;
            record.backend_failure = true;
            record.error = err.what();
        } catch (const FormatError& err) {
            record.aborted = true;
            record.error = std::string("input hypothesis unreadable: ") + err.what();
        } catch (const EmptyTranscript& err) {
            record.aborted = true;
            record.error = err.what();
        }
        records[i] = std::move(record);
    });

    std::ostringstream log;
    for (const auto& r : records) log << refine_record_to_json(r).dump() << "\n";
    write_text_file(config.output_dir / "runlog.jsonl", log.str());
    return records;
}

// --- ablate -----------------------------------------------------------------

struct AblateCell {
    std::string name;
    ScheduleSettings schedule;
    std::optional<BackendSettings> backend;  // per-cell override
};

inline std::vector<AblateCell> load_ablate_matrix(const fs::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("matrix " + path.string() + ": " + e.what());
    }
    std::vector<AblateCell> cells;
    for (const auto& c : j.at("cells")) {
        AblateCell cell;
        cell.name = c.value("name", std::string());
        if (cell.name.empty()) throw ConfigError("matrix cell without a name");
        if (c.contains("schedule")) {
            const auto& s = c["schedule"];
            cell.schedule.strategy = s.value("strategy", cell.schedule.strategy);
            cell.schedule.passes = s.value("passes", cell.schedule.passes);
            cell.schedule.shots = s.value("shots", cell.schedule.shots);
            cell.schedule.domain = s.value("domain", cell.schedule.domain);
            cell.schedule.chunk_size = s.value("chunk_size", cell.schedule.chunk_size);
        }
        if (c.contains("backend")) {
            BackendSettings b;
            const auto& jb = c["backend"];
            b.endpoint = jb.value("endpoint", std::string());
            b.model = jb.value("model", std::string());
            b.auth_env = jb.value("auth_env", std::string());
            b.auth_token = jb.value("auth_token", std::string());
            b.mock_latency_s = jb.value("mock_latency_s", 0.0);
            cell.backend = b;
        }
        cells.push_back(std::move(cell));
    }
    return cells;
}

struct AblateResult {
    std::vector<MetricsRow> rows;
    std::map<std::string, std::vector<EvalReport>> reports_by_cell;
    std::vector<std::pair<std::string, std::string>> failed_cells;  // name, error
    std::string table;
};

// Refine + evaluate per matrix cell, plus a Baseline row scoring the raw
// hypothesis directory. Cell failures are isolated; the matrix continues.
inline AblateResult cmd_ablate(const RunConfig& config,
                               const std::vector<AblateCell>& cells,
                               const BackendFactory& factory = {}) {
    const auto entries = read_manifest(config.manifest);
    AblateResult result;

    EvaluateOptions eval_options;
    eval_options.workers = config.workers;
    eval_options.word_weighted = config.word_weighted;
    if (!config.name_map.empty()) {
        eval_options.scoring.reference_name_map = load_name_map(config.name_map);
    }

    // Baseline: the unrefined hypothesis directory.
    {
        auto reports = evaluate_corpus(entries, config.reference_dir,
                                       config.hypothesis_dir, eval_options);
        result.rows.push_back(
            make_metrics_row("Baseline", reports, config.word_weighted));
        result.reports_by_cell["Baseline"] = std::move(reports);
    }

    for (const auto& cell : cells) {
        try {
            RunConfig cell_config = config;
            cell_config.schedule = cell.schedule;
            if (cell.backend) cell_config.backend = *cell.backend;
            cell_config.output_dir = config.output_dir / cell.name;

            const auto refine_records = cmd_refine(cell_config, factory);

            auto cell_entries = entries;
            EvaluateOptions cell_eval = eval_options;
            for (std::size_t i = 0; i < cell_entries.size(); ++i) {
                if (refine_records[i].aborted) {
                    throw BackendError("recording '" + cell_entries[i].id +
                                           "' aborted: " + refine_records[i].error,
                                       0, 0);
                }
                cell_entries[i].hypothesis = cell_entries[i].id + ".txt";
                cell_eval.rtf_by_id[cell_entries[i].id] = refine_records[i].rtf;
            }
            auto reports = evaluate_corpus(cell_entries, config.reference_dir,
                                           cell_config.output_dir / "refined", cell_eval);
            {
                std::ostringstream jsonl;
                write_reports_jsonl(jsonl, reports);
                write_text_file(cell_config.output_dir / "reports.jsonl", jsonl.str());
            }
            result.rows.push_back(
                make_metrics_row(cell.name, reports, config.word_weighted));
            result.reports_by_cell[cell.name] = std::move(reports);
        } catch (const Error& e) {
            result.failed_cells.emplace_back(cell.name, e.what());
        }
    }

    result.table = render_metrics_table(result.rows);
    write_text_file(config.output_dir / "ablation_table.txt", result.table);
    return result;
}

// --- stats ------------------------------------------------------------------

struct StatsResult {
    std::vector<ComparisonRow> rows;
    std::string table;
};

inline StatsResult cmd_stats(
    const std::vector<std::pair<std::string, fs::path>>& report_files,
    const std::string& reference_config, const fs::path& output_dir,
    Metric metric = Metric::Wder, bool holm = false) {
    if (report_files.size() < 2) {
        throw ConfigError("stats needs at least two evaluated configs");
    }
    std::vector<std::pair<std::string, std::vector<EvalReport>>> configs;
    for (const auto& [name, path] : report_files) {
        configs.emplace_back(name, read_reports_file(path.string()));
    }

    StatsResult result;
    result.rows = compare_matrix(configs, reference_config, metric, holm);
    result.table = render_comparison_table(result.rows, reference_config);

    std::ostringstream jsonl;
    for (const auto& row : result.rows) {
        jsonl << comparison_row_to_json(row, reference_config).dump() << "\n";
    }
    write_text_file(output_dir / "comparison.jsonl", jsonl.str());
    write_text_file(output_dir / "comparison_table.txt", result.table);
    return result;
}

// --- synth --------------------------------------------------------------

struct SynthSettings {
    std::string profile_name = "SP";  // "AN", "SP", or "custom"
    CorpusProfile profile = sp_profile();
    std::size_t recordings = 10;
    std::size_t vocabulary_size = 30000;
    fs::path vocabulary_file;  // optional: one token per line
    ErrorSpec errors;
    std::uint64_t seed = 0;
    std::string id_prefix = "rec";
};

inline SynthSettings load_synth_settings(const fs::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("synth config " + path.string() + ": " + e.what());
    }
    SynthSettings s;
    s.profile_name = j.value("profile", std::string("SP"));
    if (s.profile_name == "AN") {
        s.profile = an_profile();
    } else if (s.profile_name == "SP") {
        s.profile = sp_profile();
    } else if (j.contains("custom_profile")) {
        const auto& p = j["custom_profile"];
        s.profile.n_speakers = p.value("n_speakers", 2);
        s.profile.duration_minutes = {p.value("duration_minutes_mean", 20.0),
                                      p.value("duration_minutes_sd", 2.0)};
        s.profile.segments_per_minute = {p.value("segments_per_minute_mean", 15.0),
                                         p.value("segments_per_minute_sd", 2.0)};
        s.profile.median_turn_seconds = {p.value("median_turn_seconds_mean", 2.0),
                                         p.value("median_turn_seconds_sd", 0.5)};
        s.profile.type_token_ratio = p.value("type_token_ratio", 0.4);
    } else {
        throw ConfigError("profile must be 'AN', 'SP', or 'custom' with a "
                          "custom_profile block");
    }
    s.recordings = j.value("recordings", std::size_t{10});
    s.vocabulary_size = j.value("vocabulary_size", std::size_t{30000});
    const std::string vocab = j.value("vocabulary_file", std::string());
    if (!vocab.empty()) {
        const fs::path p(vocab);
        s.vocabulary_file = p.is_absolute() ? p : path.parent_path() / p;
    }
    if (j.contains("errors")) {
        const auto& e = j["errors"];
        s.errors.sub_rate = e.value("sub_rate", 0.0);
        s.errors.del_rate = e.value("del_rate", 0.0);
        s.errors.ins_rate = e.value("ins_rate", 0.0);
        s.errors.speaker_flip_rate = e.value("speaker_flip_rate", 0.0);
    }
    s.seed = j.value("seed", std::uint64_t{0});
    s.id_prefix = j.value("id_prefix", std::string("rec"));
    return s;
}

struct SynthResult {
    std::vector<ManifestEntry> manifest;
    std::vector<InjectionLedger> ledgers;
};

// Writes ref/ and hyp/ trees, a per-recording ledger, and a manifest ready
// for `evaluate`. Per-recording seeds derive deterministically from the run
// seed, so identical settings reproduce byte-identical trees.
inline SynthResult cmd_synth(const SynthSettings& settings, const fs::path& output_dir) {
    validate_error_spec(settings.errors);
    std::vector<std::string> vocabulary;
    if (!settings.vocabulary_file.empty()) {
        std::istringstream in(read_text_file(settings.vocabulary_file));
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty()) vocabulary.push_back(line);
        }
    } else {
        vocabulary = make_vocabulary(settings.vocabulary_size);
    }

    SynthResult result;
    std::ostringstream ledger_out;
    for (std::size_t i = 0; i < settings.recordings; ++i) {
        const std::string id = settings.id_prefix + std::to_string(i);
        const std::uint64_t rec_seed =
            settings.seed ^ (0x9E3779B97F4A7C15ULL * (i + 1));

        const auto ref = generate_reference(settings.profile, vocabulary, rec_seed, id);
        ErrorSpec errors = settings.errors;
        errors.seed = rec_seed ^ 0xD1B54A32D192ED03ULL;
        const auto [hyp, ledger] = inject_errors(ref, errors);

        write_text_file(output_dir / "ref" / (id + ".txt"), serialize_transcript(ref));
        write_text_file(output_dir / "hyp" / (id + ".txt"), serialize_transcript(hyp));

        ManifestEntry entry;
        entry.id = id;
        entry.reference = "ref/" + id + ".txt";
        entry.hypothesis = "hyp/" + id + ".txt";
        entry.domain = settings.profile_name;
        entry.audio_duration = ref.audio_duration;
        result.manifest.push_back(entry);
        result.ledgers.push_back(ledger);

        nlohmann::json j{{"recording_id", id},
                         {"substitutions", ledger.substitutions},
                         {"deletions", ledger.deletions},
                         {"insertions", ledger.insertions},
                         {"flipped_segments", ledger.flipped_segments},
                         {"flipped_words", ledger.flipped_words},
                         {"n_ref_words", flatten(ref).size()}};
        ledger_out << j.dump() << "\n";
    }
    write_manifest(output_dir / "manifest.jsonl", result.manifest);
    write_text_file(output_dir / "ledger.jsonl", ledger_out.str());
    return result;
}

// --- report -----------------------------------------------------------------

struct ReportResult {
    std::vector<MetricsRow> rows;
    std::vector<DecompositionRow> decomposition;
    std::string metrics_table;
    std::string decomposition_table;
};

// Renders metrics + WDER decomposition tables from stored report bundles.
inline ReportResult cmd_report(
    const std::vector<std::pair<std::string, fs::path>>& report_files,
    const fs::path& output_dir, bool word_weighted = false) {
    if (report_files.empty()) throw ConfigError("report needs at least one bundle");
    std::vector<std::pair<std::string, std::vector<EvalReport>>> configs;
    for (const auto& [name, path] : report_files) {
        configs.emplace_back(name, read_reports_file(path.string()));
    }

    ReportResult result;
    for (const auto& [name, reports] : configs) {
        result.rows.push_back(make_metrics_row(name, reports, word_weighted));
    }
    result.decomposition = decompose(configs, word_weighted);
    result.metrics_table = render_metrics_table(result.rows);
    result.decomposition_table = render_decomposition(result.decomposition);

    std::ostringstream jsonl;
    for (const auto& row : result.decomposition) {
        jsonl << decomposition_row_to_json(row).dump() << "\n";
    }
    write_text_file(output_dir / "decomposition.jsonl", jsonl.str());
    write_text_file(output_dir / "metrics_table.txt", result.metrics_table);
    write_text_file(output_dir / "decomposition_table.txt", result.decomposition_table);
    return result;
}

}  // namespace satkit
