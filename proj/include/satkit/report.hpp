#pragma once

// Report records and table rendering. Structured outputs are line-delimited
// JSON records with stable field names; the human-readable tables are pure
// renderings of those records and never recompute metrics. Rates are
// rendered as percentages with two decimals.

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "satkit/errors.hpp"
#include "satkit/metrics.hpp"
#include "satkit/stats.hpp"

namespace satkit {

// --- formatting helpers -----------------------------------------------------

inline std::string fmt_fixed(double value, int precision = 2) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value,
                                   std::chars_format::fixed, precision);
    return std::string(buf, res.ptr);
}

// rate fraction -> percent with two decimals ("0.4303" -> "43.03")
inline std::string fmt_rate(double rate) { return fmt_fixed(rate * 100.0); }

// signed percentage points ("0.0288" -> "+2.88")
inline std::string fmt_signed_rate(double rate) {
    const double pp = rate * 100.0;
    std::string s = fmt_fixed(std::abs(pp));
    return (std::signbit(pp) ? "-" : "+") + s;
}

inline std::string pad_left(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

inline std::string pad_right(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

// --- EvalReport serialization -------------------------------------------

inline nlohmann::json report_to_json(const EvalReport& r) {
    nlohmann::json j;
    j["recording_id"] = r.recording_id;
    j["domain"] = r.domain;
    j["outlier"] = r.outlier;
    if (r.outlier) {
        j["outlier_reason"] = r.outlier_reason.value_or("format error");
        j["wer"] = nullptr;
        j["der"] = nullptr;
        j["wder"] = nullptr;
        j["attribution_error"] = nullptr;
    } else {
        j["wer"] = r.wer;
        j["der"] = r.der;
        j["wder"] = r.wder;
        j["attribution_error"] = r.attribution_error;
    }
    j["n_ref"] = r.n_ref;
    if (r.rtf) {
        j["rtf"] = *r.rtf;
    } else {
        j["rtf"] = nullptr;
    }
    nlohmann::json markers = nlohmann::json::object();
    for (const auto& [name, c] : r.marker_audit) {
        markers[name] = {{"before", c.before}, {"after", c.after},
                         {"suppressed", c.suppressed}};
    }
    j["markers"] = markers;
    return j;
}

inline EvalReport report_from_json(const nlohmann::json& j) {
    EvalReport r;
    r.recording_id = j.at("recording_id").get<std::string>();
    r.domain = j.value("domain", std::string());
    r.outlier = j.value("outlier", false);
    if (r.outlier) {
        if (j.contains("outlier_reason") && j["outlier_reason"].is_string()) {
            r.outlier_reason = j["outlier_reason"].get<std::string>();
        }
    } else {
        r.wer = j.at("wer").get<double>();
        r.der = j.at("der").get<double>();
        r.wder = j.at("wder").get<double>();
        r.attribution_error = j.at("attribution_error").get<double>();
    }
    r.n_ref = j.value("n_ref", std::size_t{0});
    if (j.contains("rtf") && j["rtf"].is_number()) r.rtf = j["rtf"].get<double>();
    if (j.contains("markers") && j["markers"].is_object()) {
        for (const auto& [name, counts] : j["markers"].items()) {
            MarkerCounts c;
            c.before = counts.value("before", 0LL);
            c.after = counts.value("after", 0LL);
            c.suppressed = counts.value("suppressed", 0LL);
            r.marker_audit[name] = c;
        }
    }
    return r;
}

inline void write_reports_jsonl(std::ostream& out, const std::vector<EvalReport>& reports) {
    for (const auto& r : reports) out << report_to_json(r).dump() << "\n";
}

inline std::vector<EvalReport> read_reports_jsonl(std::istream& in) {
    std::vector<EvalReport> reports;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            reports.push_back(report_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw DataError("malformed report record at line " +
                            std::to_string(line_no) + ": " + e.what());
        }
    }
    return reports;
}

inline std::vector<EvalReport> read_reports_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open report file: " + path);
    return read_reports_jsonl(in);
}

// --- aggregation ------------------------------------------------------------

// Corpus aggregate over the non-outlier recordings of one domain. Default is
// the unweighted per-recording mean; word_weighted switches to micro-averages
// weighted by reference word count.
struct CorpusAggregate {
    std::string domain;
    std::size_t recordings = 0;  // non-outlier recordings
    std::size_t outliers = 0;
    double mean_wer = 0.0;
    double mean_der = 0.0;
    double mean_wder = 0.0;
    double mean_attribution = 0.0;
    std::optional<double> mean_rtf;
};

inline std::vector<CorpusAggregate> aggregate_reports(
    const std::vector<EvalReport>& reports, bool word_weighted = false) {
    std::map<std::string, std::vector<const EvalReport*>> by_domain;
    for (const auto& r : reports) by_domain[r.domain].push_back(&r);

    std::vector<CorpusAggregate> aggregates;
    for (const auto& [domain, group] : by_domain) {
        CorpusAggregate agg;
        agg.domain = domain;
        double weight_sum = 0.0, wer_sum = 0.0, der_sum = 0.0, wder_sum = 0.0,
               attr_sum = 0.0, rtf_sum = 0.0;
        std::size_t rtf_count = 0;
        for (const auto* r : group) {
            if (r->outlier) {
                ++agg.outliers;
                continue;
            }
            ++agg.recordings;
            const double w = word_weighted ? static_cast<double>(r->n_ref) : 1.0;
            weight_sum += w;
            wer_sum += w * r->wer;
            der_sum += w * r->der;
            wder_sum += w * r->wder;
            attr_sum += w * r->attribution_error;
            if (r->rtf) {
                rtf_sum += *r->rtf;
                ++rtf_count;
            }
        }
        if (weight_sum > 0.0) {
            agg.mean_wer = wer_sum / weight_sum;
            agg.mean_der = der_sum / weight_sum;
            agg.mean_wder = wder_sum / weight_sum;
            agg.mean_attribution = attr_sum / weight_sum;
        }
        if (rtf_count > 0) agg.mean_rtf = rtf_sum / static_cast<double>(rtf_count);
        aggregates.push_back(std::move(agg));
    }
    return aggregates;
}

// --- metrics table (per-config rows, per-domain WER/DER/WDER columns) -------

struct MetricsRow {
    std::string name;
    std::map<std::string, CorpusAggregate> per_domain;
    std::optional<double> rtf;  // filled for iteration-depth tables

    std::size_t total_outliers() const {
        std::size_t n = 0;
        for (const auto& [d, a] : per_domain) n += a.outliers;
        return n;
    }

    // mean WDER across the domains present (the paper's "Avg" column)
    double avg_wder() const {
        if (per_domain.empty()) return 0.0;
        double sum = 0.0;
        for (const auto& [d, a] : per_domain) sum += a.mean_wder;
        return sum / static_cast<double>(per_domain.size());
    }
};

inline MetricsRow make_metrics_row(const std::string& name,
                                   const std::vector<EvalReport>& reports,
                                   bool word_weighted = false) {
    MetricsRow row;
    row.name = name;
    for (auto& agg : aggregate_reports(reports, word_weighted)) {
        row.per_domain[agg.domain] = agg;
    }
    double rtf_sum = 0.0;
    std::size_t rtf_count = 0;
    for (const auto& [domain, agg] : row.per_domain) {
        if (agg.mean_rtf) {
            rtf_sum += *agg.mean_rtf;
            ++rtf_count;
        }
    }
    if (rtf_count) row.rtf = rtf_sum / static_cast<double>(rtf_count);
    return row;
}

// Fixed-width text table in the style of the ablation tables: one row per
// config, WER/DER/WDER per corpus, mean WDER across corpora, outlier count,
// optional RTF column.
inline std::string render_metrics_table(const std::vector<MetricsRow>& rows) {
    std::set<std::string> domain_set;
    bool any_rtf = false;
    for (const auto& row : rows) {
        for (const auto& [d, a] : row.per_domain) domain_set.insert(d);
        any_rtf = any_rtf || row.rtf.has_value();
    }
    const std::vector<std::string> domains(domain_set.begin(), domain_set.end());

    std::size_t name_width = std::string("Config").size();
    for (const auto& row : rows) name_width = std::max(name_width, row.name.size());

    constexpr std::size_t cell = 7;
    std::ostringstream out;

    // header line 1: domain group headings
    out << pad_right("", name_width);
    for (const auto& d : domains) {
        const std::string group = d;
        const std::size_t group_width = 3 * cell;
        const std::size_t left = (group_width - std::min(group.size(), group_width)) / 2;
        out << pad_right(std::string(left, ' ') + group, group_width);
    }
    out << "\n";

    // header line 2: column names
    out << pad_right("Config", name_width);
    for (std::size_t i = 0; i < domains.size(); ++i) {
        out << pad_left("WER", cell) << pad_left("DER", cell) << pad_left("WDER", cell);
    }
    out << pad_left("Avg", cell) << pad_left("Outliers", 10);
    if (any_rtf) out << pad_left("RTF", cell);
    out << "\n";

    for (const auto& row : rows) {
        out << pad_right(row.name, name_width);
        for (const auto& d : domains) {
            const auto it = row.per_domain.find(d);
            if (it == row.per_domain.end() || it->second.recordings == 0) {
                out << pad_left("-", cell) << pad_left("-", cell) << pad_left("-", cell);
            } else {
                out << pad_left(fmt_rate(it->second.mean_wer), cell)
                    << pad_left(fmt_rate(it->second.mean_der), cell)
                    << pad_left(fmt_rate(it->second.mean_wder), cell);
            }
        }
        out << pad_left(fmt_rate(row.avg_wder()), cell)
            << pad_left(std::to_string(row.total_outliers()), 10);
        if (any_rtf) {
            out << pad_left(row.rtf ? fmt_fixed(*row.rtf) : "-", cell);
        }
        out << "\n";
    }
    return out.str();
}

// --- comparison table (Wilcoxon rows, asterisk convention) ------------------

// One line per config, ΔWDER and p per corpus; '*' marks p <= 0.05,
// degenerate comparisons render as "n/a".
inline std::string render_comparison_table(const std::vector<ComparisonRow>& rows,
                                           const std::string& reference_config) {
    std::set<std::string> domain_set;
    std::set<std::string> config_set;
    std::vector<std::string> config_order;
    for (const auto& r : rows) {
        domain_set.insert(r.domain);
        if (config_set.insert(r.config).second) config_order.push_back(r.config);
    }
    const std::vector<std::string> domains(domain_set.begin(), domain_set.end());

    const std::string head = "vs " + reference_config;
    std::size_t name_width = head.size();
    for (const auto& c : config_order) name_width = std::max(name_width, c.size());

    constexpr std::size_t delta_cell = 9;
    constexpr std::size_t p_cell = 8;
    std::ostringstream out;

    out << pad_right("", name_width);
    for (const auto& d : domains) {
        out << pad_left(d, delta_cell + p_cell);
    }
    out << "\n";
    out << pad_right(head, name_width);
    for (std::size_t i = 0; i < domains.size(); ++i) {
        out << pad_left("dWDER", delta_cell) << pad_left("p-value", p_cell);
    }
    out << "\n";

    std::map<std::pair<std::string, std::string>, const ComparisonRow*> cells;
    for (const auto& r : rows) cells[{r.config, r.domain}] = &r;

    for (const auto& config : config_order) {
        out << pad_right(config, name_width);
        for (const auto& d : domains) {
            const auto it = cells.find({config, d});
            if (it == cells.end()) {
                out << pad_left("-", delta_cell) << pad_left("-", p_cell);
                continue;
            }
            const auto& row = *it->second;
            std::string delta = fmt_signed_rate(row.mean_delta);
            if (row.significant) delta += "*";
            out << pad_left(delta, delta_cell);
            out << pad_left(row.p_value ? fmt_fixed(*row.p_value) : "n/a", p_cell);
        }
        out << "\n";
    }
    return out.str();
}

inline nlohmann::json comparison_row_to_json(const ComparisonRow& r,
                                             const std::string& reference) {
    nlohmann::json j;
    j["config"] = r.config;
    j["reference"] = reference;
    j["domain"] = r.domain;
    j["n"] = r.n;
    j["mean_delta"] = r.mean_delta;
    if (r.p_value) {
        j["p_value"] = *r.p_value;
    } else {
        j["p_value"] = nullptr;
    }
    j["significant"] = r.significant;
    return j;
}

// --- WDER decomposition -------------------------------------------------

// Stacked-bar source data: WDER split into its lexical (WER) and speaker
// attribution components per config and corpus.
struct DecompositionRow {
    std::string config;
    std::string domain;
    double wer = 0.0;
    double attribution_error = 0.0;

    double wder() const { return wer + attribution_error; }
};

inline std::vector<DecompositionRow> decompose(
    const std::vector<std::pair<std::string, std::vector<EvalReport>>>& configs,
    bool word_weighted = false) {
    std::vector<DecompositionRow> rows;
    for (const auto& [name, reports] : configs) {
        for (const auto& agg : aggregate_reports(reports, word_weighted)) {
            rows.push_back({name, agg.domain, agg.mean_wer, agg.mean_attribution});
        }
    }
    return rows;
}

inline std::string render_decomposition(const std::vector<DecompositionRow>& rows) {
    std::size_t name_width = std::string("Config").size();
    std::size_t domain_width = std::string("Corpus").size();
    for (const auto& r : rows) {
        name_width = std::max(name_width, r.config.size());
        domain_width = std::max(domain_width, r.domain.size());
    }
    constexpr std::size_t cell = 13;
    std::ostringstream out;
    out << pad_right("Config", name_width + 2) << pad_right("Corpus", domain_width + 2)
        << pad_left("WER", 7) << pad_left("Attribution", cell) << pad_left("WDER", 7)
        << "\n";
    for (const auto& r : rows) {
        out << pad_right(r.config, name_width + 2)
            << pad_right(r.domain, domain_width + 2) << pad_left(fmt_rate(r.wer), 7)
            << pad_left(fmt_rate(r.attribution_error), cell)
            << pad_left(fmt_rate(r.wder()), 7) << "\n";
    }
    return out.str();
}

inline nlohmann::json decomposition_row_to_json(const DecompositionRow& r) {
    return {{"config", r.config},
            {"domain", r.domain},
            {"wer", r.wer},
            {"attribution_error", r.attribution_error},
            {"wder", r.wder()}};
}

}  // namespace satkit
