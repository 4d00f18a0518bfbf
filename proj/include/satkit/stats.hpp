#pragma once

// Paired statistical comparison of configurations: per-recording metric
// deltas and the Wilcoxon signed-rank test. Zero deltas are dropped, ties
// get average ranks, and the two-sided p-value is exact (full sign-flip null
// distribution) up to n = 25, beyond which a continuity-corrected normal
// approximation with tie correction takes over.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "satkit/errors.hpp"
#include "satkit/metrics.hpp"

namespace satkit {

enum class Metric { Wder, Wer, Der, Attribution };

inline const char* metric_name(Metric m) {
    switch (m) {
        case Metric::Wder: return "wder";
        case Metric::Wer: return "wer";
        case Metric::Der: return "der";
        case Metric::Attribution: return "attribution_error";
    }
    return "?";
}

inline std::optional<Metric> metric_from_name(const std::string& name) {
    if (name == "wder") return Metric::Wder;
    if (name == "wer") return Metric::Wer;
    if (name == "der") return Metric::Der;
    if (name == "attribution_error" || name == "attribution") return Metric::Attribution;
    return std::nullopt;
}

inline double metric_value(const EvalReport& r, Metric m) {
    switch (m) {
        case Metric::Wder: return r.wder;
        case Metric::Wer: return r.wer;
        case Metric::Der: return r.der;
        case Metric::Attribution: return r.attribution_error;
    }
    return 0.0;
}

struct PairedSample {
    std::string recording_id;
    double value_a = 0.0;
    double value_b = 0.0;

    // always derived from its operands, never stored
    double delta() const { return value_a - value_b; }
};

// One sample per recording, joined by id. Outlier reports carry no usable
// rates and are excluded from the join on either side.
inline std::vector<PairedSample> paired_deltas(const std::vector<EvalReport>& reports_a,
                                               const std::vector<EvalReport>& reports_b,
                                               Metric metric = Metric::Wder) {
    std::map<std::string, const EvalReport*> by_id_b;
    for (const auto& r : reports_b) {
        if (!r.outlier) by_id_b[r.recording_id] = &r;
    }

    std::vector<PairedSample> samples;
    std::vector<std::string> missing_in_b;
    std::set<std::string> seen_a;
    for (const auto& a : reports_a) {
        if (a.outlier) continue;
        seen_a.insert(a.recording_id);
        const auto it = by_id_b.find(a.recording_id);
        if (it == by_id_b.end()) {
            missing_in_b.push_back(a.recording_id);
            continue;
        }
        samples.push_back({a.recording_id, metric_value(a, metric),
                           metric_value(*it->second, metric)});
    }
    std::vector<std::string> missing_in_a;
    for (const auto& [id, r] : by_id_b) {
        if (!seen_a.count(id)) missing_in_a.push_back(id);
    }
    if (!missing_in_a.empty() || !missing_in_b.empty()) {
        std::string msg = "recording id sets differ:";
        for (const auto& id : missing_in_b) msg += " -" + id;
        for (const auto& id : missing_in_a) msg += " +" + id;
        throw IdMismatch(msg, std::move(missing_in_a), std::move(missing_in_b));
    }
    return samples;
}

inline double mean_delta(const std::vector<PairedSample>& samples) {
    if (samples.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& s : samples) sum += s.delta();
    return sum / static_cast<double>(samples.size());
}

struct WilcoxonResult {
    std::size_t n_effective = 0;  // samples left after zero-delta removal
    double w_statistic = 0.0;     // W+ = sum of ranks of positive deltas
    double p_two_sided = 1.0;
    enum class Method { Exact, NormalApprox } method = Method::Exact;
    bool significant_at_005 = false;
};

namespace detail {

// Average ranks over |delta|, doubled so tied (.5) ranks stay integral.
inline std::vector<long long> doubled_ranks(const std::vector<double>& abs_deltas) {
    const std::size_t n = abs_deltas.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return abs_deltas[a] < abs_deltas[b];
    });

    std::vector<long long> ranks2(n, 0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && abs_deltas[order[j + 1]] == abs_deltas[order[i]]) ++j;
        // ranks i+1 .. j+1 averaged; doubled average = (i+1 + j+1)
        const long long doubled = static_cast<long long>(i + 1 + j + 1);
        for (std::size_t k = i; k <= j; ++k) ranks2[order[k]] = doubled;
        i = j + 1;
    }
    return ranks2;
}

// Null distribution of the doubled W+ statistic over all 2^n sign vectors,
// tabulated by subset-sum counting (identical values to full enumeration).
inline std::vector<double> exact_null_counts(const std::vector<long long>& ranks2) {
    long long total = 0;
    for (long long r : ranks2) total += r;
    std::vector<double> counts(static_cast<std::size_t>(total) + 1, 0.0);
    counts[0] = 1.0;
    long long reach = 0;
    for (long long r : ranks2) {
        reach += r;
        for (long long s = reach; s >= r; --s) {
            counts[static_cast<std::size_t>(s)] +=
                counts[static_cast<std::size_t>(s - r)];
        }
    }
    return counts;
}

inline double normal_sf(double z) {  // P(Z >= z)
    return 0.5 * std::erfc(z / std::sqrt(2.0));
}

}  // namespace detail

inline WilcoxonResult wilcoxon_signed_rank(const std::vector<PairedSample>& samples) {
    std::vector<double> abs_deltas;
    std::vector<bool> positive;
    for (const auto& s : samples) {
        const double d = s.delta();
        if (d == 0.0) continue;  // drop-zeros convention
        abs_deltas.push_back(std::abs(d));
        positive.push_back(d > 0.0);
    }
    const std::size_t n = abs_deltas.size();
    if (n == 0) {
        throw Degenerate("all paired deltas are zero; the test is undefined");
    }

    const auto ranks2 = detail::doubled_ranks(abs_deltas);
    long long w2 = 0, total2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        total2 += ranks2[i];
        if (positive[i]) w2 += ranks2[i];
    }

    WilcoxonResult result;
    result.n_effective = n;
    result.w_statistic = static_cast<double>(w2) / 2.0;

    if (n <= 25) {
        result.method = WilcoxonResult::Method::Exact;
        const auto counts = detail::exact_null_counts(ranks2);
        double le = 0.0, ge = 0.0;
        for (long long s = 0; s <= total2; ++s) {
            const double c = counts[static_cast<std::size_t>(s)];
            if (s <= w2) le += c;
            if (s >= w2) ge += c;
        }
        const double denom = std::ldexp(1.0, static_cast<int>(n));  // 2^n
        result.p_two_sided = std::min(1.0, 2.0 * std::min(le, ge) / denom);
    } else {
        result.method = WilcoxonResult::Method::NormalApprox;
        const double nn = static_cast<double>(n);
        const double mean = nn * (nn + 1.0) / 4.0;
        double tie_term = 0.0;
        std::map<long long, long long> groups;
        for (long long r : ranks2) ++groups[r];
        for (const auto& [rank, t] : groups) {
            const double td = static_cast<double>(t);
            tie_term += td * td * td - td;
        }
        const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
        const double w = result.w_statistic;
        if (var <= 0.0 || w == mean) {
            result.p_two_sided = 1.0;
        } else {
            // continuity correction toward the center
            const double shift = w > mean ? -0.5 : 0.5;
            const double z = std::abs((w - mean + shift) / std::sqrt(var));
            result.p_two_sided = std::min(1.0, 2.0 * detail::normal_sf(z));
        }
    }

    result.significant_at_005 = result.p_two_sided <= 0.05;
    return result;
}

// --- configuration comparison ---------------------------------------------

// One row of the comparison table: a configuration against the reference
// configuration on one corpus. Degenerate comparisons (all deltas zero)
// surface as a missing p-value.
struct ComparisonRow {
    std::string config;
    std::string domain;
    std::size_t n = 0;
    double mean_delta = 0.0;
    std::optional<double> p_value;
    bool significant = false;
};

// Pairwise comparison of every configuration against `reference_config`,
// conducted separately per corpus (domain). Holm step-down correction is
// available behind the flag; uncorrected p-values are the default.
inline std::vector<ComparisonRow> compare_matrix(
    const std::vector<std::pair<std::string, std::vector<EvalReport>>>& configs,
    const std::string& reference_config, Metric metric = Metric::Wder,
    bool holm_correction = false) {
    const std::vector<EvalReport>* reference = nullptr;
    for (const auto& [name, reports] : configs) {
        if (name == reference_config) reference = &reports;
    }
    if (reference == nullptr) {
        throw ConfigError("reference config '" + reference_config + "' not found");
    }

    auto split_by_domain = [](const std::vector<EvalReport>& reports) {
        std::map<std::string, std::vector<EvalReport>> by_domain;
        for (const auto& r : reports) by_domain[r.domain].push_back(r);
        return by_domain;
    };
    const auto ref_by_domain = split_by_domain(*reference);

    std::vector<ComparisonRow> rows;
    for (const auto& [name, reports] : configs) {
        if (name == reference_config) continue;
        const auto by_domain = split_by_domain(reports);
        for (const auto& [domain, ref_reports] : ref_by_domain) {
            const auto it = by_domain.find(domain);
            if (it == by_domain.end()) {
                throw IdMismatch("config '" + name + "' has no reports for corpus '" +
                                     domain + "'",
                                 {}, {});
            }
            const auto samples = paired_deltas(it->second, ref_reports, metric);
            ComparisonRow row;
            row.config = name;
            row.domain = domain;
            row.n = samples.size();
            row.mean_delta = mean_delta(samples);
            try {
                const auto w = wilcoxon_signed_rank(samples);
                row.p_value = w.p_two_sided;
                row.significant = w.significant_at_005;
            } catch (const Degenerate&) {
                row.p_value = std::nullopt;
                row.significant = false;
            }
            rows.push_back(std::move(row));
        }
    }

    if (holm_correction) {
        // Holm step-down, applied separately per corpus.
        std::map<std::string, std::vector<std::size_t>> per_domain;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].p_value) per_domain[rows[i].domain].push_back(i);
        }
        for (auto& [domain, idx] : per_domain) {
            std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
                return *rows[a].p_value < *rows[b].p_value;
            });
            const std::size_t m = idx.size();
            double running = 0.0;
            for (std::size_t k = 0; k < m; ++k) {
                double adjusted = static_cast<double>(m - k) * *rows[idx[k]].p_value;
                running = std::max(running, std::min(1.0, adjusted));
                rows[idx[k]].p_value = running;
                rows[idx[k]].significant = running <= 0.05;
            }
        }
    }
    return rows;
}

}  // namespace satkit
