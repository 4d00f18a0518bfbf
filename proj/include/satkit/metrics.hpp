#pragma once

// Evaluation metrics for speaker-attributed transcripts:
//   WDER = WER + (correctly transcribed words on the wrong speaker) / N
// plus time-based DER for completeness and the speech-marker audit.
// Hypothesis speaker labels are mapped to reference labels by an optimal
// bijective assignment before attribution errors are counted.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "satkit/alignment.hpp"
#include "satkit/errors.hpp"
#include "satkit/hungarian.hpp"
#include "satkit/transcript.hpp"

namespace satkit {

// --- speaker confusion ------------------------------------------------------

// counts[h][r] = number of Match ops whose hypothesis word bears label h and
// whose reference word bears label r. Labels are indexed in first-appearance
// order of their word stream; labels without any match still get rows/columns.
struct ConfusionMatrix {
    std::vector<std::string> hyp_labels;
    std::vector<std::string> ref_labels;
    std::vector<std::vector<long long>> counts;
};

namespace detail {

inline std::vector<std::string> label_order(const std::vector<TaggedWord>& words) {
    std::vector<std::string> order;
    std::set<std::string> seen;
    for (const auto& w : words) {
        if (seen.insert(w.speaker).second) order.push_back(w.speaker);
    }
    return order;
}

}  // namespace detail

inline ConfusionMatrix confusion_matrix(const Alignment& a,
                                        const std::vector<TaggedWord>& ref,
                                        const std::vector<TaggedWord>& hyp) {
    ConfusionMatrix m;
    m.hyp_labels = detail::label_order(hyp);
    m.ref_labels = detail::label_order(ref);
    std::map<std::string, std::size_t> hyp_idx, ref_idx;
    for (std::size_t i = 0; i < m.hyp_labels.size(); ++i) hyp_idx[m.hyp_labels[i]] = i;
    for (std::size_t i = 0; i < m.ref_labels.size(); ++i) ref_idx[m.ref_labels[i]] = i;

    m.counts.assign(m.hyp_labels.size(),
                    std::vector<long long>(m.ref_labels.size(), 0));
    for (const auto& op : a.ops) {
        if (op.kind != EditOpKind::Match) continue;
        const auto& h = hyp[static_cast<std::size_t>(op.hyp_index)].speaker;
        const auto& r = ref[static_cast<std::size_t>(op.ref_index)].speaker;
        ++m.counts[hyp_idx[h]][ref_idx[r]];
    }
    return m;
}

// --- optimal speaker mapping ------------------------------------------------

// Injective hypothesis-label -> reference-label assignment maximizing matched
// word agreement; the smaller label set is fully assigned, surplus hypothesis
// labels are reported unmapped. Ties resolve to the lowest label index.
struct SpeakerMapping {
    std::map<std::string, std::string> pairs;
    std::set<std::string> unmapped_hyp;
    long long agreement = 0;

    const std::string* mapped(const std::string& hyp_label) const {
        const auto it = pairs.find(hyp_label);
        return it == pairs.end() ? nullptr : &it->second;
    }
};

inline SpeakerMapping optimal_mapping(const ConfusionMatrix& m) {
    SpeakerMapping mapping;
    const auto result = canonical_max_agreement(m.counts);
    mapping.agreement = result.total;
    for (std::size_t i = 0; i < m.hyp_labels.size(); ++i) {
        const int j = i < result.row_to_col.size() ? result.row_to_col[i] : -1;
        if (j >= 0) {
            mapping.pairs[m.hyp_labels[i]] = m.ref_labels[static_cast<std::size_t>(j)];
        } else {
            mapping.unmapped_hyp.insert(m.hyp_labels[i]);
        }
    }
    return mapping;
}

// --- WDER ---------------------------------------------------------------

// Optional scoring adjustments. A name map rewrites listed proper names to
// the pseudonymization token "name" on the reference side, so references can
// be compared against hypotheses that were pseudonymized.
struct ScoringOptions {
    std::set<std::string> reference_name_map;  // normalized tokens

    bool empty() const { return reference_name_map.empty(); }
};

inline std::vector<TaggedWord> scoring_words(const Transcript& t,
                                             const std::set<std::string>& name_map) {
    auto words = flatten(t);
    if (!name_map.empty()) {
        for (auto& w : words) {
            if (name_map.count(w.token)) w.token = "name";
        }
    }
    return words;
}

struct WderResult {
    double wer = 0.0;
    double attribution_error = 0.0;  // misattributed matches / N
    double wder = 0.0;               // == wer + attribution_error by construction
    SpeakerMapping mapping;
    std::size_t n_ref = 0;
    std::size_t n_match = 0;
    std::size_t n_misattributed = 0;
    std::size_t edit_cost = 0;
};

inline WderResult wder(const Transcript& ref, const Transcript& hyp,
                       const ScoringOptions& options = {}) {
    const auto ref_words = scoring_words(ref, options.reference_name_map);
    const auto hyp_words = flatten(hyp);
    if (ref_words.empty()) {
        throw EmptyReference("WDER undefined: reference transcript '" +
                             ref.recording_id + "' has no words");
    }

    const auto a = align(ref_words, hyp_words);
    const auto confusion = confusion_matrix(a, ref_words, hyp_words);
    auto mapping = optimal_mapping(confusion);

    std::size_t misattributed = 0;
    for (const auto& op : a.ops) {
        if (op.kind != EditOpKind::Match) continue;
        const auto& h = hyp_words[static_cast<std::size_t>(op.hyp_index)].speaker;
        const auto& r = ref_words[static_cast<std::size_t>(op.ref_index)].speaker;
        const std::string* target = mapping.mapped(h);
        if (target == nullptr || *target != r) ++misattributed;
    }

    WderResult result;
    result.n_ref = a.n_ref;
    result.n_match = a.n_match;
    result.n_misattributed = misattributed;
    result.edit_cost = a.edit_cost();
    result.wer = satkit::wer(a);
    result.attribution_error =
        static_cast<double>(misattributed) / static_cast<double>(a.n_ref);
    result.wder = result.wer + result.attribution_error;
    result.mapping = std::move(mapping);
    return result;
}

// --- DER ------------------------------------------------------------------

// Time-based diarization error under the provided mapping, no collar:
//   (missed + false alarm + confusion) / reference speech time
// where reference speech time is the measure of the union of reference
// segment intervals. Counting is set-based per time slice: simultaneous
// same-label segments merge; hypothesis labels act through the mapping,
// unmapped labels can never be correct.
inline double der(const Transcript& ref, const Transcript& hyp,
                  const SpeakerMapping& mapping) {
    struct Event {
        double time;
        int side;  // 0 = ref, 1 = hyp
        int label;
        int delta;
    };

    std::map<std::string, int> label_ids;
    auto id_of = [&](const std::string& s) {
        return label_ids.emplace(s, static_cast<int>(label_ids.size())).first->second;
    };

    std::vector<Event> events;
    for (const auto& s : ref.segments) {
        if (s.end <= s.start) continue;
        const int id = id_of(s.speaker);
        events.push_back({s.start, 0, id, +1});
        events.push_back({s.end, 0, id, -1});
    }
    for (const auto& s : hyp.segments) {
        if (s.end <= s.start) continue;
        const std::string* target = mapping.mapped(s.speaker);
        // unmapped hypothesis labels stay distinct from every reference label
        const int id = id_of(target ? *target : "\x01unmapped:" + s.speaker);
        events.push_back({s.start, 1, id, +1});
        events.push_back({s.end, 1, id, -1});
    }

    std::sort(events.begin(), events.end(),
              [](const Event& a, const Event& b) { return a.time < b.time; });

    std::vector<int> ref_count(label_ids.size(), 0), hyp_count(label_ids.size(), 0);
    int ref_active = 0, hyp_active = 0, both_active = 0;
    double error_time = 0.0, ref_time = 0.0;

    std::size_t i = 0;
    while (i < events.size()) {
        const double t0 = events[i].time;
        while (i < events.size() && events[i].time == t0) {
            const auto& e = events[i];
            auto& mine = e.side == 0 ? ref_count : hyp_count;
            auto& theirs = e.side == 0 ? hyp_count : ref_count;
            const bool was_active = mine[e.label] > 0;
            mine[e.label] += e.delta;
            const bool is_active = mine[e.label] > 0;
            if (was_active != is_active) {
                const int d = is_active ? +1 : -1;
                (e.side == 0 ? ref_active : hyp_active) += d;
                if (theirs[e.label] > 0) both_active += d;
            }
            ++i;
        }
        if (i >= events.size()) break;
        const double dt = events[i].time - t0;
        if (dt <= 0) continue;
        const int missed = std::max(0, ref_active - hyp_active);
        const int false_alarm = std::max(0, hyp_active - ref_active);
        const int confusion = std::min(ref_active, hyp_active) - both_active;
        error_time += dt * (missed + false_alarm + confusion);
        if (ref_active > 0) ref_time += dt;
    }

    if (ref_time <= 0.0) {
        throw EmptyReference("DER undefined: reference transcript '" +
                             ref.recording_id + "' has no speech time");
    }
    return error_time / ref_time;
}

// --- speech-marker audit ----------------------------------------------------

// The nine French discourse markers whose preservation is audited.
inline const std::array<std::string, 9>& speech_markers() {
    static const std::array<std::string, 9> markers = {
        "euh", "hm", "hein", "ouais", "bah", "ah", "oh", "ben", "bon"};
    return markers;
}

struct MarkerCounts {
    long long before = 0;
    long long after = 0;
    long long suppressed = 0;  // max(0, before - after)

    bool operator==(const MarkerCounts&) const = default;
};

// Whole-token marker occurrence counts over the flattened normalized streams.
inline std::map<std::string, MarkerCounts> marker_audit(const Transcript& before,
                                                        const Transcript& after) {
    std::map<std::string, MarkerCounts> audit;
    for (const auto& m : speech_markers()) audit[m] = MarkerCounts{};
    for (const auto& w : flatten(before)) {
        const auto it = audit.find(w.token);
        if (it != audit.end()) ++it->second.before;
    }
    for (const auto& w : flatten(after)) {
        const auto it = audit.find(w.token);
        if (it != audit.end()) ++it->second.after;
    }
    for (auto& [name, c] : audit) {
        c.suppressed = std::max(0LL, c.before - c.after);
    }
    return audit;
}

// --- per-recording report -----------------------------------------------

// Everything the evaluation emits for one recording. `domain` tags the corpus
// the recording belongs to so comparisons can be run per dataset.
struct EvalReport {
    std::string recording_id;
    std::string domain;
    bool outlier = false;                       // hypothesis failed to parse
    std::optional<std::string> outlier_reason;
    double wer = 0.0;
    double attribution_error = 0.0;
    double wder = 0.0;
    double der = 0.0;
    std::size_t n_ref = 0;
    std::optional<double> rtf;
    std::map<std::string, MarkerCounts> marker_audit;
};

// Full metric suite over one reference/hypothesis pair.
inline EvalReport evaluate_pair(const Transcript& ref, const Transcript& hyp,
                                const ScoringOptions& options = {},
                                const std::string& domain = "") {
    EvalReport report;
    report.recording_id = ref.recording_id;
    report.domain = domain;
    const auto w = wder(ref, hyp, options);
    report.wer = w.wer;
    report.attribution_error = w.attribution_error;
    report.wder = w.wder;
    report.der = der(ref, hyp, w.mapping);
    report.n_ref = w.n_ref;
    report.marker_audit = satkit::marker_audit(ref, hyp);
    return report;
}

}  // namespace satkit
