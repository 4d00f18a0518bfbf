#pragma once

// Synthetic corpus generation with known ground truth. generate_reference
// draws conversational structure (duration, segment density, turn lengths,
// lexical diversity) from a corpus profile; inject_errors then produces a
// degraded hypothesis plus an exact ledger of every injected mutation, giving
// the metric pipeline an end-to-end oracle.
//
// All randomness is hand-rolled on top of mt19937_64 so identical seeds give
// identical corpora across compilers and standard libraries.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "satkit/errors.hpp"
#include "satkit/normalize.hpp"
#include "satkit/transcript.hpp"

namespace satkit {

struct GaussianParam {
    double mean = 0.0;
    double sd = 0.0;
};

struct CorpusProfile {
    int n_speakers = 2;
    GaussianParam duration_minutes;
    GaussianParam segments_per_minute;
    GaussianParam median_turn_seconds;
    double type_token_ratio = 0.5;  // target in (0, 1]
};

// Profiles shaped like the two clinical corpora the tool was built around.
inline CorpusProfile an_profile() {
    return CorpusProfile{3, {35.0, 12.7}, {16.9, 4.2}, {1.6, 0.6}, 0.30};
}

inline CorpusProfile sp_profile() {
    return CorpusProfile{2, {21.8, 5.1}, {14.7, 2.6}, {2.2, 0.5}, 0.49};
}

struct ErrorSpec {
    double sub_rate = 0.0;           // per-word substitution probability
    double del_rate = 0.0;           // per-word deletion probability
    double ins_rate = 0.0;           // per-word insertion probability
    double speaker_flip_rate = 0.0;  // per-segment reassignment probability
    std::uint64_t seed = 0;
};

inline void validate_error_spec(const ErrorSpec& spec) {
    auto in_unit = [](double r) { return r >= 0.0 && r <= 1.0; };
    if (!in_unit(spec.sub_rate) || !in_unit(spec.del_rate) ||
        !in_unit(spec.ins_rate) || !in_unit(spec.speaker_flip_rate)) {
        throw ConfigError("error rates must lie in [0, 1]");
    }
    if (spec.sub_rate + spec.del_rate > 1.0) {
        throw ConfigError("sub_rate + del_rate must not exceed 1");
    }
}

// Exact counts of the mutations that were actually applied.
struct InjectionLedger {
    std::size_t substitutions = 0;
    std::size_t deletions = 0;
    std::size_t insertions = 0;
    std::size_t flipped_segments = 0;
    std::size_t flipped_words = 0;  // normalized tokens inside flipped segments

    bool operator==(const InjectionLedger&) const = default;
};

namespace detail {

// Deterministic RNG helpers independent of std::*_distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform() {  // [0, 1)
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double normal(double mean, double sd) {
        // Box-Muller; one fresh pair per call keeps the stream predictable
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double z = std::sqrt(-2.0 * std::log(u1)) *
                         std::cos(2.0 * 3.14159265358979323846 * u2);
        return mean + sd * z;
    }

    // draw clamped to mean +- sd so structure always lands inside the
    // profile band; symmetric clamping keeps the expectation on target
    double banded(const GaussianParam& p) {
        return std::clamp(normal(p.mean, p.sd), p.mean - p.sd, p.mean + p.sd);
    }

    std::size_t index(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }

    bool chance(double p) { return uniform() < p; }

private:
    std::mt19937_64 gen_;
};

inline double round_centis(double seconds) {
    return std::round(seconds * 100.0) / 100.0;
}

}  // namespace detail

// Synthetic vocabulary of distinct pronounceable tokens. None of them
// collide with the nine audited speech markers, the pseudonymization token,
// or the "xx"-prefixed substitution markers used by inject_errors.
inline std::vector<std::string> make_vocabulary(std::size_t n) {
    static const char* consonants[] = {"b", "d", "f", "g", "k", "l", "m",
                                       "n", "p", "r", "s", "t", "v", "z"};
    static const char* vowels[] = {"a", "e", "i", "o", "u"};
    std::vector<std::string> vocab;
    vocab.reserve(n);
    for (std::size_t i = 0; vocab.size() < n; ++i) {
        std::size_t k = i;
        std::string word;
        const int syllables = 2 + static_cast<int>((i / 4900) % 2);
        std::size_t state = k;
        for (int s = 0; s < syllables; ++s) {
            word += consonants[state % 14];
            state /= 14;
            word += vowels[state % 5];
            state /= 5;
        }
        word += consonants[i % 14][0];  // final consonant widens the space
        vocab.push_back(word);
    }
    std::sort(vocab.begin(), vocab.end());
    vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
    // deterministic regeneration when dedup shrank the list
    std::size_t suffix = 0;
    while (vocab.size() < n) {
        vocab.push_back("mot" + std::to_string(suffix++));
    }
    return vocab;
}

// Default role labels for generated reference transcripts.
inline std::vector<std::string> default_roles(int n_speakers) {
    static const std::vector<std::string> base = {
        "Patient", "Clinicien", "Infirmier", "Proche",
        "Intervenant_4", "Intervenant_5", "Intervenant_6", "Intervenant_7"};
    std::vector<std::string> roles;
    for (int i = 0; i < n_speakers; ++i) {
        if (static_cast<std::size_t>(i) < base.size()) {
            roles.push_back(base[static_cast<std::size_t>(i)]);
        } else {
            roles.push_back("Intervenant_" + std::to_string(i));
        }
    }
    return roles;
}

inline void validate_profile(const CorpusProfile& profile) {
    if (profile.n_speakers < 1) throw InvalidProfile("n_speakers must be >= 1");
    if (profile.duration_minutes.mean <= 0.0 ||
        profile.segments_per_minute.mean <= 0.0 ||
        profile.median_turn_seconds.mean <= 0.0) {
        throw InvalidProfile("profile means must be positive");
    }
    if (profile.type_token_ratio <= 0.0 || profile.type_token_ratio > 1.0) {
        throw InvalidProfile("type_token_ratio must lie in (0, 1]");
    }
}

// Deterministic under (profile, vocabulary, seed). Turn durations are
// lognormal around the drawn median, speaker turns mostly alternate, and the
// type-token ratio is steered by drawing a brand-new vocabulary word with
// probability equal to the target ratio.
inline Transcript generate_reference(const CorpusProfile& profile,
                                     const std::vector<std::string>& vocabulary,
                                     std::uint64_t seed,
                                     std::string recording_id = "synthetic") {
    validate_profile(profile);
    if (vocabulary.empty()) throw InvalidProfile("vocabulary must not be empty");

    detail::Rng rng(seed);
    const double duration_min = std::max(0.2, rng.banded(profile.duration_minutes));
    const double seg_per_min = std::max(1.0, rng.banded(profile.segments_per_minute));
    const double median_turn = std::max(0.3, rng.banded(profile.median_turn_seconds));
    const double total_seconds = duration_min * 60.0;
    const std::size_t n_segments =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(duration_min * seg_per_min)));

    const auto roles = default_roles(profile.n_speakers);

    // turn durations and inter-turn gaps
    std::vector<double> durations(n_segments);
    double speech_total = 0.0;
    for (auto& d : durations) {
        d = median_turn * std::exp(rng.normal(0.0, 0.4));
        d = std::clamp(d, 0.2, median_turn * 6.0);
        speech_total += d;
    }
    const double gap_budget = std::max(0.0, total_seconds - speech_total);
    std::vector<double> gaps(n_segments);
    double gap_weight = 0.0;
    for (auto& g : gaps) {
        g = rng.uniform() + 0.05;
        gap_weight += g;
    }
    for (auto& g : gaps) g = gap_budget * g / gap_weight;

    // lexical stream with TTR steering
    std::vector<std::size_t> shuffled(vocabulary.size());
    for (std::size_t i = 0; i < shuffled.size(); ++i) shuffled[i] = i;
    for (std::size_t i = shuffled.size(); i > 1; --i) {
        std::swap(shuffled[i - 1], shuffled[rng.index(i)]);
    }
    std::size_t next_fresh = 0;
    std::vector<std::size_t> used;
    auto draw_token = [&]() -> const std::string& {
        if (next_fresh < shuffled.size() &&
            (used.empty() || rng.chance(profile.type_token_ratio))) {
            used.push_back(shuffled[next_fresh++]);
            return vocabulary[used.back()];
        }
        return vocabulary[used[rng.index(used.size())]];
    };

    Transcript t;
    t.recording_id = std::move(recording_id);
    double clock = 0.0;
    std::size_t speaker = rng.index(roles.size());
    for (std::size_t i = 0; i < n_segments; ++i) {
        if (i > 0 && roles.size() > 1 && rng.chance(0.7)) {
            const std::size_t step = 1 + rng.index(roles.size() - 1);
            speaker = (speaker + step) % roles.size();
        }
        Segment s;
        s.start = detail::round_centis(clock);
        s.end = detail::round_centis(clock + durations[i]);
        if (s.end <= s.start) s.end = s.start + 0.01;
        s.speaker = roles[speaker];

        const double words_per_second = 2.2 + rng.uniform();
        const std::size_t n_words = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(durations[i] * words_per_second)));
        std::string text;
        for (std::size_t w = 0; w < n_words; ++w) {
            if (w) text.push_back(' ');
            text += draw_token();
        }
        s.text = std::move(text);

        clock = s.end + gaps[i];
        t.segments.push_back(std::move(s));
    }
    t.audio_duration = detail::round_centis(std::max(total_seconds, clock));
    return t;
}

// Point-estimate profile of an existing transcript (sd fields are zero).
inline CorpusProfile measure_profile(const Transcript& t) {
    if (t.segments.empty()) {
        throw EmptyTranscript("cannot profile a transcript without segments");
    }
    CorpusProfile p;
    std::set<std::string> speakers;
    std::vector<double> turns;
    for (const auto& s : t.segments) {
        speakers.insert(s.speaker);
        turns.push_back(s.end - s.start);
    }
    p.n_speakers = static_cast<int>(speakers.size());
    const double minutes = audio_duration(t) / 60.0;
    p.duration_minutes = {minutes, 0.0};
    p.segments_per_minute = {static_cast<double>(t.segments.size()) / minutes, 0.0};
    std::sort(turns.begin(), turns.end());
    const std::size_t n = turns.size();
    const double median =
        n % 2 ? turns[n / 2] : (turns[n / 2 - 1] + turns[n / 2]) / 2.0;
    p.median_turn_seconds = {median, 0.0};

    std::set<std::string> unique;
    std::size_t total = 0;
    for (const auto& w : flatten(t)) {
        unique.insert(w.token);
        ++total;
    }
    p.type_token_ratio =
        total ? static_cast<double>(unique.size()) / static_cast<double>(total) : 0.0;
    return p;
}

// Degrades a reference into a hypothesis with exactly known mutations.
// Substituted and inserted tokens come from a marker vocabulary ("xx" prefix,
// one fresh token per mutation) disjoint from anything a reference can
// contain, so a mutation can never accidentally match.
inline std::pair<Transcript, InjectionLedger> inject_errors(const Transcript& ref,
                                                            const ErrorSpec& spec) {
    validate_error_spec(spec);
    detail::Rng rng(spec.seed);

    std::vector<std::string> labels;
    {
        std::set<std::string> seen;
        for (const auto& s : ref.segments) {
            if (seen.insert(s.speaker).second) labels.push_back(s.speaker);
        }
    }

    Transcript hyp;
    hyp.recording_id = ref.recording_id;
    hyp.audio_duration = ref.audio_duration;
    InjectionLedger ledger;
    std::size_t marker_serial = 0;
    auto fresh_marker = [&](const char* tag) {
        return std::string("xx") + tag + std::to_string(marker_serial++);
    };

    for (const auto& seg : ref.segments) {
        Segment out = seg;

        bool flipped = false;
        if (labels.size() >= 2 && rng.chance(spec.speaker_flip_rate)) {
            std::size_t current = 0;
            for (std::size_t i = 0; i < labels.size(); ++i) {
                if (labels[i] == seg.speaker) current = i;
            }
            const std::size_t step = 1 + rng.index(labels.size() - 1);
            out.speaker = labels[(current + step) % labels.size()];
            flipped = true;
            ++ledger.flipped_segments;
        }

        // split on spaces; generated references carry pre-normalized words
        std::vector<std::string> tokens;
        {
            std::size_t pos = 0;
            const std::string& text = seg.text;
            while (pos < text.size()) {
                const auto sp = text.find(' ', pos);
                const auto end = sp == std::string::npos ? text.size() : sp;
                if (end > pos) tokens.push_back(text.substr(pos, end - pos));
                pos = end + 1;
            }
        }

        std::vector<std::string> mutated;
        for (auto& tok : tokens) {
            const double u = rng.uniform();
            if (u < spec.sub_rate) {
                mutated.push_back(fresh_marker("s"));
                ++ledger.substitutions;
            } else if (u < spec.sub_rate + spec.del_rate) {
                ++ledger.deletions;
            } else {
                mutated.push_back(tok);
            }
            if (rng.chance(spec.ins_rate)) {
                mutated.push_back(fresh_marker("i"));
                ++ledger.insertions;
            }
        }
        out.text = join_tokens(mutated);
        if (flipped) ledger.flipped_words += normalize(out.text).size();
        hyp.segments.push_back(std::move(out));
    }
    return {std::move(hyp), ledger};
}

}  // namespace satkit
