#pragma once

// Shared test utilities: deterministic random transcript generation on the
// centisecond grid the file format can represent.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "satkit/transcript.hpp"

namespace testutil {

inline double grid_time(std::mt19937_64& rng, double lo, double hi) {
    std::uniform_int_distribution<long long> d(std::llround(lo * 100),
                                               std::llround(hi * 100));
    return static_cast<double>(d(rng)) / 100.0;
}

inline std::string random_label(std::mt19937_64& rng) {
    static const std::vector<std::string> labels = {
        "SPEAKER_00", "SPEAKER_01", "SPEAKER_02", "Patient",
        "Infirmier",  "Neurochirurgien", "Proche", "A] [B",
    };
    return labels[rng() % labels.size()];
}

inline std::string random_text(std::mt19937_64& rng) {
    static const std::vector<std::string> words = {
        "bonjour", "madame",  "euh",   "j'ai", "mal",    "très",
        "Ouais,",  "déjà",    "ça",    "va",   "docteur", "name",
        "hôpital", "après…",  "(rire)", "100",  "précédent",
    };
    std::uniform_int_distribution<int> n_words(0, 8);
    const int n = n_words(rng);
    std::string text;
    for (int i = 0; i < n; ++i) {
        if (i) text.push_back(' ');
        text += words[rng() % words.size()];
    }
    if (n > 0 && rng() % 8 == 0) {
        text = "[0.00] - [1.00] [X]";  // text masquerading as a header
    }
    return text;
}

// Random transcript with grid timestamps; no explicit audio duration so the
// result is exactly what the file format can carry.
inline satkit::Transcript random_transcript(std::mt19937_64& rng,
                                            std::size_t max_segments = 20) {
    satkit::Transcript t;
    t.recording_id = "rec" + std::to_string(rng() % 1000);
    const std::size_t n = rng() % (max_segments + 1);
    double clock = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        satkit::Segment s;
        s.start = grid_time(rng, clock, clock + 4.0);
        s.end = grid_time(rng, s.start, s.start + 10.0);
        s.speaker = random_label(rng);
        s.text = random_text(rng);
        clock = s.start;  // occasional overlap, mostly forward motion
        t.segments.push_back(std::move(s));
    }
    return t;
}

}  // namespace testutil
