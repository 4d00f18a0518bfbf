#pragma once

// Segment data model and the transcript text grammar:
//
//   [<start>] - [<end>] [<speaker label>]
//   <one line of text>
//
// repeated per segment, optional blank lines between records, UTF-8, LF
// line endings. Timestamps are decimal seconds, rendered with exactly two
// decimal places so that serialize/parse round-trips bit-exactly.

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "satkit/errors.hpp"
#include "satkit/normalize.hpp"

namespace satkit {

struct Segment {
    double start = 0.0;  // seconds, non-negative
    double end = 0.0;    // seconds, start <= end
    std::string speaker; // non-empty, no newline
    std::string text;    // single line, may be empty

    bool operator==(const Segment&) const = default;
};

struct Transcript {
    std::string recording_id;
    std::vector<Segment> segments;
    std::optional<double> audio_duration;  // seconds, when known from metadata

    bool operator==(const Transcript&) const = default;

    // Diarization can emit interleaved overlapping turns; out-of-order start
    // times are reported, never silently reordered.
    bool time_ordered() const {
        for (std::size_t i = 1; i < segments.size(); ++i) {
            if (segments[i].start < segments[i - 1].start) return false;
        }
        return true;
    }
};

// One normalized word with the speaker it was attributed to.
struct TaggedWord {
    std::string token;
    std::string speaker;
    std::size_t segment_index = 0;

    bool operator==(const TaggedWord&) const = default;
};

struct Chunk {
    std::string parent_id;
    std::size_t index = 0;
    std::vector<Segment> segments;

    bool operator==(const Chunk&) const = default;
};

// --- timestamp rendering -------------------------------------------------

// Locale-independent fixed two-decimal rendering.
inline std::string format_timestamp(double seconds) {
    char buf[48];
    const auto res = std::to_chars(buf, buf + sizeof(buf), seconds,
                                   std::chars_format::fixed, 2);
    return std::string(buf, res.ptr);
}

namespace detail {

// Non-negative decimal seconds; rejects signs, exponents, trailing junk.
inline std::optional<double> parse_timestamp(std::string_view s) {
    if (s.empty()) return std::nullopt;
    bool dot = false;
    for (char c : s) {
        if (c == '.') {
            if (dot) return std::nullopt;
            dot = true;
        } else if (c < '0' || c > '9') {
            return std::nullopt;
        }
    }
    double value = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), value,
                                     std::chars_format::fixed);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        return std::nullopt;
    }
    return value;
}

struct HeaderFields {
    std::string_view start, end, label;
};

// Splits `[A] - [B] [L]`. The label is everything between the "] [" that
// follows the second timestamp and the closing ']' at end of line, so labels
// may themselves contain brackets.
inline std::optional<HeaderFields> split_header(std::string_view line) {
    if (line.size() < 11 || line.front() != '[' || line.back() != ']') {
        return std::nullopt;
    }
    const auto sep = line.find("] - [");
    if (sep == std::string_view::npos) return std::nullopt;
    const std::string_view start = line.substr(1, sep - 1);
    const auto rest_pos = sep + 5;
    const auto end_close = line.find("] [", rest_pos);
    if (end_close == std::string_view::npos) return std::nullopt;
    const std::string_view end = line.substr(rest_pos, end_close - rest_pos);
    const auto label_pos = end_close + 3;
    if (label_pos >= line.size()) return std::nullopt;  // need at least "]"
    const std::string_view label =
        line.substr(label_pos, line.size() - 1 - label_pos);
    return HeaderFields{start, end, label};
}

}  // namespace detail

// --- operations ----------------------------------------------------------

// Parses transcript text. Records are positional: every header line is
// followed by exactly one text line (which may be empty and may itself look
// like a header). Blank lines between records are skipped.
inline Transcript parse_transcript(std::string_view text, std::string recording_id) {
    Transcript t;
    t.recording_id = std::move(recording_id);

    // split into lines; a trailing '\n' terminates the last line rather than
    // opening an empty one
    std::vector<std::string_view> lines;
    {
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const auto nl = text.find('\n', pos);
            if (nl == std::string_view::npos) {
                if (pos < text.size()) lines.push_back(text.substr(pos));
                break;
            }
            lines.push_back(text.substr(pos, nl - pos));
            pos = nl + 1;
        }
    }
    auto strip_cr = [](std::string_view v) {
        if (!v.empty() && v.back() == '\r') v.remove_suffix(1);
        return v;
    };

    std::size_t i = 0;
    while (i < lines.size()) {
        const std::string_view header = strip_cr(lines[i]);
        const std::size_t header_line = i + 1;
        if (header.empty()) {
            ++i;
            continue;
        }
        const auto fields = detail::split_header(header);
        if (!fields) {
            throw FormatError(FormatError::Kind::MalformedHeader, header_line,
                              "line " + std::to_string(header_line) +
                                  ": malformed segment header");
        }
        const auto start = detail::parse_timestamp(fields->start);
        const auto end = detail::parse_timestamp(fields->end);
        if (!start || !end) {
            throw FormatError(FormatError::Kind::BadTimestamp, header_line,
                              "line " + std::to_string(header_line) +
                                  ": unparseable timestamp");
        }
        if (*start > *end) {
            throw FormatError(FormatError::Kind::InvertedInterval, header_line,
                              "line " + std::to_string(header_line) +
                                  ": segment start exceeds end");
        }
        if (fields->label.empty()) {
            throw FormatError(FormatError::Kind::MalformedHeader, header_line,
                              "line " + std::to_string(header_line) +
                                  ": empty speaker label");
        }
        if (i + 1 >= lines.size()) {
            throw FormatError(FormatError::Kind::MissingTextLine, header_line,
                              "line " + std::to_string(header_line) +
                                  ": segment header without a text line");
        }
        const std::string_view text_line = strip_cr(lines[i + 1]);
        t.segments.push_back(Segment{*start, *end, std::string(fields->label),
                                     std::string(text_line)});
        i += 2;
    }
    return t;
}

inline void serialize_segment(const Segment& s, std::string& out) {
    out.push_back('[');
    out += format_timestamp(s.start);
    out += "] - [";
    out += format_timestamp(s.end);
    out += "] [";
    out += s.speaker;
    out += "]\n";
    out += s.text;
    out.push_back('\n');
}

inline std::string serialize_segments(const std::vector<Segment>& segments) {
    std::string out;
    out.reserve(segments.size() * 48);
    for (const auto& s : segments) serialize_segment(s, out);
    return out;
}

inline std::string serialize_transcript(const Transcript& t) {
    return serialize_segments(t.segments);
}

// Normalized word stream with speaker tags; the unit WDER counts over.
inline std::vector<TaggedWord> flatten(const Transcript& t) {
    std::vector<TaggedWord> words;
    for (std::size_t i = 0; i < t.segments.size(); ++i) {
        for (auto& tok : normalize(t.segments[i].text)) {
            words.push_back(TaggedWord{std::move(tok), t.segments[i].speaker, i});
        }
    }
    return words;
}

// Contiguous order-preserving partition; every chunk holds chunk_size
// segments except possibly the last. Fits long interviews into an LLM
// context window.
inline std::vector<Chunk> chunk(const Transcript& t, std::size_t chunk_size = 500) {
    if (chunk_size < 1) throw ConfigError("chunk_size must be >= 1");
    std::vector<Chunk> chunks;
    for (std::size_t begin = 0; begin < t.segments.size(); begin += chunk_size) {
        const auto end = std::min(begin + chunk_size, t.segments.size());
        Chunk c;
        c.parent_id = t.recording_id;
        c.index = chunks.size();
        c.segments.assign(t.segments.begin() + static_cast<std::ptrdiff_t>(begin),
                          t.segments.begin() + static_cast<std::ptrdiff_t>(end));
        chunks.push_back(std::move(c));
    }
    return chunks;
}

// Inverse of chunk(): concatenates in index order.
inline Transcript assemble(std::string recording_id, const std::vector<Chunk>& chunks,
                           std::optional<double> audio_duration = std::nullopt) {
    Transcript t;
    t.recording_id = std::move(recording_id);
    t.audio_duration = audio_duration;
    for (const auto& c : chunks) {
        t.segments.insert(t.segments.end(), c.segments.begin(), c.segments.end());
    }
    return t;
}

// Explicit duration when known, else the maximum segment end time.
inline double audio_duration(const Transcript& t) {
    if (t.audio_duration) return *t.audio_duration;
    if (t.segments.empty()) {
        throw EmptyTranscript("transcript '" + t.recording_id +
                              "' has no audio duration and no segments");
    }
    double max_end = 0.0;
    for (const auto& s : t.segments) max_end = std::max(max_end, s.end);
    return max_end;
}

}  // namespace satkit
