#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace satkit {

// Base class for every error the library raises.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A transcript (or LLM output) violates the segment grammar.
// `line` is 1-based in the offending input; 0 means no specific line.
class FormatError : public Error {
public:
    enum class Kind {
        MalformedHeader,
        MissingTextLine,
        BadTimestamp,
        InvertedInterval,
        Unparseable,    // validate_output: raw output does not parse at all
        CountMismatch,  // validate_output: segment count differs from input
    };

    FormatError(Kind kind, std::size_t line, const std::string& message)
        : Error(message), kind_(kind), line_(line) {}

    Kind kind() const { return kind_; }
    std::size_t line() const { return line_; }

    static const char* kind_name(Kind k) {
        switch (k) {
            case Kind::MalformedHeader: return "malformed_header";
            case Kind::MissingTextLine: return "missing_text_line";
            case Kind::BadTimestamp: return "bad_timestamp";
            case Kind::InvertedInterval: return "inverted_interval";
            case Kind::Unparseable: return "unparseable";
            case Kind::CountMismatch: return "count_mismatch";
        }
        return "unknown";
    }

private:
    Kind kind_;
    std::size_t line_;
};

class EmptyTranscript : public Error {
public:
    using Error::Error;
};

// Reference side of a metric has no words (or no speech time).
class EmptyReference : public Error {
public:
    using Error::Error;
};

class MissingTemplate : public Error {
public:
    using Error::Error;
};

class MissingFewShotExample : public Error {
public:
    using Error::Error;
};

// Transport-level backend failure after the retry policy is exhausted.
class BackendError : public Error {
public:
    BackendError(const std::string& message, int status, int attempts)
        : Error(message), status_(status), attempts_(attempts) {}

    int status() const { return status_; }     // HTTP status, 0 for transport failure
    int attempts() const { return attempts_; }

private:
    int status_;
    int attempts_;
};

// Paired comparison got different recording id sets on the two sides.
class IdMismatch : public Error {
public:
    IdMismatch(const std::string& message,
               std::vector<std::string> missing_in_a,
               std::vector<std::string> missing_in_b)
        : Error(message),
          missing_in_a_(std::move(missing_in_a)),
          missing_in_b_(std::move(missing_in_b)) {}

    const std::vector<std::string>& missing_in_a() const { return missing_in_a_; }
    const std::vector<std::string>& missing_in_b() const { return missing_in_b_; }

private:
    std::vector<std::string> missing_in_a_;
    std::vector<std::string> missing_in_b_;
};

// Wilcoxon test with zero effective samples (all deltas zero).
class Degenerate : public Error {
public:
    using Error::Error;
};

class InvalidProfile : public Error {
public:
    using Error::Error;
};

// Bad CLI usage, unreadable config, unresolvable paths.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Missing or unreadable data files (exit code 2 territory).
class DataError : public Error {
public:
    using Error::Error;
};

}  // namespace satkit
