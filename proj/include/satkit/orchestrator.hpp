#pragma once

// N-pass refinement orchestration. A schedule is an ordered list of passes
// (SR / WR / Joint); each pass chunks the current transcript, sends every
// chunk to the backend with the pass prompt, validates the output against
// the segment grammar and the input chunk's segment count, and concatenates
// the results in index order. A chunk whose output fails validation falls
// back to its input, so a schedule always yields a parseable transcript with
// the same segment count as its input. Passes are strictly sequential;
// chunks within a pass may run concurrently.

#include <atomic>
#include <cctype>
#include <cstdint>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "satkit/errors.hpp"
#include "satkit/prompts.hpp"
#include "satkit/transcript.hpp"

namespace satkit {

enum class PassStage { Improvement, Refinement };

struct PassSpec {
    PassKind kind = PassKind::SR;
    PassStage stage = PassStage::Improvement;  // informational
    std::string prompt_id;
};

enum class Strategy { SRLed, WRLed, Joint };

inline const char* strategy_name(Strategy s) {
    switch (s) {
        case Strategy::SRLed: return "SR-led";
        case Strategy::WRLed: return "WR-led";
        case Strategy::Joint: return "Joint";
    }
    return "?";
}

inline std::optional<Strategy> strategy_from_name(const std::string& name) {
    if (name == "SR-led" || name == "sr-led" || name == "SR") return Strategy::SRLed;
    if (name == "WR-led" || name == "wr-led" || name == "WR") return Strategy::WRLed;
    if (name == "Joint" || name == "joint") return Strategy::Joint;
    return std::nullopt;
}

enum class Shots { Zero, Few };

struct PassSchedule {
    std::vector<PassSpec> passes;
    Strategy strategy = Strategy::SRLed;
    Shots shots = Shots::Zero;
    std::string domain;  // corpus tag, e.g. "AN" or "SP"
    std::size_t chunk_size = 500;
    std::string model;
    std::optional<std::string> few_shot_example;  // transcript excerpt
};

// Builds the alternating pass list: SR-led schedules start with SR, WR-led
// with WR, Joint schedules repeat the joint pass. The first pass of each
// kind is its Improvement stage, later ones are Refinement stages.
inline PassSchedule make_schedule(Strategy strategy, std::size_t n_passes,
                                  Shots shots, std::string domain,
                                  std::size_t chunk_size = 500) {
    if (n_passes < 1 || n_passes > 9) {
        throw ConfigError("schedule length must lie in [1, 9]");
    }
    PassSchedule schedule;
    schedule.strategy = strategy;
    schedule.shots = shots;
    schedule.domain = std::move(domain);
    schedule.chunk_size = chunk_size;

    std::string domain_lower = schedule.domain;
    for (auto& c : domain_lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));

    for (std::size_t i = 0; i < n_passes; ++i) {
        PassSpec spec;
        if (strategy == Strategy::Joint) {
            spec.kind = PassKind::Joint;
        } else {
            const bool first_is_sr = strategy == Strategy::SRLed;
            const bool even = i % 2 == 0;
            spec.kind = (even == first_is_sr) ? PassKind::SR : PassKind::WR;
        }
        spec.stage = i < 2 ? PassStage::Improvement : PassStage::Refinement;
        spec.prompt_id = std::string(pass_kind_name(spec.kind)) + "_" + domain_lower;
        schedule.passes.push_back(std::move(spec));
    }
    return schedule;
}

// --- backend abstraction --------------------------------------------------

// All inference runs fully deterministic: temperature is pinned to zero.
struct BackendRequest {
    std::string system_prompt;
    std::string user_content;  // serialized chunk
    std::string model;
    double temperature = 0.0;
};

struct BackendResponse {
    std::string text;
    double latency_s = 0.0;
};

// Chat-completion abstraction; implementations must be safe to share across
// concurrently processed chunks.
class Backend {
public:
    virtual ~Backend() = default;
    virtual BackendResponse complete(const BackendRequest& request) = 0;
};

// --- prompt construction ----------------------------------------------------

namespace detail {

inline void replace_all(std::string& text, const std::string& placeholder,
                        const std::string& value) {
    std::size_t pos = 0;
    while ((pos = text.find(placeholder, pos)) != std::string::npos) {
        text.replace(pos, placeholder.size(), value);
        pos += value.size();
    }
}

}  // namespace detail

// Resolves the (kind, domain) template into a full system prompt. The
// few-shot block is included only for few-shot schedules; the output-format
// contract is always present.
inline std::string build_prompt(const PassSpec& spec, const PassSchedule& schedule,
                                const PromptLibrary& library,
                                std::optional<std::string> few_shot_example =
                                    std::nullopt) {
    const PromptTemplate* tmpl = library.find(spec.kind, schedule.domain);
    if (tmpl == nullptr) {
        throw MissingTemplate("no prompt template for pass kind '" +
                              std::string(pass_kind_name(spec.kind)) +
                              "' in domain '" + schedule.domain + "'");
    }

    std::string few_shot_block;
    if (schedule.shots == Shots::Few) {
        if (!few_shot_example) few_shot_example = schedule.few_shot_example;
        if (!few_shot_example || few_shot_example->empty()) {
            throw MissingFewShotExample(
                "few-shot schedule without a few-shot example (domain '" +
                schedule.domain + "')");
        }
        few_shot_block =
            "\nRepresentative example from this dataset (expected style and "
            "format):\n" +
            *few_shot_example + "\n\n";
    }

    std::string prompt = tmpl->body;
    detail::replace_all(prompt, "{{role_descriptions}}",
                        library.role_descriptions(schedule.domain));
    detail::replace_all(prompt, "{{corrections}}",
                        library.corrections(schedule.domain));
    detail::replace_all(prompt, "{{few_shot}}", few_shot_block);
    if (prompt.find("{{output_contract}}") != std::string::npos) {
        detail::replace_all(prompt, "{{output_contract}}",
                            prompt_text::output_contract());
    } else {
        prompt += "\n";
        prompt += prompt_text::output_contract();
    }
    return prompt;
}

// --- output validation ------------------------------------------------------

// An LLM response is valid iff it parses under the transcript grammar AND
// keeps the input chunk's segment count. Timestamps and labels may differ
// (boundary redistribution is allowed); merging or dropping segments is not.
inline std::variant<Transcript, FormatError> validate_output(const Chunk& input,
                                                             const std::string& raw) {
    Transcript parsed;
    try {
        parsed = parse_transcript(raw, input.parent_id);
    } catch (const FormatError& e) {
        return FormatError(FormatError::Kind::Unparseable, e.line(),
                           std::string("output unparseable: ") + e.what());
    }
    if (parsed.segments.size() != input.segments.size()) {
        return FormatError(FormatError::Kind::CountMismatch, 0,
                           "output has " + std::to_string(parsed.segments.size()) +
                               " segments, input chunk has " +
                               std::to_string(input.segments.size()));
    }
    return parsed;
}

// --- pass & schedule execution ---------------------------------------------

struct PassOutcome {
    Chunk chunk;                      // refined, or the input on fallback
    std::optional<FormatError> error; // set when the output was rejected
    double latency_s = 0.0;
};

// One pass over one chunk. Backend transport failures propagate as
// BackendError; format failures fall back to the input chunk.
inline PassOutcome run_pass(const Chunk& chunk, const PassSpec& spec,
                            const PassSchedule& schedule, Backend& backend,
                            const PromptLibrary& library) {
    BackendRequest request;
    request.system_prompt = build_prompt(spec, schedule, library);
    request.user_content = serialize_segments(chunk.segments);
    request.model = schedule.model;
    request.temperature = 0.0;

    const BackendResponse response = backend.complete(request);

    PassOutcome outcome;
    outcome.latency_s = response.latency_s;
    auto validated = validate_output(chunk, response.text);
    if (auto* error = std::get_if<FormatError>(&validated)) {
        outcome.chunk = chunk;  // fallback: keep the input
        outcome.error = *error;
    } else {
        outcome.chunk.parent_id = chunk.parent_id;
        outcome.chunk.index = chunk.index;
        outcome.chunk.segments = std::move(std::get<Transcript>(validated).segments);
    }
    return outcome;
}

struct OutlierRecord {
    std::size_t pass_index = 0;
    std::size_t chunk_index = 0;
    std::string reason;
};

struct RunResult {
    Transcript refined;
    std::vector<OutlierRecord> outlier_passes;
    double rtf = 0.0;  // summed backend latency / audio duration
    std::vector<double> per_pass_latency;
};

namespace detail {

// Index-sharded parallel loop; results land by index so the caller's
// concatenation order never depends on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
    if (n == 0) return;
    const unsigned used = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
    if (used == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> threads;
    for (unsigned w = 0; w < used; ++w) {
        threads.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace detail

// Runs a full schedule over one transcript. Passes are sequential (each
// consumes the previous refined transcript); chunks within a pass may run
// concurrently up to `workers`.
inline RunResult run_schedule(const Transcript& t, const PassSchedule& schedule,
                              Backend& backend, const PromptLibrary& library,
                              unsigned workers = 1) {
    const double duration = audio_duration(t);  // throws EmptyTranscript early

    RunResult result;
    Transcript current = t;
    double total_latency = 0.0;

    for (std::size_t p = 0; p < schedule.passes.size(); ++p) {
        const auto& spec = schedule.passes[p];
        const auto chunks = chunk(current, schedule.chunk_size);
        std::vector<PassOutcome> outcomes(chunks.size());
        detail::parallel_for(chunks.size(), workers, [&](std::size_t i) {
            outcomes[i] = run_pass(chunks[i], spec, schedule, backend, library);
        });

        double pass_latency = 0.0;
        std::vector<Chunk> refined_chunks;
        refined_chunks.reserve(outcomes.size());
        for (std::size_t i = 0; i < outcomes.size(); ++i) {
            pass_latency += outcomes[i].latency_s;
            if (outcomes[i].error) {
                result.outlier_passes.push_back(
                    {p, i, outcomes[i].error->what()});
            }
            refined_chunks.push_back(std::move(outcomes[i].chunk));
        }
        result.per_pass_latency.push_back(pass_latency);
        total_latency += pass_latency;
        current = assemble(t.recording_id, refined_chunks, t.audio_duration);
    }

    result.refined = std::move(current);
    result.rtf = total_latency / duration;
    return result;
}

}  // namespace satkit
