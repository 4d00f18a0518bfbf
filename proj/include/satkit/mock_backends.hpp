#pragma once

// Deterministic in-process backends for tests, fixtures, and dry runs.
// Mocks report a configured fixed latency without sleeping, so RTF accounting
// can be checked against analytic values instantly.

#include <atomic>
#include <chrono>
#include <functional>
#include <mutex>
#include <random>
#include <string>

#include "satkit/orchestrator.hpp"
#include "satkit/transcript.hpp"

namespace satkit {

namespace detail {

inline double measured_or_fixed(double fixed_latency_s,
                                std::chrono::steady_clock::time_point t0) {
    if (fixed_latency_s > 0.0) return fixed_latency_s;
    const auto dt = std::chrono::steady_clock::now() - t0;
    const double s = std::chrono::duration<double>(dt).count();
    return s > 0.0 ? s : 1e-9;
}

}  // namespace detail

// Echoes the chunk back unchanged.
class IdentityBackend : public Backend {
public:
    explicit IdentityBackend(double fixed_latency_s = 0.0)
        : fixed_latency_s_(fixed_latency_s) {}

    BackendResponse complete(const BackendRequest& request) override {
        const auto t0 = std::chrono::steady_clock::now();
        return {request.user_content, detail::measured_or_fixed(fixed_latency_s_, t0)};
    }

private:
    double fixed_latency_s_;
};

// Arbitrary scripted response.
class FunctionBackend : public Backend {
public:
    using Fn = std::function<std::string(const BackendRequest&)>;

    explicit FunctionBackend(Fn fn, double fixed_latency_s = 0.0)
        : fn_(std::move(fn)), fixed_latency_s_(fixed_latency_s) {}

    BackendResponse complete(const BackendRequest& request) override {
        const auto t0 = std::chrono::steady_clock::now();
        return {fn_(request), detail::measured_or_fixed(fixed_latency_s_, t0)};
    }

private:
    Fn fn_;
    double fixed_latency_s_;
};

// Parses the chunk, applies a per-segment transform, serializes it back.
// Unparseable input is echoed as-is.
class SegmentTransformBackend : public Backend {
public:
    using Transform = std::function<void(Segment&)>;

    explicit SegmentTransformBackend(Transform transform, double fixed_latency_s = 0.0)
        : transform_(std::move(transform)), fixed_latency_s_(fixed_latency_s) {}

    BackendResponse complete(const BackendRequest& request) override {
        const auto t0 = std::chrono::steady_clock::now();
        std::string text;
        try {
            auto t = parse_transcript(request.user_content, "chunk");
            for (auto& s : t.segments) transform_(s);
            text = serialize_transcript(t);
        } catch (const FormatError&) {
            text = request.user_content;
        }
        return {std::move(text), detail::measured_or_fixed(fixed_latency_s_, t0)};
    }

private:
    Transform transform_;
    double fixed_latency_s_;
};

// Wraps another backend and replaces a seeded fraction of responses with
// narrative prose that cannot parse as segments. Counts what it injected so
// tests can compare against the orchestrator's outlier accounting.
class FaultInjectionBackend : public Backend {
public:
    FaultInjectionBackend(Backend& inner, double fault_rate, std::uint64_t seed)
        : inner_(inner), fault_rate_(fault_rate), rng_(seed) {}

    BackendResponse complete(const BackendRequest& request) override {
        bool fault = false;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            fault = std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < fault_rate_;
        }
        if (fault) {
            faults_injected_.fetch_add(1);
            auto response = inner_.complete(request);
            response.text =
                "I'm sorry, here is a summary of the conversation instead of "
                "the requested format.";
            return response;
        }
        return inner_.complete(request);
    }

    std::size_t faults_injected() const { return faults_injected_.load(); }

private:
    Backend& inner_;
    double fault_rate_;
    std::mt19937_64 rng_;
    std::mutex mutex_;
    std::atomic<std::size_t> faults_injected_{0};
};

}  // namespace satkit
