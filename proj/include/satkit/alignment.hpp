#pragma once

// Word-level edit-distance alignment between a reference and a hypothesis
// token stream. Tokens are compared on their normalized form; speaker tags
// play no role here. Deterministic backtrace with tie-break preference
// Match > Substitute > Delete > Insert.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "satkit/errors.hpp"
#include "satkit/transcript.hpp"

namespace satkit {

enum class EditOpKind : std::uint8_t { Match, Substitute, Delete, Insert };

struct EditOp {
    EditOpKind kind;
    std::int64_t ref_index;  // -1 for Insert
    std::int64_t hyp_index;  // -1 for Delete

    bool operator==(const EditOp&) const = default;
};

struct Alignment {
    std::vector<EditOp> ops;
    std::size_t n_ref = 0;
    std::size_t n_match = 0;
    std::size_t n_sub = 0;
    std::size_t n_del = 0;
    std::size_t n_ins = 0;

    std::size_t edit_cost() const { return n_sub + n_del + n_ins; }
};

namespace detail {

// 2-bit-per-cell direction matrix so transcripts of several thousand words
// stay in tens of megabytes.
class DirectionMatrix {
public:
    DirectionMatrix(std::size_t rows, std::size_t cols)
        : cols_(cols), bits_((rows * cols + 3) / 4, 0) {}

    void set(std::size_t i, std::size_t j, std::uint8_t dir) {
        const std::size_t idx = i * cols_ + j;
        const std::size_t byte = idx >> 2;
        const unsigned shift = (idx & 3u) * 2u;
        bits_[byte] = static_cast<std::uint8_t>(
            (bits_[byte] & ~(0x3u << shift)) | (static_cast<unsigned>(dir) << shift));
    }

    std::uint8_t get(std::size_t i, std::size_t j) const {
        const std::size_t idx = i * cols_ + j;
        return (bits_[idx >> 2] >> ((idx & 3u) * 2u)) & 0x3u;
    }

private:
    std::size_t cols_;
    std::vector<std::uint8_t> bits_;
};

}  // namespace detail

inline Alignment align(const std::vector<TaggedWord>& ref,
                       const std::vector<TaggedWord>& hyp) {
    const std::size_t n = ref.size();
    const std::size_t m = hyp.size();

    constexpr std::uint8_t kMatch = 0, kSub = 1, kDel = 2, kIns = 3;
    detail::DirectionMatrix dir(n + 1, m + 1);
    std::vector<std::uint32_t> prev(m + 1), cur(m + 1);

    for (std::size_t j = 0; j <= m; ++j) {
        prev[j] = static_cast<std::uint32_t>(j);
        if (j) dir.set(0, j, kIns);
    }
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = static_cast<std::uint32_t>(i);
        dir.set(i, 0, kDel);
        for (std::size_t j = 1; j <= m; ++j) {
            const bool equal = ref[i - 1].token == hyp[j - 1].token;
            std::uint32_t best;
            std::uint8_t best_dir;
            if (equal) {
                best = prev[j - 1];
                best_dir = kMatch;
            } else {
                best = prev[j - 1] + 1;
                best_dir = kSub;
            }
            if (prev[j] + 1 < best) {
                best = prev[j] + 1;
                best_dir = kDel;
            }
            if (cur[j - 1] + 1 < best) {
                best = cur[j - 1] + 1;
                best_dir = kIns;
            }
            cur[j] = best;
            dir.set(i, j, best_dir);
        }
        std::swap(prev, cur);
    }

    Alignment a;
    a.n_ref = n;
    a.ops.reserve(n + m);
    std::size_t i = n, j = m;
    while (i > 0 || j > 0) {
        switch (dir.get(i, j)) {
            case kMatch:
                a.ops.push_back({EditOpKind::Match, std::int64_t(i - 1), std::int64_t(j - 1)});
                ++a.n_match;
                --i;
                --j;
                break;
            case kSub:
                a.ops.push_back({EditOpKind::Substitute, std::int64_t(i - 1), std::int64_t(j - 1)});
                ++a.n_sub;
                --i;
                --j;
                break;
            case kDel:
                a.ops.push_back({EditOpKind::Delete, std::int64_t(i - 1), -1});
                ++a.n_del;
                --i;
                break;
            case kIns:
                a.ops.push_back({EditOpKind::Insert, -1, std::int64_t(j - 1)});
                ++a.n_ins;
                --j;
                break;
        }
    }
    std::reverse(a.ops.begin(), a.ops.end());
    return a;
}

// WER = (S + D + I) / N.
inline double wer(const Alignment& a) {
    if (a.n_ref == 0) throw EmptyReference("WER undefined for an empty reference");
    return static_cast<double>(a.edit_cost()) / static_cast<double>(a.n_ref);
}

}  // namespace satkit
