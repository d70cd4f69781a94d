#pragma once

#include <vector>

#include "streambank/matrix.hpp"

namespace streambank {

// Which similarity ranks the stored rows during matching.  The gate score is
// always cosine so a [0, 1] threshold stays meaningful.
enum class MatchMetric {
    Cosine,
    Dot,
};

struct FusionConfig {
    float alpha = 0.75f;      // blend weight toward the matched stored row
    float threshold = 0.9f;   // minimum gate similarity; below it a token passes through untouched
    std::vector<int> active_blocks = {1, 2};
    MatchMetric match_metric = MatchMetric::Cosine;

    void validate() const;
};

// Per-token record of what fusion decided; exported as the fuse-mask CSV.
struct FusionDecision {
    int token = 0;
    int matched = -1;      // stored row index, -1 when the bank is empty
    float similarity = 0.0f; // cosine between the token and its matched row
    bool fused = false;    // true when a blend was actually applied
};

// Blends each row of `current` toward its best-matching stored row:
//
//   out(p) = (1 - alpha) * current(p) + alpha * stored(match(p))
//
// Tokens whose gate similarity falls below the threshold - and every token
// when the bank is empty or alpha is 0 - bypass arithmetic entirely, so their
// output rows are byte-identical to the input.  Matching ties go to the
// lowest stored row index.
Matrix fuse(const Matrix& current, const Matrix& stored, const FusionConfig& cfg,
            std::vector<FusionDecision>* decisions = nullptr);

// True when fusion applies at this block index.
bool should_fuse(int block_index, const FusionConfig& cfg);

} // namespace streambank
