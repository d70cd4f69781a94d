#include "streambank/fusion.hpp"

#include <algorithm>
#include <cmath>

#include "streambank/errors.hpp"

namespace streambank {

void FusionConfig::validate() const {
    if (alpha < 0.0f || alpha > 1.0f) {
        throw ConfigError("fusion: alpha must be in [0, 1]");
    }
    if (threshold < 0.0f || threshold > 1.0f) {
        throw ConfigError("fusion: threshold must be in [0, 1]");
    }
    for (int b : active_blocks) {
        if (b < 0) {
            throw ConfigError("fusion: block indices must be >= 0");
        }
    }
}

namespace {

// Cosine between two rows, accumulated in double and clamped to [-1, 1].
float cosine_rows(std::span<const float> a, std::span<const float> b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        dot += static_cast<double>(a[k]) * b[k];
        na += static_cast<double>(a[k]) * a[k];
        nb += static_cast<double>(b[k]) * b[k];
    }
    if (na == 0.0 || nb == 0.0) {
        return 0.0f;
    }
    return static_cast<float>(std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0));
}

} // namespace

Matrix fuse(const Matrix& current, const Matrix& stored, const FusionConfig& cfg,
            std::vector<FusionDecision>* decisions) {
    if (stored.rows() > 0 && stored.cols() != current.cols()) {
        throw ShapeError("fuse: stored rows must share the token dim");
    }
    const std::size_t n = current.rows();
    const std::size_t m = stored.rows();

    Matrix out = current; // untouched rows stay byte-identical
    if (decisions) {
        decisions->assign(n, FusionDecision{});
        for (std::size_t p = 0; p < n; ++p) {
            (*decisions)[p].token = static_cast<int>(p);
        }
    }
    if (m == 0 || (cfg.alpha == 0.0f && !decisions)) {
        return out;
    }

    Matrix match_scores = cfg.match_metric == MatchMetric::Cosine
                              ? cosine_sim_matrix(current, stored)
                              : matmul(current, transpose(stored));
    for (std::size_t p = 0; p < n; ++p) {
        std::size_t best = 0;
        float best_score = match_scores(p, 0);
        for (std::size_t j = 1; j < m; ++j) {
            if (match_scores(p, j) > best_score) {
                best_score = match_scores(p, j);
                best = j;
            }
        }
        float gate = cfg.match_metric == MatchMetric::Cosine
                         ? best_score
                         : cosine_rows(current.row(p), stored.row(best));
        bool apply = gate >= cfg.threshold && cfg.alpha > 0.0f;
        if (decisions) {
            (*decisions)[p].matched = static_cast<int>(best);
            (*decisions)[p].similarity = gate;
            (*decisions)[p].fused = apply;
        }
        if (apply) {
            auto dst = out.row(p);
            auto cur = current.row(p);
            auto bank = stored.row(best);
            for (std::size_t k = 0; k < dst.size(); ++k) {
                dst[k] = (1.0f - cfg.alpha) * cur[k] + cfg.alpha * bank[k];
            }
        }
    }
    return out;
}

bool should_fuse(int block_index, const FusionConfig& cfg) {
    return std::find(cfg.active_blocks.begin(), cfg.active_blocks.end(), block_index) !=
           cfg.active_blocks.end();
}

} // namespace streambank
