#pragma once

#include <span>
#include <vector>

#include "streambank/matrix.hpp"

namespace streambank {

struct AttentionInput {
    Matrix q;
    Matrix k;
    Matrix v;
};

// Scaled dot-product attention where the key/value rows are extended with
// banked rows from past frames:
//
//   softmax(Q [K; K_bank]^T / sqrt(d)) [V; V_bank]
//
// Empty bank matrices (0 rows) degenerate to standard self-attention.  The
// output rows are convex combinations of the value rows, so every output
// coordinate is bounded by the joint value range.
Matrix extended_attention(const AttentionInput& input, const Matrix& k_bank, const Matrix& v_bank);

// Raw dot products between one query row and each stored key row; used to
// inspect which past token a query would attend to.
std::vector<double> attention_heatmap(std::span<const float> q_row, const Matrix& k_past);

} // namespace streambank
