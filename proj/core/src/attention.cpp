#include "streambank/attention.hpp"

#include <cmath>

#include "streambank/errors.hpp"

namespace streambank {

Matrix extended_attention(const AttentionInput& input, const Matrix& k_bank, const Matrix& v_bank) {
    const std::size_t n = input.q.rows();
    const std::size_t d = input.q.cols();
    if (d == 0 || n == 0) {
        throw ShapeError("extended_attention: empty query");
    }
    if (input.k.rows() != n || input.v.rows() != n || input.k.cols() != d || input.v.cols() != d) {
        throw ShapeError("extended_attention: Q, K, V must share shape");
    }
    if (k_bank.rows() != v_bank.rows()) {
        throw ShapeError("extended_attention: banked K and V row counts differ");
    }
    if (k_bank.rows() > 0 && (k_bank.cols() != d || v_bank.cols() != d)) {
        throw ShapeError("extended_attention: banked rows must have the query dim");
    }

    const bool banked = k_bank.rows() > 0;
    Matrix keys = banked ? concat_rows(input.k, k_bank) : input.k;
    Matrix vals = banked ? concat_rows(input.v, v_bank) : input.v;

    Matrix logits = matmul(input.q, transpose(keys));
    Matrix weights = row_softmax(logits, 1.0f / std::sqrt(static_cast<float>(d)));
    return matmul(weights, vals);
}

std::vector<double> attention_heatmap(std::span<const float> q_row, const Matrix& k_past) {
    if (k_past.rows() > 0 && k_past.cols() != q_row.size()) {
        throw ShapeError("attention_heatmap: key dim does not match query");
    }
    std::vector<double> scores(k_past.rows(), 0.0);
    for (std::size_t j = 0; j < k_past.rows(); ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < q_row.size(); ++k) {
            acc += static_cast<double>(q_row[k]) * static_cast<double>(k_past(j, k));
        }
        scores[j] = acc;
    }
    return scores;
}

} // namespace streambank
