#pragma once

#include <cstddef>
#include <filesystem>
#include <initializer_list>
#include <span>
#include <vector>

#include "streambank/rng.hpp"

namespace streambank {

// Dense row-major matrix of 32-bit floats.  This is the only tensor type in
// the engine; everything at desk scale fits comfortably in it.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, float fill = 0.0f)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n);
    static Matrix from_rows(std::initializer_list<std::initializer_list<float>> rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    float& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const float& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<float> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const float> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::vector<float>& values() { return data_; }
    const std::vector<float>& values() const { return data_; }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<float> data_;
};

// --- kernels ----------------------------------------------------------------

// (n x k) * (k x m) -> (n x m).  Accumulates in double.
Matrix matmul(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);

// Stacks b below a; column counts must agree.
Matrix concat_rows(const Matrix& a, const Matrix& b);

// Row-wise softmax of (scale * a) with per-row max subtraction, so rows with
// large magnitudes stay finite.
Matrix row_softmax(const Matrix& a, float scale);

// result[i][j] = cos(a_i, b_j); zero-norm rows yield 0.  Values are clamped
// to [-1, 1] so downstream thresholds can rely on the range.
Matrix cosine_sim_matrix(const Matrix& a, const Matrix& b);

Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, float s);
Matrix tanh_of(const Matrix& a);

// Picks the given rows of a, in order.
Matrix gather_rows(const Matrix& a, const std::vector<std::uint32_t>& indices);

// Standard-normal fill; rows and cols must be positive.
Matrix randn(Rng& rng, std::size_t rows, std::size_t cols);

// True when shapes match and the payloads are byte-identical (distinguishes
// -0.0f from 0.0f, unlike operator==).
bool bit_equal(const Matrix& a, const Matrix& b);

// Largest absolute elementwise difference; shapes must match.
float max_abs_diff(const Matrix& a, const Matrix& b);

// --- binary serialization ----------------------------------------------------
//
// Format: magic "SBNK", u32 rows, u32 cols (little-endian), then rows*cols
// little-endian IEEE-754 floats in row-major order.

void write_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix(const std::filesystem::path& path);

} // namespace streambank
