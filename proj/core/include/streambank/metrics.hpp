#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "streambank/matrix.hpp"

namespace streambank {

// Mean squared difference between frame t warped by the known displacement
// and frame t+1, averaged over consecutive pairs and scaled by 100.  Token
// matrices are interpreted as row-major grid_rows x grid_cols grids; the
// displacement (in pixels) must be a whole number of patches.
double warp_error(const std::vector<Matrix>& outputs,
                  const std::vector<std::pair<int, int>>& displacements, int grid_rows,
                  int grid_cols, int patch);

// Same, for a single consecutive pair.
double warp_error_pair(const Matrix& from, const Matrix& to, std::pair<int, int> displacement,
                       int grid_rows, int grid_cols, int patch);

// Mean squared difference between consecutive outputs, averaged over pairs.
double consec_mse(const std::vector<Matrix>& outputs);
double mse_pair(const Matrix& a, const Matrix& b);

struct Pca3Result {
    Matrix projection;                   // N x 3 scores
    std::array<double, 3> eigenvalues{}; // descending
    bool rank_deficient = false;         // true when zero-padded components exist
};

// Top-3 principal components via deterministic power iteration with
// Gram-Schmidt deflation (seeded starts, 100 iterations or eigenvalue delta
// below 1e-9).  Each component's largest-magnitude coordinate is made
// positive so signs are reproducible.  Ranks below 3 are zero-padded and
// flagged.
Pca3Result pca3(const Matrix& features);

struct FramePairMetrics {
    long frame = 0;
    double warp = 0.0; // vs the previous frame; 0 for the first frame
    double mse = 0.0;
};

struct ConsistencyReport {
    double warp_error = 0.0;
    double consec_mse = 0.0;
    std::vector<FramePairMetrics> per_frame;
    std::uint64_t attn_logits = 0;
    std::size_t bank_rows = 0;
};

ConsistencyReport build_report(const std::vector<Matrix>& outputs,
                               const std::vector<std::pair<int, int>>& displacements,
                               int grid_rows, int grid_cols, int patch,
                               std::uint64_t attn_logits, std::size_t bank_rows);

} // namespace streambank
