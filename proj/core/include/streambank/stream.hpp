#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "streambank/matrix.hpp"

namespace streambank {

// Synthetic video source: a field of Gaussian blobs translating on a torus,
// with fresh i.i.d. per-frame noise on top.  Content translation plus
// independent noise is exactly the regime where per-frame processing flickers
// and cross-frame feature reuse should help.
struct StreamSpec {
    std::uint64_t seed = 1;
    int height = 32;
    int width = 32;
    int patch = 4;
    int dim = 16;
    int frames = 30;
    // Per-step displacements (dx, dy), cycled when shorter than the stream.
    // Empty means static content.
    std::vector<std::pair<int, int>> motion;
    int blobs = 3;
    float noise_sigma = 0.0f;

    void validate() const;

    int grid_rows() const { return height / patch; }
    int grid_cols() const { return width / patch; }
    int tokens() const { return grid_rows() * grid_cols(); }

    static StreamSpec from_json_file(const std::filesystem::path& path);
    void to_json_file(const std::filesystem::path& path) const;
};

struct Frame {
    int index = 0;
    Matrix grid;                          // height x width intensity field
    Matrix tokens;                        // n x dim patch embedding (filled by callers)
    std::pair<int, int> displacement{0, 0}; // content motion from frame index-1 to index
};

struct Stream {
    StreamSpec spec;
    std::vector<Frame> frames;
    // Blob centers (y, x) at frame 0; useful for locating content in tests.
    std::vector<std::array<double, 2>> blob_centers;
};

Stream generate_stream(const StreamSpec& spec);

// Projects non-overlapping patch x patch tiles (flattened row-major) through
// `projection` (patch^2 x dim).  Token order is row-major over the tile grid.
Matrix embed_frame(const Matrix& grid, const Matrix& projection, int patch);

} // namespace streambank
