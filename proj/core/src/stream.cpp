#include "streambank/stream.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include <json.hpp>

#include "streambank/errors.hpp"
#include "streambank/rng.hpp"

namespace streambank {

namespace {

int mod_floor(int a, int m) {
    int r = a % m;
    return r < 0 ? r + m : r;
}

// Shortest wrapped distance on a ring of length m.
double torus_delta(double a, double b, int m) {
    double d = std::abs(a - b);
    return std::min(d, static_cast<double>(m) - d);
}

} // namespace

void StreamSpec::validate() const {
    if (height <= 0 || width <= 0 || patch <= 0 || dim <= 0) {
        throw ConfigError("stream: height, width, patch and dim must be positive");
    }
    if (height % patch != 0 || width % patch != 0) {
        throw ConfigError("stream: height and width must be divisible by patch");
    }
    if (frames < 1) {
        throw ConfigError("stream: frames must be >= 1");
    }
    if (blobs < 0) {
        throw ConfigError("stream: blobs must be >= 0");
    }
    if (noise_sigma < 0.0f) {
        throw ConfigError("stream: noise_sigma must be >= 0");
    }
    int bound = std::min(height, width) / 2;
    for (const auto& [dx, dy] : motion) {
        if (std::abs(dx) >= bound || std::abs(dy) >= bound) {
            throw ConfigError("stream: displacement magnitude must be < min(height, width)/2");
        }
    }
}

StreamSpec StreamSpec::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("stream: cannot open " + path.string());
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("stream: invalid JSON in " + path.string() + ": " + e.what());
    }
    static const char* kKeys[] = {"seed",   "height", "width", "patch",      "dim",
                                  "frames", "motion", "blobs", "noise_sigma"};
    for (const auto& [key, value] : doc.items()) {
        (void)value;
        if (std::find_if(std::begin(kKeys), std::end(kKeys),
                         [&](const char* k) { return key == k; }) == std::end(kKeys)) {
            throw ConfigError("stream: unknown key \"" + key + "\" in " + path.string());
        }
    }
    for (const char* key : kKeys) {
        if (!doc.contains(key)) {
            throw ConfigError("stream: missing key \"" + std::string(key) + "\" in " + path.string());
        }
    }
    StreamSpec spec;
    try {
        spec.seed = doc.at("seed").get<std::uint64_t>();
        spec.height = doc.at("height").get<int>();
        spec.width = doc.at("width").get<int>();
        spec.patch = doc.at("patch").get<int>();
        spec.dim = doc.at("dim").get<int>();
        spec.frames = doc.at("frames").get<int>();
        spec.blobs = doc.at("blobs").get<int>();
        spec.noise_sigma = doc.at("noise_sigma").get<float>();
        for (const auto& entry : doc.at("motion")) {
            if (!entry.is_array() || entry.size() != 2) {
                throw ConfigError("stream: motion entries must be [dx, dy] pairs");
            }
            spec.motion.emplace_back(entry[0].get<int>(), entry[1].get<int>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("stream: bad value in " + path.string() + ": " + e.what());
    }
    spec.validate();
    return spec;
}

void StreamSpec::to_json_file(const std::filesystem::path& path) const {
    nlohmann::ordered_json doc;
    doc["seed"] = seed;
    doc["height"] = height;
    doc["width"] = width;
    doc["patch"] = patch;
    doc["dim"] = dim;
    doc["frames"] = frames;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& [dx, dy] : motion) {
        arr.push_back({dx, dy});
    }
    doc["motion"] = arr;
    doc["blobs"] = blobs;
    doc["noise_sigma"] = noise_sigma;
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("stream: cannot write " + path.string());
    }
    out << doc.dump(2) << "\n";
}

Stream generate_stream(const StreamSpec& spec) {
    spec.validate();
    Stream stream;
    stream.spec = spec;

    // Clean base field: seeded Gaussian bumps, wrapped so translation by
    // whole pixels is an exact permutation of the grid.
    Rng blob_rng(hash_combine(spec.seed, 0xB10B5));
    Matrix base(spec.height, spec.width);
    for (int b = 0; b < spec.blobs; ++b) {
        double cy = blob_rng.next_double() * spec.height;
        double cx = blob_rng.next_double() * spec.width;
        double sigma = 2.0 + 2.0 * blob_rng.next_double();
        double amp = 0.5 + 0.5 * blob_rng.next_double();
        stream.blob_centers.push_back({cy, cx});
        for (int y = 0; y < spec.height; ++y) {
            for (int x = 0; x < spec.width; ++x) {
                double dy = torus_delta(y, cy, spec.height);
                double dx = torus_delta(x, cx, spec.width);
                base(y, x) += static_cast<float>(amp * std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma)));
            }
        }
    }

    stream.frames.resize(spec.frames);
    int cum_dx = 0;
    int cum_dy = 0;
    for (int t = 0; t < spec.frames; ++t) {
        Frame& frame = stream.frames[t];
        frame.index = t;
        frame.displacement = {0, 0};
        if (t > 0 && !spec.motion.empty()) {
            frame.displacement = spec.motion[(t - 1) % spec.motion.size()];
        }
        cum_dx += frame.displacement.first;
        cum_dy += frame.displacement.second;

        // Content at base position p appears at p + cumulative displacement;
        // noise is drawn fresh per frame from a frame-local generator so any
        // frame can be produced independently of the others.
        frame.grid = Matrix(spec.height, spec.width);
        for (int y = 0; y < spec.height; ++y) {
            for (int x = 0; x < spec.width; ++x) {
                int sy = mod_floor(y - cum_dy, spec.height);
                int sx = mod_floor(x - cum_dx, spec.width);
                frame.grid(y, x) = base(sy, sx);
            }
        }
        if (spec.noise_sigma > 0.0f) {
            Rng noise_rng(hash_combine(spec.seed, static_cast<std::uint64_t>(t)));
            for (float& v : frame.grid.values()) {
                v += spec.noise_sigma * static_cast<float>(noise_rng.normal());
            }
        }
    }
    return stream;
}

Matrix embed_frame(const Matrix& grid, const Matrix& projection, int patch) {
    if (patch <= 0) {
        throw ConfigError("embed_frame: patch must be positive");
    }
    if (grid.rows() % patch != 0 || grid.cols() % patch != 0) {
        throw ShapeError("embed_frame: grid dims must be divisible by patch");
    }
    if (projection.rows() != static_cast<std::size_t>(patch) * patch) {
        throw ShapeError("embed_frame: projection must have patch^2 rows");
    }
    std::size_t grid_rows = grid.rows() / patch;
    std::size_t grid_cols = grid.cols() / patch;
    Matrix patches(grid_rows * grid_cols, static_cast<std::size_t>(patch) * patch);
    for (std::size_t gr = 0; gr < grid_rows; ++gr) {
        for (std::size_t gc = 0; gc < grid_cols; ++gc) {
            std::size_t token = gr * grid_cols + gc;
            std::size_t k = 0;
            for (int py = 0; py < patch; ++py) {
                for (int px = 0; px < patch; ++px) {
                    patches(token, k++) = grid(gr * patch + py, gc * patch + px);
                }
            }
        }
    }
    return matmul(patches, projection);
}

} // namespace streambank
