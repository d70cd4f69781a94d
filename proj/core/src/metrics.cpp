#include "streambank/metrics.hpp"

#include <cmath>

#include "streambank/errors.hpp"
#include "streambank/rng.hpp"

namespace streambank {

namespace {

int mod_floor(int a, int m) {
    int r = a % m;
    return r < 0 ? r + m : r;
}

} // namespace

double warp_error_pair(const Matrix& from, const Matrix& to, std::pair<int, int> displacement,
                       int grid_rows, int grid_cols, int patch) {
    const std::size_t tokens = static_cast<std::size_t>(grid_rows) * grid_cols;
    if (from.rows() != tokens || to.rows() != tokens || from.cols() != to.cols()) {
        throw ShapeError("warp_error: outputs do not match the token grid");
    }
    auto [dx, dy] = displacement;
    if (dx % patch != 0 || dy % patch != 0) {
        throw ConfigError("warp_error: displacement must be a whole number of patches");
    }
    int gx = dx / patch;
    int gy = dy / patch;
    double acc = 0.0;
    for (int r = 0; r < grid_rows; ++r) {
        for (int c = 0; c < grid_cols; ++c) {
            // Content at token (r, c) of the earlier frame lands on token
            // (r + gy, c + gx) of the later frame (toroidal).
            std::size_t src = static_cast<std::size_t>(r) * grid_cols + c;
            std::size_t dst = static_cast<std::size_t>(mod_floor(r + gy, grid_rows)) * grid_cols +
                              mod_floor(c + gx, grid_cols);
            for (std::size_t k = 0; k < from.cols(); ++k) {
                double diff = static_cast<double>(from(src, k)) - to(dst, k);
                acc += diff * diff;
            }
        }
    }
    return acc / (static_cast<double>(tokens) * from.cols());
}

double warp_error(const std::vector<Matrix>& outputs,
                  const std::vector<std::pair<int, int>>& displacements, int grid_rows,
                  int grid_cols, int patch) {
    if (outputs.size() < 2) {
        throw ConfigError("warp_error: need at least two outputs");
    }
    if (displacements.size() + 1 < outputs.size()) {
        throw ConfigError("warp_error: missing displacements for consecutive pairs");
    }
    double acc = 0.0;
    for (std::size_t t = 0; t + 1 < outputs.size(); ++t) {
        acc += warp_error_pair(outputs[t], outputs[t + 1], displacements[t], grid_rows, grid_cols,
                               patch);
    }
    return 100.0 * acc / static_cast<double>(outputs.size() - 1);
}

double mse_pair(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) {
        throw ShapeError("consec_mse: outputs must share shape");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double diff = static_cast<double>(a.values()[i]) - b.values()[i];
        acc += diff * diff;
    }
    return acc / static_cast<double>(a.size());
}

double consec_mse(const std::vector<Matrix>& outputs) {
    if (outputs.size() < 2) {
        throw ConfigError("consec_mse: need at least two outputs");
    }
    double acc = 0.0;
    for (std::size_t t = 0; t + 1 < outputs.size(); ++t) {
        acc += mse_pair(outputs[t], outputs[t + 1]);
    }
    return acc / static_cast<double>(outputs.size() - 1);
}

Pca3Result pca3(const Matrix& features) {
    const std::size_t n = features.rows();
    const std::size_t d = features.cols();
    if (n < 3 || d < 3) {
        throw ConfigError("pca3: need at least 3 rows and 3 columns");
    }

    // Column-centered data and sample covariance, all in double.
    std::vector<double> mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            mean[j] += features(i, j);
        }
    }
    for (double& m : mean) {
        m /= static_cast<double>(n);
    }
    std::vector<double> centered(n * d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            centered[i * d + j] = static_cast<double>(features(i, j)) - mean[j];
        }
    }
    std::vector<double> cov(d * d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t a = 0; a < d; ++a) {
            for (std::size_t b = 0; b < d; ++b) {
                cov[a * d + b] += centered[i * d + a] * centered[i * d + b];
            }
        }
    }
    for (double& c : cov) {
        c /= static_cast<double>(n - 1);
    }

    Pca3Result result;
    result.projection = Matrix(n, 3);
    std::vector<std::vector<double>> components;

    for (int comp = 0; comp < 3; ++comp) {
        Rng rng(hash_combine(0x9CA3, static_cast<std::uint64_t>(comp)));
        std::vector<double> v(d);
        for (double& x : v) {
            x = rng.normal();
        }
        double lambda = 0.0;
        double prev_lambda = std::numeric_limits<double>::infinity();
        bool dead = false;
        for (int iter = 0; iter < 100; ++iter) {
            // Deflate: keep v orthogonal to the components already found.
            for (const auto& u : components) {
                double dot = 0.0;
                for (std::size_t j = 0; j < d; ++j) {
                    dot += v[j] * u[j];
                }
                for (std::size_t j = 0; j < d; ++j) {
                    v[j] -= dot * u[j];
                }
            }
            double norm = 0.0;
            for (double x : v) {
                norm += x * x;
            }
            norm = std::sqrt(norm);
            if (norm < 1e-12) {
                dead = true;
                break;
            }
            for (double& x : v) {
                x /= norm;
            }
            std::vector<double> w(d, 0.0);
            for (std::size_t a = 0; a < d; ++a) {
                for (std::size_t b = 0; b < d; ++b) {
                    w[a] += cov[a * d + b] * v[b];
                }
            }
            lambda = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                lambda += v[j] * w[j];
            }
            v = std::move(w);
            if (std::abs(lambda - prev_lambda) < 1e-9) {
                break;
            }
            prev_lambda = lambda;
        }

        // Treat vanishing variance (absolute or relative to the leading
        // component) as a rank deficiency and zero-pad.
        double floor = std::max(1e-12, 1e-9 * std::abs(result.eigenvalues[0]));
        if (dead || lambda <= floor) {
            result.rank_deficient = true;
            result.eigenvalues[comp] = 0.0;
            continue;
        }

        // Final normalization and deterministic sign: the largest-magnitude
        // coordinate is made positive.
        double norm = 0.0;
        for (double x : v) {
            norm += x * x;
        }
        norm = std::sqrt(norm);
        for (double& x : v) {
            x /= norm;
        }
        std::size_t peak = 0;
        for (std::size_t j = 1; j < d; ++j) {
            if (std::abs(v[j]) > std::abs(v[peak])) {
                peak = j;
            }
        }
        if (v[peak] < 0.0) {
            for (double& x : v) {
                x = -x;
            }
        }

        result.eigenvalues[comp] = lambda;
        for (std::size_t i = 0; i < n; ++i) {
            double score = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                score += centered[i * d + j] * v[j];
            }
            result.projection(i, comp) = static_cast<float>(score);
        }
        components.push_back(std::move(v));
    }
    return result;
}

ConsistencyReport build_report(const std::vector<Matrix>& outputs,
                               const std::vector<std::pair<int, int>>& displacements,
                               int grid_rows, int grid_cols, int patch,
                               std::uint64_t attn_logits, std::size_t bank_rows) {
    ConsistencyReport report;
    report.attn_logits = attn_logits;
    report.bank_rows = bank_rows;
    report.per_frame.reserve(outputs.size());
    double warp_acc = 0.0;
    double mse_acc = 0.0;
    for (std::size_t t = 0; t < outputs.size(); ++t) {
        FramePairMetrics m;
        m.frame = static_cast<long>(t);
        if (t > 0) {
            m.warp = 100.0 * warp_error_pair(outputs[t - 1], outputs[t], displacements[t - 1],
                                             grid_rows, grid_cols, patch);
            m.mse = mse_pair(outputs[t - 1], outputs[t]);
            warp_acc += m.warp;
            mse_acc += m.mse;
        }
        report.per_frame.push_back(m);
    }
    std::size_t pairs = outputs.size() > 1 ? outputs.size() - 1 : 1;
    report.warp_error = warp_acc / static_cast<double>(pairs);
    report.consec_mse = mse_acc / static_cast<double>(pairs);
    return report;
}

} // namespace streambank
