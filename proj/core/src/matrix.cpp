#include "streambank/matrix.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include "streambank/errors.hpp"

namespace streambank {

namespace {

std::string shape_str(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

} // namespace

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0f;
    }
    return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<float>> rows) {
    std::size_t r = rows.size();
    std::size_t c = r == 0 ? 0 : rows.begin()->size();
    Matrix m(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
        if (row.size() != c) {
            throw ShapeError("from_rows: ragged initializer");
        }
        std::size_t j = 0;
        for (float v : row) {
            m(i, j++) = v;
        }
        ++i;
    }
    return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: " + shape_str(a) + " * " + shape_str(b));
    }
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) {
                acc += static_cast<double>(a(i, k)) * static_cast<double>(b(k, j));
            }
            out(i, j) = static_cast<float>(acc);
        }
    }
    return out;
}

Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            out(j, i) = a(i, j);
        }
    }
    return out;
}

Matrix concat_rows(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) {
        throw ShapeError("concat_rows: " + shape_str(a) + " vs " + shape_str(b));
    }
    Matrix out(a.rows() + b.rows(), a.cols());
    std::copy(a.values().begin(), a.values().end(), out.values().begin());
    std::copy(b.values().begin(), b.values().end(), out.values().begin() + a.size());
    return out;
}

Matrix row_softmax(const Matrix& a, float scale) {
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < a.cols(); ++j) {
            mx = std::max(mx, static_cast<double>(scale) * a(i, j));
        }
        double sum = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) {
            double e = std::exp(static_cast<double>(scale) * a(i, j) - mx);
            out(i, j) = static_cast<float>(e);
            sum += e;
        }
        for (std::size_t j = 0; j < a.cols(); ++j) {
            out(i, j) = static_cast<float>(out(i, j) / sum);
        }
    }
    return out;
}

Matrix cosine_sim_matrix(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) {
        throw ShapeError("cosine_sim_matrix: " + shape_str(a) + " vs " + shape_str(b));
    }
    std::vector<double> na(a.rows()), nb(b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < a.cols(); ++k) {
            s += static_cast<double>(a(i, k)) * a(i, k);
        }
        na[i] = std::sqrt(s);
    }
    for (std::size_t j = 0; j < b.rows(); ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < b.cols(); ++k) {
            s += static_cast<double>(b(j, k)) * b(j, k);
        }
        nb[j] = std::sqrt(s);
    }
    Matrix out(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.rows(); ++j) {
            if (na[i] == 0.0 || nb[j] == 0.0) {
                out(i, j) = 0.0f;
                continue;
            }
            double dot = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) {
                dot += static_cast<double>(a(i, k)) * static_cast<double>(b(j, k));
            }
            out(i, j) = static_cast<float>(std::clamp(dot / (na[i] * nb[j]), -1.0, 1.0));
        }
    }
    return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) {
        throw ShapeError("add: " + shape_str(a) + " vs " + shape_str(b));
    }
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.values()[i] += b.values()[i];
    }
    return out;
}

Matrix sub(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) {
        throw ShapeError("sub: " + shape_str(a) + " vs " + shape_str(b));
    }
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.values()[i] -= b.values()[i];
    }
    return out;
}

Matrix scale(const Matrix& a, float s) {
    Matrix out = a;
    for (float& v : out.values()) {
        v *= s;
    }
    return out;
}

Matrix tanh_of(const Matrix& a) {
    Matrix out = a;
    for (float& v : out.values()) {
        v = std::tanh(v);
    }
    return out;
}

Matrix gather_rows(const Matrix& a, const std::vector<std::uint32_t>& indices) {
    Matrix out(indices.size(), a.cols());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= a.rows()) {
            throw ShapeError("gather_rows: index out of range");
        }
        auto src = a.row(indices[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

Matrix randn(Rng& rng, std::size_t rows, std::size_t cols) {
    if (rows == 0 || cols == 0) {
        throw ShapeError("randn: rows and cols must be positive");
    }
    Matrix out(rows, cols);
    for (float& v : out.values()) {
        v = static_cast<float>(rng.normal());
    }
    return out;
}

bool bit_equal(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) {
        return false;
    }
    if (a.size() == 0) {
        return true;
    }
    return std::memcmp(a.values().data(), b.values().data(), a.size() * sizeof(float)) == 0;
}

float max_abs_diff(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) {
        throw ShapeError("max_abs_diff: " + shape_str(a) + " vs " + shape_str(b));
    }
    float worst = 0.0f;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]));
    }
    return worst;
}

namespace {

constexpr char kMagic[4] = {'S', 'B', 'N', 'K'};

void put_u32_le(std::ofstream& out, std::uint32_t v) {
    char bytes[4] = {
        static_cast<char>(v & 0xFF),
        static_cast<char>((v >> 8) & 0xFF),
        static_cast<char>((v >> 16) & 0xFF),
        static_cast<char>((v >> 24) & 0xFF),
    };
    out.write(bytes, 4);
}

std::uint32_t get_u32_le(std::ifstream& in) {
    unsigned char bytes[4];
    in.read(reinterpret_cast<char*>(bytes), 4);
    return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
           (static_cast<std::uint32_t>(bytes[2]) << 16) | (static_cast<std::uint32_t>(bytes[3]) << 24);
}

} // namespace

void write_matrix(const std::filesystem::path& path, const Matrix& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError("write_matrix: cannot open " + path.string());
    }
    out.write(kMagic, 4);
    put_u32_le(out, static_cast<std::uint32_t>(m.rows()));
    put_u32_le(out, static_cast<std::uint32_t>(m.cols()));
    for (float v : m.values()) {
        put_u32_le(out, std::bit_cast<std::uint32_t>(v));
    }
    if (!out) {
        throw ConfigError("write_matrix: write failed for " + path.string());
    }
}

Matrix read_matrix(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("read_matrix: cannot open " + path.string());
    }
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw ConfigError("read_matrix: bad magic in " + path.string());
    }
    std::uint32_t rows = get_u32_le(in);
    std::uint32_t cols = get_u32_le(in);
    if (!in) {
        throw ConfigError("read_matrix: truncated header in " + path.string());
    }
    Matrix m(rows, cols);
    for (float& v : m.values()) {
        std::uint32_t raw = get_u32_le(in);
        v = std::bit_cast<float>(raw);
    }
    if (!in) {
        throw ConfigError("read_matrix: truncated payload in " + path.string());
    }
    return m;
}

} // namespace streambank
