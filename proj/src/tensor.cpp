#include "rfpca/tensor.hpp"

#include "rfpca/parallel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <memory>

namespace rfpca {
namespace {

constexpr std::uint32_t kTensorMagic = 0x34545152; // "RQT4" little-endian

Index choose(Index n, Index k) {
    if (k < 0 || n < k) return 0;
    Index r = 1;
    for (Index i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

/// Neumaier summation.
struct Compensated {
    double sum = 0.0;
    double carry = 0.0;

    void add(double x) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x)) {
            carry += (sum - t) + x;
        } else {
            carry += (x - t) + sum;
        }
        sum = t;
    }
    double value() const { return sum + carry; }
};

} // namespace

QuarticTensor::QuarticTensor(Index dim) : dim_(dim) {
    if (dim < 1 || dim > kMaxDim) throw DimensionError("tensor dimension must be in [1, 64]");
    packed_ = Vector::Zero(packed_size(dim));
    first_.assign(static_cast<std::size_t>(dim + 1), 0);
    second_.assign(static_cast<std::size_t>(dim + 1), 0);
    third_.assign(static_cast<std::size_t>(dim + 1), 0);
    for (Index x = 0; x < dim; ++x) {
        const auto s = static_cast<std::size_t>(x);
        first_[s + 1] = first_[s] + choose(dim - x + 2, 3);
        second_[s + 1] = second_[s] + choose(dim - x + 1, 2);
        third_[s + 1] = third_[s] + (dim - x);
    }
}

Index QuarticTensor::packed_size(Index dim) { return choose(dim + 3, 4); }

Index QuarticTensor::offset(Index i, Index j, Index k, Index l) const {
    std::array<Index, 4> s{i, j, k, l};
    // sorting network
    auto cswap = [&](int a, int b) {
        if (s[static_cast<std::size_t>(a)] > s[static_cast<std::size_t>(b)])
            std::swap(s[static_cast<std::size_t>(a)], s[static_cast<std::size_t>(b)]);
    };
    cswap(0, 1);
    cswap(2, 3);
    cswap(0, 2);
    cswap(1, 3);
    cswap(1, 2);
    const auto a = static_cast<std::size_t>(s[0]), b = static_cast<std::size_t>(s[1]),
               c = static_cast<std::size_t>(s[2]);
    return first_[a] + (second_[b] - second_[a]) + (third_[c] - third_[b]) + (s[3] - s[2]);
}

void TensorModel::validate() const {
    if (directions.rows() != directions.cols() || directions.cols() != weights.size()) {
        throw DimensionError("tensor model needs n weights and an n x n direction matrix");
    }
    const Index n = directions.cols();
    if ((directions.transpose() * directions - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-10) {
        throw DomainError("tensor model directions must be orthonormal");
    }
}

QuarticTensor weighted_cum4_tensor(const RowMatrix& data, const Vector& weights) {
    const Index rows = data.rows();
    const Index n = data.cols();
    if (rows < 2) throw DomainError("cumulant tensor needs at least 2 samples");
    if (weights.size() != rows) throw DimensionError("one weight per row required");

    const Vector mean = data.transpose() * weights;
    const Index entries = QuarticTensor::packed_size(n);

    // Fixed chunking keeps the reduction order independent of the thread count.
    // Accumulator memory is capped at ~2^22 entries across chunks.
    const Index max_chunks = std::max<Index>(1, (Index{1} << 22) / entries);
    const Index chunk_count = std::min<Index>((rows + (1 << 14) - 1) >> 14, max_chunks);
    const Index kChunk = (rows + chunk_count - 1) / chunk_count;
    const auto chunks = static_cast<std::size_t>(chunk_count);
    std::vector<std::vector<Compensated>> fourth(chunks, std::vector<Compensated>(static_cast<std::size_t>(entries)));
    parallel_for(chunks, [&](std::size_t c) {
        auto& acc = fourth[c];
        const Index begin = static_cast<Index>(c) * kChunk;
        const Index end = std::min(rows, begin + kChunk);
        Vector x(n);
        for (Index r = begin; r < end; ++r) {
            x = data.row(r).transpose() - mean;
            const double w = weights(r);
            std::size_t off = 0;
            for (Index i = 0; i < n; ++i) {
                const double pi = w * x(i);
                for (Index j = i; j < n; ++j) {
                    const double pij = pi * x(j);
                    for (Index k = j; k < n; ++k) {
                        const double pijk = pij * x(k);
                        for (Index l = k; l < n; ++l) acc[off++].add(pijk * x(l));
                    }
                }
            }
        }
    });

    const RowMatrix centered = data.rowwise() - mean.transpose();
    const Matrix second = centered.transpose() * weights.asDiagonal() * centered;

    QuarticTensor out(n);
    out.for_each_multiset([&](Index i, Index j, Index k, Index l, Index off) {
        Compensated total;
        for (const auto& acc : fourth) total.add(acc[static_cast<std::size_t>(off)].value());
        const double pairing = second(i, j) * second(k, l) + second(i, k) * second(j, l) + second(i, l) * second(j, k);
        out.packed()(off) = total.value() - pairing;
    });
    return out;
}

QuarticTensor empirical_cum4_tensor(const SampleSet& samples) {
    const Index rows = samples.size();
    return weighted_cum4_tensor(samples.data(), Vector::Constant(rows, 1.0 / static_cast<double>(rows)));
}

QuarticTensor synth_tensor(const TensorModel& model) {
    model.validate();
    const Matrix& v = model.directions;
    QuarticTensor out(v.rows());
    out.for_each_multiset([&](Index i, Index j, Index k, Index l, Index off) {
        out.packed()(off) = (model.weights.array() * v.row(i).transpose().array() * v.row(j).transpose().array() *
                             v.row(k).transpose().array() * v.row(l).transpose().array())
                                .sum();
    });
    return out;
}

Matrix contract_uu(const QuarticTensor& tensor, const Vector& u) {
    const Index n = tensor.dim();
    if (u.size() != n) throw DimensionError("contraction vector length does not match tensor dimension");
    Matrix out = Matrix::Zero(n, n);
    for (Index a = 0; a < n; ++a) {
        for (Index b = a; b < n; ++b) {
            double acc = 0.0;
            for (Index c = 0; c < n; ++c) {
                double row = 0.0;
                for (Index d = 0; d < n; ++d) row += tensor(a, b, c, d) * u(d);
                acc += row * u(c);
            }
            out(a, b) = acc;
            out(b, a) = acc;
        }
    }
    return out;
}

Matrix unfold(const QuarticTensor& tensor) {
    const Index n = tensor.dim();
    Matrix out(n * n, n * n);
    for (Index a = 0; a < n; ++a)
        for (Index b = 0; b < n; ++b)
            for (Index c = 0; c < n; ++c)
                for (Index d = 0; d < n; ++d) out(a + n * b, c + n * d) = tensor(a, b, c, d);
    return out;
}

SplitMatrixSource tensor_source(const QuarticTensor& tensor) {
    auto unfolded = std::make_shared<const Matrix>(unfold(tensor));
    const Index n = tensor.dim();
    return [unfolded, n](const Matrix& projection) -> NodeMatrix {
        return [unfolded, n, projection](const Vector& u) -> Matrix {
            if (u.size() != n) throw DimensionError("contraction vector length does not match tensor dimension");
            const Vector uu = (u * u.transpose()).reshaped();
            const Vector flat = *unfolded * uu;
            const Matrix contracted = flat.reshaped(n, n);
            return projection.transpose() * (0.5 * (contracted + contracted.transpose())) * projection;
        };
    };
}

RecoveredBasis recursive_decompose(const QuarticTensor& tensor, const Matrix& projection, const RFPCAConfig& config) {
    if (projection.rows() != tensor.dim()) throw DimensionError("projection rows must match tensor dimension");
    return max_gap_recursion(tensor_source(tensor), projection, config);
}

void write_tensor(const QuarticTensor& tensor, const std::filesystem::path& path) {
    static_assert(std::endian::native == std::endian::little, "binary format is little-endian");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    const std::uint32_t magic = kTensorMagic;
    const auto n = static_cast<std::uint32_t>(tensor.dim());
    out.write(reinterpret_cast<const char*>(&magic), 4);
    out.write(reinterpret_cast<const char*>(&n), 4);
    out.write(reinterpret_cast<const char*>(tensor.packed().data()),
              static_cast<std::streamsize>(sizeof(double) * tensor.packed().size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

QuarticTensor read_tensor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::uint32_t magic = 0, n = 0;
    in.read(reinterpret_cast<char*>(&magic), 4);
    in.read(reinterpret_cast<char*>(&n), 4);
    if (!in || magic != kTensorMagic) throw DomainError("not a tensor binary file: " + path.string());
    QuarticTensor out(static_cast<Index>(n));
    in.read(reinterpret_cast<char*>(out.packed().data()),
            static_cast<std::streamsize>(sizeof(double) * out.packed().size()));
    if (!in) throw DomainError("truncated tensor file: " + path.string());
    return out;
}

} // namespace rfpca
