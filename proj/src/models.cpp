#include "rfpca/models.hpp"

#include "rfpca/parallel.hpp"
#include "rfpca/random.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace rfpca {
namespace {

constexpr double kMomentTol = 1e-12;
constexpr std::uint32_t kSampleMagic = 0x31535352; // "RSS1" little-endian

std::vector<double> split_doubles(const std::string& text, char sep) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

} // namespace

SourceSpec SourceSpec::discrete_symmetric(std::vector<double> values, std::vector<double> probs) {
    if (values.empty() || values.size() != probs.size()) {
        throw DomainError("discrete source: values and probs must be non-empty and of equal length");
    }
    double total = 0.0, mean = 0.0, second = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(probs[i] >= 0.0) || !std::isfinite(values[i])) {
            throw DomainError("discrete source: probabilities must be non-negative and values finite");
        }
        total += probs[i];
        mean += probs[i] * values[i];
        second += probs[i] * values[i] * values[i];
    }
    if (std::abs(total - 1.0) > kMomentTol || std::abs(mean) > kMomentTol ||
        std::abs(second - 1.0) > kMomentTol) {
        throw DomainError("discrete source must have total mass 1, mean 0 and variance 1");
    }
    // symmetric: the mass at v equals the mass at -v
    for (std::size_t i = 0; i < values.size(); ++i) {
        double mirrored = 0.0, here = 0.0;
        for (std::size_t j = 0; j < values.size(); ++j) {
            if (values[j] == -values[i]) mirrored += probs[j];
            if (values[j] == values[i]) here += probs[j];
        }
        if (std::abs(mirrored - here) > kMomentTol) {
            throw DomainError("discrete source must be symmetric about 0");
        }
    }
    return {SourceKind::discrete_symmetric, std::move(values), std::move(probs)};
}

SourceSpec SourceSpec::parse(const std::string& text) {
    if (text == "rademacher") return rademacher();
    if (text == "uniform" || text == "uniform_symmetric") return uniform_symmetric();
    if (text == "gaussian") return gaussian();
    if (text.rfind("discrete:", 0) == 0) {
        const auto rest = text.substr(9);
        const auto colon = rest.find(':');
        if (colon == std::string::npos) throw DomainError("discrete source needs values:probs");
        return discrete_symmetric(split_doubles(rest.substr(0, colon), '/'),
                                  split_doubles(rest.substr(colon + 1), '/'));
    }
    throw DomainError("unknown source kind: " + text);
}

std::string SourceSpec::name() const {
    switch (kind) {
    case SourceKind::rademacher: return "rademacher";
    case SourceKind::uniform_symmetric: return "uniform";
    case SourceKind::gaussian: return "gaussian";
    case SourceKind::discrete_symmetric: {
        std::ostringstream os;
        os.precision(17);
        os << "discrete:";
        for (std::size_t i = 0; i < values.size(); ++i) os << (i ? "/" : "") << values[i];
        os << ':';
        for (std::size_t i = 0; i < probs.size(); ++i) os << (i ? "/" : "") << probs[i];
        return os.str();
    }
    }
    return "unknown";
}

SourceMoments source_moments(const SourceSpec& spec) {
    switch (spec.kind) {
    case SourceKind::rademacher:
        return {-2.0, 1.0, 1.0};
    case SourceKind::uniform_symmetric: {
        // U[-sqrt3, sqrt3]: E s^4 = 9/5, E|s|^5 = 3^3 / (6 sqrt3)
        const double a = std::numbers::sqrt3;
        return {9.0 / 5.0 - 3.0, std::pow(a, 5) / 6.0, a};
    }
    case SourceKind::gaussian:
        return {0.0, 8.0 * std::sqrt(2.0 / std::numbers::pi), std::numeric_limits<double>::infinity()};
    case SourceKind::discrete_symmetric: {
        double fourth = 0.0, fifth = 0.0, support = 0.0;
        for (std::size_t i = 0; i < spec.values.size(); ++i) {
            const double v = std::abs(spec.values[i]);
            fourth += spec.probs[i] * std::pow(v, 4);
            fifth += spec.probs[i] * std::pow(v, 5);
            if (spec.probs[i] > 0.0) support = std::max(support, v);
        }
        return {fourth - 3.0, fifth, support};
    }
    }
    throw DomainError("unsupported source kind");
}

double draw_source(const SourceSpec& spec, StreamRng& rng) {
    switch (spec.kind) {
    case SourceKind::rademacher:
        return (rng() >> 63) ? 1.0 : -1.0;
    case SourceKind::uniform_symmetric:
        return std::numbers::sqrt3 * (2.0 * rng.uniform() - 1.0);
    case SourceKind::gaussian:
        return rng.normal();
    case SourceKind::discrete_symmetric: {
        double r = rng.uniform();
        for (std::size_t i = 0; i + 1 < spec.values.size(); ++i) {
            if (r < spec.probs[i]) return spec.values[i];
            r -= spec.probs[i];
        }
        return spec.values.back();
    }
    }
    throw DomainError("unsupported source kind");
}

ICAModel::ICAModel(Matrix mixing, std::vector<SourceSpec> sources, bool allow_gaussian_subspace)
    : mixing_(std::move(mixing)), sources_(std::move(sources)) {
    if (mixing_.rows() != mixing_.cols() || mixing_.rows() < 1) {
        throw DimensionError("mixing matrix must be square and non-empty");
    }
    if (static_cast<Index>(sources_.size()) != mixing_.rows()) {
        throw DimensionError("need one source per mixing column");
    }
    if (!mixing_.allFinite()) throw DomainError("mixing matrix has non-finite entries");
    Eigen::JacobiSVD<Matrix> svd(mixing_);
    const double smin = svd.singularValues().minCoeff();
    if (!(smin > 0.0) || smin <= 1e-14 * svd.singularValues().maxCoeff()) {
        throw DomainError("mixing matrix is singular");
    }

    int gaussians = 0;
    delta_ = std::numeric_limits<double>::infinity();
    for (const auto& s : sources_) {
        const auto m = source_moments(s);
        delta_ = std::min(delta_, std::abs(m.cum4));
        k_bound_ = std::max(k_bound_, m.support);
        m_bound_ = std::max(m_bound_, m.abs_moment5);
        if (s.kind == SourceKind::gaussian) ++gaussians;
    }
    if (gaussians > 1 && !allow_gaussian_subspace) {
        throw DomainError("at most one source may be gaussian");
    }
    identifiable_ = gaussians <= 1;
}

SampleSet::SampleSet(RowMatrix data, std::uint64_t seed, std::optional<std::string> model_tag)
    : data_(std::move(data)), seed_(seed), model_tag_(std::move(model_tag)) {
    if (data_.rows() < 2) throw DomainError("a sample set needs at least 2 observations");
    if (data_.cols() < 1) throw DimensionError("a sample set needs at least one dimension");
    if (!data_.allFinite()) throw DomainError("sample set contains non-finite values");
}

SampleSet sample(const ICAModel& model, Index n_samples, std::uint64_t seed) {
    if (n_samples < 2) throw DomainError("n_samples must be at least 2");
    const Index n = model.dim();
    RowMatrix data(n_samples, n);
    const Matrix& A = model.mixing();
    constexpr Index kChunk = 4096;
    const auto chunks = static_cast<std::size_t>((n_samples + kChunk - 1) / kChunk);
    parallel_for(chunks, [&](std::size_t c) {
        Vector s(n);
        const Index begin = static_cast<Index>(c) * kChunk;
        const Index end = std::min(n_samples, begin + kChunk);
        for (Index r = begin; r < end; ++r) {
            for (Index j = 0; j < n; ++j) {
                StreamRng rng(derive_seed(seed, {static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(j)}));
                s(j) = draw_source(model.sources()[static_cast<std::size_t>(j)], rng);
            }
            data.row(r).noalias() = (A * s).transpose();
        }
    });
    std::string tag = "n=" + std::to_string(n);
    return SampleSet(std::move(data), seed, tag);
}

Matrix random_mixing(Index n, MixingKind kind, std::uint64_t seed) {
    if (n < 1) throw DimensionError("mixing dimension must be at least 1");
    auto haar = [n](std::uint64_t key) {
        StreamRng rng(key);
        Matrix g(n, n);
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < n; ++j) g(i, j) = rng.normal();
        Eigen::HouseholderQR<Matrix> qr(g);
        Matrix q = qr.householderQ() * Matrix::Identity(n, n);
        const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
        for (Index j = 0; j < n; ++j) {
            if (r(j, j) < 0.0) q.col(j) = -q.col(j);
        }
        return q;
    };
    const Matrix u = haar(derive_seed(seed, {0}));
    if (kind.type == MixingKind::Type::orthogonal) return u;

    if (!(kind.kappa >= 1.0)) throw DomainError("condition number must be >= 1");
    const Matrix v = haar(derive_seed(seed, {1}));
    StreamRng rng(derive_seed(seed, {2}));
    Vector s(n);
    const double log_kappa = std::log(kind.kappa);
    for (Index i = 0; i < n; ++i) s(i) = std::exp(-log_kappa * rng.uniform());
    s(0) = 1.0;
    if (n > 1) s(n - 1) = 1.0 / kind.kappa;
    return u * s.asDiagonal() * v.transpose();
}

void write_csv(const SampleSet& samples, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "# n=" << samples.dim() << " N=" << samples.size() << " seed=" << samples.seed() << '\n';
    out.precision(17);
    const auto& d = samples.data();
    for (Index r = 0; r < d.rows(); ++r) {
        for (Index c = 0; c < d.cols(); ++c) {
            if (c) out << ',';
            out << d(r, c);
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

SampleSet read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    long long n = -1, count = -1;
    unsigned long long seed = 0;
    std::vector<double> values;
    Index rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::sscanf(line.c_str(), "# n=%lld N=%lld seed=%llu", &n, &count, &seed);
            continue;
        }
        const auto row = split_doubles(line, ',');
        if (n < 0) n = static_cast<long long>(row.size());
        if (static_cast<long long>(row.size()) != n) {
            throw DomainError("CSV row " + std::to_string(rows + 1) + " has " + std::to_string(row.size()) +
                              " columns, expected " + std::to_string(n));
        }
        values.insert(values.end(), row.begin(), row.end());
        ++rows;
    }
    if (count >= 0 && count != rows) throw DomainError("CSV header N does not match the row count");
    if (n <= 0) throw DomainError("CSV file has no observations");
    RowMatrix data = Eigen::Map<RowMatrix>(values.data(), rows, static_cast<Index>(n));
    return SampleSet(std::move(data), seed);
}

void write_binary(const SampleSet& samples, const std::filesystem::path& path) {
    static_assert(std::endian::native == std::endian::little, "binary format is little-endian");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    const std::uint32_t magic = kSampleMagic;
    const auto n = static_cast<std::uint32_t>(samples.dim());
    const auto count = static_cast<std::uint64_t>(samples.size());
    out.write(reinterpret_cast<const char*>(&magic), 4);
    out.write(reinterpret_cast<const char*>(&n), 4);
    out.write(reinterpret_cast<const char*>(&count), 8);
    out.write(reinterpret_cast<const char*>(samples.data().data()),
              static_cast<std::streamsize>(sizeof(double) * samples.data().size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

SampleSet read_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::uint32_t magic = 0, n = 0;
    std::uint64_t count = 0;
    in.read(reinterpret_cast<char*>(&magic), 4);
    in.read(reinterpret_cast<char*>(&n), 4);
    in.read(reinterpret_cast<char*>(&count), 8);
    if (!in || magic != kSampleMagic) throw DomainError("not a sample binary file: " + path.string());
    RowMatrix data(static_cast<Index>(count), static_cast<Index>(n));
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(sizeof(double) * data.size()));
    if (!in) throw DomainError("truncated sample binary file: " + path.string());
    return SampleSet(std::move(data), 0);
}

SampleSet read_samples(const std::filesystem::path& path) {
    return path.extension() == ".csv" ? read_csv(path) : read_binary(path);
}

void write_samples(const SampleSet& samples, const std::filesystem::path& path) {
    if (path.extension() == ".csv") {
        write_csv(samples, path);
    } else {
        write_binary(samples, path);
    }
}

} // namespace rfpca
