#pragma once

#include "rfpca/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rfpca {

enum class SourceKind { rademacher, uniform_symmetric, discrete_symmetric, gaussian };

/// One-dimensional source distribution with mean 0 and variance 1.
///
/// discrete_symmetric carries its full support in `values` (both signs) with
/// matching probabilities; the factory checks symmetry and the moment
/// normalization.
struct SourceSpec {
    SourceKind kind = SourceKind::rademacher;
    std::vector<double> values;
    std::vector<double> probs;

    static SourceSpec rademacher() { return {SourceKind::rademacher, {}, {}}; }
    static SourceSpec uniform_symmetric() { return {SourceKind::uniform_symmetric, {}, {}}; }
    static SourceSpec gaussian() { return {SourceKind::gaussian, {}, {}}; }
    static SourceSpec discrete_symmetric(std::vector<double> values, std::vector<double> probs);

    /// Parses "rademacher", "uniform", "gaussian" or "discrete:v1/v2/..:p1/p2/..".
    static SourceSpec parse(const std::string& text);
    std::string name() const;

    bool operator==(const SourceSpec&) const = default;
};

struct SourceMoments {
    double cum4 = 0.0;         ///< E[s^4] - 3
    double abs_moment5 = 0.0;  ///< E|s|^5
    double support = 0.0;      ///< sup|s|, +inf when unbounded
};

SourceMoments source_moments(const SourceSpec& spec);

/// Draw one scalar from the source.
class StreamRng;
double draw_source(const SourceSpec& spec, StreamRng& rng);

/// x = A s with independent unit-variance sources.
class ICAModel {
public:
    /// Throws DomainError if `mixing` is singular, dimensions disagree, or more
    /// than one source is Gaussian (pass allow_gaussian_subspace for the
    /// unidentifiable negative-control models).
    ICAModel(Matrix mixing, std::vector<SourceSpec> sources, bool allow_gaussian_subspace = false);

    Index dim() const { return mixing_.rows(); }
    const Matrix& mixing() const { return mixing_; }
    const std::vector<SourceSpec>& sources() const { return sources_; }

    /// min_i |cum4(s_i)|
    double delta() const { return delta_; }
    /// K = max_i sup|s_i|, so that ||s|| <= K sqrt(n).
    double k_bound() const { return k_bound_; }
    /// M = max_i E|s_i|^5
    double m_bound() const { return m_bound_; }
    bool identifiable() const { return identifiable_; }

private:
    Matrix mixing_;
    std::vector<SourceSpec> sources_;
    double delta_ = 0.0;
    double k_bound_ = 0.0;
    double m_bound_ = 0.0;
    bool identifiable_ = true;
};

/// N observations (rows) in n dimensions.
class SampleSet {
public:
    SampleSet(RowMatrix data, std::uint64_t seed, std::optional<std::string> model_tag = std::nullopt);

    Index size() const { return data_.rows(); }
    Index dim() const { return data_.cols(); }
    const RowMatrix& data() const { return data_; }
    std::uint64_t seed() const { return seed_; }
    const std::optional<std::string>& model_tag() const { return model_tag_; }

private:
    RowMatrix data_;
    std::uint64_t seed_;
    std::optional<std::string> model_tag_;
};

/// Row r, coordinate j draws from the stream derive_seed(seed, {r, j}).
SampleSet sample(const ICAModel& model, Index n_samples, std::uint64_t seed);

struct MixingKind {
    enum class Type { orthogonal, conditioned } type = Type::orthogonal;
    double kappa = 1.0;

    static MixingKind orthogonal() { return {}; }
    static MixingKind conditioned(double kappa) { return {Type::conditioned, kappa}; }
};

/// Haar-orthogonal matrix, or U diag(s) V^T with s log-uniform in [1/kappa, 1]
/// and both endpoints attained.
Matrix random_mixing(Index n, MixingKind kind, std::uint64_t seed);

// Sample file formats. CSV: header "# n=<n> N=<N> seed=<seed>", one row per
// line, 17 significant digits. Binary: 16-byte little-endian header
// (u32 magic "RSS1", u32 n, u64 N) followed by N*n doubles, row-major.
void write_csv(const SampleSet& samples, const std::filesystem::path& path);
SampleSet read_csv(const std::filesystem::path& path);
void write_binary(const SampleSet& samples, const std::filesystem::path& path);
SampleSet read_binary(const std::filesystem::path& path);
/// Dispatches on the extension: ".csv" is text, anything else binary.
SampleSet read_samples(const std::filesystem::path& path);
void write_samples(const SampleSet& samples, const std::filesystem::path& path);

} // namespace rfpca
