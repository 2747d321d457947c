#pragma once

#include "rfpca/charfun.hpp"
#include "rfpca/models.hpp"
#include "rfpca/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace rfpca {

struct RFPCAConfig {
    double sigma = 1.0;   ///< u ~ N(0, sigma^2 I)
    int u_retries = 16;   ///< frequency draws per node
    /// When set, the first draw whose max gap reaches this value is taken;
    /// otherwise the best of u_retries draws.
    std::optional<double> gap_floor;
    /// Smallest accepted eigenvalue of a projected covariance; multiplied by
    /// the largest eigenvalue when whiten_floor_relative is set.
    double whiten_eig_floor = 1e-8;
    bool whiten_floor_relative = true;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Ascending eigen-decomposition of a symmetric matrix with its largest
/// adjacent gap. gap_index counts the eigenvalues below the gap, so
/// gap_value = eigenvalues[gap_index] - eigenvalues[gap_index - 1].
struct SpectralSplit {
    Vector eigenvalues;
    Matrix eigenvectors;
    Index gap_index = 0;
    double gap_value = 0.0;
};

/// Ties between equal gaps (within 1e-12 relative) go to the most balanced
/// split, then to the smallest index.
SpectralSplit spectral_split(const Matrix& matrix);

struct SplitNode {
    Matrix projection;  ///< n x k, orthonormal columns
    Vector eigenvalues; ///< empty at leaves
    Index gap_index = 0;
    double gap_value = 0.0;
    Vector chosen_u;
    int attempts = 0;   ///< frequency draws evaluated at this node
    std::vector<SplitNode> children;

    bool is_leaf() const { return children.empty(); }
};

struct RecoveredBasis {
    Matrix columns;
    SplitNode tree;
    bool in_whitened_basis = true;
};

/// Node-level estimate of the matrix to split, as a function of the ambient
/// frequency u.
using NodeMatrix = std::function<Matrix(const Vector& u)>;
/// Builds the node estimator for a projection (n x k).
using SplitMatrixSource = std::function<NodeMatrix(const Matrix& projection)>;

struct FrequencyChoice {
    Vector u;
    SpectralSplit split;
    int attempts = 0;
    int degenerate = 0;
};

/// Retry policy shared by every max-gap recursion: draws u ~ N(0, sigma^2 I_n)
/// from streams derived from node_seed and keeps the widest gap, or the first
/// reaching config.gap_floor. Throws NoValidFrequencyError if every draw was
/// degenerate.
FrequencyChoice choose_frequency(const NodeMatrix& node, Index ambient_dim, const RFPCAConfig& config,
                                 std::uint64_t node_seed);

/// Split at the largest gap and recurse on P V_1 and P V_2 until every block
/// is one-dimensional.
RecoveredBasis max_gap_recursion(const SplitMatrixSource& source, const Matrix& projection,
                                 const RFPCAConfig& config);

/// y = B^{-1} P^T (x - xbar), B the symmetric square root of the projected
/// covariance (normalized by N).
struct Whitening {
    Vector mean;
    Matrix b;
    Matrix b_inverse;
    Matrix whitened; ///< N x k
};

Whitening whiten(const RowMatrix& data, const Matrix& projection, const RFPCAConfig& config);
inline Whitening whiten(const SampleSet& samples, const Matrix& projection, const RFPCAConfig& config) {
    return whiten(samples.data(), projection, config);
}

struct UChoice {
    Vector u;
    WeightedStats stats; ///< at P^T u in the node's whitened coordinates
    SpectralSplit split;
    int attempts = 0;
};

/// Frequency selection at one node of Recursive FPCA.
UChoice choose_u(const SampleSet& samples, const Matrix& projection, const RFPCAConfig& config,
                 std::uint64_t node_seed);

/// Recursive Fourier PCA on `samples` as given; projection columns live in
/// the sample's coordinates. Every node reuses the same observations.
RecoveredBasis recursive_fpca(const SampleSet& samples, const RFPCAConfig& config, const Matrix& projection);

/// Split source backed by the empirical reweighted covariance.
SplitMatrixSource empirical_source(const RowMatrix& data, const RFPCAConfig& config);
/// Split source backed by Re(analytic_d2psi); `model` must outlive it.
SplitMatrixSource analytic_source(const ICAModel& model);

struct FpcaResult {
    RecoveredBasis whitened; ///< columns in the globally whitened basis
    RecoveredBasis original; ///< B0 * columns, renormalized
    Vector mean;
    Matrix whitening_b;      ///< x - mean = B0 z
};

/// Global whitening followed by recursive_fpca with P = I.
FpcaResult fpca(const SampleSet& samples, const RFPCAConfig& config);

/// Delta / (1000 M^2 ln^{3/2} n)
double default_sigma(double delta, double m_bound, double n);
/// Delta / (1000 ln^{3/2} n E|s|^5), the per-coordinate setting used in the
/// perturbation argument.
double proof_sigma(double delta, double abs_moment5, double n);

/// Seed of child `branch` (0 or 1) of a node.
std::uint64_t child_seed(std::uint64_t node_seed, int branch);
std::uint64_t root_seed(std::uint64_t config_seed);

} // namespace rfpca
