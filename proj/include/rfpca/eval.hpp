#pragma once

#include "rfpca/models.hpp"
#include "rfpca/rfpca.hpp"
#include "rfpca/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace rfpca {

/// Column correspondence between a ground-truth basis and an estimate.
/// permutation[i] is the estimate column matched to truth column i and
/// signs[i] the sign applied to it.
struct MatchReport {
    std::vector<Index> permutation;
    std::vector<int> signs;
    /// ||A_i/|A_i| - xi_i b_pi(i)|| * |A_i| / ||A||_2
    Vector per_column_error;
    double max_error = 0.0;
};

/// Minimum-cost perfect assignment (Hungarian with potentials). Returns
/// row -> column.
std::vector<Index> min_sum_assignment(const Matrix& cost);

/// Assignment minimizing the largest selected cost; ties resolved by the
/// smallest total cost. Binary search over the distinct cost values with a
/// min-sum solve as the feasibility check.
std::vector<Index> bottleneck_assignment(const Matrix& cost);

/// Estimate columns must be unit norm (1e-6); truth columns are normalized
/// before matching.
MatchReport match_columns(const Matrix& truth, const Matrix& estimate);

/// Sines of the canonical angles between span(U) and span(W), descending.
/// Both inputs must have orthonormal columns (1e-6).
Vector principal_angle_sines(const Matrix& U, const Matrix& W);

/// Single frequency draw, all eigenvectors at once. The tree holds only the
/// root with its eigenvalues and chosen u.
RecoveredBasis one_shot_decompose(const SplitMatrixSource& source, Index n, const RFPCAConfig& config);

/// Whiten once, one u ~ N(0, sigma^2 I), eigenvectors of Re(Sigma_u).
FpcaResult one_shot_baseline(const SampleSet& samples, double sigma, std::uint64_t seed);

struct SigmaHalvingResult {
    double sigma = 0.0;
    FpcaResult result;
    std::vector<double> sigmas;
    /// max_error between consecutive outputs (one fewer than sigmas)
    std::vector<double> changes;
};

/// Start at config.sigma and halve until two consecutive recovered bases
/// agree to `tolerance` (match_columns max_error) or max_halvings is spent.
SigmaHalvingResult sigma_halving(const SampleSet& samples, RFPCAConfig config, int max_halvings, double tolerance);

struct SweepGrid {
    std::vector<Index> n_values;
    std::vector<Index> sample_counts;
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> algorithms; ///< "rfpca", "oneshot", "tensor"
    SourceSpec source = SourceSpec::rademacher();
    RFPCAConfig config;
};

struct SweepRow {
    std::string algorithm;
    Index n = 0;
    Index N = 0;
    std::uint64_t seed = 0;
    double max_error = 0.0;
    double wall_ms = 0.0;
    std::string status;
};

/// The model depends on (n, seed), the sample on (n, N, seed) and the
/// algorithm's frequency stream on (n, seed), so a fixed seed sees the same
/// problem at every N. Cell failures are recorded in the row's status.
std::vector<SweepRow> sample_complexity_sweep(const SweepGrid& grid);

/// Header: algorithm,n,N,seed,max_error,wall_ms,status
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

/// Model and sample used by a sweep cell.
ICAModel sweep_model(Index n, std::uint64_t seed, const SourceSpec& source);
SampleSet sweep_sample(const ICAModel& model, Index N, std::uint64_t seed);
std::uint64_t sweep_algorithm_seed(Index n, std::uint64_t seed);

} // namespace rfpca
