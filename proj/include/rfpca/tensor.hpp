#pragma once

#include "rfpca/models.hpp"
#include "rfpca/rfpca.hpp"
#include "rfpca/types.hpp"

#include <array>
#include <filesystem>
#include <vector>

namespace rfpca {

/// Fully symmetric order-4 tensor in n dimensions, stored once per sorted
/// index multiset i <= j <= k <= l in lexicographic order.
class QuarticTensor {
public:
    static constexpr Index kMaxDim = 64;

    explicit QuarticTensor(Index dim);

    static Index packed_size(Index dim);

    Index dim() const { return dim_; }
    /// Offset of the multiset {i, j, k, l}; argument order is irrelevant.
    Index offset(Index i, Index j, Index k, Index l) const;

    double operator()(Index i, Index j, Index k, Index l) const { return packed_[offset(i, j, k, l)]; }
    double& operator()(Index i, Index j, Index k, Index l) { return packed_[offset(i, j, k, l)]; }

    const Vector& packed() const { return packed_; }
    Vector& packed() { return packed_; }

    /// Largest |entry|.
    double max_abs() const { return packed_.size() ? packed_.cwiseAbs().maxCoeff() : 0.0; }

    /// Visits every stored multiset as (i, j, k, l, offset) in storage order.
    template <typename F>
    void for_each_multiset(F&& f) const {
        Index off = 0;
        for (Index i = 0; i < dim_; ++i)
            for (Index j = i; j < dim_; ++j)
                for (Index k = j; k < dim_; ++k)
                    for (Index l = k; l < dim_; ++l) f(i, j, k, l, off++);
    }

private:
    Index dim_;
    Vector packed_;
    // prefix tables for the combinatorial offset
    std::vector<Index> first_, second_, third_;
};

/// alpha_i and orthonormal directions v_i.
struct TensorModel {
    Vector weights;
    Matrix directions;

    void validate() const;
};

/// E[x^{(x)4}] - M with the pairing term M built from second moments, on the
/// mean-centered sample. Compensated accumulation in fixed row chunks.
QuarticTensor empirical_cum4_tensor(const SampleSet& samples);
/// Same estimator with per-row probability weights (sum to 1); used to
/// evaluate exact moments of discrete models by enumeration.
QuarticTensor weighted_cum4_tensor(const RowMatrix& data, const Vector& weights);

/// sum_i alpha_i v_i (x) v_i (x) v_i (x) v_i
QuarticTensor synth_tensor(const TensorModel& model);

/// T(u, u)_{ab} = sum_{c,d} T_{abcd} u_c u_d
Matrix contract_uu(const QuarticTensor& tensor, const Vector& u);

/// n^2 x n^2 unfolding with entry (a + n b, c + n d) = T_abcd, so that
/// vec(T(u,u)) = unfold(T) * (u (x) u).
Matrix unfold(const QuarticTensor& tensor);

/// Recursive max-gap decomposition of T. Frequencies are drawn at scale
/// config.sigma (1 for the standard setting) with the rfpca retry policy.
RecoveredBasis recursive_decompose(const QuarticTensor& tensor, const Matrix& projection, const RFPCAConfig& config);

/// Split source for the tensor route: P^T T(u,u) P, contracted through a
/// cached unfolding.
SplitMatrixSource tensor_source(const QuarticTensor& tensor);

// Binary format: u32 magic "RQT4", u32 n, packed entries (f64 LE) in storage order.
void write_tensor(const QuarticTensor& tensor, const std::filesystem::path& path);
QuarticTensor read_tensor(const std::filesystem::path& path);

} // namespace rfpca
