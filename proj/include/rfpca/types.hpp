#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace rfpca {

using Index = Eigen::Index;
using Complex = std::complex<double>;

template <typename Scalar>
using MatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixT<double>;
using Vector = VectorT<double>;
using CMatrix = MatrixT<Complex>;
using CVector = VectorT<Complex>;
/// Row-major storage for observation matrices (one observation per row).
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Base class for failures caused by the numerical content of the inputs
/// (as opposed to programming or usage errors).
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// |sum_x e^{iu^T x}| collapsed below N * 1e-6; the caller must redraw u.
class DegenerateFrequencyError : public DomainError {
public:
    using DomainError::DomainError;
};

/// A projected sample covariance has an eigenvalue below the whitening floor.
class IllConditionedSubspaceError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Every frequency draw at a recursion node was degenerate.
class NoValidFrequencyError : public DomainError {
public:
    using DomainError::DomainError;
};

/// A source kind has no closed-form characteristic function oracle.
class UnsupportedOracleError : public DomainError {
public:
    using DomainError::DomainError;
};

} // namespace rfpca
