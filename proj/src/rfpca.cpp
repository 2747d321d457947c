#include "rfpca/rfpca.hpp"

#include "rfpca/random.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace rfpca {

void RFPCAConfig::validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("sigma must be positive and finite");
    if (u_retries < 1) throw DomainError("u_retries must be at least 1");
    if (!(whiten_eig_floor > 0.0)) throw DomainError("whiten_eig_floor must be positive");
    if (gap_floor && !(*gap_floor >= 0.0)) throw DomainError("gap_floor must be non-negative");
}

SpectralSplit spectral_split(const Matrix& matrix) {
    if (matrix.rows() != matrix.cols()) throw DimensionError("spectral_split needs a square matrix");
    const Index k = matrix.rows();
    if (k < 2) throw DimensionError("spectral_split needs k >= 2");
    const Matrix sym = 0.5 * (matrix + matrix.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
    if (eig.info() != Eigen::Success) throw DomainError("symmetric eigensolver did not converge");

    SpectralSplit out;
    out.eigenvalues = eig.eigenvalues();
    out.eigenvectors = eig.eigenvectors();
    const double tie_tol = 1e-12 * std::max(1.0, out.eigenvalues.cwiseAbs().maxCoeff());
    const double half = static_cast<double>(k) / 2.0;
    out.gap_index = 1;
    out.gap_value = out.eigenvalues(1) - out.eigenvalues(0);
    for (Index i = 2; i < k; ++i) {
        const double gap = out.eigenvalues(i) - out.eigenvalues(i - 1);
        if (gap > out.gap_value + tie_tol) {
            out.gap_index = i;
            out.gap_value = gap;
        } else if (gap >= out.gap_value - tie_tol &&
                   std::abs(static_cast<double>(i) - half) < std::abs(static_cast<double>(out.gap_index) - half)) {
            out.gap_index = i;
            out.gap_value = gap;
        }
    }
    // report the exact difference at the chosen index
    out.gap_value = out.eigenvalues(out.gap_index) - out.eigenvalues(out.gap_index - 1);
    return out;
}

std::uint64_t root_seed(std::uint64_t config_seed) { return derive_seed(config_seed, {0x726F6F74ULL}); }

std::uint64_t child_seed(std::uint64_t node_seed, int branch) {
    return derive_seed(node_seed, {static_cast<std::uint64_t>(branch) + 1});
}

FrequencyChoice choose_frequency(const NodeMatrix& node, Index ambient_dim, const RFPCAConfig& config,
                                 std::uint64_t node_seed) {
    FrequencyChoice best;
    bool have = false;
    for (int attempt = 0; attempt < config.u_retries; ++attempt) {
        StreamRng rng(derive_seed(node_seed, {static_cast<std::uint64_t>(attempt)}));
        Vector u = gaussian_vector(rng, ambient_dim, config.sigma);
        ++best.attempts;
        Matrix m;
        try {
            m = node(u);
        } catch (const DegenerateFrequencyError&) {
            ++best.degenerate;
            continue;
        }
        SpectralSplit split = spectral_split(m);
        if (!have || split.gap_value > best.split.gap_value) {
            best.u = std::move(u);
            best.split = std::move(split);
            have = true;
        }
        if (config.gap_floor && best.split.gap_value >= *config.gap_floor) break;
    }
    if (!have) {
        throw NoValidFrequencyError("all " + std::to_string(config.u_retries) + " frequency draws were degenerate");
    }
    return best;
}

namespace {

template <typename Error>
[[noreturn]] void rethrow_at(const std::string& path, const Error& e) {
    throw Error("at node " + path + ": " + e.what());
}

SplitNode recurse(const SplitMatrixSource& source, const Matrix& projection, const RFPCAConfig& config,
                  std::uint64_t node_seed, const std::string& path, std::vector<Vector>& columns) {
    SplitNode node;
    node.projection = projection;
    if (projection.cols() == 1) {
        columns.push_back(projection.col(0));
        return node;
    }

    FrequencyChoice choice;
    try {
        const NodeMatrix estimator = source(projection);
        choice = choose_frequency(estimator, projection.rows(), config, node_seed);
    } catch (const IllConditionedSubspaceError& e) {
        rethrow_at(path, e);
    } catch (const NoValidFrequencyError& e) {
        rethrow_at(path, e);
    }

    const Index k = projection.cols();
    const Index lower = choice.split.gap_index;
    node.eigenvalues = choice.split.eigenvalues;
    node.gap_index = lower;
    node.gap_value = choice.split.gap_value;
    node.chosen_u = choice.u;
    node.attempts = choice.attempts;

    const Matrix& v = choice.split.eigenvectors;
    const Matrix p1 = projection * v.leftCols(lower);
    const Matrix p2 = projection * v.rightCols(k - lower);
    node.children.push_back(recurse(source, p1, config, child_seed(node_seed, 0), path + ".0", columns));
    node.children.push_back(recurse(source, p2, config, child_seed(node_seed, 1), path + ".1", columns));
    return node;
}

} // namespace

RecoveredBasis max_gap_recursion(const SplitMatrixSource& source, const Matrix& projection,
                                 const RFPCAConfig& config) {
    config.validate();
    if (projection.cols() < 1 || projection.cols() > projection.rows()) {
        throw DimensionError("projection must be n x k with 1 <= k <= n");
    }
    std::vector<Vector> columns;
    columns.reserve(static_cast<std::size_t>(projection.cols()));
    RecoveredBasis out;
    out.tree = recurse(source, projection, config, root_seed(config.seed), "root", columns);
    out.columns.resize(projection.rows(), projection.cols());
    for (std::size_t j = 0; j < columns.size(); ++j) {
        out.columns.col(static_cast<Index>(j)) = columns[j].normalized();
    }
    return out;
}

Whitening whiten(const RowMatrix& data, const Matrix& projection, const RFPCAConfig& config) {
    if (projection.rows() != data.cols()) throw DimensionError("projection rows must match the data dimension");
    const Index k = projection.cols();
    if (k < 1) throw DimensionError("projection must have at least one column");

    Whitening out;
    out.mean = data.colwise().mean().transpose();
    const Matrix projected = (data.rowwise() - out.mean.transpose()) * projection;
    const Matrix cov = projected.transpose() * projected / static_cast<double>(data.rows());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (cov + cov.transpose()));
    const Vector lambda = eig.eigenvalues();
    const double top = lambda.maxCoeff();
    const double floor = config.whiten_floor_relative ? config.whiten_eig_floor * std::max(top, 0.0)
                                                      : config.whiten_eig_floor;
    if (!(top > 0.0) || !(lambda.minCoeff() >= floor) || lambda.minCoeff() <= 0.0) {
        throw IllConditionedSubspaceError("projected covariance eigenvalue " + std::to_string(lambda.minCoeff()) +
                                          " is below the whitening floor " + std::to_string(floor));
    }
    const Matrix& q = eig.eigenvectors();
    out.b = q * lambda.cwiseSqrt().asDiagonal() * q.transpose();
    out.b_inverse = q * lambda.cwiseSqrt().cwiseInverse().asDiagonal() * q.transpose();
    out.whitened = projected * out.b_inverse;
    return out;
}

SplitMatrixSource empirical_source(const RowMatrix& data, const RFPCAConfig& config) {
    return [&data, config](const Matrix& projection) -> NodeMatrix {
        auto node = std::make_shared<Whitening>(whiten(data, projection, config));
        return [node, projection](const Vector& u) -> Matrix {
            return real_reweighted_covariance_centered(node->whitened, projection.transpose() * u);
        };
    };
}

SplitMatrixSource analytic_source(const ICAModel& model) {
    return [&model](const Matrix& projection) -> NodeMatrix {
        return [&model, projection](const Vector& u) -> Matrix {
            return projection.transpose() * analytic_d2psi(model, u).real() * projection;
        };
    };
}

UChoice choose_u(const SampleSet& samples, const Matrix& projection, const RFPCAConfig& config,
                 std::uint64_t node_seed) {
    config.validate();
    if (projection.cols() < 2) throw DimensionError("choose_u needs a subspace of dimension >= 2");
    const Whitening node = whiten(samples, projection, config);
    const NodeMatrix estimator = [&](const Vector& u) {
        return real_reweighted_covariance_centered(node.whitened, projection.transpose() * u);
    };
    FrequencyChoice choice = choose_frequency(estimator, projection.rows(), config, node_seed);
    UChoice out;
    out.stats = reweighted_covariance(node.whitened, projection.transpose() * choice.u);
    out.u = std::move(choice.u);
    out.split = std::move(choice.split);
    out.attempts = choice.attempts;
    return out;
}

RecoveredBasis recursive_fpca(const SampleSet& samples, const RFPCAConfig& config, const Matrix& projection) {
    if (samples.size() < 2 * projection.cols()) {
        throw DomainError("recursive FPCA needs N >= 2k observations");
    }
    return max_gap_recursion(empirical_source(samples.data(), config), projection, config);
}

FpcaResult fpca(const SampleSet& samples, const RFPCAConfig& config) {
    const Index n = samples.dim();
    if (samples.size() < 2 * n) throw DomainError("recursive FPCA needs N >= 2n observations");
    const Whitening global = whiten(samples, Matrix::Identity(n, n), config);
    const SampleSet z(RowMatrix(global.whitened), samples.seed(), samples.model_tag());

    FpcaResult out;
    out.mean = global.mean;
    out.whitening_b = global.b;
    out.whitened = recursive_fpca(z, config, Matrix::Identity(n, n));
    out.original = out.whitened;
    out.original.in_whitened_basis = false;
    out.original.columns = global.b * out.whitened.columns;
    out.original.columns.colwise().normalize();
    return out;
}

double default_sigma(double delta, double m_bound, double n) {
    if (!(delta > 0.0) || !(m_bound > 0.0) || !(n >= 2.0)) {
        throw DomainError("default_sigma needs delta > 0, M > 0 and n >= 2");
    }
    return delta / (1000.0 * m_bound * m_bound * std::pow(std::log(n), 1.5));
}

double proof_sigma(double delta, double abs_moment5, double n) {
    if (!(delta > 0.0) || !(abs_moment5 > 0.0) || !(n >= 2.0)) {
        throw DomainError("proof_sigma needs delta > 0, E|s|^5 > 0 and n >= 2");
    }
    return delta / (1000.0 * abs_moment5 * std::pow(std::log(n), 1.5));
}

} // namespace rfpca
