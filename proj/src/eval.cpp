#include "rfpca/eval.hpp"

#include "rfpca/parallel.hpp"
#include "rfpca/random.hpp"
#include "rfpca/tensor.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>

namespace rfpca {

std::vector<Index> min_sum_assignment(const Matrix& cost) {
    const Index n = cost.rows();
    if (cost.cols() != n) throw DimensionError("assignment needs a square cost matrix");
    if (n == 0) return {};
    // 1-based potentials formulation; p[j] is the row assigned to column j.
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0), v(static_cast<std::size_t>(n + 1), 0.0);
    std::vector<Index> p(static_cast<std::size_t>(n + 1), 0), way(static_cast<std::size_t>(n + 1), 0);
    for (Index i = 1; i <= n; ++i) {
        p[0] = i;
        Index j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(n + 1), inf);
        std::vector<char> used(static_cast<std::size_t>(n + 1), 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            const Index i0 = p[static_cast<std::size_t>(j0)];
            double delta = inf;
            Index j1 = 0;
            for (Index j = 1; j <= n; ++j) {
                const auto sj = static_cast<std::size_t>(j);
                if (used[sj]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[sj];
                if (cur < minv[sj]) {
                    minv[sj] = cur;
                    way[sj] = j0;
                }
                if (minv[sj] < delta) {
                    delta = minv[sj];
                    j1 = j;
                }
            }
            for (Index j = 0; j <= n; ++j) {
                const auto sj = static_cast<std::size_t>(j);
                if (used[sj]) {
                    u[static_cast<std::size_t>(p[sj])] += delta;
                    v[sj] -= delta;
                } else {
                    minv[sj] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<std::size_t>(j0)] != 0);
        do {
            const Index j1 = way[static_cast<std::size_t>(j0)];
            p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<Index> row_to_col(static_cast<std::size_t>(n));
    for (Index j = 1; j <= n; ++j) row_to_col[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
    return row_to_col;
}

std::vector<Index> bottleneck_assignment(const Matrix& cost) {
    const Index n = cost.rows();
    if (cost.cols() != n) throw DimensionError("assignment needs a square cost matrix");
    if (n == 0) return {};
    if (!cost.allFinite()) throw DomainError("assignment costs must be finite");

    std::vector<double> levels(cost.data(), cost.data() + cost.size());
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

    // Entries above the threshold get a penalty no feasible solution can reach.
    const double penalty = 1.0 + static_cast<double>(n) * (1.0 + cost.cwiseAbs().maxCoeff()) * 4.0;
    auto solve_at = [&](double threshold, bool& feasible) {
        const Matrix masked = (cost.array() <= threshold).select(cost, penalty);
        auto assignment = min_sum_assignment(masked);
        feasible = true;
        for (Index i = 0; i < n; ++i) {
            if (cost(i, assignment[static_cast<std::size_t>(i)]) > threshold) feasible = false;
        }
        return assignment;
    };

    std::size_t lo = 0, hi = levels.size() - 1;
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        bool feasible = false;
        solve_at(levels[mid], feasible);
        if (feasible) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    bool feasible = false;
    return solve_at(levels[lo], feasible);
}

MatchReport match_columns(const Matrix& truth, const Matrix& estimate) {
    const Index n = truth.rows();
    if (truth.cols() != n || estimate.rows() != n || estimate.cols() != n || n == 0) {
        throw DimensionError("match_columns needs two n x n matrices");
    }
    const Vector est_norms = estimate.colwise().norm().transpose();
    if ((est_norms.array() - 1.0).abs().maxCoeff() > 1e-6) {
        throw DomainError("estimate columns must be unit vectors");
    }
    const Vector truth_norms = truth.colwise().norm().transpose();
    if (!(truth_norms.minCoeff() > 0.0)) throw DomainError("truth has a zero column");
    const Matrix unit_truth = truth * truth_norms.cwiseInverse().asDiagonal();

    Matrix cost(n, n);
    Eigen::MatrixXi sign(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            const double plus = (unit_truth.col(i) - estimate.col(j)).norm();
            const double minus = (unit_truth.col(i) + estimate.col(j)).norm();
            cost(i, j) = std::min(plus, minus);
            sign(i, j) = plus <= minus ? 1 : -1;
        }
    }
    const auto assignment = bottleneck_assignment(cost);
    const double spectral = Eigen::JacobiSVD<Matrix>(truth).singularValues()(0);

    MatchReport report;
    report.permutation = assignment;
    report.signs.resize(static_cast<std::size_t>(n));
    report.per_column_error.resize(n);
    for (Index i = 0; i < n; ++i) {
        const Index j = assignment[static_cast<std::size_t>(i)];
        report.signs[static_cast<std::size_t>(i)] = sign(i, j);
        report.per_column_error(i) = cost(i, j) * truth_norms(i) / spectral;
    }
    report.max_error = report.per_column_error.maxCoeff();
    return report;
}

Vector principal_angle_sines(const Matrix& U, const Matrix& W) {
    if (U.rows() != W.rows() || U.cols() != W.cols()) throw DimensionError("subspace bases must have equal shape");
    const Index k = U.cols();
    const Matrix I = Matrix::Identity(k, k);
    if ((U.transpose() * U - I).cwiseAbs().maxCoeff() > 1e-6 || (W.transpose() * W - I).cwiseAbs().maxCoeff() > 1e-6) {
        throw DomainError("principal angles need orthonormal columns");
    }
    const Vector s = Eigen::JacobiSVD<Matrix>(U.transpose() * W).singularValues();
    Vector sines(k);
    for (Index i = 0; i < k; ++i) {
        const double c = std::clamp(s(i), 0.0, 1.0);
        sines(i) = std::clamp(std::sqrt(std::max(0.0, 1.0 - c * c)), 0.0, 1.0);
    }
    std::sort(sines.begin(), sines.end(), std::greater<>());
    return sines;
}

RecoveredBasis one_shot_decompose(const SplitMatrixSource& source, Index n, const RFPCAConfig& config) {
    RFPCAConfig single = config;
    single.u_retries = 1;
    single.gap_floor.reset();
    single.validate();
    RecoveredBasis out;
    const Matrix identity = Matrix::Identity(n, n);
    out.tree.projection = identity;
    if (n == 1) {
        out.columns = identity;
        return out;
    }
    const FrequencyChoice choice = choose_frequency(source(identity), n, single, root_seed(config.seed));
    out.columns = choice.split.eigenvectors;
    out.tree.eigenvalues = choice.split.eigenvalues;
    out.tree.gap_index = choice.split.gap_index;
    out.tree.gap_value = choice.split.gap_value;
    out.tree.chosen_u = choice.u;
    out.tree.attempts = choice.attempts;
    return out;
}

namespace {

FpcaResult map_back(const Whitening& global, RecoveredBasis whitened) {
    FpcaResult out;
    out.mean = global.mean;
    out.whitening_b = global.b;
    out.whitened = std::move(whitened);
    out.original = out.whitened;
    out.original.in_whitened_basis = false;
    out.original.columns = global.b * out.whitened.columns;
    out.original.columns.colwise().normalize();
    return out;
}

} // namespace

FpcaResult one_shot_baseline(const SampleSet& samples, double sigma, std::uint64_t seed) {
    const Index n = samples.dim();
    if (samples.size() < 2 * n) throw DomainError("one-shot baseline needs N >= 2n observations");
    RFPCAConfig config;
    config.sigma = sigma;
    config.seed = seed;
    const Whitening global = whiten(samples, Matrix::Identity(n, n), config);
    const RowMatrix z = global.whitened;
    return map_back(global, one_shot_decompose(empirical_source(z, config), n, config));
}

SigmaHalvingResult sigma_halving(const SampleSet& samples, RFPCAConfig config, int max_halvings, double tolerance) {
    if (max_halvings < 0) throw DomainError("max_halvings must be non-negative");
    SigmaHalvingResult out;
    out.result = fpca(samples, config);
    out.sigma = config.sigma;
    out.sigmas.push_back(config.sigma);
    for (int h = 0; h < max_halvings; ++h) {
        config.sigma *= 0.5;
        FpcaResult next = fpca(samples, config);
        const double change = match_columns(out.result.whitened.columns, next.whitened.columns).max_error;
        out.sigmas.push_back(config.sigma);
        out.changes.push_back(change);
        out.result = std::move(next);
        out.sigma = config.sigma;
        if (change <= tolerance) break;
    }
    return out;
}

ICAModel sweep_model(Index n, std::uint64_t seed, const SourceSpec& source) {
    const Matrix mixing = random_mixing(n, MixingKind::orthogonal(),
                                        derive_seed(seed, {static_cast<std::uint64_t>(n), 0x6D6978ULL}));
    return ICAModel(mixing, std::vector<SourceSpec>(static_cast<std::size_t>(n), source), true);
}

SampleSet sweep_sample(const ICAModel& model, Index N, std::uint64_t seed) {
    return sample(model, N,
                  derive_seed(seed, {static_cast<std::uint64_t>(model.dim()), static_cast<std::uint64_t>(N)}));
}

std::uint64_t sweep_algorithm_seed(Index n, std::uint64_t seed) {
    return derive_seed(seed, {static_cast<std::uint64_t>(n), 0x616C67ULL});
}

std::vector<SweepRow> sample_complexity_sweep(const SweepGrid& grid) {
    struct Cell {
        Index n;
        Index N;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (Index n : grid.n_values)
        for (Index N : grid.sample_counts)
            for (std::uint64_t seed : grid.seeds) cells.push_back({n, N, seed});
    const std::size_t algos = grid.algorithms.size();
    std::vector<SweepRow> rows(cells.size() * algos);
    if (algos == 0) return {};

    parallel_for(cells.size(), [&](std::size_t c) {
        const Cell& cell = cells[c];
        std::optional<ICAModel> model;
        std::optional<SampleSet> data;
        std::string setup_error;
        try {
            model.emplace(sweep_model(cell.n, cell.seed, grid.source));
            data.emplace(sweep_sample(*model, cell.N, cell.seed));
        } catch (const std::exception& e) {
            setup_error = e.what();
        }
        RFPCAConfig config = grid.config;
        config.seed = sweep_algorithm_seed(cell.n, cell.seed);

        for (std::size_t a = 0; a < algos; ++a) {
            SweepRow& row = rows[c * algos + a];
            row.algorithm = grid.algorithms[a];
            row.n = cell.n;
            row.N = cell.N;
            row.seed = cell.seed;
            row.max_error = std::numeric_limits<double>::quiet_NaN();
            if (!setup_error.empty()) {
                row.status = "error: " + setup_error;
                continue;
            }
            const auto start = std::chrono::steady_clock::now();
            try {
                Matrix estimate;
                if (row.algorithm == "rfpca") {
                    estimate = fpca(*data, config).original.columns;
                } else if (row.algorithm == "oneshot") {
                    estimate = one_shot_baseline(*data, config.sigma, config.seed).original.columns;
                } else if (row.algorithm == "tensor") {
                    const Index n = cell.n;
                    const Whitening global = whiten(*data, Matrix::Identity(n, n), config);
                    const SampleSet z(RowMatrix(global.whitened), data->seed());
                    RFPCAConfig tensor_config = config;
                    tensor_config.sigma = 1.0;
                    const QuarticTensor t = empirical_cum4_tensor(z);
                    estimate = global.b * recursive_decompose(t, Matrix::Identity(n, n), tensor_config).columns;
                    estimate.colwise().normalize();
                } else {
                    throw DomainError("unknown algorithm: " + row.algorithm);
                }
                row.max_error = match_columns(model->mixing(), estimate).max_error;
                row.status = "ok";
            } catch (const std::exception& e) {
                row.status = std::string("error: ") + e.what();
            }
            row.wall_ms =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        }
    });
    return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    const auto old_precision = out.precision(17);
    out << "algorithm,n,N,seed,max_error,wall_ms,status\n";
    for (const auto& r : rows) {
        std::string status = r.status;
        std::replace(status.begin(), status.end(), ',', ';');
        std::replace(status.begin(), status.end(), '\n', ' ');
        out << r.algorithm << ',' << r.n << ',' << r.N << ',' << r.seed << ',' << r.max_error << ',' << r.wall_ms
            << ',' << status << '\n';
    }
    out.precision(old_precision);
}

} // namespace rfpca
