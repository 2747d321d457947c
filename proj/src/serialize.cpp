#include "rfpca/serialize.hpp"

#include <cmath>

namespace rfpca {
namespace {

Json number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

} // namespace

Json to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Index c = 0; c < m.cols(); ++c) row.push_back(number(m(r, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

Json to_json(const Vector& v) {
    Json out = Json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
    return out;
}

Json to_json(Complex z) { return Json::array({number(z.real()), number(z.imag())}); }

Json to_json(const CMatrix& m) {
    Json rows = Json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Index c = 0; c < m.cols(); ++c) row.push_back(to_json(m(r, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

Json to_json(const CVector& v) {
    Json out = Json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(to_json(v(i)));
    return out;
}

Json to_json(const WeightedStats& stats) {
    Json j;
    j["mean_weight"] = to_json(stats.mean_weight);
    j["mu_u"] = to_json(stats.mu_u);
    j["sigma_u"] = to_json(stats.sigma_u);
    j["n_samples"] = stats.n_samples;
    return j;
}

Json to_json(const SplitNode& node) {
    Json j;
    j["k"] = node.projection.cols();
    j["projection"] = to_json(node.projection);
    j["eigenvalues"] = to_json(node.eigenvalues);
    j["gap_index"] = node.gap_index;
    j["gap_value"] = number(node.gap_value);
    j["chosen_u"] = to_json(node.chosen_u);
    j["attempts"] = node.attempts;
    Json children = Json::array();
    for (const auto& child : node.children) children.push_back(to_json(child));
    j["children"] = std::move(children);
    return j;
}

Json to_json(const MatchReport& report) {
    Json j;
    j["permutation"] = report.permutation;
    j["signs"] = report.signs;
    j["per_column_error"] = to_json(report.per_column_error);
    j["max_error"] = number(report.max_error);
    return j;
}

Json to_json(const RecurrenceResult& result) {
    Json j;
    j["max_y"] = result.max_y;
    j["ok"] = result.ok;
    j["iterates"] = result.iterates;
    return j;
}

Matrix matrix_from_json(const Json& j) {
    if (!j.is_array() || j.empty()) throw DomainError("matrix JSON must be a non-empty array of rows");
    const auto rows = static_cast<Index>(j.size());
    const auto cols = static_cast<Index>(j[0].size());
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        if (static_cast<Index>(j[static_cast<std::size_t>(r)].size()) != cols) throw DomainError("ragged matrix JSON");
        for (Index c = 0; c < cols; ++c) m(r, c) = j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
    }
    return m;
}

} // namespace rfpca
