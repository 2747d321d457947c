#pragma once

#include "rfpca/charfun.hpp"
#include "rfpca/eval.hpp"
#include "rfpca/rfpca.hpp"
#include "rfpca/spacings.hpp"

#include <json.hpp>

namespace rfpca {

using Json = nlohmann::ordered_json;

// Matrices are nested row-major arrays; complex numbers are [re, im] pairs.
Json to_json(const Matrix& m);
Json to_json(const Vector& v);
Json to_json(const CMatrix& m);
Json to_json(const CVector& v);
Json to_json(Complex z);

Json to_json(const WeightedStats& stats);
/// Children are nested under "children" (empty at leaves).
Json to_json(const SplitNode& node);
Json to_json(const MatchReport& report);
Json to_json(const RecurrenceResult& result);

Matrix matrix_from_json(const Json& j);

} // namespace rfpca
