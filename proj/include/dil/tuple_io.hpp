#pragma once

#include <json.hpp>
#include <string>

#include "dil/tuple.hpp"

namespace dil {

nlohmann::json matrix_to_json(const CMatrix& A);
CMatrix matrix_from_json(const nlohmann::json& j);

/// {"dim": d, "n": n, "ops": [matrix, ...]} with matrices as rows of [re, im] pairs.
nlohmann::json tuple_to_json(const OperatorTuple& T);
/// Throws ParseError on malformed input; validation errors propagate unchanged unless strict is false,
/// in which case the tuple keeps its validation report and the caller decides.
OperatorTuple tuple_from_json(const nlohmann::json& j, const Tolerances& tol = default_tol(), bool strict = true);
OperatorTuple tuple_from_string(const std::string& text, const Tolerances& tol = default_tol(), bool strict = true);
OperatorTuple load_tuple(const std::string& path, const Tolerances& tol = default_tol(), bool strict = true);

}  // namespace dil
