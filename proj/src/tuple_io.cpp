#include "dil/tuple_io.hpp"

#include <fstream>
#include <sstream>

namespace dil {

using nlohmann::json;

json matrix_to_json(const CMatrix& A) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < A.cols(); ++j) row.push_back({A(i, j).real(), A(i, j).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

CMatrix matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw Error(ErrorKind::ParseError, "matrix must be a non-empty array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    if (!j[0].is_array()) throw Error(ErrorKind::ParseError, "matrix row must be an array");
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    CMatrix A(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const json& row = j[r];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            throw Error(ErrorKind::ParseError, "ragged matrix rows");
        for (Eigen::Index c = 0; c < cols; ++c) {
            const json& e = row[c];
            if (e.is_number()) {
                A(r, c) = cplx(e.get<double>(), 0.0);
            } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
                A(r, c) = cplx(e[0].get<double>(), e[1].get<double>());
            } else {
                throw Error(ErrorKind::ParseError, "entry must be [re, im]");
            }
        }
    }
    if (!all_finite(A)) throw Error(ErrorKind::ParseError, "non-finite entry");
    return A;
}

json tuple_to_json(const OperatorTuple& T) {
    json ops = json::array();
    for (const auto& A : T.ops()) ops.push_back(matrix_to_json(A));
    return {{"dim", T.dim()}, {"n", T.n()}, {"ops", ops}};
}

OperatorTuple tuple_from_json(const json& j, const Tolerances& tol, bool strict) {
    if (!j.is_object() || !j.contains("dim") || !j.contains("n") || !j.contains("ops"))
        throw Error(ErrorKind::ParseError, "tuple needs fields dim, n, ops");
    if (!j["dim"].is_number_integer() || !j["n"].is_number_integer() || !j["ops"].is_array())
        throw Error(ErrorKind::ParseError, "dim and n must be integers, ops an array");
    const int d = j["dim"].get<int>(), n = j["n"].get<int>();
    if (d < 1 || n < 1) throw Error(ErrorKind::ParseError, "dim and n must be positive");
    if (static_cast<int>(j["ops"].size()) != n) throw Error(ErrorKind::ParseError, "ops length differs from n");
    std::vector<CMatrix> ops;
    for (const auto& m : j["ops"]) {
        CMatrix A = matrix_from_json(m);
        if (A.rows() != d || A.cols() != d) throw Error(ErrorKind::ParseError, "operator is not dim x dim");
        ops.push_back(std::move(A));
    }
    return OperatorTuple(std::move(ops), tol, strict);
}

OperatorTuple tuple_from_string(const std::string& text, const Tolerances& tol, bool strict) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ParseError, e.what());
    }
    return tuple_from_json(j, tol, strict);
}

OperatorTuple load_tuple(const std::string& path, const Tolerances& tol, bool strict) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ParseError, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return tuple_from_string(ss.str(), tol, strict);
}

}  // namespace dil
