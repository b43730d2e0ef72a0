#include "dil/hardy.hpp"

#include <cmath>

namespace dil {

namespace {

using Triplet = Eigen::Triplet<cplx>;

SpMatrix from_triplets(int rows, int cols, const std::vector<Triplet>& t) {
    SpMatrix M(rows, cols);
    M.setFromTriplets(t.begin(), t.end());
    M.makeCompressed();
    return M;
}

}  // namespace

TruncatedHardy::TruncatedHardy(int vars, int degree, int coeff_dim)
    : vars_(vars), degree_(degree), coeff_dim_(coeff_dim), num_blocks_(1) {
    if (vars < 0 || degree < 0 || coeff_dim < 0)
        throw Error(ErrorKind::PreconditionViolated, "negative Hardy space parameter");
    for (int i = 0; i < vars; ++i) num_blocks_ *= degree + 1;
}

int TruncatedHardy::flat_block(const std::vector<int>& k) const {
    if (static_cast<int>(k.size()) != vars_) throw Error(ErrorKind::DimensionMismatch, "multi-index length");
    int b = 0;
    for (int v : k) {
        if (v < 0 || v > degree_) throw Error(ErrorKind::IndexOutOfRange, "degree out of range");
        b = b * (degree_ + 1) + v;
    }
    return b;
}

std::vector<int> TruncatedHardy::multi_index(int block) const {
    std::vector<int> k(vars_);
    for (int i = vars_ - 1; i >= 0; --i) {
        k[i] = block % (degree_ + 1);
        block /= degree_ + 1;
    }
    return k;
}

HardyOp shift(const TruncatedHardy& space, int i) {
    if (i < 1 || i > space.vars()) throw Error(ErrorKind::IndexOutOfRange, "shift variable " + std::to_string(i));
    const int e = space.coeff_dim();
    std::vector<Triplet> t;
    for (int b = 0; b < space.num_blocks(); ++b) {
        auto k = space.multi_index(b);
        if (k[i - 1] == space.degree()) continue;
        ++k[i - 1];
        int to = space.flat_block(k);
        for (int c = 0; c < e; ++c) t.emplace_back(to * e + c, b * e + c, 1.0);
    }
    return {space, from_triplets(space.total_dim(), space.total_dim(), t), 1};
}

HardyOp kron_identity(const TruncatedHardy& space, const CMatrix& A) {
    const int e = space.coeff_dim();
    if (A.rows() != e || A.cols() != e) throw Error(ErrorKind::DimensionMismatch, "coefficient operator size");
    std::vector<Triplet> t;
    for (int b = 0; b < space.num_blocks(); ++b)
        for (int c = 0; c < e; ++c)
            for (int r = 0; r < e; ++r)
                if (A(r, c) != cplx(0.0)) t.emplace_back(b * e + r, b * e + c, A(r, c));
    return {space, from_triplets(space.total_dim(), space.total_dim(), t), 0};
}

HardyOp mult_op(const TruncatedHardy& space, const CMatrix& A0, const CMatrix& A1) {
    if (A1.rows() != space.coeff_dim() || A1.cols() != space.coeff_dim())
        throw Error(ErrorKind::DimensionMismatch, "symbol coefficient size");
    HardyOp out = kron_identity(space, A0);
    if (space.vars() < 1) throw Error(ErrorKind::PreconditionViolated, "mult_op needs at least one variable");
    SpMatrix S = shift(space, 1).matrix * kron_identity(space, A1).matrix;
    out.matrix = out.matrix + S;
    out.matrix.makeCompressed();
    out.exact_degree = 1;
    return out;
}

HardyOp realize(const OpSymbol& sym, const TruncatedHardy& space) {
    switch (sym.kind) {
        case OpSymbol::Kind::Shift: return shift(space, sym.var);
        case OpSymbol::Kind::Mult: return mult_op(space, sym.A0, sym.A1);
        case OpSymbol::Kind::Kron: return kron_identity(space, sym.A0);
    }
    throw Error(ErrorKind::PreconditionViolated, "unknown symbol kind");
}

CMatrix canonical_dilation(const OperatorTuple& X, const CMatrix& D, const CMatrix& basis, const TruncatedHardy& space) {
    const int r = space.vars();
    if (X.n() != r && !(r == 0))
        throw Error(ErrorKind::DimensionMismatch, "tuple length differs from number of variables");
    const int e = space.coeff_dim();
    if (basis.cols() != e) throw Error(ErrorKind::DimensionMismatch, "coefficient dimension differs from basis rank");
    const int d = static_cast<int>(D.cols());
    CMatrix Pi = CMatrix::Zero(space.total_dim(), d);
    if (e == 0) return Pi;
    const CMatrix C = basis.adjoint() * D;
    // powers[b] = X^{*k(b)}, built from a predecessor with smaller flat index
    std::vector<CMatrix> powers(space.num_blocks());
    for (int b = 0; b < space.num_blocks(); ++b) {
        auto k = space.multi_index(b);
        int j = -1;
        for (int i = r - 1; i >= 0; --i)
            if (k[i] > 0) {
                j = i;
                break;
            }
        if (j < 0) {
            powers[b] = CMatrix::Identity(d, d);
        } else {
            --k[j];
            powers[b] = powers[space.flat_block(k)] * X.op(j + 1).adjoint();
        }
        Pi.middleRows(static_cast<Eigen::Index>(b) * e, e) = C * powers[b];
    }
    return Pi;
}

CMatrix canonical_dilation(const OperatorTuple& T, SubsetMask G, const TruncatedHardy& space, const Tolerances& tol) {
    if (space.vars() != G.size()) throw Error(ErrorKind::DimensionMismatch, "space.vars must equal |G|");
    DefectData dd = defect(T, G, tol);
    if (dd.not_psd) throw Error(ErrorKind::NotPSD, "defect of T(G) is not positive for G=" + G.str());
    if (space.coeff_dim() != dd.rank) throw Error(ErrorKind::DimensionMismatch, "coeff_dim must equal defect rank");
    return canonical_dilation(sub_tuple(T, G), *dd.sqrt, *dd.basis, space);
}

HardyOp embed_coeff(const TruncatedHardy& small, const CMatrix& gamma, double tol_iso) {
    if (gamma.cols() != small.coeff_dim()) throw Error(ErrorKind::DimensionMismatch, "Gamma source dimension");
    if (gamma.cols() > 0 && (gamma.adjoint() * gamma - CMatrix::Identity(gamma.cols(), gamma.cols())).norm() > tol_iso)
        throw Error(ErrorKind::NotIsometric, "Gamma is not an isometry");
    TruncatedHardy big(small.vars(), small.degree(), static_cast<int>(gamma.rows()));
    const int e = small.coeff_dim(), f = big.coeff_dim();
    std::vector<Triplet> t;
    for (int b = 0; b < small.num_blocks(); ++b)
        for (int c = 0; c < e; ++c)
            for (int r = 0; r < f; ++r)
                if (gamma(r, c) != cplx(0.0)) t.emplace_back(b * f + r, b * e + c, gamma(r, c));
    return {big, from_triplets(big.total_dim(), small.total_dim(), t), 0};
}

std::vector<int> rows_with_degree_at_most(const TruncatedHardy& space, const std::vector<int>& caps) {
    std::vector<int> rows;
    const int e = space.coeff_dim();
    for (int b = 0; b < space.num_blocks(); ++b) {
        auto k = space.multi_index(b);
        bool ok = true;
        for (int i = 0; i < space.vars(); ++i)
            if (k[i] > caps[i]) ok = false;
        if (!ok) continue;
        for (int c = 0; c < e; ++c) rows.push_back(b * e + c);
    }
    return rows;
}

std::vector<int> trusted_rows(const TruncatedHardy& space, int g) {
    return rows_with_degree_at_most(space, std::vector<int>(space.vars(), space.degree() - g));
}

SpMatrix pad_degree(const TruncatedHardy& from, const TruncatedHardy& to) {
    if (from.vars() != to.vars() || from.coeff_dim() != to.coeff_dim() || from.degree() > to.degree())
        throw Error(ErrorKind::DimensionMismatch, "incompatible Hardy models for padding");
    const int e = from.coeff_dim();
    std::vector<Triplet> t;
    for (int b = 0; b < from.num_blocks(); ++b) {
        int tb = to.flat_block(from.multi_index(b));
        for (int c = 0; c < e; ++c) t.emplace_back(tb * e + c, b * e + c, 1.0);
    }
    return from_triplets(to.total_dim(), from.total_dim(), t);
}

CMatrix select_rows(const CMatrix& A, const std::vector<int>& rows) {
    CMatrix out(static_cast<Eigen::Index>(rows.size()), A.cols());
    for (size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = A.row(rows[i]);
    return out;
}

}  // namespace dil
