#include "dil/tuple.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

namespace dil {

SubsetMask SubsetMask::of(std::initializer_list<int> elems) {
    SubsetMask m;
    for (int i : elems) {
        if (i < 1 || i > 32) throw Error(ErrorKind::IndexOutOfRange, "subset element " + std::to_string(i));
        m.bits |= 1u << (i - 1);
    }
    return m;
}

SubsetMask SubsetMask::full(int n) { return {n >= 32 ? ~0u : ((1u << n) - 1u)}; }

int SubsetMask::size() const { return std::popcount(bits); }

int SubsetMask::max_element() const { return bits ? 32 - std::countl_zero(bits) : 0; }

std::vector<int> SubsetMask::elements() const {
    std::vector<int> out;
    for (int i = 1; i <= 32; ++i)
        if (contains(i)) out.push_back(i);
    return out;
}

std::string SubsetMask::str() const {
    std::ostringstream os;
    os << "{";
    bool first = true;
    for (int i : elements()) {
        os << (first ? "" : ",") << i;
        first = false;
    }
    os << "}";
    return os.str();
}

ValidationReport validate(const std::vector<CMatrix>& ops, const Tolerances& tol) {
    ValidationReport r;
    std::vector<double> norms;
    for (const auto& A : ops) {
        if (!all_finite(A)) {
            r.finite = false;
            return r;
        }
        norms.push_back(spectral_norm(A));
    }
    for (double nv : norms) r.max_norm = std::max(r.max_norm, nv);
    r.contractive = r.max_norm <= 1.0 + tol.contr;
    for (size_t i = 0; i < ops.size(); ++i)
        for (size_t j = i + 1; j < ops.size(); ++j) {
            double c = spectral_norm(ops[i] * ops[j] - ops[j] * ops[i]) / std::max(1.0, norms[i] * norms[j]);
            r.max_commutator = std::max(r.max_commutator, c);
        }
    r.commuting = r.max_commutator <= tol.comm;
    return r;
}

OperatorTuple::OperatorTuple(std::vector<CMatrix> ops, const Tolerances& tol, bool strict) : ops_(std::move(ops)) {
    dim_ = ops_.empty() ? 0 : static_cast<int>(ops_.front().rows());
    for (const auto& A : ops_)
        if (A.rows() != dim_ || A.cols() != dim_)
            throw Error(ErrorKind::DimensionMismatch, "tuple entries must be square of equal size");
    report_ = validate(ops_, tol);
    if (strict && !report_.ok()) {
        std::ostringstream os;
        os << "invalid tuple: max norm " << report_.max_norm << ", max commutator " << report_.max_commutator
           << (report_.finite ? "" : ", non-finite entries");
        throw Error(ErrorKind::PreconditionViolated, os.str());
    }
}

const CMatrix& OperatorTuple::op(int i) const {
    if (i < 1 || i > n()) throw Error(ErrorKind::IndexOutOfRange, "operator index " + std::to_string(i));
    return ops_[i - 1];
}

namespace {

OperatorTuple unchecked(std::vector<CMatrix> ops) {
    // sub-tuples inherit validity from their parent
    Tolerances loose;
    loose.contr = loose.comm = 1e300;
    return OperatorTuple(std::move(ops), loose, false);
}

void check_subset(const OperatorTuple& T, SubsetMask G) {
    if (!G.subset_of(SubsetMask::full(T.n())))
        throw Error(ErrorKind::IndexOutOfRange, "subset " + G.str() + " exceeds n=" + std::to_string(T.n()));
}

}  // namespace

CMatrix subset_product(const OperatorTuple& T, SubsetMask F) {
    check_subset(T, F);
    CMatrix P = CMatrix::Identity(T.dim(), T.dim());
    for (int i : F.elements()) P = P * T.op(i);
    return P;
}

OperatorTuple hat(const OperatorTuple& T, int i) {
    if (T.n() < 2 || i < 1 || i > T.n()) throw Error(ErrorKind::IndexOutOfRange, "hat index " + std::to_string(i));
    std::vector<CMatrix> ops;
    for (int j = 1; j <= T.n(); ++j)
        if (j != i) ops.push_back(T.op(j));
    return unchecked(std::move(ops));
}

OperatorTuple hat1n(const OperatorTuple& T) {
    if (T.n() < 2) throw Error(ErrorKind::PreconditionViolated, "hat1n needs n >= 2");
    std::vector<CMatrix> ops{T.op(1) * T.op(T.n())};
    for (int j = 2; j < T.n(); ++j) ops.push_back(T.op(j));
    return unchecked(std::move(ops));
}

OperatorTuple hat1_aligned(const OperatorTuple& T) {
    if (T.n() < 2) throw Error(ErrorKind::PreconditionViolated, "needs n >= 2");
    std::vector<CMatrix> ops{T.op(T.n())};
    for (int j = 2; j < T.n(); ++j) ops.push_back(T.op(j));
    return unchecked(std::move(ops));
}

OperatorTuple sub_tuple(const OperatorTuple& T, SubsetMask G) {
    check_subset(T, G);
    std::vector<CMatrix> ops;
    for (int j : G.elements()) ops.push_back(T.op(j));
    return unchecked(std::move(ops));
}

OperatorTuple reindex_pq(const OperatorTuple& T, int p, int q) {
    if (!(1 <= p && p < q && q <= T.n())) throw Error(ErrorKind::IndexOutOfRange, "need 1 <= p < q <= n");
    std::vector<CMatrix> ops{T.op(p)};
    for (int j = 1; j <= T.n(); ++j)
        if (j != p && j != q) ops.push_back(T.op(j));
    ops.push_back(T.op(q));
    return unchecked(std::move(ops));
}

CMatrix defect_delta(const OperatorTuple& T, SubsetMask G) {
    check_subset(T, G);
    CMatrix D = CMatrix::Identity(T.dim(), T.dim());
    for (int j : G.elements()) D = D - T.op(j) * D * T.op(j).adjoint();
    return 0.5 * (D + D.adjoint());
}

DefectData defect(const OperatorTuple& T, SubsetMask G, const Tolerances& tol) {
    DefectData out;
    out.delta = defect_delta(T, G);
    const int d = T.dim();
    if (d == 0) return out;
    HermEigen he = herm_eigen(out.delta);
    out.min_eigenvalue = he.eigenvalues(0);
    // Delta is a signed sum of terms of norm <= 1, so cancellation error is absolute: scale by max(1, ||Delta||).
    const double scale = std::max(1.0, std::max(std::abs(he.eigenvalues(0)), std::abs(he.eigenvalues(d - 1))));
    if (out.min_eigenvalue < -tol.clamp * scale) {
        out.not_psd = true;
        return out;
    }
    std::vector<int> keep;
    for (int k = 0; k < d; ++k) {
        double lam = he.eigenvalues(k);
        if (lam < 0) {
            out.clamp.count++;
            out.clamp.most_negative = std::min(out.clamp.most_negative, lam);
            out.clamp.scale = scale;
        }
        if (lam > tol.rank * scale) keep.push_back(k);
    }
    CMatrix V(d, static_cast<Eigen::Index>(keep.size()));
    Eigen::VectorXd r(keep.size());
    for (size_t c = 0; c < keep.size(); ++c) {
        V.col(static_cast<Eigen::Index>(c)) = he.eigenvectors.col(keep[c]);
        r(static_cast<Eigen::Index>(c)) = std::sqrt(he.eigenvalues(keep[c]));
    }
    CMatrix S = V * r.cast<cplx>().asDiagonal() * V.adjoint();
    out.sqrt = 0.5 * (S + S.adjoint());
    out.basis = V;
    out.rank = static_cast<int>(keep.size());
    return out;
}

BrehmerResult is_brehmer(const OperatorTuple& T, double tol) {
    BrehmerResult res;
    const int n = T.n();
    const std::uint32_t count = 1u << n;
    std::vector<CMatrix> deltas(count);
    deltas[0] = CMatrix::Identity(T.dim(), T.dim());
    res.min_eigenvalue = 1.0;
    for (std::uint32_t g = 1; g < count; ++g) {
        SubsetMask G{g};
        int top = G.max_element();
        const CMatrix& prev = deltas[G.without(top).bits];
        CMatrix D = prev - T.op(top) * prev * T.op(top).adjoint();
        deltas[g] = 0.5 * (D + D.adjoint());
        if (T.dim() == 0) continue;
        double lam = herm_eigen(deltas[g]).eigenvalues(0);
        double scale = std::max(1.0, spectral_norm(deltas[g]));
        res.min_eigenvalue = std::min(res.min_eigenvalue, lam / scale);
        if (res.ok && lam < -tol * scale) {
            res.ok = false;
            res.witness = G;
            res.eigenvalue = lam;
        }
    }
    return res;
}

BrehmerResult is_szego(const OperatorTuple& T, double tol) {
    BrehmerResult res;
    SubsetMask G = SubsetMask::full(T.n());
    CMatrix D = defect_delta(T, G);
    if (T.dim() == 0) return res;
    double lam = herm_eigen(D).eigenvalues(0);
    double scale = std::max(1.0, spectral_norm(D));
    res.min_eigenvalue = lam / scale;
    if (lam < -tol * scale) {
        res.ok = false;
        res.witness = G;
        res.eigenvalue = lam;
    }
    return res;
}

bool is_pure(const OperatorTuple& T, double tol) {
    for (const auto& A : T.ops()) {
        double rho;
        try {
            rho = spectral_radius(A);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::NoConvergence) throw;
            rho = spectral_radius_bound(A, 16);
        }
        if (!(rho < 1.0 - tol)) return false;
    }
    return true;
}

ClassResult class_Bnpq(const OperatorTuple& T, int p, int q, double tol) {
    if (T.n() < 3) throw Error(ErrorKind::IndexOutOfRange, "class B^n_{p,q} needs n >= 3");
    if (!(1 <= p && p < q && q <= T.n())) throw Error(ErrorKind::IndexOutOfRange, "need 1 <= p < q <= n");
    ClassResult r;
    r.hat_p = is_brehmer(hat(T, p), tol);
    r.hat_q = is_brehmer(hat(T, q), tol);
    r.ok = r.hat_p.ok && r.hat_q.ok;
    if (!r.hat_p.ok)
        r.failing_hat = p;
    else if (!r.hat_q.ok)
        r.failing_hat = q;
    return r;
}

DefectIdentityResidual check_defect_identity(const OperatorTuple& T, SubsetMask G, double tol) {
    const int n = T.n();
    if (n < 3) throw Error(ErrorKind::PreconditionViolated, "defect identity needs n >= 3");
    if (!G.contains(1)) throw Error(ErrorKind::PreconditionViolated, "subset must contain 1");
    if (!G.subset_of(SubsetMask::full(n - 1)))
        throw Error(ErrorKind::PreconditionViolated, "subset must lie in {1,...,n-1}");
    if (!class_Bnpq(T, 1, n, tol).ok) throw Error(ErrorKind::PreconditionViolated, "tuple is not in class B_{1,n}");
    CMatrix Dn = defect_delta(hat(T, n), G);
    CMatrix D1 = defect_delta(hat1_aligned(T), G);
    CMatrix D1n = defect_delta(hat1n(T), G);
    const CMatrix& T1 = T.op(1);
    const CMatrix& Tn = T.op(n);
    return {spectral_norm(Dn + T1 * D1 * T1.adjoint() - D1n), spectral_norm(D1 + Tn * Dn * Tn.adjoint() - D1n)};
}

}  // namespace dil
