#include "dil/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace dil {

namespace {

// Rotation parameters that annihilate the (p,q) entry of a Hermitian 2x2
// block [[app, apq], [conj(apq), aqq]].  The unitary is
//   J = [[c, s e], [-s conj(e), c]]  acting on coordinates (p,q).
struct Rot {
    double c, s;
    cplx e;
};

Rot jacobi_rot(double app, double aqq, cplx apq) {
    double g = std::abs(apq);
    cplx e = apq / g;
    double tau = (aqq - app) / (2.0 * g);
    double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
    double c = 1.0 / std::sqrt(1.0 + t * t);
    return {c, t * c, e};
}

// M <- M J on columns p,q.
void rotate_cols(CMatrix& M, Eigen::Index p, Eigen::Index q, const Rot& r) {
    cplx se = r.s * r.e;
    cplx sce = r.s * std::conj(r.e);
    for (Eigen::Index k = 0; k < M.rows(); ++k) {
        cplx mp = M(k, p), mq = M(k, q);
        M(k, p) = r.c * mp - sce * mq;
        M(k, q) = se * mp + r.c * mq;
    }
}

// M <- J^* M on rows p,q.
void rotate_rows(CMatrix& M, Eigen::Index p, Eigen::Index q, const Rot& r) {
    cplx se = r.s * r.e;
    cplx sce = r.s * std::conj(r.e);
    for (Eigen::Index k = 0; k < M.cols(); ++k) {
        cplx mp = M(p, k), mq = M(q, k);
        M(p, k) = r.c * mp - se * mq;
        M(q, k) = sce * mp + r.c * mq;
    }
}

// One-sided Jacobi: A V = U with mutually orthogonal columns of U.
struct Hestenes {
    CMatrix U;
    CMatrix V;
    Eigen::VectorXd sigma;
};

Hestenes hestenes(const CMatrix& A, int max_sweeps = 80) {
    Hestenes h{A, CMatrix::Identity(A.cols(), A.cols()), {}};
    const Eigen::Index n = A.cols();
    const double eps = 1e-15;
    // columns this small are rounding noise of a rank-deficient input; rotating them never settles
    const double negligible = std::pow(eps * A.norm(), 2);
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (Eigen::Index p = 0; p + 1 < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                double a = h.U.col(p).squaredNorm();
                double b = h.U.col(q).squaredNorm();
                cplx g = h.U.col(p).dot(h.U.col(q));
                if (std::abs(g) <= eps * std::sqrt(a * b) || std::abs(g) == 0.0) continue;
                if (a <= negligible || b <= negligible) continue;
                rotated = true;
                Rot r = jacobi_rot(a, b, g);
                rotate_cols(h.U, p, q, r);
                rotate_cols(h.V, p, q, r);
            }
        }
        if (!rotated) break;
        if (sweep + 1 == max_sweeps) throw Error(ErrorKind::NoConvergence, "one-sided Jacobi sweep cap");
    }
    h.sigma.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) h.sigma(j) = h.U.col(j).norm();
    return h;
}

// Above this size the cyclic Jacobi solvers are too slow for the window pipeline (375 x 375 takes seconds);
// Eigen's tridiagonal QR and divide-and-conquer SVD take over.
constexpr Eigen::Index kJacobiMax = 64;

struct ThinSVD {
    CMatrix U;  // left vectors, kept ones
    Eigen::VectorXd s;
    CMatrix V;  // right vectors, kept ones
    double smax = 0.0;
};

ThinSVD thin_svd(const CMatrix& A, double rank_tol) {
    ThinSVD out;
    if (std::min(A.rows(), A.cols()) > kJacobiMax) {
        Eigen::BDCSVD<CMatrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Eigen::VectorXd& sv = svd.singularValues();  // descending
        out.smax = sv.size() ? sv(0) : 0.0;
        Eigen::Index r = 0;
        while (r < sv.size() && out.smax > 0 && sv(r) >= rank_tol * out.smax) ++r;
        out.s = sv.head(r);
        out.U = svd.matrixU().leftCols(r);
        out.V = svd.matrixV().leftCols(r);
        return out;
    }
    const bool wide = A.cols() > A.rows();
    Hestenes h = hestenes(wide ? CMatrix(A.adjoint()) : A);
    out.smax = h.sigma.size() ? h.sigma.maxCoeff() : 0.0;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = 0; j < h.sigma.size(); ++j)
        if (out.smax > 0 && h.sigma(j) >= rank_tol * out.smax) keep.push_back(j);
    std::sort(keep.begin(), keep.end(), [&](auto x, auto y) { return h.sigma(x) > h.sigma(y); });
    const Eigen::Index r = static_cast<Eigen::Index>(keep.size());
    CMatrix L(h.U.rows(), r), R(h.V.rows(), r);
    out.s.resize(r);
    for (Eigen::Index k = 0; k < r; ++k) {
        Eigen::Index j = keep[k];
        out.s(k) = h.sigma(j);
        L.col(k) = h.U.col(j) / h.sigma(j);
        R.col(k) = h.V.col(j);
    }
    if (wide) {
        out.U = R;
        out.V = L;
    } else {
        out.U = L;
        out.V = R;
    }
    return out;
}

// Two passes of modified Gram-Schmidt against the existing columns, then normalise.
CMatrix reorthonormalize(const CMatrix& Q) {
    CMatrix out = Q;
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
        for (int pass = 0; pass < 2; ++pass)
            for (Eigen::Index i = 0; i < j; ++i) out.col(j) -= out.col(i).dot(out.col(j)) * out.col(i);
        double nrm = out.col(j).norm();
        if (nrm > 0) out.col(j) /= nrm;
    }
    return out;
}

}  // namespace

bool all_finite(const CMatrix& A) {
    for (Eigen::Index j = 0; j < A.cols(); ++j)
        for (Eigen::Index i = 0; i < A.rows(); ++i)
            if (!std::isfinite(A(i, j).real()) || !std::isfinite(A(i, j).imag())) return false;
    return true;
}

CMatrix adjoint(const CMatrix& A) { return A.adjoint(); }

double frob_norm(const CMatrix& A) { return A.norm(); }

HermEigen herm_eigen(const CMatrix& A, double tol_herm, int max_sweeps) {
    if (A.rows() != A.cols()) throw Error(ErrorKind::DimensionMismatch, "herm_eigen needs a square matrix");
    const Eigen::Index n = A.rows();
    const double scale = A.norm();
    if ((A - A.adjoint()).norm() > tol_herm * std::max(scale, 1e-300) && scale > 0)
        throw Error(ErrorKind::NotHermitian, "input is not Hermitian");

    CMatrix M = 0.5 * (A + A.adjoint());
    if (n > kJacobiMax) {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(M);
        if (es.info() != Eigen::Success) throw Error(ErrorKind::NoConvergence, "tridiagonal QR failed");
        return {es.eigenvalues(), es.eigenvectors()};
    }
    CMatrix V = CMatrix::Identity(n, n);
    const double stop = 1e-15 * scale;
    for (int sweep = 0;; ++sweep) {
        double off = 0.0;
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < j; ++i) off += std::norm(M(i, j));
        if (std::sqrt(2.0 * off) <= stop || off == 0.0) break;
        if (sweep >= max_sweeps) throw Error(ErrorKind::NoConvergence, "Jacobi sweep cap exceeded");
        for (Eigen::Index p = 0; p + 1 < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                cplx apq = M(p, q);
                if (std::abs(apq) <= 1e-18 * scale) continue;
                Rot r = jacobi_rot(M(p, p).real(), M(q, q).real(), apq);
                rotate_cols(M, p, q, r);
                rotate_rows(M, p, q, r);
                M(p, q) = M(q, p) = 0.0;
                M(p, p) = M(p, p).real();
                M(q, q) = M(q, q).real();
                rotate_cols(V, p, q, r);
            }
        }
    }
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return M(a, a).real() < M(b, b).real(); });
    HermEigen out;
    out.eigenvalues.resize(n);
    out.eigenvectors.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        out.eigenvalues(k) = M(order[k], order[k]).real();
        out.eigenvectors.col(k) = V.col(order[k]);
    }
    return out;
}

CMatrix psd_sqrt(const CMatrix& A, double clamp_tol, ClampInfo* clamp) {
    const Eigen::Index n = A.rows();
    if (n == 0) return A;
    HermEigen he = herm_eigen(A);
    double nrm = std::max(std::abs(he.eigenvalues(0)), std::abs(he.eigenvalues(n - 1)));
    Eigen::VectorXd r(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        double lam = he.eigenvalues(k);
        if (lam < 0) {
            if (lam < -clamp_tol * nrm) throw Error(ErrorKind::NotPSD, "eigenvalue " + std::to_string(lam));
            if (clamp) {
                clamp->count++;
                clamp->most_negative = std::min(clamp->most_negative, lam);
                clamp->scale = std::max(clamp->scale, nrm);
            }
            lam = 0.0;
        }
        r(k) = std::sqrt(lam);
    }
    const CMatrix& V = he.eigenvectors;
    CMatrix S = V * r.cast<cplx>().asDiagonal() * V.adjoint();
    return 0.5 * (S + S.adjoint());
}

CMatrix range_basis(const CMatrix& A, double rank_tol) {
    if (A.rows() == 0 || A.cols() == 0 || A.norm() == 0.0) return CMatrix(A.rows(), 0);
    ThinSVD svd = thin_svd(A, rank_tol);
    return reorthonormalize(svd.U);
}

CMatrix unitary_complete(const CMatrix& V, double tol_iso) {
    const Eigen::Index m = V.rows(), k = V.cols();
    if (k > m) throw Error(ErrorKind::NotIsometric, "more columns than rows");
    if (k > 0 && (V.adjoint() * V - CMatrix::Identity(k, k)).norm() > tol_iso)
        throw Error(ErrorKind::NotIsometric, "columns are not orthonormal");
    CMatrix U(m, m);
    U.leftCols(k) = V;
    for (Eigen::Index j = k; j < m; ++j) {
        // pick the standard basis vector with the largest component off the current span
        Eigen::Index best = 0;
        double best_res = -1.0;
        for (Eigen::Index i = 0; i < m; ++i) {
            double res = 1.0 - U.block(i, 0, 1, j).squaredNorm();
            if (res > best_res) {
                best_res = res;
                best = i;
            }
        }
        CVector v = CVector::Zero(m);
        v(best) = 1.0;
        for (int pass = 0; pass < 2; ++pass) v -= U.leftCols(j) * (U.leftCols(j).adjoint() * v);
        U.col(j) = v / v.norm();
    }
    return U;
}

CMatrix pivoted_cholesky(const CMatrix& G, double clamp_tol, ClampInfo* clamp) {
    const Eigen::Index n = G.rows();
    if (n != G.cols()) throw Error(ErrorKind::DimensionMismatch, "pivoted_cholesky needs a square matrix");
    if (n == 0) return CMatrix(0, 0);
    double scale = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) scale = std::max(scale, std::abs(G(i, i)));
    if (scale == 0.0) {
        if (G.norm() > 0) throw Error(ErrorKind::NotPSD, "zero diagonal with nonzero off-diagonal");
        return CMatrix(n, 0);
    }
    const double stop = 1e-14 * scale;
    const CMatrix S = 0.5 * (G + G.adjoint());
    // left-looking: column r of L is the pivot column of the current Schur complement
    CMatrix L = CMatrix::Zero(n, n);
    Eigen::VectorXd diag = S.diagonal().real();
    std::vector<Eigen::Index> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Eigen::Index r = 0;
    for (; r < n; ++r) {
        Eigen::Index piv = r;
        double best = diag(perm[r]);
        for (Eigen::Index i = r + 1; i < n; ++i) {
            if (diag(perm[i]) > best) {
                best = diag(perm[i]);
                piv = i;
            }
        }
        if (best <= stop) break;
        std::swap(perm[r], perm[piv]);
        const Eigen::Index p = perm[r];
        CVector col = S.col(p);
        if (r > 0) col.noalias() -= L.leftCols(r) * L.row(p).head(r).adjoint();
        col /= std::sqrt(best);
        for (Eigen::Index i = 0; i <= r; ++i) col(perm[i]) = 0.0;
        col(p) = std::sqrt(best);
        L.col(r) = col;
        for (Eigen::Index i = r + 1; i < n; ++i) diag(perm[i]) -= std::norm(col(perm[i]));
    }
    // whatever remains must be negligible and not materially negative
    double worst_neg = 0.0, worst_abs = 0.0;
    const Eigen::Index rest = n - r;
    if (rest > 0) {
        CMatrix Lr(rest, r), Sr(rest, rest);
        for (Eigen::Index i = 0; i < rest; ++i) {
            Lr.row(i) = L.row(perm[r + i]).head(r);
            for (Eigen::Index j = 0; j < rest; ++j) Sr(i, j) = S(perm[r + i], perm[r + j]);
        }
        Sr.noalias() -= Lr * Lr.adjoint();
        for (Eigen::Index i = 0; i < rest; ++i) {
            worst_neg = std::min(worst_neg, Sr(i, i).real());
            for (Eigen::Index j = 0; j < rest; ++j) worst_abs = std::max(worst_abs, std::abs(Sr(i, j)));
        }
    }
    if (worst_neg < -clamp_tol * scale || worst_abs > std::max(clamp_tol, 1e-12) * scale * n)
        throw Error(ErrorKind::NotPSD, "Schur complement residual " + std::to_string(worst_abs));
    if (clamp && worst_neg < 0) {
        clamp->count++;
        clamp->most_negative = std::min(clamp->most_negative, worst_neg);
        clamp->scale = std::max(clamp->scale, scale);
    }
    return L.leftCols(r);
}

double spectral_norm(const CMatrix& A) {
    if (A.size() == 0) return 0.0;
    CMatrix G = A.rows() < A.cols() ? CMatrix(A * A.adjoint()) : CMatrix(A.adjoint() * A);
    HermEigen he = herm_eigen(G);
    return std::sqrt(std::max(0.0, he.eigenvalues(he.eigenvalues.size() - 1)));
}

double spectral_radius(const CMatrix& A, int max_iter, double rel_tol) {
    const Eigen::Index n = A.rows();
    if (n == 0) return 0.0;
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> nd;
    CVector x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = cplx(nd(rng), nd(rng));
    x.normalize();
    double prev = -1.0;
    int stable = 0;
    for (int it = 0; it < max_iter; ++it) {
        CVector y = A * x;
        double r = y.norm();
        if (r == 0.0) return 0.0;
        x = y / r;
        if (prev >= 0 && std::abs(r - prev) <= rel_tol * r) {
            if (++stable >= 3) return r;
        } else {
            stable = 0;
        }
        prev = r;
    }
    throw Error(ErrorKind::NoConvergence, "power iteration cap exceeded");
}

double spectral_radius_bound(const CMatrix& A, int log2_m) {
    if (A.size() == 0) return 0.0;
    double best = spectral_norm(A);
    CMatrix P = A;
    double m = 1.0;
    double log_scale = 0.0;  // P holds A^m / exp(log_scale)
    for (int k = 0; k < log2_m; ++k) {
        P = P * P;
        log_scale *= 2.0;
        m *= 2.0;
        double nrm = P.norm();
        if (nrm == 0.0) return 0.0;
        P /= nrm;
        log_scale += std::log(nrm);
        best = std::min(best, std::exp(log_scale / m));
    }
    // Frobenius renormalisation overestimates the operator norm; finish with a spectral norm.
    double tail = std::exp((log_scale + std::log(spectral_norm(P))) / m);
    return std::min(best, tail);
}

LeastSquaresResult least_squares_map(const CMatrix& X, const CMatrix& Y, double rank_tol) {
    if (X.cols() != Y.cols()) throw Error(ErrorKind::DimensionMismatch, "X and Y column counts differ");
    LeastSquaresResult out;
    out.map = CMatrix::Zero(Y.rows(), X.rows());
    if (X.size() == 0 || X.norm() == 0.0) {
        out.residual = spectral_norm(Y);
        return out;
    }
    ThinSVD svd = thin_svd(X, rank_tol);
    // X = U S V^*, pseudo-inverse V S^{-1} U^*
    CMatrix YV = Y * svd.V;
    for (Eigen::Index k = 0; k < svd.s.size(); ++k) YV.col(k) /= svd.s(k);
    out.map = YV * svd.U.adjoint();
    out.residual = spectral_norm(out.map * X - Y);
    return out;
}

}  // namespace dil
