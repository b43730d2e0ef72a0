#include "dil/bcl.hpp"

#include <cmath>
#include <map>
#include <string>

namespace dil {

namespace {

double iso_defect(const CMatrix& V) {
    if (V.cols() == 0) return 0.0;
    return spectral_norm(V.adjoint() * V - CMatrix::Identity(V.cols(), V.cols()));
}

CMatrix stack(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() + b.rows(), a.cols());
    out << a, b;
    return out;
}

CMatrix block_diag(const CMatrix& a, const CMatrix& b) {
    CMatrix out = CMatrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
    out.topLeftCorner(a.rows(), a.cols()) = a;
    out.bottomRightCorner(b.rows(), b.cols()) = b;
    return out;
}

}  // namespace

DefectCoords defect_coords(const OperatorTuple& T, SubsetMask G, const Tolerances& tol) {
    DefectData dd = defect(T, G, tol);
    if (dd.not_psd) throw Error(ErrorKind::NotPSD, "defect not positive for G=" + G.str());
    if (dd.rank == 0) return {CMatrix(0, T.dim()), 0};
    return {dd.basis->adjoint() * *dd.sqrt, dd.rank};
}

GammaData build_gamma(const OperatorTuple& T, SubsetMask G, double tol) {
    DefectIdentityResidual id = check_defect_identity(T, G);
    if (id.first > 1e-9 || id.second > 1e-9)
        throw Error(ErrorKind::DefectIdentityViolated,
                    "residuals " + std::to_string(id.first) + ", " + std::to_string(id.second));
    GammaData g;
    g.c1n = defect_coords(hat1n(T), G);
    g.cn = defect_coords(hat(T, T.n()), G);
    g.c1 = defect_coords(hat1_aligned(T), G);
    g.src_rank = g.c1n.rank;
    g.rank_n = g.cn.rank;
    g.rank_1 = g.c1.rank;
    g.dst_dim = g.rank_n + g.rank_1;
    CMatrix target = stack(g.cn.coords, g.c1.coords * T.op(1).adjoint());
    LeastSquaresResult ls = least_squares_map(g.c1n.coords, target);
    g.gamma = ls.map;
    g.residual = ls.residual;
    g.isometry_defect = iso_defect(g.gamma);
    if (g.residual > tol || g.isometry_defect > tol)
        throw Error(ErrorKind::IllConditioned, "Gamma residual " + std::to_string(g.residual) + ", isometry defect " +
                                                   std::to_string(g.isometry_defect));
    return g;
}

UPrimeData build_uprime(const OperatorTuple& T, SubsetMask G, const GammaData& g, double tol) {
    (void)G;
    UPrimeData u;
    u.q_span = stack(g.cn.coords, g.c1.coords * T.op(1).adjoint());
    u.qtilde_span = stack(g.cn.coords * T.op(T.n()).adjoint(), g.c1.coords);
    LeastSquaresResult ls = least_squares_map(u.q_span, u.qtilde_span);
    u.uprime = ls.map;
    u.residual = ls.residual;
    u.q_basis = range_basis(u.q_span);
    u.qtilde_basis = range_basis(u.qtilde_span);
    u.isometry_defect = iso_defect(u.uprime * u.q_basis);
    if (u.q_basis.cols() != u.qtilde_basis.cols())
        throw Error(ErrorKind::IllConditioned, "dim Q = " + std::to_string(u.q_basis.cols()) +
                                                   " but dim Q~ = " + std::to_string(u.qtilde_basis.cols()));
    if (u.residual > tol || u.isometry_defect > tol)
        throw Error(ErrorKind::IllConditioned, "U' residual " + std::to_string(u.residual) + ", isometry defect " +
                                                   std::to_string(u.isometry_defect));
    return u;
}

std::vector<CMatrix> build_w_prime(const OperatorTuple& T, SubsetMask G, const GammaData& g, double tol) {
    std::vector<CMatrix> out;
    for (int j = 2; j <= T.n() - 1; ++j) {
        if (G.contains(j)) continue;
        const CMatrix Tj = T.op(j).adjoint();
        CMatrix wn = least_squares_map(g.cn.coords, g.cn.coords * Tj).map.adjoint();
        CMatrix w1 = least_squares_map(g.c1.coords, g.c1.coords * Tj).map.adjoint();
        CMatrix W = block_diag(wn, w1);
        double defect_u = W.rows() ? spectral_norm(W.adjoint() * W - CMatrix::Identity(W.rows(), W.rows())) : 0.0;
        if (defect_u > tol)
            throw Error(ErrorKind::HypothesisViolated,
                        "W'_" + std::to_string(j) + " not unitary (" + std::to_string(defect_u) + "); T_j must be a co-isometry");
        out.push_back(W);
    }
    return out;
}

LiftData lift_uprime(const CMatrix& uprime, const CMatrix& q_basis, const std::vector<CMatrix>& w_ops, double tol) {
    const Eigen::Index a = uprime.rows();
    const int m = static_cast<int>(w_ops.size());
    for (const auto& W : w_ops)
        if (W.rows() != a || iso_defect(W) > tol || iso_defect(W.adjoint()) > tol)
            throw Error(ErrorKind::PreconditionViolated, "lift needs unitaries on the ambient space");
    // words are W^e with e in Z^m (the W's commute and are unitary); explore layer by layer in |e|_1
    std::map<std::vector<int>, std::pair<CMatrix, CMatrix>> seen;
    std::vector<std::vector<int>> frontier{std::vector<int>(m, 0)};
    seen[frontier[0]] = {q_basis, uprime * q_basis};
    CMatrix M = q_basis, Mp = uprime * q_basis;
    Eigen::Index rank = range_basis(M).cols();
    int stable = 0, rounds = 0;
    const int cap = 4 * static_cast<int>(std::max<Eigen::Index>(a, 1));
    while (m > 0 && stable < 2 && rounds < cap) {
        ++rounds;
        std::vector<std::vector<int>> next;
        for (const auto& e : frontier)
            for (int j = 0; j < m; ++j)
                for (int s : {1, -1}) {
                    std::vector<int> f = e;
                    f[j] += s;
                    if (seen.count(f)) continue;
                    const auto& [x, y] = seen[e];
                    const CMatrix& W = w_ops[j];
                    CMatrix nx = s > 0 ? CMatrix(W * x) : CMatrix(W.adjoint() * x);
                    CMatrix ny = s > 0 ? CMatrix(W * y) : CMatrix(W.adjoint() * y);
                    seen[f] = {nx, ny};
                    next.push_back(f);
                    CMatrix M2(a, M.cols() + nx.cols()), Mp2(a, M.cols() + nx.cols());
                    M2 << M, nx;
                    Mp2 << Mp, ny;
                    M = std::move(M2);
                    Mp = std::move(Mp2);
                }
        frontier = std::move(next);
        Eigen::Index r = range_basis(M).cols();
        stable = r == rank ? stable + 1 : 0;
        rank = r;
    }
    LiftData L;
    L.rounds = rounds;
    L.h_basis = range_basis(M);
    L.htilde_basis = range_basis(Mp);
    LeastSquaresResult ls = least_squares_map(M, Mp);
    L.u_dd = ls.map;
    L.welldef_residual = ls.residual;
    L.residual = iso_defect(L.u_dd * L.h_basis);
    for (const auto& W : w_ops)
        L.intertwine_residual = std::max(
            L.intertwine_residual, (L.u_dd * W.adjoint() * L.h_basis - W.adjoint() * L.u_dd * L.h_basis).norm());
    if (L.h_basis.cols() != L.htilde_basis.cols() || L.welldef_residual > tol || L.residual > tol ||
        L.intertwine_residual > tol)
        throw Error(ErrorKind::LiftFailed, "word length " + std::to_string(rounds) + ": welldef " +
                                               std::to_string(L.welldef_residual) + ", isometry " +
                                               std::to_string(L.residual) + ", intertwining " +
                                               std::to_string(L.intertwine_residual));
    return L;
}

CMatrix complete_unitary_pair(const LiftData& lift, int ambient, double tol) {
    const Eigen::Index k = lift.h_basis.cols();
    if (k != lift.htilde_basis.cols()) throw Error(ErrorKind::DimensionMismatch, "dim H != dim H~");
    CMatrix H = unitary_complete(lift.h_basis);
    CMatrix Ht = unitary_complete(lift.htilde_basis);
    CMatrix U = lift.u_dd * lift.h_basis * lift.h_basis.adjoint();
    if (ambient > k) U += Ht.rightCols(ambient - k) * H.rightCols(ambient - k).adjoint();
    if (ambient > 0 && iso_defect(U) > tol) throw Error(ErrorKind::NotUnitary, "completion not unitary");
    return U;
}

BCLData bcl_pair(const CMatrix& U, const CMatrix& P, double tol) {
    const Eigen::Index a = U.rows();
    if (P.rows() != a || P.cols() != a || U.cols() != a) throw Error(ErrorKind::DimensionMismatch, "U and P sizes");
    if (a > 0 && ((P * P - P).norm() > tol || (P - P.adjoint()).norm() > tol))
        throw Error(ErrorKind::NotProjection, "P is not an orthogonal projection");
    if (a > 0 && iso_defect(U) > 1e-10) throw Error(ErrorKind::NotUnitary, "U is not unitary");
    BCLData b;
    b.ambient_dim = static_cast<int>(a);
    b.P = P;
    b.U = U;
    const CMatrix I = CMatrix::Identity(a, a);
    const CMatrix Pp = I - P;
    b.phi0 = P * U;
    b.phi1 = Pp * U;
    b.psi0 = U.adjoint() * Pp;
    b.psi1 = U.adjoint() * P;
    if (a == 0) return b;
    b.identity_residual = {spectral_norm(b.phi0 * b.psi0), spectral_norm(b.phi0 * b.psi1 + b.phi1 * b.psi0 - I),
                           spectral_norm(b.phi1 * b.psi1)};
    // [[U^*P, U^* i1], [i1^*, 0]] with i1 the inclusion of ran P^perp
    CMatrix iota = range_basis(Pp);
    const Eigen::Index r = iota.cols();
    CMatrix U1 = CMatrix::Zero(a + r, a + r);
    U1.topLeftCorner(a, a) = U.adjoint() * P;
    U1.topRightCorner(a, r) = U.adjoint() * iota;
    U1.bottomLeftCorner(r, a) = iota.adjoint();
    b.u1_block_residual = iso_defect(U1);
    return b;
}

CMatrix summand_projection(const GammaData& g) {
    CMatrix P = CMatrix::Zero(g.dst_dim, g.dst_dim);
    for (int i = g.rank_n; i < g.dst_dim; ++i) P(i, i) = 1.0;
    return P;
}

FactorizationResidual factorization_check(const OperatorTuple& T, SubsetMask G, const GammaData& g, const BCLData& b,
                                          int degree) {
    FactorizationResidual out;
    if (g.src_rank == 0 || g.dst_dim == 0) return out;
    TruncatedHardy small(G.size(), degree, g.src_rank);
    OperatorTuple X = sub_tuple(hat1n(T), G);
    CMatrix basis_free = CMatrix::Identity(g.src_rank, g.src_rank);
    // coordinates are already basis^* D, so feed them with an identity basis
    CMatrix Pi = canonical_dilation(X, g.c1n.coords, basis_free, small);
    HardyOp E = embed_coeff(small, g.gamma);
    CMatrix EPi = E.matrix * Pi;
    const TruncatedHardy& big = E.space;
    SpMatrix Mphi = mult_op(big, b.phi0, b.phi1).matrix, Mpsi = mult_op(big, b.psi0, b.psi1).matrix;
    std::vector<int> caps(big.vars(), degree);
    caps[0] = degree - 1;
    auto rows = rows_with_degree_at_most(big, caps);
    CMatrix r1 = EPi * T.op(1).adjoint() - Mphi.adjoint() * EPi;
    CMatrix rn = EPi * T.op(T.n()).adjoint() - Mpsi.adjoint() * EPi;
    out.phi = select_rows(r1, rows).norm();
    out.psi = select_rows(rn, rows).norm();
    return out;
}

}  // namespace dil
