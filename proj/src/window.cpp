#include "dil/window.hpp"

#include <cmath>
#include <sstream>

#include "dil/verify.hpp"

namespace dil {

PairOrbit::PairOrbit(SpMatrix A, SpMatrix B, CMatrix base, int M)
    : A_(std::move(A)), B_(std::move(B)), base_(std::move(base)), M_(M) {
    if (M < 1) throw Error(ErrorKind::PreconditionViolated, "window must be at least 1");
    if (A_.rows() != A_.cols() || B_.rows() != A_.rows() || B_.cols() != A_.rows() || base_.rows() != A_.rows())
        throw Error(ErrorKind::DimensionMismatch, "pair and base sizes differ");
    row_.push_back(base_);
    for (int a = 1; a <= M_; ++a) row_.push_back(A_ * row_.back());
}

CMatrix PairOrbit::at(int a, int b) const {
    if (a < 0 || b < 0 || a > M_ || b > M_) throw Error(ErrorKind::IndexOutOfRange, "orbit index outside window");
    CMatrix Y = row_[a];
    for (int e = 0; e < b; ++e) Y = B_ * Y;
    return Y;
}

std::vector<int> WindowDilation::columns_within(int c1, int c2) const {
    std::vector<int> out;
    for (int k1 = 0; k1 <= std::min(c1, M); ++k1)
        for (int k2 = 0; k2 <= std::min(c2, M); ++k2)
            for (int i = 0; i < base_dim; ++i) out.push_back(col(k1, k2, i));
    return out;
}

namespace {

double min_eig(const CMatrix& H) {
    if (H.size() == 0) return 0.0;
    return herm_eigen(0.5 * (H + H.adjoint())).eigenvalues(0);
}

// Columns vec(k, C) for every k in the index box, C given in base coordinates.
CMatrix slots_times(const WindowDilation& wd, int k1lo, int k1hi, int k2lo, int k2hi, const CMatrix& C) {
    const int per = static_cast<int>(C.cols());
    const int cnt = std::max(0, k1hi - k1lo + 1) * std::max(0, k2hi - k2lo + 1);
    CMatrix out(wd.factor.rows(), static_cast<Eigen::Index>(cnt) * per);
    int c = 0;
    for (int k1 = k1lo; k1 <= k1hi; ++k1)
        for (int k2 = k2lo; k2 <= k2hi; ++k2) {
            out.middleCols(c, per) = wd.slot(k1, k2) * C;
            c += per;
        }
    return out;
}

double gram_gap(const CMatrix& WX, const CMatrix& X) { return frob_norm(WX.adjoint() * WX - X.adjoint() * X); }

}  // namespace

WindowDilation regular_gram(const PairOrbit& orbit, double clamp_rel) {
    const int M = orbit.window(), b = orbit.base_dim();
    const CMatrix& base = orbit.base();
    WindowDilation wd;
    wd.M = M;
    wd.base_dim = b;

    // Z(p,q) = base^* A^p B^q base and C(p,q) = (A^p base)^* (B^q base); every gram block is one of these.
    std::vector<CMatrix> Z((M + 1) * (M + 1)), C((M + 1) * (M + 1));
    std::vector<CMatrix> col_pow(M + 1);  // B^q base
    col_pow[0] = base;
    for (int q = 1; q <= M; ++q) col_pow[q] = orbit.B() * col_pow[q - 1];
    for (int q = 0; q <= M; ++q) {
        CMatrix Y = col_pow[q];
        for (int p = 0; p <= M; ++p) {
            if (p > 0) Y = orbit.A() * Y;
            Z[p * (M + 1) + q] = base.adjoint() * Y;
        }
    }
    std::vector<CMatrix> row_pow(M + 1);
    row_pow[0] = base;
    for (int p = 1; p <= M; ++p) row_pow[p] = orbit.A() * row_pow[p - 1];
    for (int p = 0; p <= M; ++p)
        for (int q = 0; q <= M; ++q) C[p * (M + 1) + q] = row_pow[p].adjoint() * col_pow[q];

    // Brehmer positivity of the adjoint pair, compressed to the base.
    const CMatrix I = CMatrix::Identity(b, b);
    const CMatrix& A1 = row_pow.size() > 1 ? row_pow[1] : base;
    const CMatrix& B1 = col_pow[1];
    const CMatrix AB = orbit.A() * B1;
    const double e1 = min_eig(I - A1.adjoint() * A1);
    const double e2 = min_eig(I - B1.adjoint() * B1);
    const double e12 = min_eig(I - A1.adjoint() * A1 - B1.adjoint() * B1 + AB.adjoint() * AB);
    wd.adjoint_pair_defect = std::min({e1, e2, e12});
    if (wd.adjoint_pair_defect < -1e-8)
        throw Error(ErrorKind::PreconditionViolated,
                    "adjoint pair fails Brehmer positivity on the base (min eigenvalue " +
                        std::to_string(wd.adjoint_pair_defect) + ")");

    const int K = (M + 1) * (M + 1);
    wd.gram = CMatrix(static_cast<Eigen::Index>(K) * b, static_cast<Eigen::Index>(K) * b);
    for (int k1 = 0; k1 <= M; ++k1)
        for (int k2 = 0; k2 <= M; ++k2)
            for (int l1 = 0; l1 <= M; ++l1)
                for (int l2 = 0; l2 <= M; ++l2) {
                    const int a1 = k1 - l1, a2 = k2 - l2;
                    // block (k,l) = Y_{(k-l)+}^* Y_{(l-k)+}
                    CMatrix blk;
                    if (a1 >= 0 && a2 >= 0)
                        blk = Z[a1 * (M + 1) + a2].adjoint();
                    else if (a1 <= 0 && a2 <= 0)
                        blk = Z[(-a1) * (M + 1) + (-a2)];
                    else if (a1 > 0)
                        blk = C[a1 * (M + 1) + (-a2)];
                    else
                        blk = C[(-a1) * (M + 1) + a2].adjoint();
                    wd.gram.block(wd.col(k1, k2, 0), wd.col(l1, l2, 0), b, b) = blk;
                }
    wd.gram_norm = spectral_norm(wd.gram);
    // pivoted_cholesky measures the clamp against the largest diagonal entry, which is 1 here
    const double diag_scale = 1.0;
    wd.factor = pivoted_cholesky(wd.gram, clamp_rel * std::max(wd.gram_norm, diag_scale), &wd.clamp)
                    .adjoint();
    wd.chol_residual = frob_norm(wd.factor.adjoint() * wd.factor - wd.gram);
    return wd;
}

WindowDilation regular_gram(const CMatrix& A, const CMatrix& B, int M, double clamp_rel) {
    const Eigen::Index d = A.rows();
    PairOrbit orbit(A.sparseView(), B.sparseView(), CMatrix::Identity(d, d), M);
    return regular_gram(orbit, clamp_rel);
}

void window_shifts(WindowDilation& wd, double tol) {
    const int M = wd.M;
    const CMatrix I = CMatrix::Identity(wd.base_dim, wd.base_dim);
    {
        const CMatrix X = slots_times(wd, 0, M - 1, 0, M, I);
        const CMatrix Y = slots_times(wd, 1, M, 0, M, I);
        LeastSquaresResult ls = least_squares_map(X, Y, 1e-10);
        wd.W0 = std::move(ls.map);
        wd.w0_welldef = ls.residual;
    }
    {
        const CMatrix X = slots_times(wd, 0, M, 0, M - 1, I);
        const CMatrix Y = slots_times(wd, 0, M, 1, M, I);
        LeastSquaresResult ls = least_squares_map(X, Y, 1e-10);
        wd.W1 = std::move(ls.map);
        wd.w1_welldef = ls.residual;
    }
    if (!(wd.w0_welldef <= tol && wd.w1_welldef <= tol))
        throw Error(ErrorKind::IllConditioned, "window shifts are not well defined (residuals " +
                                                   std::to_string(wd.w0_welldef) + ", " +
                                                   std::to_string(wd.w1_welldef) + ")");
}

LiftedIsometry lift_doubly_commuting(const WindowDilation& wd, const CMatrix& S_coords, const CMatrix& domain,
                                     double tol) {
    const int M = wd.M;
    LiftedIsometry out;
    const CMatrix X = slots_times(wd, 0, M, 0, M, domain);
    const CMatrix Y = slots_times(wd, 0, M, 0, M, S_coords * domain);
    LeastSquaresResult ls = least_squares_map(X, Y, 1e-10);
    out.U = std::move(ls.map);
    out.welldef = ls.residual;
    out.isometry_defect = gram_gap(out.U * X, X);
    out.extension = frob_norm(out.U * wd.slot(0, 0) * domain - wd.slot(0, 0) * S_coords * domain);
    if (!(out.welldef <= tol))
        throw Error(ErrorKind::LiftFailed, "lift is not well defined (residual " + std::to_string(out.welldef) + ")");
    return out;
}

LiftedIsometry lift_doubly_commuting(const CMatrix& A, const CMatrix& B, const WindowDilation& wd, const CMatrix& S,
                                     double tol) {
    const Eigen::Index d = S.rows();
    if (wd.base_dim != d || A.rows() != d || B.rows() != d)
        throw Error(ErrorKind::DimensionMismatch, "lift operands differ in size");
    const double hyp = std::max({spectral_norm(A * S - S * A), spectral_norm(B * S - S * B),
                                 spectral_norm(A * S.adjoint() - S.adjoint() * A),
                                 spectral_norm(B * S.adjoint() - S.adjoint() * B)});
    const double iso = spectral_norm(S.adjoint() * S - CMatrix::Identity(d, d));
    if (!(hyp <= tol) || !(iso <= tol))
        throw Error(ErrorKind::HypothesisViolated, "S must be an isometry doubly commuting with the pair");
    const CMatrix I = CMatrix::Identity(d, d);
    LiftedIsometry out = lift_doubly_commuting(wd, S, I, tol);
    // the window is invariant here, so U^* is exact on vec(0, .)
    out.coextension = frob_norm(out.U.adjoint() * wd.slot(0, 0) - wd.slot(0, 0) * S.adjoint());
    return out;
}

CMatrix apply_word(const CMatrix& W0, const CMatrix& W1, const std::vector<CMatrix>& U, int a0, int a1,
                   const std::vector<int>& beta, const CMatrix& X) {
    CMatrix Y = X;
    for (size_t i = 0; i < beta.size(); ++i)
        for (int e = 0; e < beta[i]; ++e) Y = U[i] * Y;
    for (int e = 0; e < a1; ++e) Y = W1 * Y;
    for (int e = 0; e < a0; ++e) Y = W0 * Y;
    return Y;
}

namespace {

// vectors V_mid^beta Pi e_i grouped by depth |beta|
std::vector<CMatrix> krylov_levels(const PaddedModel& pm, int n, int depth) {
    std::vector<CMatrix> levels{pm.Pi};
    for (int t = 1; t <= depth; ++t) {
        const CMatrix& prev = levels.back();
        CMatrix next(pm.total_dim, 0);
        for (int j = 2; j <= n - 1; ++j) {
            CMatrix add = pm.V[j - 1] * prev;
            CMatrix grown(pm.total_dim, next.cols() + add.cols());
            grown << next, add;
            next = std::move(grown);
        }
        // keep the level small: only its range matters
        levels.push_back(next.cols() ? range_basis(next, 1e-12) : next);
    }
    return levels;
}

CMatrix hcat(const std::vector<CMatrix>& parts, Eigen::Index rows) {
    Eigen::Index c = 0;
    for (const auto& p : parts) c += p.cols();
    CMatrix out(rows, c);
    c = 0;
    for (const auto& p : parts) {
        out.middleCols(c, p.cols()) = p;
        c += p.cols();
    }
    return out;
}

std::vector<std::vector<int>> nonneg_indices(int vars, int total) {
    std::vector<std::vector<int>> out;
    for (const auto& a : signed_indices(vars, total, total)) {
        bool ok = true;
        for (int v : a) ok = ok && v >= 0;
        if (ok) out.push_back(a);
    }
    return out;
}

}  // namespace

CMatrix compress_dilation_word(const FinalDilation& fd, const std::vector<int>& k) {
    const int n = fd.n;
    if (static_cast<int>(k.size()) != n) throw Error(ErrorKind::DimensionMismatch, "word arity");
    const std::vector<int> beta(k.begin() + 1, k.end() - 1);
    const int k1 = k[0], kn = k[n - 1];
    const CMatrix& W0 = fd.wd.W0;
    const CMatrix& W1 = fd.wd.W1;
    if (kn >= k1) {
        // W_1^{k1} W_n^{kn} = W_1^{*(kn-k1)} W0^{kn} on the compression
        const CMatrix left = apply_word(W0, W1, fd.U, kn, 0, beta, fd.embed);
        const CMatrix right = apply_word(W0, W1, fd.U, 0, kn - k1, {}, fd.embed);
        return right.adjoint() * left;
    }
    return fd.embed.adjoint() * apply_word(W0, W1, fd.U, kn, k1 - kn, beta, fd.embed);
}

FinalDilation assemble_theorem(const OperatorTuple& T, int N, const TheoremOptions& opts) {
    const int n = T.n(), M = opts.M;
    if (n < 2) throw Error(ErrorKind::PreconditionViolated, "need at least two operators");
    if (N < M + 1) throw Error(ErrorKind::PreconditionViolated, "degree must exceed the window");
    FinalDilation fd;
    fd.n = n;
    fd.M = M;
    fd.model = assemble_predil(T, N, opts.predil);
    ResidualLedger& led = fd.report;
    led.append(fd.model.residuals);

    // Every vector the window touches gains at most M+1 degrees in a middle variable and 2M in z_1.
    const PaddedModel pm = pad_model(fd.model, N + 2 * M + 1);
    const std::vector<CMatrix> levels = krylov_levels(pm, n, M);
    const CMatrix Bx = range_basis(hcat(levels, pm.total_dim), 1e-12);
    const CMatrix dom = range_basis(hcat(std::vector<CMatrix>(levels.begin(), levels.end() - 1), pm.total_dim),
                                    1e-12);
    const CMatrix dom_coords = Bx.adjoint() * dom;
    fd.base_dim = static_cast<int>(Bx.cols());
    led.add("krylov_domain_inclusion", "window base", frob_norm(Bx * dom_coords - dom), 1e-10);

    const SpMatrix& A = pm.V0;
    const SpMatrix& B = pm.V[0];
    PairOrbit orbit(A, B, Bx, M);
    fd.wd = regular_gram(orbit);
    WindowDilation& wd = fd.wd;
    const double gram_scale = std::max(wd.gram_norm, 1.0);
    led.add("gram_psd_clamp", "regular dilation kernel", -wd.clamp.most_negative / gram_scale, 1e-9);
    led.add("gram_factor", "regular dilation kernel", wd.chol_residual / gram_scale, 1e-9);
    led.add("gram_diagonal_identity", "regular dilation kernel",
            frob_norm(wd.gram.topLeftCorner(wd.base_dim, wd.base_dim) -
                      CMatrix::Identity(wd.base_dim, wd.base_dim)),
            1e-12);
    led.add_info("adjoint_pair_brehmer_min_eig", "regular dilation kernel", wd.adjoint_pair_defect);
    window_shifts(wd, opts.tol_window);
    led.add("w0_well_defined", "regular dilation", wd.w0_welldef, opts.tol_window);
    led.add("w1_well_defined", "regular dilation", wd.w1_welldef, opts.tol_window);

    const CMatrix Ib = CMatrix::Identity(wd.base_dim, wd.base_dim);
    const CMatrix X0 = slots_times(wd, 0, M - 1, 0, M, Ib);
    const CMatrix X1 = slots_times(wd, 0, M, 0, M - 1, Ib);
    const CMatrix Xc = slots_times(wd, 0, M - 1, 0, M - 1, Ib);
    led.add("w0_isometry", "regular dilation", gram_gap(wd.W0 * X0, X0), opts.tol_window);
    led.add("w1_isometry", "regular dilation", gram_gap(wd.W1 * X1, X1), opts.tol_window);
    led.add("w0_w1_commute", "regular dilation", frob_norm((wd.W0 * wd.W1 - wd.W1 * wd.W0) * Xc),
            opts.tol_window);

    // (W0, W1) over (V0, V1): (W^{a-} F0)^* (W^{a+} F0) against Y_{a-}^* Y_{a+}
    {
        const CMatrix F0 = wd.slot(0, 0);
        const CompressionFn dil = matrix_compression({wd.W0, wd.W1}, F0);
        const CompressionFn target = [&](const std::vector<int>& a) -> CMatrix {
            const auto p = positive_part(a), m = negative_part(a);
            return orbit.at(m[0], m[1]).adjoint() * orbit.at(p[0], p[1]);
        };
        led.append(signed_residual(target, dil, signed_indices(2, M, M), opts.tol_window, "pair_regular",
                                   "regular dilation"));
    }

    // lifts of the middle operators
    for (int j = 2; j <= n - 1; ++j) {
        const SpMatrix& S = pm.V[j - 1];
        const SpMatrix St = SpMatrix(S.adjoint());
        const double hyp = std::max({frob_norm(A * (S * Bx) - S * (A * Bx)), frob_norm(B * (S * Bx) - S * (B * Bx)),
                                     frob_norm(A * (St * Bx) - St * (A * Bx)),
                                     frob_norm(B * (St * Bx) - St * (B * Bx))});
        const double iso = frob_norm((S * dom).adjoint() * (S * dom) - CMatrix::Identity(dom.cols(), dom.cols()));
        const std::string ctx = "j=" + std::to_string(j);
        led.add("middle_doubly_commutes", "doubly commuting lift", hyp, opts.tol_window, ctx);
        led.add("middle_isometric", "doubly commuting lift", iso, opts.tol_window, ctx);
        if (!(hyp <= opts.tol_window) || !(iso <= opts.tol_window))
            throw Error(ErrorKind::HypothesisViolated, "middle operator " + std::to_string(j) +
                                                           " is not a doubly commuting isometry on the base");
        const CMatrix S_coords = Bx.adjoint() * (S * Bx);
        LiftedIsometry lift = lift_doubly_commuting(wd, S_coords, dom_coords, opts.tol_window);
        led.add("lift_well_defined", "doubly commuting lift", lift.welldef, opts.tol_window, ctx);
        led.add("lift_isometry", "doubly commuting lift", lift.isometry_defect, opts.tol_window, ctx);
        led.add("lift_extension", "doubly commuting lift", lift.extension, opts.tol_window, ctx);
        // co-extension, weak form: <U^* vec(0,x), vec(k,c)> = <x, S T^k c> for c in the domain
        {
            const CMatrix F0 = wd.slot(0, 0);
            double worst = 0.0;
            for (int k1 = 0; k1 <= M; ++k1)
                for (int k2 = 0; k2 <= M; ++k2) {
                    const CMatrix lhs = (wd.slot(k1, k2) * dom_coords).adjoint() * (lift.U.adjoint() * F0);
                    const CMatrix rhs = (Bx.adjoint() * (S * (orbit.at(k1, k2) * dom_coords))).adjoint();
                    worst = std::max(worst, frob_norm(lhs - rhs));
                }
            led.add("lift_coextension", "doubly commuting lift", worst, opts.tol_window, ctx);
        }
        fd.U.push_back(std::move(lift.U));
    }

    fd.embed = wd.slot(0, 0) * (Bx.adjoint() * pm.Pi);
    led.add("embed_isometry", "window embedding",
            frob_norm(fd.embed.adjoint() * fd.embed - CMatrix::Identity(T.dim(), T.dim())), fd.model.tol_iso);

    fd.W.push_back(wd.W1);
    for (const auto& U : fd.U) fd.W.push_back(U);
    fd.W.push_back(wd.W1.adjoint() * wd.W0);

    // W_n identities on interior columns
    {
        const CMatrix& Wn = fd.W.back();
        led.add("wn_adjoint_w0", "final tuple", frob_norm(Wn.adjoint() * wd.W0 * Xc - wd.W1 * Xc), opts.tol_window);
        const CMatrix Xn = slots_times(wd, 0, M - 1, 1, M, dom_coords);
        for (size_t i = 0; i < fd.U.size(); ++i)
            led.add("wn_commutes_middle", "final tuple", frob_norm((Wn * fd.U[i] - fd.U[i] * Wn) * Xn),
                    opts.tol_window, "j=" + std::to_string(i + 2));
    }

    // dilation identity, both branches, plus the cross-check where they meet
    const int L = M - opts.margin;
    for (const auto& k : nonneg_indices(n, L)) {
        const CMatrix got = compress_dilation_word(fd, k);
        const std::string ctx = "k=" + index_string(k) + (k[n - 1] >= k[0] ? " case I" : " case II");
        led.add("dilation_identity", "isometric dilation", spectral_norm(got - tuple_power(T, k)), opts.tol_final,
                ctx);
        if (k[0] == k[n - 1]) {
            const std::vector<int> beta(k.begin() + 1, k.end() - 1);
            const int c = k[0];
            const CMatrix lhs = apply_word(wd.W1, wd.W1, {}, 0, c, {}, fd.embed).adjoint() *
                                apply_word(wd.W0, wd.W1, fd.U, c, c, beta, fd.embed);
            led.add("case_cross_check", "isometric dilation", spectral_norm(lhs - got), opts.tol_cross, ctx);
        }
    }

    // star-regularity of the two (n-1)-subtuples
    {
        const auto alphas = signed_indices(n - 1, L, L);
        const CMatrix& W0 = wd.W0;
        const CMatrix& W1 = wd.W1;
        const CompressionFn hat1 = [&](const std::vector<int>& a) -> CMatrix {
            const auto p = positive_part(a), m = negative_part(a);
            const std::vector<int> bp(p.begin(), p.end() - 1), bm(m.begin(), m.end() - 1);
            const int cp = p.back(), cm = m.back();
            const CMatrix left = apply_word(W0, W1, fd.U, cp, cm, bp, fd.embed);
            const CMatrix right = apply_word(W0, W1, fd.U, cm, cp, bm, fd.embed);
            return right.adjoint() * left;
        };
        const CompressionFn hatn = [&](const std::vector<int>& a) -> CMatrix {
            const auto p = positive_part(a), m = negative_part(a);
            const std::vector<int> bp(p.begin() + 1, p.end()), bm(m.begin() + 1, m.end());
            const CMatrix left = apply_word(W0, W1, fd.U, 0, p[0], bp, fd.embed);
            const CMatrix right = apply_word(W0, W1, fd.U, 0, m[0], bm, fd.embed);
            return right.adjoint() * left;
        };
        std::vector<CMatrix> t1(T.ops().begin() + 1, T.ops().end());
        std::vector<CMatrix> tn(T.ops().begin(), T.ops().end() - 1);
        const OperatorTuple T1(t1, default_tol(), false), Tn(tn, default_tol(), false);
        led.append(star_regular_residual(T1, hat1, alphas, opts.tol_final, "star_regular_hat1", "final tuple"));
        led.append(star_regular_residual(Tn, hatn, alphas, opts.tol_final, "star_regular_hatn", "final tuple"));
    }

    if (opts.throw_on_failure && !led.pass()) {
        const ResidualEntry* w = led.worst_failure();
        std::ostringstream s;
        s << w->name << " [" << w->context << "] residual " << w->residual << " > " << w->tol;
        throw Error(ErrorKind::VerificationFailed, s.str());
    }
    return fd;
}

}  // namespace dil
