#include "dil/dilation.hpp"

#include <cmath>
#include <random>
#include <string>

#include "dil/tuple_io.hpp"

namespace dil {

namespace {

using Triplet = Eigen::Triplet<cplx>;

double safe_radius(const CMatrix& A) {
    try {
        return spectral_radius(A);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::NoConvergence) throw;
        return spectral_radius_bound(A, 16);
    }
}

double unitarity_defect(const CMatrix& U) {
    if (U.rows() == 0) return 0.0;
    const auto I = CMatrix::Identity(U.rows(), U.rows());
    return std::max(spectral_norm(U.adjoint() * U - I), spectral_norm(U * U.adjoint() - I));
}

std::string ctx(SubsetMask G, int j) { return "G=" + G.str() + " j=" + std::to_string(j); }

// Residual of Pi T_j^* - V_j^* Pi on the given rows.
double intertwining(const CMatrix& Pi, const CMatrix& Tj, const SpMatrix& Vj, const std::vector<int>& rows) {
    CMatrix R = Pi * Tj.adjoint() - CMatrix(Vj.adjoint() * Pi);
    return select_rows(R, rows).norm();
}

SpMatrix block_diag(const std::vector<const SpMatrix*>& parts, const std::vector<int>& offsets, int total) {
    std::vector<Triplet> t;
    for (size_t b = 0; b < parts.size(); ++b) {
        if (!parts[b]) continue;
        const SpMatrix& A = *parts[b];
        for (int k = 0; k < A.outerSize(); ++k)
            for (SpMatrix::InnerIterator it(A, k); it; ++it)
                t.emplace_back(offsets[b] + it.row(), offsets[b] + it.col(), it.value());
    }
    SpMatrix M(total, total);
    M.setFromTriplets(t.begin(), t.end());
    M.makeCompressed();
    return M;
}

}  // namespace

const char* to_string(BlockKind k) {
    switch (k) {
        case BlockKind::Empty: return "Empty";
        case BlockKind::OneInG: return "OneInG";
        case BlockKind::OneNotInG: return "OneNotInG";
    }
    return "?";
}

SpMatrix selector(const std::vector<int>& rows, int dim) {
    std::vector<Triplet> t;
    for (size_t i = 0; i < rows.size(); ++i) t.emplace_back(static_cast<int>(i), rows[i], 1.0);
    SpMatrix S(static_cast<int>(rows.size()), dim);
    S.setFromTriplets(t.begin(), t.end());
    return S;
}

QCompression q_limit(const OperatorTuple& T, SubsetMask Gbar, double tol, int max_iters) {
    QCompression out;
    const int d = T.dim(), n = T.n();
    const CMatrix X = subset_product(hat1n(T), Gbar);
    CMatrix A = CMatrix::Identity(d, d), prev = A;
    for (out.iters = 0; out.iters < max_iters; ++out.iters) {
        prev = A;
        A = X * A * X.adjoint();
        A = 0.5 * (A + A.adjoint());
        out.conv_residual = (A - prev).norm();
        if (out.conv_residual <= tol) break;
    }
    if (out.iters == max_iters) {
        out.slow = true;
        A = 0.5 * (A + prev);
    }
    HermEigen he = herm_eigen(A);
    std::vector<int> keep;
    for (int k = 0; k < d; ++k)
        if (he.eigenvalues(k) > 1e-10) keep.push_back(k);
    const int q = static_cast<int>(keep.size());
    out.ran_basis.resize(d, q);
    Eigen::VectorXd s(q);
    for (int c = 0; c < q; ++c) {
        out.ran_basis.col(c) = he.eigenvectors.col(keep[c]);
        s(c) = std::sqrt(he.eigenvalues(keep[c]));
    }
    out.Q = out.ran_basis * s.cast<cplx>().asDiagonal() * out.ran_basis.adjoint();
    out.coords = s.cast<cplx>().asDiagonal() * out.ran_basis.adjoint();
    if (q == 0) return out;
    std::vector<CMatrix> S;
    for (int j = 1; j <= n; ++j) {
        LeastSquaresResult ls = least_squares_map(out.coords, out.coords * T.op(j).adjoint());
        out.douglas_residual = std::max(out.douglas_residual, ls.residual);
        S.push_back(ls.map.adjoint());
    }
    out.tilde_ops = OperatorTuple(S, default_tol(), false);
    for (int j : Gbar.elements()) {
        const CMatrix I = CMatrix::Identity(q, q);
        auto coiso = [&](const CMatrix& Sj) { return spectral_norm(Sj * Sj.adjoint() - I); };
        if (j == 1) {
            out.coisometry_defect = std::max({out.coisometry_defect, coiso(S[0]), coiso(S[n - 1])});
        } else {
            out.coisometry_defect = std::max(out.coisometry_defect, coiso(S[j - 1]));
        }
    }
    return out;
}

SubsetBlock build_block_one_in_g(const OperatorTuple& T, const QCompression& q, SubsetMask G, int N, double tol) {
    const OperatorTuple& S = q.tilde_ops;
    const int n = T.n();
    SubsetBlock blk;
    blk.G = G;
    blk.kind = BlockKind::OneInG;
    blk.q = q;
    if (!class_Bnpq(S, 1, n).ok)
        throw Error(ErrorKind::ClassViolation, "compressed tuple leaves the class for G=" + G.str());
    if (q.coisometry_defect > tol)
        throw Error(ErrorKind::HypothesisViolated, "compressed operators outside G are not co-isometries");
    if (defect_coords(hat1n(S), G).rank == 0) {
        blk.kind = BlockKind::Empty;
        return blk;
    }

    GammaData g = build_gamma(S, G, tol);
    UPrimeData up = build_uprime(S, G, g, tol);
    std::vector<CMatrix> W = build_w_prime(S, G, g, tol);
    LiftData L = lift_uprime(up.uprime, up.q_basis, W, tol);
    CMatrix U = complete_unitary_pair(L, g.dst_dim, tol);
    BCLData b = bcl_pair(U, summand_projection(g));
    const CMatrix& Hb = L.h_basis;
    const int h = static_cast<int>(Hb.cols());
    blk.h_dim = h;

    ResidualLedger& led = blk.residuals;
    led.add("gamma_isometry", "transfer", g.isometry_defect, tol, "G=" + G.str());
    led.add("uprime_isometry", "transfer", up.isometry_defect, tol, "G=" + G.str());
    led.add("lift_welldef", "transfer", L.welldef_residual, tol, "G=" + G.str());
    led.add("lift_intertwining", "transfer", L.intertwine_residual, tol, "G=" + G.str());
    for (int k = 0; k < 3; ++k)
        led.add("bcl_identity", "transfer", b.identity_residual[k], 1e-12, "G=" + G.str() + " k=" + std::to_string(k));
    led.add("bcl_u1_block_unitary", "transfer", b.u1_block_residual, 1e-12, "G=" + G.str());

    TruncatedHardy small(G.size(), N, g.src_rank);
    CMatrix Pt = canonical_dilation(sub_tuple(hat1n(S), G), g.c1n.coords,
                                    CMatrix::Identity(g.src_rank, g.src_rank), small);
    HardyOp E = embed_coeff(small, Hb.adjoint() * g.gamma, tol);
    blk.space = E.space;
    blk.Pi = E.matrix * Pt * q.coords;

    const TruncatedHardy& sp = blk.space;
    blk.V_sym.resize(n);
    blk.V_sym[0] = OpSymbol::mult(Hb.adjoint() * b.phi0 * Hb, Hb.adjoint() * b.phi1 * Hb);
    blk.V_sym[n - 1] = OpSymbol::mult(Hb.adjoint() * b.psi0 * Hb, Hb.adjoint() * b.psi1 * Hb);
    const auto elems = G.elements();
    for (size_t i = 1; i < elems.size(); ++i) blk.V_sym[elems[i] - 1] = OpSymbol::shift(static_cast<int>(i) + 1);
    size_t w = 0;
    for (int j = 2; j <= n - 1; ++j)
        if (!G.contains(j)) blk.V_sym[j - 1] = OpSymbol::kron(Hb.adjoint() * W[w++] * Hb);
    blk.V0_sym = OpSymbol::shift(1);
    for (const auto& sym : blk.V_sym) blk.V.push_back(realize(sym, sp));
    blk.V0 = realize(blk.V0_sym, sp);

    auto rows = trusted_rows(sp, 1);
    for (int j = 1; j <= n; ++j)
        led.add("block_intertwining", "co-extension block", intertwining(blk.Pi, T.op(j), blk.V[j - 1].matrix, rows),
                tol, ctx(G, j));
    blk.gamma = std::move(g);
    blk.bcl = std::move(b);
    return blk;
}

SubsetBlock build_block_one_not_in_g(const OperatorTuple& T, const QCompression& q, SubsetMask G, int N, double tol) {
    const OperatorTuple& S = q.tilde_ops;
    const int n = T.n();
    SubsetBlock blk;
    blk.G = G;
    blk.kind = BlockKind::OneNotInG;
    blk.q = q;
    if (!class_Bnpq(S, 1, n).ok)
        throw Error(ErrorKind::ClassViolation, "compressed tuple leaves the class for G=" + G.str());

    DefectCoords C = defect_coords(hat1n(S), G);
    if (C.rank == 0) {
        blk.kind = BlockKind::Empty;
        return blk;
    }
    const int e = C.rank;
    blk.h_dim = e;
    std::vector<CMatrix> Uj(n);
    for (int j = 1; j <= n; ++j) {
        if (G.contains(j)) continue;
        LeastSquaresResult ls = least_squares_map(C.coords, C.coords * S.op(j).adjoint());
        Uj[j - 1] = ls.map.adjoint();
        double ud = unitarity_defect(Uj[j - 1]);
        blk.residuals.add("douglas_unitary", "co-extension block", ud, 1e-8, ctx(G, j));
        if (ud > 1e-8 || ls.residual > 1e-8)
            throw Error(ErrorKind::HypothesisViolated, "operator " + std::to_string(j) + " is not a co-isometry on ran Q");
    }
    blk.space = TruncatedHardy(G.size(), N, e);
    const TruncatedHardy& sp = blk.space;
    blk.Pi = canonical_dilation(sub_tuple(hat1n(S), G), C.coords, CMatrix::Identity(e, e), sp) * q.coords;
    blk.V_sym.resize(n);
    const auto elems = G.elements();
    for (size_t i = 0; i < elems.size(); ++i) blk.V_sym[elems[i] - 1] = OpSymbol::shift(static_cast<int>(i) + 1);
    for (int j = 1; j <= n; ++j)
        if (!G.contains(j)) blk.V_sym[j - 1] = OpSymbol::kron(Uj[j - 1]);
    blk.V0_sym = OpSymbol::kron(Uj[0] * Uj[n - 1]);
    for (const auto& sym : blk.V_sym) blk.V.push_back(realize(sym, sp));
    blk.V0 = realize(blk.V0_sym, sp);

    auto rows = trusted_rows(sp, 1);
    for (int j = 1; j <= n; ++j)
        blk.residuals.add("block_intertwining", "co-extension block",
                          intertwining(blk.Pi, T.op(j), blk.V[j - 1].matrix, rows), tol, ctx(G, j));
    return blk;
}

PaddedModel pad_model(const CoExtensionModel& m, int degree) {
    if (degree < m.degree) throw Error(ErrorKind::PreconditionViolated, "padding cannot lower the degree");
    PaddedModel p;
    p.degree = degree;
    const size_t nb = m.blocks.size();
    std::vector<SpMatrix> padded_V0(nb);
    std::vector<std::vector<SpMatrix>> padded_V(m.n, std::vector<SpMatrix>(nb));
    std::vector<Triplet> pt;
    for (size_t b = 0; b < nb; ++b) {
        const SubsetBlock& blk = m.blocks[b];
        p.offsets.push_back(p.total_dim);
        if (blk.kind == BlockKind::Empty) {
            p.spaces.emplace_back(0, 0, 0);
            continue;
        }
        TruncatedHardy sp(blk.space.vars(), degree, blk.space.coeff_dim());
        SpMatrix P = pad_degree(blk.space, sp);
        for (int k = 0; k < P.outerSize(); ++k)
            for (SpMatrix::InnerIterator it(P, k); it; ++it)
                pt.emplace_back(p.total_dim + it.row(), m.offsets[b] + it.col(), it.value());
        for (int j = 0; j < m.n; ++j) padded_V[j][b] = realize(blk.V_sym[j], sp).matrix;
        padded_V0[b] = realize(blk.V0_sym, sp).matrix;
        p.spaces.push_back(sp);
        p.total_dim += sp.total_dim();
    }
    p.pad = SpMatrix(p.total_dim, m.total_dim);
    p.pad.setFromTriplets(pt.begin(), pt.end());
    std::vector<const SpMatrix*> parts(nb);
    for (int j = 0; j < m.n; ++j) {
        for (size_t b = 0; b < nb; ++b) parts[b] = m.blocks[b].kind == BlockKind::Empty ? nullptr : &padded_V[j][b];
        p.V.push_back(block_diag(parts, p.offsets, p.total_dim));
    }
    for (size_t b = 0; b < nb; ++b) parts[b] = m.blocks[b].kind == BlockKind::Empty ? nullptr : &padded_V0[b];
    p.V0 = block_diag(parts, p.offsets, p.total_dim);
    p.Pi = p.pad * m.Pi;
    return p;
}

double isometry_tolerance(double rho, int N, int d) {
    return std::max(1e-8, 3.0 * std::pow(rho, 2.0 * (N + 1)) * d);
}

CoExtensionModel assemble_predil(const OperatorTuple& T, int N, const PredilOptions& opts) {
    const int n = T.n(), d = T.dim();
    ClassResult cr = class_Bnpq(T, 1, n);
    if (!cr.ok) throw Error(ErrorKind::ClassViolation, "tuple is not in B_{1,n}");
    CoExtensionModel m;
    m.n = n;
    m.d = d;
    m.degree = N;
    OperatorTuple H = hat1n(T);
    for (int i = 1; i <= H.n(); ++i) m.rho_max = std::max(m.rho_max, safe_radius(H.op(i)));
    m.tol_iso = isometry_tolerance(m.rho_max, N, d);

    const std::uint32_t count = 1u << (n - 1);
    const SubsetMask all = SubsetMask::full(n - 1);
    for (std::uint32_t bits = 0; bits < count; ++bits) {
        SubsetMask G{bits};
        SubsetMask Gbar{all.bits & ~bits};
        QCompression q = q_limit(T, Gbar);
        if (q.slow) m.residuals.add_info("q_limit_slow", "compression", q.conv_residual, "G=" + G.str());
        SubsetBlock blk;
        blk.G = G;
        blk.q = q;
        if (q.rank() > 0)
            blk = G.contains(1) ? build_block_one_in_g(T, q, G, N) : build_block_one_not_in_g(T, q, G, N);
        m.residuals.append(blk.residuals);
        m.offsets.push_back(m.total_dim);
        if (blk.kind != BlockKind::Empty) m.total_dim += blk.space.total_dim();
        m.blocks.push_back(std::move(blk));
    }

    m.Pi = CMatrix::Zero(m.total_dim, d);
    std::vector<const SpMatrix*> parts(m.blocks.size(), nullptr);
    for (size_t b = 0; b < m.blocks.size(); ++b) {
        const SubsetBlock& blk = m.blocks[b];
        if (blk.kind == BlockKind::Empty) continue;
        m.Pi.middleRows(m.offsets[b], blk.Pi.rows()) = blk.Pi;
        for (int r : trusted_rows(blk.space, 1)) m.trusted.push_back(m.offsets[b] + r);
    }
    for (int j = 1; j <= n; ++j) {
        for (size_t b = 0; b < m.blocks.size(); ++b)
            parts[b] = m.blocks[b].kind == BlockKind::Empty ? nullptr : &m.blocks[b].V[j - 1].matrix;
        m.V.push_back(block_diag(parts, m.offsets, m.total_dim));
    }
    for (size_t b = 0; b < m.blocks.size(); ++b)
        parts[b] = m.blocks[b].kind == BlockKind::Empty ? nullptr : &m.blocks[b].V0->matrix;
    m.V0 = block_diag(parts, m.offsets, m.total_dim);

    ResidualLedger& led = m.residuals;
    const CMatrix I = CMatrix::Identity(d, d);
    const double iso = spectral_norm(m.Pi.adjoint() * m.Pi - I);
    led.add("pi_isometry", "co-extension", iso, m.tol_iso, "rho=" + std::to_string(m.rho_max));

    // telescoping: blockwise sum of squared norms against |h|^2
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> nd;
    double tele = 0.0;
    for (int s = 0; s < opts.telescoping_samples; ++s) {
        CVector h(d);
        for (int i = 0; i < d; ++i) h(i) = cplx(nd(rng), nd(rng));
        h.normalize();
        double sum = 0.0;
        for (const auto& blk : m.blocks)
            if (blk.kind != BlockKind::Empty) sum += (blk.Pi * h).squaredNorm();
        tele = std::max(tele, std::abs(sum - 1.0));
    }
    led.add("telescoping", "co-extension", tele, m.tol_iso);

    const std::vector<int>& tr = m.trusted;
    for (int j = 1; j <= n; ++j) {
        led.add("intertwining", "co-extension", intertwining(m.Pi, T.op(j), m.V[j - 1], tr), opts.intertwine_tol,
                "j=" + std::to_string(j));
        std::vector<int> all_rows(m.total_dim);
        for (int r = 0; r < m.total_dim; ++r) all_rows[r] = r;
        led.add_info("intertwining_all_degrees", "co-extension", intertwining(m.Pi, T.op(j), m.V[j - 1], all_rows),
                     "j=" + std::to_string(j));
    }
    led.add("intertwining_v0", "co-extension", intertwining(m.Pi, T.op(1) * T.op(n), m.V0, tr), opts.intertwine_tol);

    const SpMatrix Sel = selector(tr, m.total_dim);
    const SpMatrix SelT = Sel.adjoint();
    auto restricted = [&](const SpMatrix& A) { return SpMatrix(Sel * A * SelT).norm(); };
    const SpMatrix& V1 = m.V[0];
    const SpMatrix& Vn = m.V[n - 1];
    SpMatrix Id(m.total_dim, m.total_dim);
    Id.setIdentity();
    led.add("v1star_v0_is_vn", "co-extension", restricted(SpMatrix(V1.adjoint()) * m.V0 - Vn), opts.identity_tol);
    led.add("vnstar_v0_is_v1", "co-extension", restricted(SpMatrix(Vn.adjoint()) * m.V0 - V1), opts.identity_tol);
    led.add("v0_isometry", "co-extension", restricted(SpMatrix(m.V0.adjoint()) * m.V0 - Id), opts.identity_tol);
    for (int j = 2; j <= n - 1; ++j) {
        const SpMatrix& Vj = m.V[j - 1];
        const SpMatrix Vjs = Vj.adjoint();
        led.add("vj_isometry", "co-extension", restricted(Vjs * Vj - Id), opts.identity_tol, "j=" + std::to_string(j));
        std::vector<std::pair<std::string, const SpMatrix*>> others{{"V0", &m.V0}, {"V1", &V1}};
        for (int k = 2; k <= n - 1; ++k)
            if (k != j) others.push_back({"V" + std::to_string(k), &m.V[k - 1]});
        for (const auto& [name, A] : others) {
            double c = restricted(Vj * *A - *A * Vj);
            double dc = restricted(Vjs * *A - *A * Vjs);
            led.add("doubly_commuting", "co-extension", std::max(c, dc), opts.identity_tol,
                    "V" + std::to_string(j) + "," + name);
        }
    }
    for (int j = 1; j <= n; ++j)
        led.add("compression", "co-extension", spectral_norm(m.Pi.adjoint() * (m.V[j - 1] * m.Pi) - T.op(j)),
                opts.intertwine_tol, "j=" + std::to_string(j));
    led.add("compression_v0", "co-extension", spectral_norm(m.Pi.adjoint() * (m.V0 * m.Pi) - T.op(1) * T.op(n)),
            opts.intertwine_tol);
    led.add_info("v1_vn_commutator", "co-extension", restricted(V1 * Vn - Vn * V1));

    if (iso > m.tol_iso)
        throw Error(ErrorKind::IsometryDefect, "||Pi*Pi - I|| = " + std::to_string(iso) + " exceeds " +
                                                   std::to_string(m.tol_iso) + " (rho = " +
                                                   std::to_string(m.rho_max) + "; raise the degree)");
    return m;
}

nlohmann::json sparse_to_json(const SpMatrix& A) {
    nlohmann::json entries = nlohmann::json::array();
    for (int k = 0; k < A.outerSize(); ++k)
        for (SpMatrix::InnerIterator it(A, k); it; ++it)
            entries.push_back({it.row(), it.col(), it.value().real(), it.value().imag()});
    return {{"rows", A.rows()}, {"cols", A.cols()}, {"entries", entries}};
}

nlohmann::json model_to_json(const CoExtensionModel& m, bool with_ops) {
    nlohmann::json blocks = nlohmann::json::array();
    for (size_t b = 0; b < m.blocks.size(); ++b) {
        const auto& blk = m.blocks[b];
        nlohmann::json j{{"G", blk.G.str()}, {"kind", to_string(blk.kind)}, {"offset", m.offsets[b]},
                         {"q_rank", blk.q.rank()}, {"q_iters", blk.q.iters}};
        if (blk.kind != BlockKind::Empty) {
            j["vars"] = blk.space.vars();
            j["coeff_dim"] = blk.space.coeff_dim();
            j["total_dim"] = blk.space.total_dim();
        }
        blocks.push_back(std::move(j));
    }
    nlohmann::json out{{"n", m.n},           {"dim", m.d},         {"degree", m.degree},
                       {"total_dim", m.total_dim}, {"rho_max", m.rho_max}, {"tol_iso", m.tol_iso},
                       {"blocks", blocks},   {"Pi", matrix_to_json(m.Pi)}, {"residuals", m.residuals.to_json()}};
    if (with_ops) {
        nlohmann::json V = nlohmann::json::array();
        for (const auto& v : m.V) V.push_back(sparse_to_json(v));
        out["V"] = V;
        out["V0"] = sparse_to_json(m.V0);
    }
    return out;
}

}  // namespace dil
