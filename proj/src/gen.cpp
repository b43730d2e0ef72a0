#include "dil/gen.hpp"

#include <cmath>
#include <numbers>

namespace dil {

const char* to_string(Recipe r) {
    switch (r) {
        case Recipe::Diagonal: return "diagonal";
        case Recipe::PolyOfOne: return "poly_of_one";
        case Recipe::ScaledUnitaries: return "scaled_unitaries";
        case Recipe::JordanPair: return "jordan_pair";
        case Recipe::Custom: return "custom";
    }
    return "?";
}

Recipe recipe_from_string(const std::string& s) {
    for (Recipe r : {Recipe::Diagonal, Recipe::PolyOfOne, Recipe::ScaledUnitaries, Recipe::JordanPair, Recipe::Custom})
        if (s == to_string(r)) return r;
    throw Error(ErrorKind::ParseError, "unknown recipe '" + s + "'");
}

namespace {

CMatrix gaussian_matrix(SplitMix64& rng, int rows, int cols) {
    CMatrix A(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) A(i, j) = rng.complex_normal();
    return A;
}

// Gram-Schmidt on a Gaussian matrix; deterministic, unlike a library QR whose sign conventions may change.
CMatrix gaussian_unitary(SplitMix64& rng, int d) {
    CMatrix Q = gaussian_matrix(rng, d, d);
    for (int j = 0; j < d; ++j) {
        for (int pass = 0; pass < 2; ++pass)
            for (int i = 0; i < j; ++i) Q.col(j) -= Q.col(i).dot(Q.col(j)) * Q.col(i);
        Q.col(j).normalize();
    }
    return Q;
}

void check_dims(const GenSpec& spec) {
    if (spec.n < 1 || spec.d < 1) throw Error(ErrorKind::PreconditionViolated, "n and d must be positive");
    if (!(spec.radius_cap >= 0.0 && spec.radius_cap <= 1.0))
        throw Error(ErrorKind::PreconditionViolated, "radius_cap must lie in [0, 1]");
}

OperatorTuple poly_draw(SplitMix64& rng, const GenSpec& spec) {
    CMatrix A = gaussian_matrix(rng, spec.d, spec.d);
    A *= spec.base_scale / std::max(spectral_norm(A), 1e-300);
    std::vector<CMatrix> ops;
    for (int i = 0; i < spec.n; ++i) {
        // Horner: p(A) = c_0 + A (c_1 + A (c_2 + ...))
        std::vector<cplx> c(spec.poly_degree + 1);
        for (auto& x : c) x = rng.complex_normal();
        CMatrix P = c[spec.poly_degree] * CMatrix::Identity(spec.d, spec.d);
        for (int k = spec.poly_degree - 1; k >= 0; --k) P = A * P + c[k] * CMatrix::Identity(spec.d, spec.d);
        const double nrm = spectral_norm(P);
        ops.push_back(nrm > 0 ? CMatrix(P * (spec.radius_cap / nrm)) : P);
    }
    return OperatorTuple(ops);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    SplitMix64 m(seed ^ (0xD1B54A32D192ED03ULL * (index + 1)));
    return m.next();
}

CVector diagonal_defect_oracle(const std::vector<CVector>& diagonals, SubsetMask G) {
    if (diagonals.empty()) return {};
    CVector out = CVector::Ones(diagonals[0].size());
    for (int i : G.elements()) {
        const CVector& lam = diagonals.at(i - 1);
        for (Eigen::Index j = 0; j < out.size(); ++j) out(j) *= 1.0 - std::norm(lam(j));
    }
    return out;
}

Generated gen_diagonal(const GenSpec& spec) {
    check_dims(spec);
    SplitMix64 rng(spec.seed);
    Generated g;
    std::vector<CMatrix> ops;
    bool pure = true;
    for (int i = 0; i < spec.n; ++i) {
        CVector lam(spec.d);
        for (int j = 0; j < spec.d; ++j) {
            if (i == 0 && j < spec.unit_entries)
                lam(j) = std::polar(1.0, 2.0 * std::numbers::pi * rng.uniform());
            else
                lam(j) = rng.in_disc(spec.radius_cap);
            pure = pure && std::abs(lam(j)) < 1.0;
        }
        ops.push_back(lam.asDiagonal());
        g.diagonals.push_back(lam);
    }
    g.T = OperatorTuple(ops);
    g.brehmer_oracle = true;
    g.pure_oracle = pure;
    return g;
}

Generated gen_poly_of_one(const GenSpec& spec) {
    check_dims(spec);
    if (spec.poly_degree < 0) throw Error(ErrorKind::PreconditionViolated, "negative polynomial degree");
    SplitMix64 rng(spec.seed);
    const int budget = spec.require_class || spec.require_pure ? std::max(spec.max_rejections, 1) : 1;
    for (int attempt = 1; attempt <= budget; ++attempt) {
        OperatorTuple T = poly_draw(rng, spec);
        if (spec.require_class && !class_Bnpq(T, 1, spec.n).ok) continue;
        if (spec.require_pure && !is_pure(T)) continue;
        Generated g;
        g.T = std::move(T);
        g.attempts = attempt;
        return g;
    }
    throw Error(ErrorKind::RejectionBudgetExceeded,
                "no acceptable draw in " + std::to_string(budget) + " attempts (seed " + std::to_string(spec.seed) + ")");
}

Generated gen_scaled_unitaries(const GenSpec& spec) {
    check_dims(spec);
    SplitMix64 rng(spec.seed);
    const CMatrix Q = gaussian_unitary(rng, spec.d);
    std::vector<CMatrix> ops;
    for (int i = 0; i < spec.n; ++i) {
        CVector ph(spec.d);
        for (int j = 0; j < spec.d; ++j) ph(j) = std::polar(spec.radius_cap, 2.0 * std::numbers::pi * rng.uniform());
        ops.push_back(Q * ph.asDiagonal() * Q.adjoint());
    }
    Generated g;
    g.T = OperatorTuple(ops);
    // r U_i are normal and commuting, so they are jointly diagonal: Brehmer by the product formula
    g.brehmer_oracle = true;
    g.pure_oracle = spec.radius_cap < 1.0;
    return g;
}

Generated gen_jordan_pair(const GenSpec& spec) {
    check_dims(spec);
    if (spec.d < 2) throw Error(ErrorKind::PreconditionViolated, "the Jordan block needs d >= 2");
    CMatrix J = CMatrix::Zero(spec.d, spec.d);
    J(0, 1) = spec.radius_cap;
    Generated g;
    g.T = OperatorTuple(std::vector<CMatrix>(spec.n, J));
    g.pure_oracle = true;
    // I - 2 s^2 J^*J fails once 2 s^2 > 1
    if (spec.n >= 2) g.brehmer_oracle = 2.0 * spec.radius_cap * spec.radius_cap <= 1.0;
    return g;
}

Generated generate(const GenSpec& spec) {
    switch (spec.recipe) {
        case Recipe::Diagonal: return gen_diagonal(spec);
        case Recipe::PolyOfOne: return gen_poly_of_one(spec);
        case Recipe::ScaledUnitaries: return gen_scaled_unitaries(spec);
        case Recipe::JordanPair: return gen_jordan_pair(spec);
        case Recipe::Custom: {
            Generated g;
            g.T = OperatorTuple(spec.custom);
            return g;
        }
    }
    throw Error(ErrorKind::PreconditionViolated, "unknown recipe");
}

std::vector<Generated> gen_corpus(GenSpec spec, int count) {
    std::vector<Generated> out;
    const std::uint64_t root = spec.seed;
    for (int i = 0; i < count; ++i) {
        spec.seed = derive_seed(root, static_cast<std::uint64_t>(i));
        out.push_back(generate(spec));
    }
    return out;
}

SeparatingSearch gen_separating_search(const GenSpec& spec, int budget) {
    SeparatingSearch out;
    GenSpec s = spec;
    s.require_class = false;
    s.require_pure = false;
    for (int i = 0; i < budget; ++i) {
        s.seed = derive_seed(spec.seed, static_cast<std::uint64_t>(i));
        ++out.attempts;
        Generated g = generate(s);
        if (!class_Bnpq(g.T, 1, s.n).ok) continue;
        ++out.class_hits;
        BrehmerResult br = is_brehmer(g.T);
        if (!br.ok) {
            out.found = SeparatingWitness{g.T, br.witness, br.eigenvalue, s.seed, i};
            break;
        }
    }
    return out;
}

}  // namespace dil
